// Copyright 2026 The FaceKit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace facekit::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kIo = 3,
};

struct RunConfig {
  std::string subcommand;
  std::string weights;
  std::string config = "tiny";
  double conf = 0.002;
  double iou = 0.7;
  int imgsz = 640;
  std::uint64_t seed = 0;
  std::string report = "text";

  std::string input;
  std::string output;
  std::string gt;
  std::string pred;
  std::string model3d;

  // fuse-check
  int samples = 3;
  double tolerance = 1e-4;
  bool perturb = false;

  // infer
  std::string mode = "auto";  // auto, image, landmarks

  // eval
  bool exclude_outliers = false;
  std::string normalizer = "eyes";  // eyes, bbox

  // synth
  int count = 100;
  double sigma = 0.0;
  double yaw_max = 85.0;
  double pitch_max = 60.0;
  double roll_max = 44.0;

  // bench
  int iterations = 20;
  int warmup = 2;
  bool deploy = false;
};

/// Parses argv and runs the selected subcommand. Reports go to `out`,
/// diagnostics and the resolved configuration to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int cmd_fuse_check(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_init(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_infer(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_pose(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace facekit::cli
