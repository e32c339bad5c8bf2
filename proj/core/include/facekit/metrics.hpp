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

// Landmark, detection and head-pose scoring.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facekit/dataio.hpp"
#include "facekit/geometry.hpp"

namespace facekit {

enum class NmeNormalizer {
  OuterEyeCorners,  // distance between landmarks 36 and 45
  BoxSize,          // sqrt(w * h) of the ground-truth box
};

/// Mean point-to-point error over all landmarks divided by the normalizer,
/// in percent.
double nme(std::span<const Point2> pred, std::span<const Point2> gt,
           NmeNormalizer normalizer = NmeNormalizer::OuterEyeCorners,
           const Box* gt_box = nullptr);

struct NmeRecord {
  double nme = 0.0;
  double abs_yaw = 0.0;  // degrees, [0, 90]
};

inline constexpr std::array<double, 4> kYawBinEdges{0.0, 30.0, 60.0, 90.0};

struct YawBinReport {
  std::array<std::optional<double>, 3> bin_mean;  // absent when a bin is empty
  std::array<int, 3> bin_count{};
  std::optional<double> mean_of_bins;  // over populated bins
  std::optional<double> pooled_mean;   // over all records
};

/// Bins [0,30), [30,60), [60,90].
YawBinReport nme_binned(std::span<const NmeRecord> records);

struct ScoredBox {
  int image = 0;
  Box box;
  double conf = 0.0;
};

struct GtBox {
  int image = 0;
  Box box;
};

struct ApResult {
  double ap50 = 0.0;
  double map = 0.0;                 // mean over 0.50:0.05:0.95
  std::array<double, 10> per_iou{};  // AP at each threshold of the ladder
};

/// AP at one IoU threshold: greedy confidence-descending matching per image,
/// 101-point interpolated precision.
double average_precision_at(std::span<const ScoredBox> preds, std::span<const GtBox> gts,
                            double iou_threshold);

ApResult average_precision(std::span<const ScoredBox> preds, std::span<const GtBox> gts);

struct AmeResult {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  double mean = 0.0;
  int count = 0;
};

AmeResult ame(std::span<const Angles> pred, std::span<const Angles> gt);

struct EvalOptions {
  NmeNormalizer normalizer = NmeNormalizer::OuterEyeCorners;
  bool exclude_outliers = false;
  double outlier_nme = 20.0;  // percent
  double match_iou = 0.5;
};

struct ImageEval {
  std::string image_id;
  int gt_faces = 0;
  int pred_faces = 0;
  int matched = 0;
  std::optional<double> nme;  // mean over this image's matched pairs
};

struct EvalReport {
  std::optional<double> nme_mean;
  YawBinReport nme_bins;
  double ap50 = 0.0;
  double map_coco = 0.0;
  std::optional<AmeResult> ame;
  int images = 0;
  int gt_faces = 0;
  int pred_faces = 0;
  int matched = 0;
  int excluded = 0;  // matched pairs dropped by the outlier rule
  std::vector<ImageEval> per_image;
  std::vector<std::string> unmatched_prediction_ids;  // predicted images absent from the ground truth
  std::vector<std::string> missing_prediction_ids;    // ground-truth images without predictions
};

EvalReport evaluate(const std::vector<AnnotationRecord>& dataset,
                    const std::vector<PredictionRecord>& predictions,
                    const EvalOptions& opts = {});

std::string format_report_text(const EvalReport& report);
/// One "key=value" pair per line.
std::string format_report_kv(const EvalReport& report);

}  // namespace facekit
