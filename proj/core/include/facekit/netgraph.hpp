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

// Multi-task face network: configurable stem, RepC2f backbone, SPPF pooling,
// PAN neck and a three-branch head (box distribution, face logit, keypoints)
// at strides 8/16/32.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "facekit/reparam.hpp"
#include "facekit/tensor.hpp"

namespace facekit {

enum class StemKind { NaiveV8, RepV7, RepV8 };
enum class BottleneckKind { V5Bot, V8Bot, RepV8Bot, RepDWV8Bot };

std::string_view to_string(StemKind kind);
std::string_view to_string(BottleneckKind kind);
StemKind parse_stem_kind(std::string_view text);
BottleneckKind parse_bottleneck_kind(std::string_view text);

struct ModelConfig {
  StemKind stem = StemKind::RepV8;
  BottleneckKind bottleneck = BottleneckKind::RepDWV8Bot;
  double depth_multiple = 0.33;
  double width_multiple = 0.25;
  int max_channels = 1024;
  int reg_max = 16;
  int num_keypoints = 68;
  std::vector<int> strides{8, 16, 32};
  int in_channels = 3;
  float bn_epsilon = 1e-3f;

  /// Throws DomainError / ShapeError on an unusable configuration.
  void validate() const;

  int keypoint_channels() const noexcept { return 3 * num_keypoints; }
  int box_channels() const noexcept { return 4 * reg_max; }

  /// Nano-scaled network (depth 0.33, width 0.25).
  static ModelConfig tiny();
  /// Small-scaled network (depth 0.33, width 0.50).
  static ModelConfig small();

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Conv -> optional batch norm -> optional SiLU.
struct ConvBnAct {
  ConvParamsF conv;
  std::optional<BatchNormParamsF> bn;
  bool act = true;
};

/// RepConv block, either in trainable multi-branch form or fused.
struct RepConvBlock {
  std::variant<RepBranchSet<float>, FusedConv<float>> form;
  bool fused() const noexcept { return form.index() == 1; }
};

using ConvLayer = std::variant<ConvBnAct, RepConvBlock>;

struct Bottleneck {
  ConvLayer first;
  ConvLayer second;
  bool shortcut = true;
};

/// Cross-stage-partial block: 1x1 expand, split in halves, cascade the
/// bottlenecks on the second half, concatenate every intermediate, 1x1 fuse.
struct C2fBlock {
  ConvLayer expand;
  std::vector<Bottleneck> bottlenecks;
  ConvLayer fuse;
  int hidden = 0;
};

struct SppfBlock {
  ConvLayer reduce;
  ConvLayer fuse;
  int pool_kernel = 5;
};

/// Two stride-2 stages. RepV7 replaces the second stage with
/// maxpool(2,2) || (1x1 reduce -> 3x3 stride-2) concatenated.
struct Stem {
  StemKind kind = StemKind::NaiveV8;
  ConvLayer down1;
  ConvLayer down2;
  std::optional<ConvLayer> reduce;
};

struct BackboneStage {
  std::optional<ConvLayer> down;
  C2fBlock block;
};

struct Neck {
  C2fBlock top_p4;
  C2fBlock top_p3;
  ConvLayer down_p3;
  C2fBlock bottom_p4;
  ConvLayer down_p4;
  C2fBlock bottom_p5;
};

/// Three consecutive convolutions; the last is a plain 1x1 conv with bias.
struct HeadBranch {
  ConvLayer first;
  ConvLayer second;
  ConvParamsF out;
};

struct HeadLevel {
  int stride = 0;
  HeadBranch box;
  HeadBranch cls;
  HeadBranch kpt;
};

struct Model {
  ModelConfig config;
  Stem stem;
  std::vector<BackboneStage> stages;
  SppfBlock sppf;
  Neck neck;
  std::vector<HeadLevel> head;
};

/// Raw head activations for one stride.
struct HeadScale {
  int stride = 0;
  Tensor4 box_logits;  // (N, 4 * reg_max, g, g); channel = side * reg_max + bin, sides l,t,r,b
  Tensor4 face_logit;  // (N, 1, g, g)
  Tensor4 kpt_raw;     // (N, 3 * K, g, g); channel 3k + {x, y, conf}
};

struct HeadOutputs {
  int image_side = 0;
  int reg_max = 16;
  int num_keypoints = 68;
  std::vector<HeadScale> scales;
};

/// Builds the train-form model with deterministic He-uniform weights.
Model build_model(const ModelConfig& config, std::uint64_t seed);

/// Square input whose side is divisible by the largest stride.
HeadOutputs forward(const Model& model, const Tensor4& image);

/// Replaces every batch-norm's gamma, beta and running statistics with seeded
/// random values (gamma in [0.8, 1.2], var in [0.8, 1.25], beta and mean in
/// [-0.1, 0.1]), as a stand-in for trained statistics. The statistics are not
/// matched to real activations, so summed RepConv branches can grow the head
/// outputs well beyond O(1) for some seeds.
void randomize_batchnorm(Model& model, std::uint64_t seed);

/// Fuses every RepConv block. Idempotent; plain CBS layers are untouched.
Model deploy(const Model& model);

/// Number of RepConv blocks, and how many of them are still multi-branch.
int rep_block_count(const Model& model);
int unfused_rep_block_count(const Model& model);

/// Trainable parameters: conv weights, conv biases, batch-norm gamma and beta.
std::uint64_t count_params(const Model& model);

/// 2 x multiply-accumulates of every convolution for a square input.
std::uint64_t count_flops(const Model& model, int input_side);

/// Per-layer tensor with a stable hierarchical name, used for weight files.
struct NamedTensor {
  std::string name;
  std::vector<int> dims;
  std::vector<float> values;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// Every stored tensor, including batch-norm running statistics, in a fixed order.
std::vector<NamedTensor> named_tensors(const Model& model);

/// Overwrites the model's tensors. Names must match exactly; missing or
/// unexpected names and shape mismatches throw ShapeError naming the tensors.
void assign_tensors(Model& model, std::span<const NamedTensor> tensors);

}  // namespace facekit
