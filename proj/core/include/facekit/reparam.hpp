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

// Structural reparameterization: batch-norm folding and collapse of a
// multi-branch RepConv block into one 3x3 convolution with bias.

#include <optional>

#include "facekit/tensor.hpp"

namespace facekit {

template <typename T>
struct RepBranch {
  ConvParams<T> conv;  // bias, if present, is applied before the batch norm
  BatchNormParams<T> bn;
};

/// Trainable form of a RepConv block: 3x3 branch (padding 1), optional 1x1
/// branch (padding 0), optional identity branch (batch norm only). The block
/// output is silu(sum of branches).
template <typename T>
struct RepBranchSet {
  RepBranch<T> branch3x3;
  std::optional<RepBranch<T>> branch1x1;
  std::optional<BatchNormParams<T>> branch_id;

  int in_channels() const noexcept { return branch3x3.conv.in_channels(); }
  int out_channels() const noexcept { return branch3x3.conv.out_channels(); }
  int stride() const noexcept { return branch3x3.conv.stride; }
  int groups() const noexcept { return branch3x3.conv.groups; }
  int branch_count() const noexcept {
    return 1 + (branch1x1 ? 1 : 0) + (branch_id ? 1 : 0);
  }

  /// Trainable parameters: conv weights and biases plus batch-norm gamma/beta.
  std::size_t param_count() const noexcept;

  /// Throws ShapeError if the branches disagree or the identity branch is illegal.
  void validate() const;
};

/// Deploy form of a RepConv block: one 3x3 convolution with explicit bias.
template <typename T>
struct FusedConv {
  ConvParams<T> conv;
  std::size_t param_count() const noexcept { return conv.param_count(); }
};

template <typename T>
ConvParams<T> fold_bn(const ConvParams<T>& conv, const BatchNormParams<T>& bn);

/// Embeds a 1x1 kernel at the center of a 3x3 kernel; padding grows by one.
template <typename T>
ConvParams<T> pad_1x1_to_3x3(const ConvParams<T>& conv);

/// 3x3 kernel (stride 1, padding 1) whose convolution reproduces its input.
template <typename T>
ConvParams<T> identity_as_3x3(int channels, int groups);

/// Pre-activation sum of the branch outputs.
template <typename T>
BasicTensor4<T> multi_branch_forward(const BasicTensor4<T>& input, const RepBranchSet<T>& set);

template <typename T>
FusedConv<T> fuse_repconv(const RepBranchSet<T>& set);

/// Wraps a fused convolution as a one-branch set with a pass-through batch
/// norm (epsilon 0), so fuse_repconv(as_branch_set(f)) reproduces f exactly.
template <typename T>
RepBranchSet<T> as_branch_set(const FusedConv<T>& fused);

}  // namespace facekit
