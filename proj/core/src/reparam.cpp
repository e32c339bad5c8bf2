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

#include "facekit/reparam.hpp"

#include <cmath>
#include <string>

namespace facekit {

namespace {

template <typename T>
std::size_t bn_trainable(const BatchNormParams<T>& bn) {
  return bn.gamma.size() + bn.beta.size();
}

}  // namespace

template <typename T>
std::size_t RepBranchSet<T>::param_count() const noexcept {
  std::size_t n = branch3x3.conv.param_count() + bn_trainable(branch3x3.bn);
  if (branch1x1) n += branch1x1->conv.param_count() + bn_trainable(branch1x1->bn);
  if (branch_id) n += bn_trainable(*branch_id);
  return n;
}

template <typename T>
void RepBranchSet<T>::validate() const {
  const auto& c3 = branch3x3.conv;
  c3.validate();
  branch3x3.bn.validate();
  if (c3.kernel() != 3) throw ShapeError("kernel", "rep 3x3 branch must have kernel 3");
  if (c3.padding != 1) throw ShapeError("padding", "rep 3x3 branch must have padding 1");
  if (branch3x3.bn.channels() != c3.out_channels())
    throw ShapeError("channels", "rep 3x3 branch batch norm does not match out channels");
  if (branch1x1) {
    const auto& c1 = branch1x1->conv;
    c1.validate();
    branch1x1->bn.validate();
    if (c1.kernel() != 1) throw ShapeError("kernel", "rep 1x1 branch must have kernel 1");
    if (c1.padding != 0) throw ShapeError("padding", "rep 1x1 branch must have padding 0");
    if (c1.in_channels() != c3.in_channels())
      throw ShapeError("in_channels", "rep branches disagree on input channels");
    if (c1.out_channels() != c3.out_channels())
      throw ShapeError("out_channels", "rep branches disagree on output channels");
    if (c1.stride != c3.stride) throw ShapeError("stride", "rep branches disagree on stride");
    if (c1.groups != c3.groups) throw ShapeError("groups", "rep branches disagree on groups");
    if (branch1x1->bn.channels() != c1.out_channels())
      throw ShapeError("channels", "rep 1x1 branch batch norm does not match out channels");
  }
  if (branch_id) {
    branch_id->validate();
    if (c3.in_channels() != c3.out_channels())
      throw ShapeError("channels", "identity branch requires in_ch == out_ch");
    if (c3.stride != 1) throw ShapeError("stride", "identity branch requires stride 1");
    if (branch_id->channels() != c3.out_channels())
      throw ShapeError("channels", "identity branch batch norm does not match channels");
  }
}

template <typename T>
ConvParams<T> fold_bn(const ConvParams<T>& conv, const BatchNormParams<T>& bn) {
  conv.validate();
  bn.validate();
  if (bn.channels() != conv.out_channels()) {
    throw ShapeError("channels", "fold_bn: conv has " + std::to_string(conv.out_channels()) +
                                     " output channels, batch norm has " +
                                     std::to_string(bn.channels()));
  }
  ConvParams<T> out = conv;
  out.bias.assign(conv.out_channels(), T(0));
  const std::size_t per_out = conv.weight.size() / conv.out_channels();
  auto w = out.weight.data();
  for (int oc = 0; oc < conv.out_channels(); ++oc) {
    const T std_dev = std::sqrt(bn.running_var[oc] + bn.epsilon);
    const T scale = bn.gamma[oc] / std_dev;
    for (std::size_t i = 0; i < per_out; ++i) w[oc * per_out + i] *= scale;
    const T prior = conv.has_bias() ? conv.bias[oc] : T(0);
    out.bias[oc] = bn.beta[oc] + bn.gamma[oc] * (prior - bn.running_mean[oc]) / std_dev;
  }
  return out;
}

template <typename T>
ConvParams<T> pad_1x1_to_3x3(const ConvParams<T>& conv) {
  conv.validate();
  if (conv.kernel() != 1)
    throw ShapeError("kernel", "pad_1x1_to_3x3 expects kernel 1, got " +
                                   std::to_string(conv.kernel()));
  ConvParams<T> out;
  out.weight = BasicTensor4<T>({conv.out_channels(), conv.weight.channels(), 3, 3});
  for (int o = 0; o < conv.out_channels(); ++o)
    for (int i = 0; i < conv.weight.channels(); ++i)
      out.weight.at(o, i, 1, 1) = conv.weight.at(o, i, 0, 0);
  out.bias = conv.bias;
  out.stride = conv.stride;
  out.padding = conv.padding + 1;
  out.groups = conv.groups;
  return out;
}

template <typename T>
ConvParams<T> identity_as_3x3(int channels, int groups) {
  if (channels < 1) throw ShapeError("channels", "identity kernel needs >= 1 channel");
  if (groups < 1 || channels % groups != 0)
    throw ShapeError("groups", "identity kernel: channels " + std::to_string(channels) +
                                   " not divisible by groups " + std::to_string(groups));
  const int per_group = channels / groups;
  ConvParams<T> out;
  out.weight = BasicTensor4<T>({channels, per_group, 3, 3});
  for (int c = 0; c < channels; ++c) out.weight.at(c, c % per_group, 1, 1) = T(1);
  out.stride = 1;
  out.padding = 1;
  out.groups = groups;
  return out;
}

template <typename T>
BasicTensor4<T> multi_branch_forward(const BasicTensor4<T>& input, const RepBranchSet<T>& set) {
  set.validate();
  BasicTensor4<T> sum = batchnorm_infer(conv2d(input, set.branch3x3.conv), set.branch3x3.bn);
  if (set.branch1x1)
    sum = add(sum, batchnorm_infer(conv2d(input, set.branch1x1->conv), set.branch1x1->bn));
  if (set.branch_id) sum = add(sum, batchnorm_infer(input, *set.branch_id));
  return sum;
}

template <typename T>
FusedConv<T> fuse_repconv(const RepBranchSet<T>& set) {
  set.validate();
  ConvParams<T> fused = fold_bn(set.branch3x3.conv, set.branch3x3.bn);
  auto accumulate = [&fused](const ConvParams<T>& part) {
    auto dst = fused.weight.data();
    auto src = part.weight.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    for (std::size_t i = 0; i < fused.bias.size(); ++i) fused.bias[i] += part.bias[i];
  };
  if (set.branch1x1)
    accumulate(pad_1x1_to_3x3(fold_bn(set.branch1x1->conv, set.branch1x1->bn)));
  if (set.branch_id)
    accumulate(fold_bn(identity_as_3x3<T>(set.out_channels(), set.groups()), *set.branch_id));
  return FusedConv<T>{std::move(fused)};
}

template <typename T>
RepBranchSet<T> as_branch_set(const FusedConv<T>& fused) {
  RepBranchSet<T> set;
  set.branch3x3.conv = fused.conv;
  set.branch3x3.bn = BatchNormParams<T>::identity(fused.conv.out_channels(), T(0));
  return set;
}

#define FACEKIT_INSTANTIATE_REPARAM(T)                                                      \
  template struct RepBranchSet<T>;                                                          \
  template ConvParams<T> fold_bn(const ConvParams<T>&, const BatchNormParams<T>&);          \
  template ConvParams<T> pad_1x1_to_3x3(const ConvParams<T>&);                              \
  template ConvParams<T> identity_as_3x3<T>(int, int);                                      \
  template BasicTensor4<T> multi_branch_forward(const BasicTensor4<T>&,                     \
                                                const RepBranchSet<T>&);                    \
  template FusedConv<T> fuse_repconv(const RepBranchSet<T>&);                               \
  template RepBranchSet<T> as_branch_set(const FusedConv<T>&);

FACEKIT_INSTANTIATE_REPARAM(float)
FACEKIT_INSTANTIATE_REPARAM(double)

#undef FACEKIT_INSTANTIATE_REPARAM

}  // namespace facekit
