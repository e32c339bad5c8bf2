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

// Dense NCHW tensors and the inference primitives the network graph is built
// from. Every operation is a pure function of its arguments.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facekit/error.hpp"

namespace facekit {

struct Shape4 {
  int batch = 1;
  int channels = 1;
  int height = 1;
  int width = 1;

  std::size_t numel() const noexcept {
    return static_cast<std::size_t>(batch) * channels * height * width;
  }
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

std::string to_string(const Shape4& shape);

/// Row-major batch -> channel -> row -> column array. All dimensions >= 1.
template <typename T>
class BasicTensor4 {
 public:
  using value_type = T;

  BasicTensor4() : BasicTensor4(Shape4{}) {}
  explicit BasicTensor4(Shape4 shape, T fill = T{});
  BasicTensor4(Shape4 shape, std::vector<T> data);

  const Shape4& shape() const noexcept { return shape_; }
  int batch() const noexcept { return shape_.batch; }
  int channels() const noexcept { return shape_.channels; }
  int height() const noexcept { return shape_.height; }
  int width() const noexcept { return shape_.width; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& vector() const noexcept { return data_; }

  std::size_t offset(int n, int c, int h, int w) const noexcept {
    return ((static_cast<std::size_t>(n) * shape_.channels + c) * shape_.height + h) *
               shape_.width + w;
  }
  T& at(int n, int c, int h, int w) noexcept { return data_[offset(n, c, h, w)]; }
  T at(int n, int c, int h, int w) const noexcept { return data_[offset(n, c, h, w)]; }

  /// One (height x width) channel plane.
  std::span<T> plane(int n, int c) noexcept {
    return std::span<T>(data_).subspan(offset(n, c, 0, 0),
                                       static_cast<std::size_t>(shape_.height) * shape_.width);
  }
  std::span<const T> plane(int n, int c) const noexcept {
    return std::span<const T>(data_).subspan(
        offset(n, c, 0, 0), static_cast<std::size_t>(shape_.height) * shape_.width);
  }

  friend bool operator==(const BasicTensor4&, const BasicTensor4&) = default;

 private:
  Shape4 shape_;
  std::vector<T> data_;
};

using Tensor4 = BasicTensor4<float>;
using Tensor4d = BasicTensor4<double>;

/// Convolution weights shaped (out_ch, in_ch / groups, k, k). An empty bias
/// means "no bias".
template <typename T>
struct ConvParams {
  BasicTensor4<T> weight;
  std::vector<T> bias;
  int stride = 1;
  int padding = 0;
  int groups = 1;

  int out_channels() const noexcept { return weight.batch(); }
  int in_channels() const noexcept { return weight.channels() * groups; }
  int kernel() const noexcept { return weight.height(); }
  bool has_bias() const noexcept { return !bias.empty(); }
  std::size_t param_count() const noexcept { return weight.size() + bias.size(); }

  /// Throws ShapeError when the parameter set is internally inconsistent.
  void validate() const;
};

/// Inference-mode batch-norm statistics. var + epsilon must be positive.
template <typename T>
struct BatchNormParams {
  std::vector<T> gamma;
  std::vector<T> beta;
  std::vector<T> running_mean;
  std::vector<T> running_var;
  T epsilon = T(1e-3);

  int channels() const noexcept { return static_cast<int>(gamma.size()); }
  void validate() const;

  /// gamma = 1, beta = 0, mean = 0, var = 1.
  static BatchNormParams identity(int channels, T epsilon = T(0));
};

using ConvParamsF = ConvParams<float>;
using BatchNormParamsF = BatchNormParams<float>;

/// Output spatial size of a strided window: floor((in + 2 pad - k) / stride) + 1.
int conv_output_size(int in, int kernel, int stride, int padding);

/// Direct convolution. Dispatches to a cache-blocked kernel that performs the
/// same per-element accumulation sequence as conv2d_reference.
template <typename T>
BasicTensor4<T> conv2d(const BasicTensor4<T>& input, const ConvParams<T>& params);

/// Naive nested-loop convolution, the correctness anchor for every fast path.
template <typename T>
BasicTensor4<T> conv2d_reference(const BasicTensor4<T>& input, const ConvParams<T>& params);

template <typename T>
BasicTensor4<T> batchnorm_infer(const BasicTensor4<T>& input, const BatchNormParams<T>& params);

template <typename T>
BasicTensor4<T> silu(const BasicTensor4<T>& input);

/// Max pooling; padded positions never win.
template <typename T>
BasicTensor4<T> maxpool2d(const BasicTensor4<T>& input, int kernel, int stride, int padding);

template <typename T>
BasicTensor4<T> upsample_nearest2x(const BasicTensor4<T>& input);

template <typename T>
BasicTensor4<T> concat_channels(const BasicTensor4<T>& a, const BasicTensor4<T>& b);

template <typename T>
BasicTensor4<T> concat_channels(std::span<const BasicTensor4<T>> parts);

template <typename T>
BasicTensor4<T> add(const BasicTensor4<T>& a, const BasicTensor4<T>& b);

template <typename T>
std::vector<BasicTensor4<T>> split_channels(const BasicTensor4<T>& input,
                                            std::span<const int> sizes);

/// Largest absolute elementwise difference; shapes must match.
template <typename T>
T max_abs_diff(const BasicTensor4<T>& a, const BasicTensor4<T>& b);

template <typename To, typename From>
BasicTensor4<To> tensor_cast(const BasicTensor4<From>& input) {
  std::vector<To> out(input.data().begin(), input.data().end());
  return BasicTensor4<To>(input.shape(), std::move(out));
}

}  // namespace facekit
