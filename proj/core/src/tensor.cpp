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

#include "facekit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstring>
#include <numeric>

#include "facekit/detail/parallel.hpp"

namespace facekit {

std::string to_string(const Shape4& s) {
  return "(" + std::to_string(s.batch) + "," + std::to_string(s.channels) + "," +
         std::to_string(s.height) + "," + std::to_string(s.width) + ")";
}

namespace {

void check_shape(const Shape4& s) {
  if (s.batch < 1) throw ShapeError("batch", "tensor batch must be >= 1");
  if (s.channels < 1) throw ShapeError("channels", "tensor channels must be >= 1");
  if (s.height < 1) throw ShapeError("height", "tensor height must be >= 1");
  if (s.width < 1) throw ShapeError("width", "tensor width must be >= 1");
}

template <typename T>
void check_same_nhw(const BasicTensor4<T>& a, const BasicTensor4<T>& b, const char* op) {
  if (a.batch() != b.batch())
    throw ShapeError("batch", std::string(op) + ": batch mismatch " + to_string(a.shape()) +
                                  " vs " + to_string(b.shape()));
  if (a.height() != b.height())
    throw ShapeError("height", std::string(op) + ": height mismatch " + to_string(a.shape()) +
                                   " vs " + to_string(b.shape()));
  if (a.width() != b.width())
    throw ShapeError("width", std::string(op) + ": width mismatch " + to_string(a.shape()) +
                                  " vs " + to_string(b.shape()));
}

struct ConvGeometry {
  int out_h;
  int out_w;
  int in_per_group;
  int out_per_group;
};

template <typename T>
ConvGeometry check_conv(const BasicTensor4<T>& input, const ConvParams<T>& p) {
  p.validate();
  if (input.channels() != p.in_channels()) {
    throw ShapeError("channels", "conv2d: input has " + std::to_string(input.channels()) +
                                     " channels, weights expect " +
                                     std::to_string(p.in_channels()));
  }
  const int k = p.kernel();
  const int oh = conv_output_size(input.height(), k, p.stride, p.padding);
  const int ow = conv_output_size(input.width(), k, p.stride, p.padding);
  if (oh < 1)
    throw ShapeError("height", "conv2d: kernel " + std::to_string(k) +
                                   " does not fit padded input height " +
                                   std::to_string(input.height() + 2 * p.padding));
  if (ow < 1)
    throw ShapeError("width", "conv2d: kernel " + std::to_string(k) +
                                  " does not fit padded input width " +
                                  std::to_string(input.width() + 2 * p.padding));
  return {oh, ow, p.weight.channels(), p.out_channels() / p.groups};
}

}  // namespace

int conv_output_size(int in, int kernel, int stride, int padding) {
  const int span = in + 2 * padding - kernel;
  if (span < 0 || stride < 1) return 0;
  return span / stride + 1;
}

template <typename T>
BasicTensor4<T>::BasicTensor4(Shape4 shape, T fill) : shape_(shape) {
  check_shape(shape_);
  data_.assign(shape_.numel(), fill);
}

template <typename T>
BasicTensor4<T>::BasicTensor4(Shape4 shape, std::vector<T> data)
    : shape_(shape), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_.numel()) {
    throw ShapeError("data", "tensor data length " + std::to_string(data_.size()) +
                                 " does not match shape " + to_string(shape_));
  }
}

template <typename T>
void ConvParams<T>::validate() const {
  if (stride < 1) throw ShapeError("stride", "conv stride must be >= 1");
  if (padding < 0) throw ShapeError("padding", "conv padding must be >= 0");
  if (groups < 1) throw ShapeError("groups", "conv groups must be >= 1");
  if (weight.height() != weight.width())
    throw ShapeError("kernel", "conv kernel must be square, got " + to_string(weight.shape()));
  if (out_channels() % groups != 0)
    throw ShapeError("out_channels", "out channels " + std::to_string(out_channels()) +
                                         " not divisible by groups " + std::to_string(groups));
  if (!bias.empty() && static_cast<int>(bias.size()) != out_channels())
    throw ShapeError("bias", "bias length " + std::to_string(bias.size()) +
                                 " does not match out channels " +
                                 std::to_string(out_channels()));
}

template <typename T>
void BatchNormParams<T>::validate() const {
  const std::size_t c = gamma.size();
  if (c == 0) throw ShapeError("channels", "batch norm has no channels");
  if (beta.size() != c || running_mean.size() != c || running_var.size() != c)
    throw ShapeError("channels", "batch norm parameter arrays differ in length");
  if (!(epsilon >= T(0))) throw DomainError("batch norm epsilon must be >= 0");
  for (std::size_t i = 0; i < c; ++i) {
    if (!(running_var[i] >= T(0)))
      throw DomainError("batch norm running_var[" + std::to_string(i) + "] is negative");
    if (!(running_var[i] + epsilon > T(0)))
      throw DomainError("batch norm var + epsilon must be positive at channel " +
                        std::to_string(i));
  }
}

template <typename T>
BatchNormParams<T> BatchNormParams<T>::identity(int channels, T epsilon) {
  BatchNormParams<T> bn;
  bn.gamma.assign(channels, T(1));
  bn.beta.assign(channels, T(0));
  bn.running_mean.assign(channels, T(0));
  bn.running_var.assign(channels, T(1));
  bn.epsilon = epsilon;
  return bn;
}

template <typename T>
BasicTensor4<T> conv2d_reference(const BasicTensor4<T>& input, const ConvParams<T>& p) {
  const ConvGeometry g = check_conv(input, p);
  const int k = p.kernel();
  BasicTensor4<T> out({input.batch(), p.out_channels(), g.out_h, g.out_w});
  for (int n = 0; n < input.batch(); ++n) {
    for (int oc = 0; oc < p.out_channels(); ++oc) {
      const int group = oc / g.out_per_group;
      for (int oh = 0; oh < g.out_h; ++oh) {
        for (int ow = 0; ow < g.out_w; ++ow) {
          T acc = T(0);
          for (int icg = 0; icg < g.in_per_group; ++icg) {
            const int ic = group * g.in_per_group + icg;
            for (int kh = 0; kh < k; ++kh) {
              const int ih = oh * p.stride - p.padding + kh;
              if (ih < 0 || ih >= input.height()) continue;
              for (int kw = 0; kw < k; ++kw) {
                const int iw = ow * p.stride - p.padding + kw;
                if (iw < 0 || iw >= input.width()) continue;
                acc += p.weight.at(oc, icg, kh, kw) * input.at(n, ic, ih, iw);
              }
            }
          }
          out.at(n, oc, oh, ow) = p.has_bias() ? acc + p.bias[oc] : acc;
        }
      }
    }
  }
  return out;
}

namespace {

constexpr int kColBlock = 16;

// Accumulates kOc output channels x kColBlock output columns in registers.
// Terms are added in (ic, kh, kw) order like the reference; padded taps
// contribute w * 0, which leaves every partial sum unchanged.
template <typename T, int kOc, int kStride>
void conv_rows(const T* __restrict padded, int pad_h, int pad_w, const ConvParams<T>& p,
               int oc0, int in_per_group, int out_h, int out_w, BasicTensor4<T>& out, int n) {
  const int k = p.kernel();
  const int stride = kStride > 0 ? kStride : p.stride;
  const std::size_t w_stride = static_cast<std::size_t>(in_per_group) * k * k;
  const T* __restrict weights =
      p.weight.data().data() + static_cast<std::size_t>(oc0) * w_stride;
  using Vec __attribute__((vector_size(kColBlock * sizeof(T)))) = T;
  for (int oh = 0; oh < out_h; ++oh) {
    for (int ow0 = 0; ow0 < out_w; ow0 += kColBlock) {
      Vec acc[kOc] = {};
      for (int ic = 0; ic < in_per_group; ++ic) {
        const T* plane = padded + static_cast<std::size_t>(ic) * pad_h * pad_w;
        for (int kh = 0; kh < k; ++kh) {
          const T* row =
              plane + static_cast<std::size_t>(oh * stride + kh) * pad_w + ow0 * stride;
          const T* wrow = weights + (static_cast<std::size_t>(ic) * k + kh) * k;
          for (int kw = 0; kw < k; ++kw) {
            Vec in;
            if constexpr (kStride == 1) {
              std::memcpy(&in, row + kw, sizeof(Vec));
            } else {
              for (int j = 0; j < kColBlock; ++j) in[j] = row[j * stride + kw];
            }
            for (int o = 0; o < kOc; ++o) acc[o] += wrow[o * w_stride + kw] * in;
          }
        }
      }
      const int cols = std::min(kColBlock, out_w - ow0);
      for (int o = 0; o < kOc; ++o) {
        T* dst = &out.at(n, oc0 + o, oh, ow0);
        if (p.has_bias()) {
          const T b = p.bias[oc0 + o];
          for (int j = 0; j < cols; ++j) dst[j] = acc[o][j] + b;
        } else {
          for (int j = 0; j < cols; ++j) dst[j] = acc[o][j];
        }
      }
    }
  }
}

template <typename T, int kOc>
void conv_rows_dispatch(const T* padded, int pad_h, int pad_w, const ConvParams<T>& p, int oc0,
                        int in_per_group, int out_h, int out_w, BasicTensor4<T>& out, int n) {
  if (p.stride == 1)
    conv_rows<T, kOc, 1>(padded, pad_h, pad_w, p, oc0, in_per_group, out_h, out_w, out, n);
  else if (p.stride == 2)
    conv_rows<T, kOc, 2>(padded, pad_h, pad_w, p, oc0, in_per_group, out_h, out_w, out, n);
  else
    conv_rows<T, kOc, 0>(padded, pad_h, pad_w, p, oc0, in_per_group, out_h, out_w, out, n);
}

}  // namespace

template <typename T>
BasicTensor4<T> conv2d(const BasicTensor4<T>& input, const ConvParams<T>& p) {
  const ConvGeometry g = check_conv(input, p);
  const int k = p.kernel();
  const int s = p.stride;
  const int pad = p.padding;
  BasicTensor4<T> out({input.batch(), p.out_channels(), g.out_h, g.out_w});

  // Zero-padded copy of the input, wide enough that every column block reads
  // inside the buffer.
  const int blocks = (g.out_w + kColBlock - 1) / kColBlock;
  const int pad_h = std::max(input.height() + 2 * pad, (g.out_h - 1) * s + k);
  const int pad_w = std::max(input.width() + 2 * pad, (blocks * kColBlock - 1) * s + k);
  const std::size_t pad_plane = static_cast<std::size_t>(pad_h) * pad_w;
  std::vector<T> padded(static_cast<std::size_t>(input.channels()) * pad_plane, T(0));

  constexpr int kOcBlock = 4;
  const int oc_blocks = (g.out_per_group + kOcBlock - 1) / kOcBlock;
  for (int n = 0; n < input.batch(); ++n) {
    for (int c = 0; c < input.channels(); ++c) {
      T* dst = padded.data() + c * pad_plane;
      for (int y = 0; y < input.height(); ++y) {
        auto src = input.plane(n, c).subspan(static_cast<std::size_t>(y) * input.width(),
                                             input.width());
        std::copy(src.begin(), src.end(), dst + static_cast<std::size_t>(y + pad) * pad_w + pad);
      }
    }
    const std::size_t tasks = static_cast<std::size_t>(p.groups) * oc_blocks;
    detail::parallel_for(tasks, [&](std::size_t task) {
      const int group = static_cast<int>(task / oc_blocks);
      const int ob = static_cast<int>(task % oc_blocks);
      const int oc0 = group * g.out_per_group + ob * kOcBlock;
      const int count = std::min(kOcBlock, g.out_per_group - ob * kOcBlock);
      const T* src = padded.data() + static_cast<std::size_t>(group) * g.in_per_group * pad_plane;
      if (count == kOcBlock) {
        conv_rows_dispatch<T, kOcBlock>(src, pad_h, pad_w, p, oc0, g.in_per_group, g.out_h, g.out_w, out, n);
      } else {
        for (int o = 0; o < count; ++o)
          conv_rows_dispatch<T, 1>(src, pad_h, pad_w, p, oc0 + o, g.in_per_group, g.out_h, g.out_w, out, n);
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor4<T> batchnorm_infer(const BasicTensor4<T>& input, const BatchNormParams<T>& bn) {
  bn.validate();
  if (bn.channels() != input.channels()) {
    throw ShapeError("channels", "batchnorm: input has " + std::to_string(input.channels()) +
                                     " channels, parameters have " +
                                     std::to_string(bn.channels()));
  }
  BasicTensor4<T> out(input.shape());
  for (int n = 0; n < input.batch(); ++n) {
    for (int c = 0; c < input.channels(); ++c) {
      const T inv = T(1) / std::sqrt(bn.running_var[c] + bn.epsilon);
      const T scale = bn.gamma[c] * inv;
      const T mean = bn.running_mean[c];
      const T beta = bn.beta[c];
      auto src = input.plane(n, c);
      auto dst = out.plane(n, c);
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = scale * (src[i] - mean) + beta;
    }
  }
  return out;
}

template <typename T>
BasicTensor4<T> silu(const BasicTensor4<T>& input) {
  BasicTensor4<T> out(input.shape());
  auto src = input.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] / (T(1) + std::exp(-src[i]));
  return out;
}

template <typename T>
BasicTensor4<T> maxpool2d(const BasicTensor4<T>& input, int kernel, int stride, int padding) {
  if (kernel < 1) throw ShapeError("kernel", "maxpool kernel must be >= 1");
  if (stride < 1) throw ShapeError("stride", "maxpool stride must be >= 1");
  if (padding < 0 || 2 * padding > kernel)
    throw ShapeError("padding", "maxpool padding out of range");
  const int oh = conv_output_size(input.height(), kernel, stride, padding);
  const int ow = conv_output_size(input.width(), kernel, stride, padding);
  if (oh < 1) throw ShapeError("height", "maxpool window larger than padded input height");
  if (ow < 1) throw ShapeError("width", "maxpool window larger than padded input width");
  BasicTensor4<T> out({input.batch(), input.channels(), oh, ow});
  for (int n = 0; n < input.batch(); ++n) {
    for (int c = 0; c < input.channels(); ++c) {
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
          T best = -std::numeric_limits<T>::infinity();
          for (int ky = 0; ky < kernel; ++ky) {
            const int iy = y * stride - padding + ky;
            if (iy < 0 || iy >= input.height()) continue;
            for (int kx = 0; kx < kernel; ++kx) {
              const int ix = x * stride - padding + kx;
              if (ix < 0 || ix >= input.width()) continue;
              best = std::max(best, input.at(n, c, iy, ix));
            }
          }
          out.at(n, c, y, x) = best;
        }
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor4<T> upsample_nearest2x(const BasicTensor4<T>& input) {
  BasicTensor4<T> out({input.batch(), input.channels(), input.height() * 2, input.width() * 2});
  for (int n = 0; n < input.batch(); ++n)
    for (int c = 0; c < input.channels(); ++c)
      for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out.at(n, c, y, x) = input.at(n, c, y / 2, x / 2);
  return out;
}

template <typename T>
BasicTensor4<T> concat_channels(std::span<const BasicTensor4<T>> parts) {
  if (parts.empty()) throw ShapeError("channels", "concat of zero tensors");
  int channels = 0;
  for (const auto& t : parts) {
    check_same_nhw(parts.front(), t, "concat");
    channels += t.channels();
  }
  const auto& first = parts.front();
  BasicTensor4<T> out({first.batch(), channels, first.height(), first.width()});
  for (int n = 0; n < first.batch(); ++n) {
    int c0 = 0;
    for (const auto& t : parts) {
      for (int c = 0; c < t.channels(); ++c) {
        auto src = t.plane(n, c);
        std::copy(src.begin(), src.end(), out.plane(n, c0 + c).begin());
      }
      c0 += t.channels();
    }
  }
  return out;
}

template <typename T>
BasicTensor4<T> concat_channels(const BasicTensor4<T>& a, const BasicTensor4<T>& b) {
  const BasicTensor4<T> parts[] = {a, b};
  return concat_channels<T>(std::span<const BasicTensor4<T>>(parts));
}

template <typename T>
BasicTensor4<T> add(const BasicTensor4<T>& a, const BasicTensor4<T>& b) {
  check_same_nhw(a, b, "add");
  if (a.channels() != b.channels())
    throw ShapeError("channels", "add: channel mismatch " + to_string(a.shape()) + " vs " +
                                     to_string(b.shape()));
  BasicTensor4<T> out(a.shape());
  auto x = a.data();
  auto y = b.data();
  auto z = out.data();
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] + y[i];
  return out;
}

template <typename T>
std::vector<BasicTensor4<T>> split_channels(const BasicTensor4<T>& input,
                                            std::span<const int> sizes) {
  const int total = std::accumulate(sizes.begin(), sizes.end(), 0);
  if (total != input.channels())
    throw ShapeError("channels", "split sizes sum to " + std::to_string(total) +
                                     " but input has " + std::to_string(input.channels()));
  std::vector<BasicTensor4<T>> out;
  int c0 = 0;
  for (int size : sizes) {
    if (size < 1) throw ShapeError("channels", "split size must be >= 1");
    BasicTensor4<T> part({input.batch(), size, input.height(), input.width()});
    for (int n = 0; n < input.batch(); ++n)
      for (int c = 0; c < size; ++c) {
        auto src = input.plane(n, c0 + c);
        std::copy(src.begin(), src.end(), part.plane(n, c).begin());
      }
    out.push_back(std::move(part));
    c0 += size;
  }
  return out;
}

template <typename T>
T max_abs_diff(const BasicTensor4<T>& a, const BasicTensor4<T>& b) {
  if (!(a.shape() == b.shape()))
    throw ShapeError("shape", "max_abs_diff: " + to_string(a.shape()) + " vs " +
                                  to_string(b.shape()));
  T m = T(0);
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T d = std::abs(x[i] - y[i]);
    if (!(d <= m)) m = d;  // propagates NaN
  }
  return m;
}

#define FACEKIT_INSTANTIATE_TENSOR(T)                                                          \
  template class BasicTensor4<T>;                                                              \
  template struct ConvParams<T>;                                                               \
  template struct BatchNormParams<T>;                                                          \
  template BasicTensor4<T> conv2d(const BasicTensor4<T>&, const ConvParams<T>&);               \
  template BasicTensor4<T> conv2d_reference(const BasicTensor4<T>&, const ConvParams<T>&);     \
  template BasicTensor4<T> batchnorm_infer(const BasicTensor4<T>&, const BatchNormParams<T>&); \
  template BasicTensor4<T> silu(const BasicTensor4<T>&);                                       \
  template BasicTensor4<T> maxpool2d(const BasicTensor4<T>&, int, int, int);                   \
  template BasicTensor4<T> upsample_nearest2x(const BasicTensor4<T>&);                         \
  template BasicTensor4<T> concat_channels(std::span<const BasicTensor4<T>>);                  \
  template BasicTensor4<T> concat_channels(const BasicTensor4<T>&, const BasicTensor4<T>&);    \
  template BasicTensor4<T> add(const BasicTensor4<T>&, const BasicTensor4<T>&);                \
  template std::vector<BasicTensor4<T>> split_channels(const BasicTensor4<T>&,                 \
                                                       std::span<const int>);                  \
  template T max_abs_diff(const BasicTensor4<T>&, const BasicTensor4<T>&);

FACEKIT_INSTANTIATE_TENSOR(float)
FACEKIT_INSTANTIATE_TENSOR(double)

#undef FACEKIT_INSTANTIATE_TENSOR

}  // namespace facekit
