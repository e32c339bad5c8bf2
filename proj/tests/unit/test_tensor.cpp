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

#include <gtest/gtest.h>

#include <cmath>

#include "facekit/error.hpp"
#include "facekit/tensor.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace facekit;
using facekit::fixture::Engine;
using facekit::fixture::random_tensor;

TEST(Conv2d, IdentityKernel) {
  Engine rng(1);
  const Tensor4 x = random_tensor<float>(rng, {2, 1, 5, 7});
  ConvParamsF p;
  p.weight = Tensor4({1, 1, 1, 1}, 1.0f);
  p.bias = {0.0f};
  const Tensor4 y = conv2d(x, p);
  EXPECT_EQ(y.shape(), x.shape());
  EXPECT_EQ(y.vector(), x.vector());
}

TEST(Conv2d, ZeroKernelGivesBias) {
  Engine rng(2);
  const Tensor4 x = random_tensor<float>(rng, {1, 3, 6, 6});
  ConvParamsF p;
  p.weight = Tensor4({2, 3, 3, 3}, 0.0f);
  p.bias = {0.25f, -1.5f};
  p.padding = 1;
  const Tensor4 y = conv2d(x, p);
  for (int c = 0; c < 2; ++c)
    for (float v : y.plane(0, c)) EXPECT_EQ(v, p.bias[c]);
}

TEST(Conv2d, StridedMatchesDotProductOracle) {
  Engine rng(3);
  const Tensor4d x = random_tensor<double>(rng, {1, 2, 4, 4});
  ConvParams<double> p = fixture::random_conv<double>(rng, 2, 3, 3, 2, 1, true);
  const Tensor4d y = conv2d(x, p);
  const Tensor4d ref = oracle::conv2d(x, p);
  ASSERT_EQ(y.shape(), ref.shape());
  EXPECT_EQ(y.height(), 2);
  EXPECT_LE(max_abs_diff(y, ref), 1e-12);
}

TEST(Conv2d, FastPathMatchesReference) {
  Engine rng(4);
  for (int groups : {1, 2, 8}) {
    for (int stride : {1, 2}) {
      const Tensor4 x = random_tensor<float>(rng, {2, 8, 13, 11});
      const ConvParamsF p = fixture::random_conv<float>(rng, 8, 16, 3, stride, groups, true);
      EXPECT_LE(max_abs_diff(conv2d(x, p), conv2d_reference(x, p)), 1e-6f)
          << "groups " << groups << " stride " << stride;
    }
  }
}

TEST(Conv2d, ChannelMismatchNamesDimension) {
  ConvParamsF p;
  p.weight = Tensor4({4, 3, 3, 3});
  const Tensor4 x({1, 5, 8, 8});
  try {
    conv2d(x, p);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_EQ(e.dimension(), "channels");
  }
}

TEST(BatchNorm, TrivialIsIdentity) {
  Engine rng(5);
  const Tensor4d x = random_tensor<double>(rng, {1, 3, 4, 4});
  const Tensor4d y = batchnorm_infer(x, BatchNormParams<double>::identity(3, 0.0));
  EXPECT_EQ(y.vector(), x.vector());
}

TEST(BatchNorm, ZeroGammaGivesBeta) {
  Engine rng(6);
  const Tensor4d x = random_tensor<double>(rng, {1, 2, 3, 3});
  BatchNormParams<double> bn = fixture::random_bn<double>(rng, 2);
  bn.gamma = {0.0, 0.0};
  const Tensor4d y = batchnorm_infer(x, bn);
  for (int c = 0; c < 2; ++c)
    for (double v : y.plane(0, c)) EXPECT_EQ(v, bn.beta[c]);
}

TEST(BatchNorm, MatchesScalarFormula) {
  Engine rng(7);
  const Tensor4d x = random_tensor<double>(rng, {2, 4, 5, 5});
  const BatchNormParams<double> bn = fixture::random_bn<double>(rng, 4);
  const Tensor4d y = batchnorm_infer(x, bn);
  for (int n = 0; n < 2; ++n)
    for (int c = 0; c < 4; ++c)
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
          const double want = (x.at(n, c, i, j) - bn.running_mean[c]) /
                                  std::sqrt(bn.running_var[c] + bn.epsilon) * bn.gamma[c] +
                              bn.beta[c];
          EXPECT_NEAR(y.at(n, c, i, j), want, 1e-14);
        }
}

TEST(Silu, Values) {
  Tensor4d x({1, 1, 1, 3});
  x.at(0, 0, 0, 0) = 0.0;
  x.at(0, 0, 0, 1) = 20.0;
  x.at(0, 0, 0, 2) = 1.0;
  const Tensor4d y = silu(x);
  EXPECT_EQ(y.at(0, 0, 0, 0), 0.0);
  EXPECT_NEAR(y.at(0, 0, 0, 1), 20.0, 1e-6);
  EXPECT_NEAR(y.at(0, 0, 0, 2), 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(y.at(0, 0, 0, 2), 0.731059, 1e-6);
}

TEST(MaxPool, TwoByTwo) {
  const Tensor4d x({1, 1, 2, 2}, {1, 2, 3, 4});
  const Tensor4d y = maxpool2d(x, 2, 2, 0);
  ASSERT_EQ(y.size(), 1u);
  EXPECT_EQ(y.at(0, 0, 0, 0), 4.0);
}

TEST(MaxPool, ConstantStaysConstant) {
  const Tensor4d x({1, 2, 7, 7}, 3.5);
  const Tensor4d y = maxpool2d(x, 5, 1, 2);
  for (double v : y.data()) EXPECT_EQ(v, 3.5);
}

TEST(MaxPool, MatchesWindowScan) {
  Engine rng(8);
  const Tensor4d x = random_tensor<double>(rng, {1, 2, 8, 8});
  const Tensor4d y = maxpool2d(x, 3, 2, 1);
  ASSERT_EQ(y.height(), 4);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double m = -INFINITY;
        for (int a = -1; a <= 1; ++a)
          for (int b = -1; b <= 1; ++b) {
            const int yy = 2 * i + a, xx = 2 * j + b;
            if (yy >= 0 && xx >= 0 && yy < 8 && xx < 8) m = std::max(m, x.at(0, c, yy, xx));
          }
        EXPECT_EQ(y.at(0, c, i, j), m);
      }
}

TEST(Upsample, NearestDoubles) {
  const Tensor4d one({1, 1, 1, 1}, {1.0});
  const Tensor4d up = upsample_nearest2x(one);
  EXPECT_EQ(up.shape(), (Shape4{1, 1, 2, 2}));
  for (double v : up.data()) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(upsample_nearest2x(Tensor4d({1, 3, 4, 5})).shape(), (Shape4{1, 3, 8, 10}));
}

TEST(ChannelOps, ConcatAddSplit) {
  Engine rng(9);
  const Tensor4d a = random_tensor<double>(rng, {1, 2, 4, 4});
  const Tensor4d b = random_tensor<double>(rng, {1, 3, 4, 4});
  const Tensor4d ab = concat_channels(a, b);
  EXPECT_EQ(ab.shape(), (Shape4{1, 5, 4, 4}));
  EXPECT_EQ(add(a, Tensor4d(a.shape())).vector(), a.vector());
  const int sizes[] = {2, 3};
  const auto parts = split_channels(ab, std::span<const int>(sizes));
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].vector(), a.vector());
  EXPECT_EQ(parts[1].vector(), b.vector());
}

TEST(ChannelOps, MismatchedSpatialThrows) {
  EXPECT_THROW(concat_channels(Tensor4d({1, 1, 4, 4}), Tensor4d({1, 1, 4, 5})), ShapeError);
  EXPECT_THROW(add(Tensor4d({1, 2, 4, 4}), Tensor4d({1, 3, 4, 4})), ShapeError);
}
