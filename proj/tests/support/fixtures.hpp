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

#include <random>
#include <vector>

#include "facekit/reparam.hpp"
#include "facekit/tensor.hpp"

namespace facekit::fixture {

using Engine = std::mt19937_64;

inline double uniform(Engine& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Engine& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

template <typename T>
BasicTensor4<T> random_tensor(Engine& rng, Shape4 shape, double lo = -1.0, double hi = 1.0) {
  BasicTensor4<T> t(shape);
  for (T& v : t.data()) v = static_cast<T>(uniform(rng, lo, hi));
  return t;
}

template <typename T>
ConvParams<T> random_conv(Engine& rng, int cin, int cout, int k, int stride, int groups,
                          bool bias, double scale = 0.5) {
  ConvParams<T> p;
  p.weight = random_tensor<T>(rng, {cout, cin / groups, k, k}, -scale, scale);
  if (bias)
    for (int o = 0; o < cout; ++o) p.bias.push_back(static_cast<T>(uniform(rng, -0.2, 0.2)));
  p.stride = stride;
  p.padding = k / 2;
  p.groups = groups;
  return p;
}

template <typename T>
BatchNormParams<T> random_bn(Engine& rng, int channels, T epsilon = T(1e-3)) {
  BatchNormParams<T> bn;
  for (int c = 0; c < channels; ++c) {
    bn.gamma.push_back(static_cast<T>(uniform(rng, 0.5, 1.5)));
    bn.beta.push_back(static_cast<T>(uniform(rng, -0.5, 0.5)));
    bn.running_mean.push_back(static_cast<T>(uniform(rng, -0.5, 0.5)));
    bn.running_var.push_back(static_cast<T>(uniform(rng, 0.5, 2.0)));
  }
  bn.epsilon = epsilon;
  return bn;
}

/// Random 3x3 / optional 1x1 / optional identity branch set in both precisions
/// with identical parameter values.
struct BranchSetPair {
  RepBranchSet<float> f32;
  RepBranchSet<double> f64;
};

inline BranchSetPair random_branch_set(Engine& rng) {
  const int groups_choice = uniform_int(rng, 0, 2);
  int cin = uniform_int(rng, 1, 12);
  int cout = uniform_int(rng, 1, 12);
  int groups = 1;
  if (groups_choice == 1) {
    cout = cin;
    groups = cin;  // depthwise
  } else if (groups_choice == 2) {
    groups = uniform_int(rng, 1, 3);
    cin = groups * uniform_int(rng, 1, 4);
    cout = groups * uniform_int(rng, 1, 4);
  }
  const int stride = uniform_int(rng, 1, 2);
  const bool with_1x1 = uniform_int(rng, 0, 3) != 0;
  const bool with_id = cin == cout && stride == 1 && uniform_int(rng, 0, 3) != 0;

  RepBranchSet<double> d;
  d.branch3x3 = {random_conv<double>(rng, cin, cout, 3, stride, groups, uniform_int(rng, 0, 1)),
                 random_bn<double>(rng, cout)};
  if (with_1x1)
    d.branch1x1 = RepBranch<double>{
        random_conv<double>(rng, cin, cout, 1, stride, groups, uniform_int(rng, 0, 1)),
        random_bn<double>(rng, cout)};
  if (with_id) d.branch_id = random_bn<double>(rng, cout);

  auto to_f = [](const RepBranch<double>& b) {
    RepBranch<float> r;
    r.conv.weight = tensor_cast<float>(b.conv.weight);
    r.conv.bias.assign(b.conv.bias.begin(), b.conv.bias.end());
    r.conv.stride = b.conv.stride;
    r.conv.padding = b.conv.padding;
    r.conv.groups = b.conv.groups;
    r.bn = {{b.bn.gamma.begin(), b.bn.gamma.end()},
            {b.bn.beta.begin(), b.bn.beta.end()},
            {b.bn.running_mean.begin(), b.bn.running_mean.end()},
            {b.bn.running_var.begin(), b.bn.running_var.end()},
            static_cast<float>(b.bn.epsilon)};
    return r;
  };
  RepBranchSet<float> f;
  f.branch3x3 = to_f(d.branch3x3);
  if (d.branch1x1) f.branch1x1 = to_f(*d.branch1x1);
  if (d.branch_id) {
    RepBranch<double> tmp{{}, *d.branch_id};
    f.branch_id = to_f(tmp).bn;
  }
  return {std::move(f), std::move(d)};
}

}  // namespace facekit::fixture
