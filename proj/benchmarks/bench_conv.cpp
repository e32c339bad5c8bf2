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


#include <benchmark/benchmark.h>

#include <random>

#include "facekit/tensor.hpp"

namespace {

using facekit::ConvParamsF;
using facekit::Tensor4;

Tensor4 filled(std::mt19937& rng, facekit::Shape4 shape) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Tensor4 t(shape);
  for (float& v : t.data()) v = u(rng);
  return t;
}

// Args: channels, side, kernel, groups (1 = dense, 0 = depthwise).
ConvParamsF make_conv(std::mt19937& rng, const benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(2));
  const int groups = state.range(3) == 0 ? c : static_cast<int>(state.range(3));
  ConvParamsF p;
  p.weight = filled(rng, {c, c / groups, k, k});
  p.padding = k / 2;
  p.groups = groups;
  return p;
}

void set_counters(benchmark::State& state, const ConvParamsF& p, int side) {
  const double macs = static_cast<double>(p.weight.size()) * side * side;
  state.counters["GFLOPS"] =
      benchmark::Counter(2.0 * macs * state.iterations() / 1e9, benchmark::Counter::kIsRate);
}

void BM_Conv2d(benchmark::State& state) {
  std::mt19937 rng(1);
  const int side = static_cast<int>(state.range(1));
  const ConvParamsF p = make_conv(rng, state);
  const Tensor4 x = filled(rng, {1, static_cast<int>(state.range(0)), side, side});
  for (auto _ : state) benchmark::DoNotOptimize(facekit::conv2d(x, p));
  set_counters(state, p, side);
}

void BM_Conv2dReference(benchmark::State& state) {
  std::mt19937 rng(1);
  const int side = static_cast<int>(state.range(1));
  const ConvParamsF p = make_conv(rng, state);
  const Tensor4 x = filled(rng, {1, static_cast<int>(state.range(0)), side, side});
  for (auto _ : state) benchmark::DoNotOptimize(facekit::conv2d_reference(x, p));
  set_counters(state, p, side);
}

}  // namespace

BENCHMARK(BM_Conv2d)
    ->Args({32, 80, 3, 1})
    ->Args({64, 40, 3, 1})
    ->Args({64, 40, 1, 1})
    ->Args({64, 40, 3, 0})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Conv2dReference)->Args({32, 80, 3, 1})->Args({64, 40, 3, 0})->Unit(benchmark::kMicrosecond);
