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

#include "facekit/netgraph.hpp"
#include "facekit/postprocess.hpp"

namespace {

using namespace facekit;

Tensor4 image(int side) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Tensor4 t({1, 3, side, side});
  for (float& v : t.data()) v = u(rng);
  return t;
}

Model tiny_model(BottleneckKind bottleneck, bool fused) {
  ModelConfig cfg = ModelConfig::tiny();
  cfg.stem = StemKind::RepV8;
  cfg.bottleneck = bottleneck;
  Model m = build_model(cfg, 3);
  randomize_batchnorm(m, 4);
  return fused ? deploy(m) : m;
}

// Args: bottleneck (0 = RepV8Bot, 1 = RepDWV8Bot), fused, input side.
void BM_Forward(benchmark::State& state) {
  const auto kind = state.range(0) == 0 ? BottleneckKind::RepV8Bot : BottleneckKind::RepDWV8Bot;
  const Model m = tiny_model(kind, state.range(1) != 0);
  const Tensor4 x = image(static_cast<int>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, x));
  state.counters["params"] = static_cast<double>(count_params(m));
}

void BM_DecodeNms(benchmark::State& state) {
  const Model m = tiny_model(BottleneckKind::RepDWV8Bot, true);
  const HeadOutputs out = forward(m, image(320));
  DecodeConfig cfg;
  cfg.conf_threshold = 0.0;
  for (auto _ : state) {
    auto dets = decode_boxes(out, cfg);
    benchmark::DoNotOptimize(nms(dets, cfg.iou_threshold));
  }
}

}  // namespace

BENCHMARK(BM_Forward)
    ->ArgsProduct({{0, 1}, {0, 1}, {320}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_DecodeNms)->Unit(benchmark::kMillisecond);
