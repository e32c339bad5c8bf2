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
#include "facekit/netgraph.hpp"
#include "fixtures.hpp"

using namespace facekit;
using facekit::fixture::Engine;
using facekit::fixture::random_tensor;

namespace {

ModelConfig config_of(StemKind stem, BottleneckKind bot) {
  ModelConfig c = ModelConfig::tiny();
  c.stem = stem;
  c.bottleneck = bot;
  return c;
}

float max_head_diff(const HeadOutputs& a, const HeadOutputs& b) {
  float m = 0.0f;
  for (std::size_t i = 0; i < a.scales.size(); ++i) {
    m = std::max(m, max_abs_diff(a.scales[i].box_logits, b.scales[i].box_logits));
    m = std::max(m, max_abs_diff(a.scales[i].face_logit, b.scales[i].face_logit));
    m = std::max(m, max_abs_diff(a.scales[i].kpt_raw, b.scales[i].kpt_raw));
  }
  return m;
}

}  // namespace

TEST(BuildModel, HeadChannels) {
  const Model m = build_model(ModelConfig::tiny(), 1);
  ASSERT_EQ(m.head.size(), 3u);
  for (const HeadLevel& level : m.head) {
    EXPECT_EQ(level.kpt.out.out_channels(), 204);
    EXPECT_EQ(level.box.out.out_channels(), 64);
    EXPECT_EQ(level.cls.out.out_channels(), 1);
  }
}

TEST(BuildModel, SameSeedSameParameters) {
  const auto a = named_tensors(build_model(ModelConfig::tiny(), 42));
  const auto b = named_tensors(build_model(ModelConfig::tiny(), 42));
  const auto c = named_tensors(build_model(ModelConfig::tiny(), 43));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(BuildModel, TinyParamCountNearReference) {
  const double n = static_cast<double>(count_params(build_model(ModelConfig::tiny(), 0)));
  EXPECT_NEAR(n / 5.08e6, 1.0, 0.15);
}

TEST(BuildModel, ConvParamArithmetic) {
  ConvParamsF p;
  p.weight = Tensor4({16, 3, 3, 3});
  p.bias.assign(16, 0.0f);
  EXPECT_EQ(p.param_count(), 448u);
}

TEST(BuildModel, InvalidConfig) {
  ModelConfig c = ModelConfig::tiny();
  c.reg_max = 1;
  EXPECT_THROW(c.validate(), DomainError);
  c = ModelConfig::tiny();
  c.num_keypoints = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = ModelConfig::tiny();
  c.strides = {8, 16};
  EXPECT_ANY_THROW(c.validate());
}

TEST(BuildModel, KindNamesRoundTrip) {
  for (StemKind k : {StemKind::NaiveV8, StemKind::RepV7, StemKind::RepV8})
    EXPECT_EQ(parse_stem_kind(to_string(k)), k);
  for (BottleneckKind k : {BottleneckKind::V5Bot, BottleneckKind::V8Bot, BottleneckKind::RepV8Bot,
                           BottleneckKind::RepDWV8Bot})
    EXPECT_EQ(parse_bottleneck_kind(to_string(k)), k);
  EXPECT_ANY_THROW(parse_stem_kind("RepV9"));
}

TEST(Forward, GridSizes640) {
  const Model m = build_model(ModelConfig::tiny(), 3);
  const HeadOutputs out = forward(m, Tensor4({1, 3, 640, 640}, 0.5f));
  ASSERT_EQ(out.scales.size(), 3u);
  const int grids[] = {80, 40, 20};
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(out.scales[i].box_logits.shape(), (Shape4{1, 64, grids[i], grids[i]}));
    EXPECT_EQ(out.scales[i].face_logit.shape(), (Shape4{1, 1, grids[i], grids[i]}));
    EXPECT_EQ(out.scales[i].kpt_raw.shape(), (Shape4{1, 204, grids[i], grids[i]}));
  }
  EXPECT_EQ(out.image_side, 640);
}

TEST(Forward, GridSizes320AndStableChecksum) {
  Engine rng(4);
  const Model m = build_model(ModelConfig::tiny(), 4);
  const Tensor4 x = random_tensor<float>(rng, {1, 3, 320, 320}, 0.0, 1.0);
  const HeadOutputs a = forward(m, x);
  const HeadOutputs b = forward(m, x);
  EXPECT_EQ(a.scales[0].box_logits.height(), 40);
  EXPECT_EQ(a.scales[1].box_logits.height(), 20);
  EXPECT_EQ(a.scales[2].box_logits.height(), 10);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.scales[i].box_logits.vector(), b.scales[i].box_logits.vector());
    EXPECT_EQ(a.scales[i].kpt_raw.vector(), b.scales[i].kpt_raw.vector());
  }
}

TEST(Forward, RejectsBadInput) {
  const Model m = build_model(ModelConfig::tiny(), 5);
  EXPECT_THROW(forward(m, Tensor4({1, 1, 64, 64})), ShapeError);
  EXPECT_THROW(forward(m, Tensor4({1, 3, 100, 100})), ShapeError);
}

TEST(Deploy, PlainModelUnchanged) {
  const Model m = build_model(config_of(StemKind::NaiveV8, BottleneckKind::V8Bot), 6);
  EXPECT_EQ(rep_block_count(m), 0);
  const Model d = deploy(m);
  EXPECT_EQ(named_tensors(d), named_tensors(m));
  EXPECT_EQ(count_params(d), count_params(m));
}

TEST(Deploy, RepModelEquivalent) {
  Engine rng(7);
  Model m = build_model(ModelConfig::tiny(), 7);
  randomize_batchnorm(m, 8);
  const Model d = deploy(m);
  EXPECT_GT(rep_block_count(m), 0);
  EXPECT_EQ(unfused_rep_block_count(m), rep_block_count(m));
  EXPECT_EQ(unfused_rep_block_count(d), 0);
  EXPECT_LT(count_params(d), count_params(m));
  for (int i = 0; i < 2; ++i) {
    const Tensor4 x = random_tensor<float>(rng, {1, 3, 160, 160}, 0.0, 1.0);
    EXPECT_LE(max_head_diff(forward(m, x), forward(d, x)), 1e-4f);
  }
}

TEST(Deploy, EveryRepVariantEquivalent) {
  Engine rng(9);
  for (StemKind stem : {StemKind::RepV7, StemKind::RepV8})
    for (BottleneckKind bot : {BottleneckKind::RepV8Bot, BottleneckKind::RepDWV8Bot}) {
      Model m = build_model(config_of(stem, bot), 10);
      randomize_batchnorm(m, 11);
      const Tensor4 x = random_tensor<float>(rng, {1, 3, 96, 96}, 0.0, 1.0);
      EXPECT_LE(max_head_diff(forward(m, x), forward(deploy(m), x)), 1e-4f)
          << to_string(stem) << "+" << to_string(bot);
    }
}

TEST(NamedTensors, AssignRoundTrip) {
  const Model a = build_model(ModelConfig::tiny(), 12);
  Model b = build_model(ModelConfig::tiny(), 13);
  assign_tensors(b, named_tensors(a));
  EXPECT_EQ(named_tensors(b), named_tensors(a));
  auto broken = named_tensors(a);
  broken.pop_back();
  EXPECT_ANY_THROW(assign_tensors(b, broken));
}

TEST(CountFlops, GrowsWithInput) {
  const Model m = build_model(ModelConfig::tiny(), 14);
  const auto f320 = count_flops(m, 320);
  const auto f640 = count_flops(m, 640);
  EXPECT_GT(f320, 0u);
  EXPECT_NEAR(static_cast<double>(f640) / static_cast<double>(f320), 4.0, 0.05);
}
