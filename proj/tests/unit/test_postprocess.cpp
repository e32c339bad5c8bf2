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
#include <limits>

#include "facekit/error.hpp"
#include "facekit/postprocess.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace facekit;
using facekit::fixture::Engine;
using facekit::fixture::uniform;

namespace {

constexpr float kNegInf = -std::numeric_limits<float>::infinity();

// One scale at stride 8 over a g x g grid, every face logit at -inf.
HeadOutputs empty_outputs(int g, int keypoints = 3, int reg_max = 16) {
  HeadOutputs out;
  out.image_side = 8 * g;
  out.reg_max = reg_max;
  out.num_keypoints = keypoints;
  HeadScale sc;
  sc.stride = 8;
  sc.box_logits = Tensor4({1, 4 * reg_max, g, g}, 0.0f);
  sc.face_logit = Tensor4({1, 1, g, g}, kNegInf);
  sc.kpt_raw = Tensor4({1, 3 * keypoints, g, g}, 0.0f);
  out.scales.push_back(std::move(sc));
  return out;
}

FaceDetection det(double cx, double cy, double w, double h, double conf) {
  FaceDetection d;
  d.cx = cx;
  d.cy = cy;
  d.w = w;
  d.h = h;
  d.conf = conf;
  return d;
}

}  // namespace

TEST(DflDecode, Examples) {
  std::vector<double> logits(16, -30.0);
  logits[7] = 30.0;
  EXPECT_NEAR(dfl_decode(std::span<const double>(logits)), 7.0, 1e-4);

  const std::vector<double> uniform_logits(16, 0.3);
  EXPECT_NEAR(dfl_decode(std::span<const double>(uniform_logits)), 7.5, 1e-12);

  std::vector<double> two(16, -10.0);
  two[3] = 4.0;
  two[4] = 4.0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 16; ++i) {
    num += i * std::exp(two[i]);
    den += std::exp(two[i]);
  }
  EXPECT_NEAR(dfl_decode(std::span<const double>(two)), num / den, 1e-12);
  EXPECT_NEAR(dfl_decode(std::span<const double>(two)), 3.5, 1e-4);
}

TEST(DflDecode, RangeWithinBins) {
  Engine rng(31);
  for (int t = 0; t < 200; ++t) {
    std::vector<float> logits(16);
    for (float& v : logits) v = static_cast<float>(uniform(rng, -50, 50));
    const double d = dfl_decode(std::span<const float>(logits));
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 15.0);
  }
}

TEST(DecodeBoxes, SymmetricLogitsAtOrigin) {
  HeadOutputs out = empty_outputs(4);
  out.scales[0].face_logit.at(0, 0, 0, 0) = 5.0f;
  for (int side = 0; side < 4; ++side) out.scales[0].box_logits.at(0, side * 16 + 2, 0, 0) = 40.0f;
  DecodeConfig cfg;
  const auto dets = decode_boxes(out, cfg);
  ASSERT_EQ(dets.size(), 1u);
  std::vector<float> bins(16, 0.0f);
  bins[2] = 40.0f;
  const double d = dfl_decode(std::span<const float>(bins));
  EXPECT_NEAR(dets[0].cx, 4.0, 1e-12);
  EXPECT_NEAR(dets[0].cy, 4.0, 1e-12);
  EXPECT_NEAR(dets[0].w, 2.0 * d * 8.0, 1e-9);
  EXPECT_NEAR(dets[0].h, 2.0 * d * 8.0, 1e-9);
  EXPECT_NEAR(dets[0].conf, 1.0 / (1.0 + std::exp(-5.0)), 1e-7);
}

TEST(DecodeBoxes, NegativeInfinityLogitsGiveNothing) {
  EXPECT_TRUE(decode_boxes(empty_outputs(5), DecodeConfig{}).empty());
}

TEST(DecodeBoxes, ZeroKeypointRawAtAffineOrigin) {
  HeadOutputs out = empty_outputs(6);
  out.scales[0].face_logit.at(0, 0, 4, 2) = 0.0f;
  const auto dets = decode_boxes(out, DecodeConfig{});
  ASSERT_EQ(dets.size(), 1u);
  ASSERT_EQ(dets[0].landmarks.size(), 3u);
  for (const Landmark& l : dets[0].landmarks) {
    EXPECT_DOUBLE_EQ(l.x, (2 - 0.5) * 8);
    EXPECT_DOUBLE_EQ(l.y, (4 - 0.5) * 8);
    EXPECT_DOUBLE_EQ(l.conf, 0.5);
  }
}

TEST(DecodeBoxes, StrictThreshold) {
  HeadOutputs out = empty_outputs(2);
  out.scales[0].face_logit = Tensor4({1, 1, 2, 2}, 0.0f);
  DecodeConfig cfg;
  cfg.conf_threshold = 0.5;
  EXPECT_TRUE(decode_boxes(out, cfg).empty());
  cfg.conf_threshold = 0.4999;
  EXPECT_EQ(decode_boxes(out, cfg).size(), 4u);
  out.scales[0].face_logit = Tensor4({1, 1, 2, 2}, 100.0f);
  cfg.conf_threshold = 1.0;
  EXPECT_TRUE(decode_boxes(out, cfg).empty());
}

TEST(DecodeBoxes, TranslationEquivariance) {
  Engine rng(32);
  const int g = 6;
  HeadOutputs a = empty_outputs(g, 2);
  HeadOutputs b = empty_outputs(g, 2);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j + 1 < g; ++j) {
      const float logit = static_cast<float>(uniform(rng, -2, 2));
      a.scales[0].face_logit.at(0, 0, i, j) = logit;
      b.scales[0].face_logit.at(0, 0, i, j + 1) = logit;
      for (int c = 0; c < 64; ++c) {
        const float v = static_cast<float>(uniform(rng, -3, 3));
        a.scales[0].box_logits.at(0, c, i, j) = v;
        b.scales[0].box_logits.at(0, c, i, j + 1) = v;
      }
      for (int c = 0; c < 6; ++c) {
        const float v = static_cast<float>(uniform(rng, -1, 1));
        a.scales[0].kpt_raw.at(0, c, i, j) = v;
        b.scales[0].kpt_raw.at(0, c, i, j + 1) = v;
      }
    }
  DecodeConfig cfg;
  cfg.conf_threshold = 0.0;
  const auto da = decode_boxes(a, cfg);
  const auto db = decode_boxes(b, cfg);
  ASSERT_EQ(da.size(), db.size());
  for (std::size_t k = 0; k < da.size(); ++k) {
    EXPECT_DOUBLE_EQ(db[k].cx, da[k].cx + 8.0);
    EXPECT_DOUBLE_EQ(db[k].cy, da[k].cy);
    EXPECT_DOUBLE_EQ(db[k].w, da[k].w);
    EXPECT_DOUBLE_EQ(db[k].conf, da[k].conf);
    for (std::size_t l = 0; l < 2; ++l) {
      EXPECT_DOUBLE_EQ(db[k].landmarks[l].x, da[k].landmarks[l].x + 8.0);
      EXPECT_DOUBLE_EQ(db[k].landmarks[l].y, da[k].landmarks[l].y);
    }
  }
}

TEST(DecodeBoxes, RegMaxMismatch) {
  DecodeConfig cfg;
  cfg.reg_max = 8;
  EXPECT_THROW(decode_boxes(empty_outputs(2), cfg), ShapeError);
}

TEST(DecodeConfig, Defaults) {
  const DecodeConfig cfg;
  EXPECT_EQ(cfg.conf_threshold, 0.002);
  EXPECT_EQ(cfg.iou_threshold, 0.7);
  EXPECT_EQ(cfg.reg_max, 16);
  DecodeConfig bad;
  bad.iou_threshold = 1.5;
  EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Nms, IdenticalBoxesKeepBest) {
  std::vector<FaceDetection> dets{det(10, 10, 5, 5, 0.8), det(10, 10, 5, 5, 0.9)};
  const auto kept = nms(dets, 0.7);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].conf, 0.9);
}

TEST(Nms, DisjointKept) {
  std::vector<FaceDetection> dets{det(0, 0, 2, 2, 0.1), det(10, 0, 2, 2, 0.5),
                                  det(0, 10, 2, 2, 0.3)};
  const auto kept = nms_indices(dets, 0.0);
  EXPECT_EQ(kept, (std::vector<std::size_t>{1, 2, 0}));
}

TEST(Nms, StableOnEqualConfidence) {
  std::vector<FaceDetection> dets{det(0, 0, 2, 2, 0.5), det(0, 0, 2, 2, 0.5)};
  dets[1].landmarks.push_back({1, 2, 0.3});
  const auto kept = nms(dets, 0.5);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_TRUE(kept[0].landmarks.empty());
}

TEST(Nms, MatchesBruteForce) {
  Engine rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<FaceDetection> dets;
    for (int i = 0; i < 1000; ++i)
      dets.push_back(det(uniform(rng, 0, 640), uniform(rng, 0, 640), uniform(rng, 10, 120),
                         uniform(rng, 10, 120), uniform(rng, 0, 1)));
    const double thr = uniform(rng, 0.3, 0.8);
    EXPECT_EQ(nms_indices(dets, thr), oracle::nms(dets, thr));
    const auto kept = nms(dets, thr);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (i > 0) {
        EXPECT_LE(kept[i].conf, kept[i - 1].conf);
      }
      for (std::size_t j = i + 1; j < kept.size(); ++j)
        EXPECT_LE(box_iou(kept[i].box(), kept[j].box()), thr);
    }
  }
}

TEST(Letterbox, ScaleAndPadding) {
  const Tensor4 img({1, 3, 240, 320}, 0.25f);
  const Letterbox lb = letterbox(img, 640);
  EXPECT_EQ(lb.image.shape(), (Shape4{1, 3, 640, 640}));
  EXPECT_DOUBLE_EQ(lb.scale, 2.0);
  EXPECT_DOUBLE_EQ(lb.pad_x, 0.0);
  EXPECT_DOUBLE_EQ(lb.pad_y, 80.0);
  EXPECT_FLOAT_EQ(lb.image.at(0, 0, 0, 0), 114.0f / 255.0f);
  EXPECT_FLOAT_EQ(lb.image.at(0, 0, 320, 320), 0.25f);
}

TEST(Letterbox, UnletterboxInvertsMapping) {
  const Letterbox lb = letterbox(Tensor4({1, 3, 300, 200}), 640);
  FaceDetection src = det(50, 120, 40, 60, 0.9);
  src.landmarks = {{10, 20, 1.0}, {150, 280, 0.5}};
  FaceDetection net = src;
  net.cx = src.cx * lb.scale + lb.pad_x;
  net.cy = src.cy * lb.scale + lb.pad_y;
  net.w = src.w * lb.scale;
  net.h = src.h * lb.scale;
  for (auto& l : net.landmarks) {
    l.x = l.x * lb.scale + lb.pad_x;
    l.y = l.y * lb.scale + lb.pad_y;
  }
  const FaceDetection back = unletterbox(net, lb);
  EXPECT_NEAR(back.cx, src.cx, 1e-12);
  EXPECT_NEAR(back.cy, src.cy, 1e-12);
  EXPECT_NEAR(back.w, src.w, 1e-12);
  EXPECT_NEAR(back.landmarks[1].x, 150, 1e-12);
  EXPECT_NEAR(back.landmarks[1].y, 280, 1e-12);
  EXPECT_EQ(back.landmarks[1].conf, 0.5);
}
