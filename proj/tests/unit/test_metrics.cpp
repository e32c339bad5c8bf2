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

#include "facekit/dataio.hpp"
#include "facekit/error.hpp"
#include "facekit/metrics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace facekit;
using facekit::fixture::Engine;
using facekit::fixture::uniform;
using facekit::fixture::uniform_int;

namespace {

std::vector<Point2> random_face(Engine& rng) {
  std::vector<Point2> p(68);
  for (auto& q : p) q = {uniform(rng, 100, 300), uniform(rng, 100, 300)};
  p[36] = {150, 180};
  p[45] = {250, 175};
  return p;
}

Box random_box(Engine& rng) {
  return {uniform(rng, 20, 200), uniform(rng, 20, 200), uniform(rng, 10, 80), uniform(rng, 10, 80)};
}

PredictionRecord predict_from(const AnnotationRecord& a) {
  PredictionRecord p{a.image_id, a.width, a.height, {}};
  for (const AnnotatedFace& f : a.faces)
    p.faces.push_back({0, f.box, 0.9, f.keypoints, std::vector<double>(68, 1.0), f.angles});
  return p;
}

}  // namespace

TEST(Nme, Examples) {
  Engine rng(61);
  const auto gt = random_face(rng);
  EXPECT_EQ(nme(gt, gt), 0.0);

  auto moved = gt;
  const double d = std::hypot(gt[45].x - gt[36].x, gt[45].y - gt[36].y);
  moved[10].x += d;
  EXPECT_NEAR(nme(moved, gt), 100.0 / 68.0, 1e-12);
  EXPECT_NEAR(nme(moved, gt), 1.4706, 1e-4);
}

TEST(Nme, MatchesElementwiseOracle) {
  Engine rng(62);
  for (int t = 0; t < 100; ++t) {
    const auto gt = random_face(rng);
    auto pred = gt;
    for (auto& p : pred) p = {p.x + uniform(rng, -5, 5), p.y + uniform(rng, -5, 5)};
    EXPECT_NEAR(nme(pred, gt), oracle::nme_percent(pred, gt), 1e-12);
  }
}

TEST(Nme, SimilarityInvariant) {
  Engine rng(63);
  const auto gt = random_face(rng);
  auto pred = gt;
  for (auto& p : pred) p = {p.x + uniform(rng, -4, 4), p.y + uniform(rng, -4, 4)};
  const double base = nme(pred, gt);
  const double c = std::cos(0.7), s = std::sin(0.7), k = 2.3;
  auto tf = [&](std::vector<Point2> v) {
    for (auto& p : v) p = {k * (c * p.x - s * p.y) + 17.0, k * (s * p.x + c * p.y) - 40.0};
    return v;
  };
  EXPECT_NEAR(nme(tf(pred), tf(gt)), base, 1e-11);
}

TEST(Nme, BoxNormalizer) {
  Engine rng(64);
  const auto gt = random_face(rng);
  auto pred = gt;
  pred[0].x += 10.0;
  const Box b{200, 200, 100, 64};
  EXPECT_NEAR(nme(pred, gt, NmeNormalizer::BoxSize, &b), 100.0 * 10.0 / 68.0 / 80.0, 1e-12);
  EXPECT_THROW(nme(pred, gt, NmeNormalizer::BoxSize), DomainError);
}

TEST(NmeBinned, FirstBinOnly) {
  const std::vector<NmeRecord> recs{{2.0, 10.0}, {4.0, 10.0}};
  const YawBinReport r = nme_binned(recs);
  ASSERT_TRUE(r.bin_mean[0]);
  EXPECT_FALSE(r.bin_mean[1]);
  EXPECT_FALSE(r.bin_mean[2]);
  EXPECT_EQ(*r.bin_mean[0], 3.0);
}

TEST(NmeBinned, BothPoolingModes) {
  std::vector<NmeRecord> recs;
  for (int i = 0; i < 10; ++i) recs.push_back({2.51, 5.0});
  for (int i = 0; i < 2; ++i) recs.push_back({3.43, 45.0});
  recs.push_back({4.65, 75.0});
  const YawBinReport r = nme_binned(recs);
  EXPECT_NEAR(*r.mean_of_bins, (2.51 + 3.43 + 4.65) / 3.0, 1e-12);
  EXPECT_NEAR(*r.mean_of_bins, 3.53, 1e-2);
  EXPECT_NEAR(*r.pooled_mean, (10 * 2.51 + 2 * 3.43 + 4.65) / 13.0, 1e-12);
  EXPECT_LT(*r.pooled_mean, *r.mean_of_bins);
}

TEST(NmeBinned, SingleRecordModesAgree) {
  const std::vector<NmeRecord> recs{{3.3, 61.0}};
  const YawBinReport r = nme_binned(recs);
  EXPECT_EQ(*r.bin_mean[2], 3.3);
  EXPECT_EQ(*r.mean_of_bins, 3.3);
  EXPECT_EQ(*r.pooled_mean, 3.3);
  EXPECT_FALSE(nme_binned({}).pooled_mean);
}

TEST(AveragePrecision, PerfectAndEmpty) {
  const Box b{50, 50, 20, 20};
  const std::vector<ScoredBox> one{{0, b, 0.9}};
  const std::vector<GtBox> gts{{0, b}};
  const ApResult r = average_precision(one, gts);
  for (double v : r.per_iou) EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_DOUBLE_EQ(r.map, 1.0);
  EXPECT_EQ(average_precision({}, gts).ap50, 0.0);
}

TEST(AveragePrecision, MatchesExhaustiveMatcher) {
  Engine rng(65);
  for (int scene = 0; scene < 50; ++scene) {
    std::vector<GtBox> gts;
    std::vector<ScoredBox> preds;
    for (int g = 0; g < 5; ++g) gts.push_back({uniform_int(rng, 0, 2), random_box(rng)});
    for (int p = 0; p < 20; ++p) {
      Box b = random_box(rng);
      if (p % 2 == 0) {
        b = gts[p % 5].box;
        b.cx += uniform(rng, -4, 4);
        b.w *= uniform(rng, 0.8, 1.2);
      }
      preds.push_back({p % 2 == 0 ? gts[p % 5].image : uniform_int(rng, 0, 2), b, uniform(rng, 0, 1)});
    }
    const ApResult r = average_precision(preds, gts);
    for (int i = 0; i < 10; ++i)
      EXPECT_NEAR(r.per_iou[i], oracle::average_precision(preds, gts, 0.5 + 0.05 * i), 1e-9);
  }
}

TEST(AveragePrecision, MonotoneConfidenceInvariant) {
  Engine rng(66);
  std::vector<GtBox> gts;
  std::vector<ScoredBox> preds;
  for (int g = 0; g < 5; ++g) gts.push_back({0, random_box(rng)});
  for (int p = 0; p < 20; ++p) {
    Box b = gts[p % 5].box;
    b.cy += uniform(rng, -6, 6);
    preds.push_back({0, b, uniform(rng, 0, 1)});
  }
  auto warped = preds;
  for (auto& p : warped) p.conf = std::exp(3.0 * p.conf) - 7.0;
  const ApResult a = average_precision(preds, gts);
  const ApResult b = average_precision(warped, gts);
  EXPECT_EQ(a.per_iou, b.per_iou);
}

TEST(Ame, Examples) {
  const std::vector<Angles> a{{10, 20, 30}};
  EXPECT_EQ(ame(a, a).mean, 0.0);
  const std::vector<Angles> p{{179, 0, 0}}, g{{-179, 0, 0}};
  EXPECT_NEAR(ame(p, g).yaw, 2.0, 1e-12);
  const std::vector<Angles> q{{370, -360, 720}};
  EXPECT_NEAR(ame(q, a).yaw, 0.0, 1e-12);
  EXPECT_NEAR(ame(q, a).mean, (0.0 + 20.0 + 30.0) / 3.0, 1e-12);
}

TEST(Ame, MatchesScalarOracle) {
  Engine rng(67);
  std::vector<Angles> p, g;
  for (int i = 0; i < 200; ++i) {
    p.push_back({uniform(rng, -180, 180), uniform(rng, -90, 90), uniform(rng, -180, 180)});
    g.push_back({uniform(rng, -180, 180), uniform(rng, -90, 90), uniform(rng, -180, 180)});
  }
  double y = 0, pi = 0, r = 0;
  for (int i = 0; i < 200; ++i) {
    y += oracle::wrapped_abs_diff(p[i].yaw, g[i].yaw);
    pi += oracle::wrapped_abs_diff(p[i].pitch, g[i].pitch);
    r += oracle::wrapped_abs_diff(p[i].roll, g[i].roll);
  }
  const AmeResult res = ame(p, g);
  EXPECT_NEAR(res.yaw, y / 200, 1e-12);
  EXPECT_NEAR(res.pitch, pi / 200, 1e-12);
  EXPECT_NEAR(res.roll, r / 200, 1e-12);
  EXPECT_GE(res.mean, 0.0);
}

TEST(Evaluate, PerfectPredictions) {
  SceneSpec scene;
  scene.n_images = 10;
  scene.seed = 3;
  const auto data = generate_synthetic(scene).annotations;
  std::vector<PredictionRecord> preds;
  for (const auto& a : data) preds.push_back(predict_from(a));
  const EvalReport r = evaluate(data, preds);
  EXPECT_EQ(*r.nme_mean, 0.0);
  EXPECT_DOUBLE_EQ(r.ap50, 1.0);
  EXPECT_DOUBLE_EQ(r.map_coco, 1.0);
  ASSERT_TRUE(r.ame);
  EXPECT_EQ(r.ame->mean, 0.0);
  EXPECT_EQ(r.matched, 10);
}

TEST(Evaluate, EmptyPredictions) {
  SceneSpec scene;
  scene.n_images = 4;
  const auto data = generate_synthetic(scene).annotations;
  std::vector<PredictionRecord> preds;
  for (const auto& a : data) preds.push_back({a.image_id, a.width, a.height, {}});
  const EvalReport r = evaluate(data, preds);
  EXPECT_EQ(r.ap50, 0.0);
  EXPECT_FALSE(r.nme_mean);
  EXPECT_EQ(r.gt_faces, 4);
  EXPECT_EQ(r.matched, 0);
}

TEST(Evaluate, ReportsUnmatchedIds) {
  SceneSpec scene;
  scene.n_images = 3;
  const auto data = generate_synthetic(scene).annotations;
  std::vector<PredictionRecord> preds{predict_from(data[0]), {"stray", 640, 640, {}}};
  const EvalReport r = evaluate(data, preds);
  EXPECT_EQ(r.unmatched_prediction_ids, std::vector<std::string>{"stray"});
  EXPECT_EQ(r.missing_prediction_ids, (std::vector<std::string>{data[1].image_id, data[2].image_id}));
}

TEST(Evaluate, MatchesHandAssembledReport) {
  Engine rng(68);
  SceneSpec scene;
  scene.n_images = 50;
  scene.seed = 9;
  const auto data = generate_synthetic(scene).annotations;
  std::vector<PredictionRecord> preds;
  double nme_sum = 0.0;
  double ame_sum[3] = {};
  for (const auto& a : data) {
    PredictionRecord p = predict_from(a);
    PredictedFace& f = p.faces[0];
    for (auto& k : f.keypoints) k = {k.x + uniform(rng, -2, 2) / a.width, k.y + uniform(rng, -2, 2) / a.height};
    f.angles = Angles{a.faces[0].angles->yaw + uniform(rng, -5, 5), a.faces[0].angles->pitch + uniform(rng, -5, 5),
                      a.faces[0].angles->roll + uniform(rng, -5, 5)};
    std::vector<Point2> pp, gp;
    for (int i = 0; i < 68; ++i) {
      pp.push_back({f.keypoints[i].x * a.width, f.keypoints[i].y * a.height});
      gp.push_back({a.faces[0].keypoints[i].x * a.width, a.faces[0].keypoints[i].y * a.height});
    }
    nme_sum += oracle::nme_percent(pp, gp);
    ame_sum[0] += oracle::wrapped_abs_diff(f.angles->yaw, a.faces[0].angles->yaw);
    ame_sum[1] += oracle::wrapped_abs_diff(f.angles->pitch, a.faces[0].angles->pitch);
    ame_sum[2] += oracle::wrapped_abs_diff(f.angles->roll, a.faces[0].angles->roll);
    preds.push_back(p);
  }
  const EvalReport r = evaluate(data, preds);
  EXPECT_NEAR(*r.nme_mean, nme_sum / 50, 1e-10);
  EXPECT_NEAR(r.ame->yaw, ame_sum[0] / 50, 1e-10);
  EXPECT_NEAR(r.ame->pitch, ame_sum[1] / 50, 1e-10);
  EXPECT_NEAR(r.ame->roll, ame_sum[2] / 50, 1e-10);
  EXPECT_DOUBLE_EQ(r.ap50, 1.0);
  EXPECT_EQ(r.matched, 50);
  EXPECT_EQ(r.nme_bins.bin_count[0] + r.nme_bins.bin_count[1] + r.nme_bins.bin_count[2], 50);
}

TEST(Evaluate, OutlierExclusion) {
  SceneSpec scene;
  scene.n_images = 2;
  const auto data = generate_synthetic(scene).annotations;
  std::vector<PredictionRecord> preds{predict_from(data[0]), predict_from(data[1])};
  for (auto& k : preds[1].faces[0].keypoints) k.x += 0.2;
  EvalOptions opts;
  EXPECT_EQ(evaluate(data, preds, opts).excluded, 0);
  opts.exclude_outliers = true;
  const EvalReport r = evaluate(data, preds, opts);
  EXPECT_EQ(r.excluded, 1);
  EXPECT_EQ(*r.nme_mean, 0.0);
}

TEST(Evaluate, FormattersDeterministic) {
  SceneSpec scene;
  scene.n_images = 5;
  const auto data = generate_synthetic(scene).annotations;
  std::vector<PredictionRecord> preds;
  for (const auto& a : data) preds.push_back(predict_from(a));
  const EvalReport r = evaluate(data, preds);
  EXPECT_EQ(format_report_kv(r), format_report_kv(evaluate(data, preds)));
  EXPECT_NE(format_report_kv(r).find("ap50="), std::string::npos);
  EXPECT_NE(format_report_text(r).find("NME"), std::string::npos);
}
