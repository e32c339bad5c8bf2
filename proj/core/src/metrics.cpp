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

#include "facekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace facekit {

double nme(std::span<const Point2> pred, std::span<const Point2> gt, NmeNormalizer normalizer,
           const Box* gt_box) {
  if (pred.size() != gt.size() || gt.empty())
    throw ShapeError("keypoints", "nme needs equally many predicted and target landmarks");
  double norm = 0.0;
  if (normalizer == NmeNormalizer::OuterEyeCorners) {
    if (gt.size() <= 45) throw ShapeError("keypoints", "eye-corner normalizer needs 68 landmarks");
    norm = std::hypot(gt[45].x - gt[36].x, gt[45].y - gt[36].y);
    if (!(norm > 0.0)) throw DegenerateError("zero interocular distance");
  } else {
    if (!gt_box) throw DomainError("box-size normalizer needs the ground-truth box");
    norm = std::sqrt(gt_box->w * gt_box->h);
    if (!(norm > 0.0)) throw DegenerateError("zero ground-truth box size");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i)
    sum += std::hypot(pred[i].x - gt[i].x, pred[i].y - gt[i].y);
  return 100.0 * sum / (static_cast<double>(gt.size()) * norm);
}

YawBinReport nme_binned(std::span<const NmeRecord> records) {
  YawBinReport r;
  std::array<double, 3> sums{};
  double total = 0.0;
  for (const NmeRecord& rec : records) {
    if (!(rec.abs_yaw >= 0.0 && rec.abs_yaw <= 90.0))
      throw DomainError("absolute yaw must lie in [0, 90]");
    const int bin = rec.abs_yaw < 30.0 ? 0 : rec.abs_yaw < 60.0 ? 1 : 2;
    sums[bin] += rec.nme;
    ++r.bin_count[bin];
    total += rec.nme;
  }
  double of_bins = 0.0;
  int populated = 0;
  for (int b = 0; b < 3; ++b) {
    if (r.bin_count[b] == 0) continue;
    r.bin_mean[b] = sums[b] / r.bin_count[b];
    of_bins += *r.bin_mean[b];
    ++populated;
  }
  if (populated > 0) {
    r.mean_of_bins = of_bins / populated;
    r.pooled_mean = total / static_cast<double>(records.size());
  }
  return r;
}

double average_precision_at(std::span<const ScoredBox> preds, std::span<const GtBox> gts,
                            double iou_threshold) {
  if (gts.empty()) return 0.0;
  std::map<int, std::vector<std::size_t>> gt_by_image;
  for (std::size_t g = 0; g < gts.size(); ++g) gt_by_image[gts[g].image].push_back(g);

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].conf > preds[b].conf; });

  // Greedy matching is per image, but processing all predictions in global
  // confidence order gives the same per-image order.
  std::vector<char> used(gts.size(), 0);
  std::vector<char> tp(order.size(), 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const ScoredBox& p = preds[order[k]];
    auto it = gt_by_image.find(p.image);
    if (it == gt_by_image.end()) continue;
    double best = iou_threshold;
    long match = -1;
    for (std::size_t g : it->second) {
      if (used[g]) continue;
      const double v = box_iou(p.box, gts[g].box);
      if (v >= best) {
        best = v;
        match = static_cast<long>(g);
      }
    }
    if (match >= 0) {
      used[match] = 1;
      tp[k] = 1;
    }
  }

  const std::size_t n = order.size();
  std::vector<double> recall(n), precision(n);
  double ctp = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ctp += tp[k];
    recall[k] = ctp / static_cast<double>(gts.size());
    precision[k] = ctp / static_cast<double>(k + 1);
  }
  for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  double ap = 0.0;
  for (int r = 0; r <= 100; ++r) {
    const double level = r / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), level);
    if (it != recall.end()) ap += precision[it - recall.begin()];
  }
  return ap / 101.0;
}

ApResult average_precision(std::span<const ScoredBox> preds, std::span<const GtBox> gts) {
  ApResult r;
  double sum = 0.0;
  for (int i = 0; i < 10; ++i) {
    r.per_iou[i] = average_precision_at(preds, gts, 0.5 + 0.05 * i);
    sum += r.per_iou[i];
  }
  r.ap50 = r.per_iou[0];
  r.map = sum / 10.0;
  return r;
}

AmeResult ame(std::span<const Angles> pred, std::span<const Angles> gt) {
  if (pred.size() != gt.size()) throw ShapeError("angles", "ame needs equally long angle lists");
  AmeResult r;
  r.count = static_cast<int>(gt.size());
  if (gt.empty()) return r;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    r.yaw += angle_diff_deg(pred[i].yaw, gt[i].yaw);
    r.pitch += angle_diff_deg(pred[i].pitch, gt[i].pitch);
    r.roll += angle_diff_deg(pred[i].roll, gt[i].roll);
  }
  const double n = static_cast<double>(gt.size());
  r.yaw /= n;
  r.pitch /= n;
  r.roll /= n;
  r.mean = (r.yaw + r.pitch + r.roll) / 3.0;
  return r;
}

EvalReport evaluate(const std::vector<AnnotationRecord>& dataset,
                    const std::vector<PredictionRecord>& predictions, const EvalOptions& opts) {
  std::map<std::string, std::size_t> gt_index;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (!gt_index.emplace(dataset[i].image_id, i).second)
      throw DomainError("duplicate ground-truth image id '" + dataset[i].image_id + "'");
  std::map<std::string, std::size_t> pred_index;
  EvalReport rep;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const std::string& id = predictions[i].image_id;
    if (!gt_index.count(id)) {
      rep.unmatched_prediction_ids.push_back(id);
      continue;
    }
    if (!pred_index.emplace(id, i).second)
      throw DomainError("duplicate prediction image id '" + id + "'");
  }

  std::vector<ScoredBox> scored;
  std::vector<GtBox> gtboxes;
  std::vector<NmeRecord> binned;
  std::vector<double> all_nme;
  std::vector<Angles> ame_pred, ame_gt;

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const AnnotationRecord& g = dataset[i];
    ImageEval img;
    img.image_id = g.image_id;
    img.gt_faces = static_cast<int>(g.faces.size());
    std::vector<FaceTarget> gt_px;
    for (const AnnotatedFace& f : g.faces) {
      gt_px.push_back(to_pixels(f, g.width, g.height));
      gtboxes.push_back({static_cast<int>(i), gt_px.back().box});
    }

    auto pit = pred_index.find(g.image_id);
    if (pit == pred_index.end()) {
      rep.missing_prediction_ids.push_back(g.image_id);
      rep.per_image.push_back(img);
      continue;
    }
    const PredictionRecord& p = predictions[pit->second];
    if (p.width != g.width || p.height != g.height)
      throw DomainError("image '" + g.image_id + "' has different sizes in predictions and ground truth");
    img.pred_faces = static_cast<int>(p.faces.size());
    std::vector<FaceDetection> det;
    for (const PredictedFace& f : p.faces) {
      det.push_back(to_pixels(f, p.width, p.height));
      scored.push_back({static_cast<int>(i), det.back().box(), f.conf});
    }

    std::vector<std::size_t> order(det.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return det[a].conf > det[b].conf; });
    std::vector<char> used(gt_px.size(), 0);
    double img_sum = 0.0;
    int img_n = 0;
    for (std::size_t k : order) {
      double best = opts.match_iou;
      long match = -1;
      for (std::size_t gi = 0; gi < gt_px.size(); ++gi) {
        if (used[gi]) continue;
        const double v = box_iou(det[k].box(), gt_px[gi].box);
        if (v >= best) {
          best = v;
          match = static_cast<long>(gi);
        }
      }
      if (match < 0) continue;
      used[match] = 1;
      ++img.matched;
      std::vector<Point2> pk;
      for (const Landmark& l : det[k].landmarks) pk.push_back({l.x, l.y});
      const double e = nme(pk, gt_px[match].keypoints, opts.normalizer, &gt_px[match].box);
      if (opts.exclude_outliers && e > opts.outlier_nme) {
        ++rep.excluded;
        continue;
      }
      img_sum += e;
      ++img_n;
      all_nme.push_back(e);
      const AnnotatedFace& gf = g.faces[match];
      if (gf.angles) {
        binned.push_back({e, std::min(std::abs(gf.angles->yaw), 90.0)});
        if (p.faces[k].angles) {
          ame_pred.push_back(*p.faces[k].angles);
          ame_gt.push_back(*gf.angles);
        }
      }
    }
    if (img_n > 0) img.nme = img_sum / img_n;
    rep.pred_faces += img.pred_faces;
    rep.matched += img.matched;
    rep.per_image.push_back(img);
  }

  rep.images = static_cast<int>(dataset.size());
  rep.gt_faces = static_cast<int>(gtboxes.size());
  if (!all_nme.empty())
    rep.nme_mean = std::accumulate(all_nme.begin(), all_nme.end(), 0.0) /
                   static_cast<double>(all_nme.size());
  rep.nme_bins = nme_binned(binned);
  const ApResult ap = average_precision(scored, gtboxes);
  rep.ap50 = ap.ap50;
  rep.map_coco = ap.map;
  if (!ame_gt.empty()) rep.ame = ame(ame_pred, ame_gt);
  return rep;
}

namespace {

std::string num(double v, const char* f) {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string opt(const std::optional<double>& v, const char* f) {
  return v ? num(*v, f) : "absent";
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

}  // namespace

std::string format_report_text(const EvalReport& r) {
  std::ostringstream s;
  const char* f = "%.4f";
  s << "images        " << r.images << '\n'
    << "gt faces      " << r.gt_faces << '\n'
    << "pred faces    " << r.pred_faces << '\n'
    << "matched       " << r.matched << " (excluded " << r.excluded << ")\n"
    << "NME mean      " << opt(r.nme_mean, f) << '\n'
    << "NME [0,30)    " << opt(r.nme_bins.bin_mean[0], f) << "  n=" << r.nme_bins.bin_count[0] << '\n'
    << "NME [30,60)   " << opt(r.nme_bins.bin_mean[1], f) << "  n=" << r.nme_bins.bin_count[1] << '\n'
    << "NME [60,90]   " << opt(r.nme_bins.bin_mean[2], f) << "  n=" << r.nme_bins.bin_count[2] << '\n'
    << "NME bin mean  " << opt(r.nme_bins.mean_of_bins, f) << '\n'
    << "NME pooled    " << opt(r.nme_bins.pooled_mean, f) << '\n'
    << "AP50          " << num(r.ap50, f) << '\n'
    << "mAP .50:.95   " << num(r.map_coco, f) << '\n';
  if (r.ame) {
    s << "AME yaw       " << num(r.ame->yaw, f) << '\n'
      << "AME pitch     " << num(r.ame->pitch, f) << '\n'
      << "AME roll      " << num(r.ame->roll, f) << '\n'
      << "AME mean      " << num(r.ame->mean, f) << '\n';
  } else {
    s << "AME           absent\n";
  }
  if (!r.unmatched_prediction_ids.empty())
    s << "unmatched prediction ids: " << join(r.unmatched_prediction_ids) << '\n';
  if (!r.missing_prediction_ids.empty())
    s << "images without predictions: " << r.missing_prediction_ids.size() << '\n';
  return s.str();
}

std::string format_report_kv(const EvalReport& r) {
  std::ostringstream s;
  const char* f = "%.17g";
  s << "images=" << r.images << '\n'
    << "gt_faces=" << r.gt_faces << '\n'
    << "pred_faces=" << r.pred_faces << '\n'
    << "matched=" << r.matched << '\n'
    << "excluded=" << r.excluded << '\n'
    << "nme_mean=" << opt(r.nme_mean, f) << '\n'
    << "nme_bin_0_30=" << opt(r.nme_bins.bin_mean[0], f) << '\n'
    << "nme_bin_30_60=" << opt(r.nme_bins.bin_mean[1], f) << '\n'
    << "nme_bin_60_90=" << opt(r.nme_bins.bin_mean[2], f) << '\n'
    << "nme_bin_count_0_30=" << r.nme_bins.bin_count[0] << '\n'
    << "nme_bin_count_30_60=" << r.nme_bins.bin_count[1] << '\n'
    << "nme_bin_count_60_90=" << r.nme_bins.bin_count[2] << '\n'
    << "nme_mean_of_bins=" << opt(r.nme_bins.mean_of_bins, f) << '\n'
    << "nme_pooled=" << opt(r.nme_bins.pooled_mean, f) << '\n'
    << "ap50=" << num(r.ap50, f) << '\n'
    << "map=" << num(r.map_coco, f) << '\n';
  if (r.ame) {
    s << "ame_yaw=" << num(r.ame->yaw, f) << '\n'
      << "ame_pitch=" << num(r.ame->pitch, f) << '\n'
      << "ame_roll=" << num(r.ame->roll, f) << '\n'
      << "ame_mean=" << num(r.ame->mean, f) << '\n';
  } else {
    s << "ame_mean=absent\n";
  }
  s << "unmatched_prediction_ids=" << join(r.unmatched_prediction_ids) << '\n'
    << "missing_prediction_ids=" << join(r.missing_prediction_ids) << '\n';
  return s.str();
}

}  // namespace facekit
