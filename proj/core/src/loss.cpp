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

#include "facekit/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "facekit/postprocess.hpp"

namespace facekit {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

bool clamped(double p) { return p < kProbClamp || p > 1.0 - kProbClamp; }

}  // namespace

ScalarLoss vfl(double p, double q, const VflParams& params) {
  if (!(params.alpha >= 0.0) || !(params.gamma >= 0.0))
    throw DomainError("vfl alpha and gamma must be >= 0");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("vfl target q must lie in [0, 1]");
  const double pc = clamp_prob(p);
  ScalarLoss out;
  if (q > 0.0) {
    out.value = -q * (q * std::log(pc) + (1.0 - q) * std::log(1.0 - pc));
    out.grad = -q * (q / pc - (1.0 - q) / (1.0 - pc));
  } else {
    const double pg = std::pow(pc, params.gamma);
    const double l1p = std::log(1.0 - pc);
    out.value = -params.alpha * pg * l1p;
    const double dpg = params.gamma == 0.0 ? 0.0 : params.gamma * std::pow(pc, params.gamma - 1.0);
    out.grad = -params.alpha * (dpg * l1p - pg / (1.0 - pc));
  }
  if (clamped(p)) out.grad = 0.0;
  return out;
}

namespace {

void check_box(const Box& b, const char* which) {
  if (!(b.w > 0.0) || !(b.h > 0.0))
    throw DegenerateError(std::string(which) + " box must have positive width and height");
}

// Pieces of the CIoU expression and their partials w.r.t. prediction corners
// (x1, y1, x2, y2) or, for v, w.r.t. (w, h).
struct CiouParts {
  double iou, rho2, c2, v;
  std::array<double, 4> d_iou{};  // w.r.t. corners
  std::array<double, 4> d_c2{};   // w.r.t. corners
  std::array<double, 2> d_v{};    // w.r.t. w, h
};

CiouParts ciou_parts(const Box& p, const Box& g) {
  CiouParts r{};
  const double px1 = p.x1(), py1 = p.y1(), px2 = p.x2(), py2 = p.y2();
  const double gx1 = g.x1(), gy1 = g.y1(), gx2 = g.x2(), gy2 = g.y2();

  const double iw = std::min(px2, gx2) - std::max(px1, gx1);
  const double ih = std::min(py2, gy2) - std::max(py1, gy1);
  const double ap = p.w * p.h;
  const double ag = g.w * g.h;
  double inter = 0.0;
  std::array<double, 4> d_inter{};
  if (iw > 0.0 && ih > 0.0) {
    inter = iw * ih;
    d_inter[0] = px1 > gx1 ? -ih : 0.0;
    d_inter[2] = px2 < gx2 ? ih : 0.0;
    d_inter[1] = py1 > gy1 ? -iw : 0.0;
    d_inter[3] = py2 < gy2 ? iw : 0.0;
  }
  const std::array<double, 4> d_ap{-p.h, -p.w, p.h, p.w};
  const double uni = ap + ag - inter;
  r.iou = inter / uni;
  for (int k = 0; k < 4; ++k)
    r.d_iou[k] = (d_inter[k] * uni - inter * (d_ap[k] - d_inter[k])) / (uni * uni);

  const double cw = std::max(px2, gx2) - std::min(px1, gx1);
  const double ch = std::max(py2, gy2) - std::min(py1, gy1);
  r.c2 = cw * cw + ch * ch;
  r.d_c2[0] = px1 < gx1 ? -2.0 * cw : 0.0;
  r.d_c2[2] = px2 > gx2 ? 2.0 * cw : 0.0;
  r.d_c2[1] = py1 < gy1 ? -2.0 * ch : 0.0;
  r.d_c2[3] = py2 > gy2 ? 2.0 * ch : 0.0;

  const double dx = p.cx - g.cx, dy = p.cy - g.cy;
  r.rho2 = dx * dx + dy * dy;

  const double k = 4.0 / (std::numbers::pi * std::numbers::pi);
  const double diff = std::atan(g.w / g.h) - std::atan(p.w / p.h);
  r.v = k * diff * diff;
  const double n2 = p.w * p.w + p.h * p.h;
  r.d_v[0] = k * 2.0 * diff * (-p.h / n2);
  r.d_v[1] = k * 2.0 * diff * (p.w / n2);
  return r;
}

}  // namespace

double ciou(const Box& pred, const Box& gt) {
  check_box(pred, "predicted");
  check_box(gt, "target");
  const CiouParts c = ciou_parts(pred, gt);
  const double den = c.v - c.iou + 1.0;
  const double alpha = den > 0.0 ? c.v / den : 0.0;
  return c.iou - c.rho2 / c.c2 - alpha * c.v;
}

BoxLoss ciou_loss(const Box& pred, const Box& gt) {
  check_box(pred, "predicted");
  check_box(gt, "target");
  const CiouParts c = ciou_parts(pred, gt);
  // L = 1 - iou + rho2/c2 + v^2/den with den = v - iou + 1 (alpha = v/den).
  const double den = c.v - c.iou + 1.0;
  double g_iou = -1.0, g_v = 0.0, av = 0.0;
  if (den > 0.0) {
    av = c.v * c.v / den;
    g_iou += c.v * c.v / (den * den);
    g_v = c.v * (2.0 * den - c.v) / (den * den);
  }
  const double g_rho2 = 1.0 / c.c2;
  const double g_c2 = -c.rho2 / (c.c2 * c.c2);

  BoxLoss out;
  out.value = 1.0 - c.iou + c.rho2 / c.c2 + av;

  std::array<double, 4> g_corner{};
  for (int k = 0; k < 4; ++k) g_corner[k] = g_iou * c.d_iou[k] + g_c2 * c.d_c2[k];
  // x1 = cx - w/2, x2 = cx + w/2 (same for y).
  out.grad[0] = g_corner[0] + g_corner[2] + g_rho2 * 2.0 * (pred.cx - gt.cx);
  out.grad[1] = g_corner[1] + g_corner[3] + g_rho2 * 2.0 * (pred.cy - gt.cy);
  out.grad[2] = 0.5 * (g_corner[2] - g_corner[0]) + g_v * c.d_v[0];
  out.grad[3] = 0.5 * (g_corner[3] - g_corner[1]) + g_v * c.d_v[1];
  return out;
}

VectorLoss dfl_loss(std::span<const double> logits, double target) {
  const int n = static_cast<int>(logits.size());
  if (n < 2) throw ShapeError("reg_max", "dfl_loss needs >= 2 bins");
  if (!(target >= 0.0 && target <= n - 1))
    throw DomainError("dfl target " + std::to_string(target) + " outside [0, " +
                      std::to_string(n - 1) + "]");
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  const double lse = m + std::log(z);

  // Left bin floor(t), right bin floor(t) + 1; an integer target puts all
  // weight on the left bin.
  int l = static_cast<int>(std::floor(target));
  int r = l + 1;
  double wl = r - target;
  double wr = target - l;
  if (l >= n - 1) {
    l = r = n - 1;
    wl = 1.0;
    wr = 0.0;
  }

  VectorLoss out;
  out.grad.assign(n, 0.0);
  const double log_floor = std::log(kProbClamp);
  auto term = [&](int bin, double w) {
    if (w == 0.0) return;
    const double lp = logits[bin] - lse;
    if (lp < log_floor) {
      out.value -= w * log_floor;
      return;
    }
    out.value -= w * lp;
    for (int i = 0; i < n; ++i) out.grad[i] += w * std::exp(logits[i] - lse);
    out.grad[bin] -= w;
  };
  term(l, wl);
  term(r, wr);
  return out;
}

void OksConfig::validate(std::size_t keypoints) const {
  if (falloff.size() != keypoints)
    throw ShapeError("keypoints", "OKS falloff has " + std::to_string(falloff.size()) +
                                      " entries for " + std::to_string(keypoints) + " keypoints");
  for (double k : falloff)
    if (!(k > 0.0)) throw DomainError("OKS falloff constants must be > 0");
}

VectorLoss oks(std::span<const Point2> pred, std::span<const Point2> gt, std::span<const int> vis,
               double scale, const OksConfig& cfg) {
  if (pred.size() != gt.size() || vis.size() != gt.size())
    throw ShapeError("keypoints", "oks needs equally many predicted, target and visibility entries");
  cfg.validate(gt.size());
  if (!(scale > 0.0)) throw DomainError("oks scale must be > 0");
  int visible = 0;
  for (int v : vis) visible += v > cfg.vis_threshold;
  if (visible == 0) throw DomainError("oks undefined without visible keypoints");

  VectorLoss out;
  out.grad.assign(2 * pred.size(), 0.0);
  const double s2 = scale * scale;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(vis[i] > cfg.vis_threshold)) continue;
    const double k2 = cfg.falloff[i] * cfg.falloff[i];
    const double dx = pred[i].x - gt[i].x, dy = pred[i].y - gt[i].y;
    const double e = std::exp(-(dx * dx + dy * dy) / (2.0 * s2 * k2));
    out.value += e;
    out.grad[2 * i] = -e * dx / (s2 * k2);
    out.grad[2 * i + 1] = -e * dy / (s2 * k2);
  }
  out.value /= visible;
  for (double& g : out.grad) g /= visible;
  return out;
}

VectorLoss kpts_loss(std::span<const Point2> pred, std::span<const Point2> gt,
                     std::span<const int> vis, double scale, const OksConfig& cfg) {
  VectorLoss out = oks(pred, gt, vis, scale, cfg);
  out.value = 1.0 - out.value;
  for (double& g : out.grad) g = -g;
  return out;
}

VectorLoss kobj_loss(std::span<const double> logits, std::span<const int> vis) {
  if (logits.empty() || logits.size() != vis.size())
    throw ShapeError("keypoints", "kobj_loss needs one visibility flag per logit");
  const double n = static_cast<double>(logits.size());
  VectorLoss out;
  out.grad.assign(logits.size(), 0.0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double y = vis[i] > 0 ? 1.0 : 0.0;
    const double s = sigmoid(logits[i]);
    const double sc = clamp_prob(s);
    out.value -= (y * std::log(sc) + (1.0 - y) * std::log(1.0 - sc)) / n;
    if (!clamped(s)) out.grad[i] = (s - y) / n;
  }
  return out;
}

void LossWeights::validate() const {
  for (double w : {cls, box, dfl, kpts, kobj})
    if (!(w >= 0.0)) throw DomainError("loss weights must be >= 0");
}

void MatchedSample::validate() const {
  if (stride <= 0) throw DomainError("sample stride must be > 0");
  if (bin_logits.size() % 4 != 0 || bin_logits.size() < 8)
    throw ShapeError("reg_max", "bin logits must hold 4 * reg_max values");
  if (kpt_raw.size() % 3 != 0) throw ShapeError("keypoints", "keypoint raw values must be 3 * K");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("sample q must lie in [0, 1]");
  if (!positive) return;
  const std::size_t k = kpt_raw.size() / 3;
  if (target_kpts.size() != k || target_vis.size() != k)
    throw ShapeError("keypoints", "target keypoints/visibility must match predicted K");
  for (int v : target_vis)
    if (v < 0 || v > 2) throw DomainError("visibility flags must be 0, 1 or 2");
}

Box MatchedSample::predicted_box() const {
  const int rm = reg_max();
  const std::span<const double> bins(bin_logits);
  double d[4];
  for (int side = 0; side < 4; ++side) d[side] = dfl_decode(bins.subspan(side * rm, rm)) * stride;
  const double ax = anchor_x(cell_x, stride), ay = anchor_y(cell_y, stride);
  return box_from_corners(ax - d[0], ay - d[1], ax + d[2], ay + d[3]);
}

std::vector<Point2> MatchedSample::predicted_kpts() const {
  std::vector<Point2> out(num_keypoints());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].x = keypoint_x(kpt_raw[3 * k], cell_x, stride);
    out[k].y = keypoint_y(kpt_raw[3 * k + 1], cell_y, stride);
  }
  return out;
}

LossBreakdown total_loss(std::span<const MatchedSample> samples, const LossOptions& opts) {
  opts.weights.validate();
  LossBreakdown out;
  for (const MatchedSample& s : samples) {
    s.validate();
    ++out.samples;
    out.cls += vfl(sigmoid(s.face_logit), s.positive ? s.q : 0.0, opts.vfl).value;
    if (!s.positive) continue;
    ++out.positives;
    out.box += ciou_loss(s.predicted_box(), s.target_box).value;

    // Side distances of the target from the anchor, in stride units; the four
    // sides are averaged.
    const int rm = s.reg_max();
    const double ax = anchor_x(s.cell_x, s.stride), ay = anchor_y(s.cell_y, s.stride);
    const double t[4] = {ax - s.target_box.x1(), ay - s.target_box.y1(), s.target_box.x2() - ax,
                         s.target_box.y2() - ay};
    const std::span<const double> bins(s.bin_logits);
    double dfl = 0.0;
    for (int side = 0; side < 4; ++side) {
      const double ts = std::clamp(t[side] / s.stride, 0.0, rm - 1.0);
      dfl += dfl_loss(bins.subspan(side * rm, rm), ts).value;
    }
    out.dfl += dfl / 4.0;

    const std::vector<Point2> pk = s.predicted_kpts();
    out.kpts += kpts_loss(pk, s.target_kpts, s.target_vis, std::sqrt(s.target_box.area()), opts.oks)
                    .value;
    std::vector<double> conf(s.num_keypoints());
    for (std::size_t k = 0; k < conf.size(); ++k) conf[k] = s.kpt_raw[3 * k + 2];
    out.kobj += kobj_loss(conf, s.target_vis).value;
  }
  if (opts.reduction == Reduction::Mean) {
    if (out.samples > 0) out.cls /= out.samples;
    if (out.positives > 0) {
      out.box /= out.positives;
      out.dfl /= out.positives;
      out.kpts /= out.positives;
      out.kobj /= out.positives;
    }
  }
  const LossWeights& w = opts.weights;
  out.total = w.cls * out.cls + w.box * out.box + w.dfl * out.dfl + w.kpts * out.kpts +
              w.kobj * out.kobj;
  return out;
}

std::vector<MatchedSample> assign_targets(std::span<const FaceTarget> faces,
                                          const GridGeometry& grid, const HeadOutputs* preds,
                                          int batch_index) {
  if (grid.strides.empty()) throw DomainError("grid needs at least one stride");
  for (int s : grid.strides)
    if (s <= 0 || grid.image_side % s != 0)
      throw ShapeError("imgsz", "image side " + std::to_string(grid.image_side) +
                                    " is not a multiple of stride " + std::to_string(s));
  for (const FaceTarget& f : faces) {
    if (!(f.box.w > 0.0) || !(f.box.h > 0.0))
      throw DegenerateError("target face box must have positive size");
    if (static_cast<int>(f.keypoints.size()) != grid.num_keypoints ||
        f.visibility.size() != f.keypoints.size())
      throw ShapeError("keypoints", "target face must carry " +
                                        std::to_string(grid.num_keypoints) + " keypoints");
  }
  if (preds) {
    if (preds->reg_max != grid.reg_max || preds->num_keypoints != grid.num_keypoints ||
        preds->scales.size() != grid.strides.size())
      throw ShapeError("head", "head outputs do not match grid geometry");
    for (std::size_t si = 0; si < grid.strides.size(); ++si) {
      const HeadScale& sc = preds->scales[si];
      const int g = grid.image_side / grid.strides[si];
      if (sc.stride != grid.strides[si] || sc.face_logit.height() != g ||
          sc.face_logit.width() != g)
        throw ShapeError("grid", "head scale " + std::to_string(si) + " does not match grid");
      if (batch_index < 0 || batch_index >= sc.face_logit.batch())
        throw ShapeError("batch", "batch index out of range");
    }
  }

  // owner[si][i * g + j] = face index or -1
  std::vector<std::vector<int>> owner(grid.strides.size());
  std::vector<int> hits(faces.size(), 0);
  for (std::size_t si = 0; si < grid.strides.size(); ++si) {
    const int s = grid.strides[si];
    const int g = grid.image_side / s;
    owner[si].assign(static_cast<std::size_t>(g) * g, -1);
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < g; ++j) {
        const double ax = anchor_x(j, s), ay = anchor_y(i, s);
        int best = -1;
        for (std::size_t f = 0; f < faces.size(); ++f) {
          const Box& b = faces[f].box;
          if (std::abs(ax - b.cx) > 0.25 * b.w || std::abs(ay - b.cy) > 0.25 * b.h) continue;
          if (best < 0 || b.area() < faces[best].box.area()) best = static_cast<int>(f);
        }
        owner[si][static_cast<std::size_t>(i) * g + j] = best;
        if (best >= 0) ++hits[best];
      }
    }
  }
  const std::size_t fine =
      std::min_element(grid.strides.begin(), grid.strides.end()) - grid.strides.begin();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (hits[f] > 0) continue;
    const int s = grid.strides[fine];
    const int g = grid.image_side / s;
    const int j = std::clamp(static_cast<int>(std::floor(faces[f].box.cx / s)), 0, g - 1);
    const int i = std::clamp(static_cast<int>(std::floor(faces[f].box.cy / s)), 0, g - 1);
    int& o = owner[fine][static_cast<std::size_t>(i) * g + j];
    if (o < 0 || faces[f].box.area() < faces[o].box.area()) o = static_cast<int>(f);
  }

  std::vector<MatchedSample> out;
  const int k = grid.num_keypoints;
  for (std::size_t si = 0; si < grid.strides.size(); ++si) {
    const int s = grid.strides[si];
    const int g = grid.image_side / s;
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < g; ++j) {
        const int o = owner[si][static_cast<std::size_t>(i) * g + j];
        if (o < 0 && !grid.include_negatives) continue;
        MatchedSample m;
        m.stride = s;
        m.cell_x = j;
        m.cell_y = i;
        m.gt_index = o;
        m.positive = o >= 0;
        m.bin_logits.assign(4 * grid.reg_max, 0.0);
        m.kpt_raw.assign(3 * k, 0.0);
        if (preds) {
          const HeadScale& sc = preds->scales[si];
          for (int c = 0; c < 4 * grid.reg_max; ++c)
            m.bin_logits[c] = sc.box_logits.at(batch_index, c, i, j);
          m.face_logit = sc.face_logit.at(batch_index, 0, i, j);
          for (int c = 0; c < 3 * k; ++c) m.kpt_raw[c] = sc.kpt_raw.at(batch_index, c, i, j);
        }
        if (m.positive) {
          const FaceTarget& f = faces[o];
          m.target_box = f.box;
          m.target_kpts = f.keypoints;
          m.target_vis = f.visibility;
          m.q = box_iou(m.predicted_box(), f.box);
        }
        out.push_back(std::move(m));
      }
    }
  }
  return out;
}

}  // namespace facekit
