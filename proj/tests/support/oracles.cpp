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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace facekit::oracle {

Tensor4d conv2d(const Tensor4d& x, const ConvParams<double>& p) {
  const int k = p.kernel();
  const int oh = (x.height() + 2 * p.padding - k) / p.stride + 1;
  const int ow = (x.width() + 2 * p.padding - k) / p.stride + 1;
  const int cout = p.out_channels();
  const int cin_g = p.weight.channels();
  const int cout_g = cout / p.groups;
  Tensor4d y({x.batch(), cout, oh, ow});
  for (int n = 0; n < x.batch(); ++n)
    for (int o = 0; o < cout; ++o) {
      const int g = o / cout_g;
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          long double acc = p.has_bias() ? p.bias[o] : 0.0L;
          for (int c = 0; c < cin_g; ++c)
            for (int a = 0; a < k; ++a)
              for (int b = 0; b < k; ++b) {
                const int yy = i * p.stride - p.padding + a;
                const int xx = j * p.stride - p.padding + b;
                if (yy < 0 || xx < 0 || yy >= x.height() || xx >= x.width()) continue;
                acc += static_cast<long double>(p.weight.at(o, c, a, b)) *
                       x.at(n, g * cin_g + c, yy, xx);
              }
          y.at(n, o, i, j) = static_cast<double>(acc);
        }
    }
  return y;
}

Tensor4d conv_bn(const Tensor4d& x, const ConvParams<double>& p,
                 const BatchNormParams<double>& bn) {
  Tensor4d y = conv2d(x, p);
  for (int n = 0; n < y.batch(); ++n)
    for (int c = 0; c < y.channels(); ++c)
      for (double& v : y.plane(n, c))
        v = bn.gamma[c] * (v - bn.running_mean[c]) / std::sqrt(bn.running_var[c] + bn.epsilon) +
            bn.beta[c];
  return y;
}

double iou(const Box& a, const Box& b) {
  const double ax1 = a.cx - a.w / 2, ax2 = a.cx + a.w / 2, ay1 = a.cy - a.h / 2, ay2 = a.cy + a.h / 2;
  const double bx1 = b.cx - b.w / 2, bx2 = b.cx + b.w / 2, by1 = b.cy - b.h / 2, by2 = b.cy + b.h / 2;
  const double iw = std::max(0.0, std::min(ax2, bx2) - std::max(ax1, bx1));
  const double ih = std::max(0.0, std::min(ay2, by2) - std::max(ay1, by1));
  const double inter = iw * ih;
  return inter / (a.w * a.h + b.w * b.h - inter);
}

std::vector<std::size_t> nms(std::span<const FaceDetection> dets, double threshold) {
  std::vector<std::size_t> alive;
  for (std::size_t i = 0; i < dets.size(); ++i) alive.push_back(i);
  std::vector<std::size_t> keep;
  while (!alive.empty()) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < alive.size(); ++k)
      if (dets[alive[k]].conf > dets[alive[best]].conf) best = k;
    const std::size_t top = alive[best];
    keep.push_back(top);
    std::vector<std::size_t> rest;
    for (std::size_t i : alive)
      if (i != top && iou(dets[i].box(), dets[top].box()) <= threshold) rest.push_back(i);
    alive = rest;
  }
  return keep;
}

double average_precision(std::span<const ScoredBox> preds, std::span<const GtBox> gts,
                         double threshold) {
  if (gts.empty()) return 0.0;
  // Rank: descending confidence, input order on ties.
  std::vector<std::size_t> rank(preds.size());
  for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
  for (std::size_t i = 0; i < rank.size(); ++i)
    for (std::size_t j = i + 1; j < rank.size(); ++j)
      if (preds[rank[j]].conf > preds[rank[i]].conf ||
          (preds[rank[j]].conf == preds[rank[i]].conf && rank[j] < rank[i]))
        std::swap(rank[i], rank[j]);

  std::vector<bool> taken(gts.size(), false);
  std::vector<double> prec, rec;
  int tp = 0;
  for (std::size_t r = 0; r < rank.size(); ++r) {
    const ScoredBox& p = preds[rank[r]];
    long match = -1;
    double best = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].image != p.image) continue;
      const double v = iou(p.box, gts[g].box);
      if (v >= threshold && v >= best) {
        best = v;
        match = static_cast<long>(g);
      }
    }
    if (match >= 0) {
      taken[match] = true;
      ++tp;
    }
    prec.push_back(static_cast<double>(tp) / static_cast<double>(r + 1));
    rec.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
  }
  double ap = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double level = i / 100.0;
    double m = 0.0;
    for (std::size_t r = 0; r < rec.size(); ++r)
      if (rec[r] >= level) m = std::max(m, prec[r]);
    ap += m;
  }
  return ap / 101.0;
}

double ciou(const Box& p, const Box& g) {
  const double i = iou(p, g);
  const double ex1 = std::min(p.cx - p.w / 2, g.cx - g.w / 2);
  const double ex2 = std::max(p.cx + p.w / 2, g.cx + g.w / 2);
  const double ey1 = std::min(p.cy - p.h / 2, g.cy - g.h / 2);
  const double ey2 = std::max(p.cy + p.h / 2, g.cy + g.h / 2);
  const double c2 = (ex2 - ex1) * (ex2 - ex1) + (ey2 - ey1) * (ey2 - ey1);
  const double rho2 = (p.cx - g.cx) * (p.cx - g.cx) + (p.cy - g.cy) * (p.cy - g.cy);
  const double v = 4.0 / (std::numbers::pi * std::numbers::pi) *
                   std::pow(std::atan(g.w / g.h) - std::atan(p.w / p.h), 2);
  const double alpha = v == 0.0 ? 0.0 : v / ((1.0 - i) + v);
  return i - rho2 / c2 - alpha * v;
}

double nme_percent(std::span<const Point2> pred, std::span<const Point2> gt) {
  const double d = std::sqrt(std::pow(gt[36].x - gt[45].x, 2) + std::pow(gt[36].y - gt[45].y, 2));
  double s = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i)
    s += std::sqrt(std::pow(pred[i].x - gt[i].x, 2) + std::pow(pred[i].y - gt[i].y, 2)) / d;
  return 100.0 * s / static_cast<double>(gt.size());
}

double wrapped_abs_diff(double a, double b) {
  double d = a - b;
  while (d > 180.0) d -= 360.0;
  while (d < -180.0) d += 360.0;
  return std::abs(d);
}

std::vector<Point2> project(std::span<const Point3> pts, const Mat3& R, const Vec3& t,
                            const CameraIntrinsics& cam) {
  const double k[3][3] = {{cam.fx, 0, cam.cx}, {0, cam.fy, cam.cy}, {0, 0, 1}};
  double rt[3][4];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) rt[i][j] = R[i][j];
    rt[i][3] = t[i];
  }
  double p[3][4] = {};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j)
      for (int m = 0; m < 3; ++m) p[i][j] += k[i][m] * rt[m][j];
  std::vector<Point2> out;
  for (const Point3& x : pts) {
    const double h[4] = {x.x, x.y, x.z, 1.0};
    double u[3] = {};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) u[i] += p[i][j] * h[j];
    out.push_back({u[0] / u[2], u[1] / u[2]});
  }
  return out;
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  double d = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(d) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

}  // namespace facekit::oracle
