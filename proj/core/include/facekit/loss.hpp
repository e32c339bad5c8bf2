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

// Five-term face/landmark objective over matched prediction/target pairs.
// Everything here is double precision and returns analytic gradients with
// respect to the prediction side so that values can be checked numerically.

#include <array>
#include <span>
#include <vector>

#include "facekit/geometry.hpp"
#include "facekit/netgraph.hpp"

namespace facekit {

inline constexpr double kProbClamp = 1e-7;

struct VflParams {
  double alpha = 0.75;
  double gamma = 2.0;
};

struct ScalarLoss {
  double value = 0.0;
  double grad = 0.0;
};

/// Loss with gradient over a vector of inputs.
struct VectorLoss {
  double value = 0.0;
  std::vector<double> grad;
};

struct BoxLoss {
  double value = 0.0;
  std::array<double, 4> grad{};  // d/d(cx, cy, w, h) of the prediction
};

/// Varifocal loss on probability p against quality target q; grad is dL/dp.
ScalarLoss vfl(double p, double q, const VflParams& params = {});

/// 1 - CIoU(pred, gt). Throws DegenerateError on a non-positive width or height.
BoxLoss ciou_loss(const Box& pred, const Box& gt);

/// Plain CIoU value (IoU - rho^2/c^2 - alpha v).
double ciou(const Box& pred, const Box& gt);

/// Interpolated cross-entropy on the two bins around target; grad is w.r.t. logits.
VectorLoss dfl_loss(std::span<const double> bin_logits, double target);

struct OksConfig {
  std::vector<double> falloff = std::vector<double>(68, 0.025);
  double vis_threshold = 0.0;

  void validate(std::size_t keypoints) const;
};

/// Object keypoint similarity; grad is w.r.t. predicted coordinates laid out
/// as x0, y0, x1, y1, ...
VectorLoss oks(std::span<const Point2> pred, std::span<const Point2> gt,
               std::span<const int> vis, double scale, const OksConfig& cfg = {});

/// 1 - OKS for one matched face.
VectorLoss kpts_loss(std::span<const Point2> pred, std::span<const Point2> gt,
                     std::span<const int> vis, double scale, const OksConfig& cfg = {});

/// Mean BCE between sigmoid(logit) and the visibility indicator; grad w.r.t. logits.
VectorLoss kobj_loss(std::span<const double> conf_logits, std::span<const int> vis);

struct LossWeights {
  double cls = 0.5;
  double box = 7.5;
  double dfl = 1.5;
  double kpts = 12.0;
  double kobj = 1.0;

  void validate() const;
};

enum class Reduction { Sum, Mean };

struct MatchedSample {
  int stride = 8;
  int cell_x = 0;
  int cell_y = 0;
  int gt_index = -1;
  bool positive = true;

  std::vector<double> bin_logits;  // 4 * reg_max, sides ordered l, t, r, b
  double face_logit = 0.0;
  std::vector<double> kpt_raw;     // 3 * K: raw x, raw y, conf logit

  Box target_box;
  double q = 0.0;
  std::vector<Point2> target_kpts;
  std::vector<int> target_vis;

  int reg_max() const { return static_cast<int>(bin_logits.size() / 4); }
  int num_keypoints() const { return static_cast<int>(kpt_raw.size() / 3); }
  Box predicted_box() const;
  std::vector<Point2> predicted_kpts() const;
  void validate() const;
};

struct LossOptions {
  LossWeights weights;
  VflParams vfl;
  OksConfig oks;
  Reduction reduction = Reduction::Sum;
};

struct LossBreakdown {
  double cls = 0.0;  // unweighted per-term totals
  double box = 0.0;
  double dfl = 0.0;
  double kpts = 0.0;
  double kobj = 0.0;
  double total = 0.0;  // weighted sum
  int positives = 0;
  int samples = 0;
};

LossBreakdown total_loss(std::span<const MatchedSample> samples, const LossOptions& opts = {});

/// Ground-truth face in network-input pixels.
struct FaceTarget {
  Box box;
  std::vector<Point2> keypoints;
  std::vector<int> visibility;
};

struct GridGeometry {
  int image_side = 640;
  std::vector<int> strides{8, 16, 32};
  int reg_max = 16;
  int num_keypoints = 68;
  bool include_negatives = false;
};

/// Center-prior assignment. A cell is positive for a face when its anchor
/// lies in the central half (in each axis) of the face box; cells claimed by
/// several faces go to the smallest one. A face with no positive cell gets the
/// cell containing its center at the finest stride. When `preds` is given the
/// sample carries the head's activations for that cell, otherwise zeros.
std::vector<MatchedSample> assign_targets(std::span<const FaceTarget> faces,
                                          const GridGeometry& grid,
                                          const HeadOutputs* preds = nullptr,
                                          int batch_index = 0);

}  // namespace facekit
