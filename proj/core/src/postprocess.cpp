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

#include "facekit/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace facekit {

void DecodeConfig::validate() const {
  if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0))
    throw DomainError("conf_threshold must lie in [0, 1]");
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0))
    throw DomainError("iou_threshold must lie in [0, 1]");
  if (reg_max < 2) throw DomainError("reg_max must be >= 2");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

template <typename T>
double dfl_expectation(std::span<const T> logits) {
  const double m = static_cast<double>(*std::max_element(logits.begin(), logits.end()));
  double z = 0.0, e = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = std::exp(static_cast<double>(logits[i]) - m);
    z += p;
    e += static_cast<double>(i) * p;
  }
  return e / z;
}

}  // namespace

double dfl_decode(std::span<const float> bin_logits) {
  if (bin_logits.size() < 2) throw ShapeError("reg_max", "dfl_decode needs >= 2 bins");
  return dfl_expectation(bin_logits);
}

double dfl_decode(std::span<const double> bin_logits) {
  if (bin_logits.size() < 2) throw ShapeError("reg_max", "dfl_decode needs >= 2 bins");
  return dfl_expectation(bin_logits);
}

std::vector<FaceDetection> decode_boxes(const HeadOutputs& out, const DecodeConfig& cfg,
                                        int batch_index) {
  cfg.validate();
  if (cfg.reg_max != out.reg_max)
    throw ShapeError("reg_max", "decode config reg_max " + std::to_string(cfg.reg_max) +
                                    " does not match head outputs " +
                                    std::to_string(out.reg_max));
  std::vector<FaceDetection> dets;
  std::vector<float> bins(cfg.reg_max);
  for (const HeadScale& sc : out.scales) {
    const int g_h = sc.face_logit.height();
    const int g_w = sc.face_logit.width();
    if (sc.box_logits.channels() != 4 * cfg.reg_max)
      throw ShapeError("channels", "box logits must have 4 * reg_max channels");
    if (sc.kpt_raw.channels() != 3 * out.num_keypoints)
      throw ShapeError("channels", "keypoint tensor must have 3 * K channels");
    if (batch_index < 0 || batch_index >= sc.face_logit.batch())
      throw ShapeError("batch", "batch index out of range");
    const int s = sc.stride;
    for (int i = 0; i < g_h; ++i) {
      for (int j = 0; j < g_w; ++j) {
        const double conf = sigmoid(sc.face_logit.at(batch_index, 0, i, j));
        if (!(conf > cfg.conf_threshold)) continue;
        double dist[4];
        for (int side = 0; side < 4; ++side) {
          for (int b = 0; b < cfg.reg_max; ++b)
            bins[b] = sc.box_logits.at(batch_index, side * cfg.reg_max + b, i, j);
          dist[side] = dfl_decode(std::span<const float>(bins)) * s;
        }
        const double ax = anchor_x(j, s), ay = anchor_y(i, s);
        const double x1 = ax - dist[0], y1 = ay - dist[1];
        const double x2 = ax + dist[2], y2 = ay + dist[3];
        FaceDetection d;
        d.cx = 0.5 * (x1 + x2);
        d.cy = 0.5 * (y1 + y2);
        d.w = x2 - x1;
        d.h = y2 - y1;
        d.conf = conf;
        d.landmarks.resize(out.num_keypoints);
        for (int k = 0; k < out.num_keypoints; ++k) {
          d.landmarks[k].x = keypoint_x(sc.kpt_raw.at(batch_index, 3 * k, i, j), j, s);
          d.landmarks[k].y = keypoint_y(sc.kpt_raw.at(batch_index, 3 * k + 1, i, j), i, s);
          d.landmarks[k].conf = sigmoid(sc.kpt_raw.at(batch_index, 3 * k + 2, i, j));
        }
        dets.push_back(std::move(d));
      }
    }
  }
  return dets;
}

std::vector<std::size_t> nms_indices(std::span<const FaceDetection> dets, double iou_threshold) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&dets](std::size_t a, std::size_t b) { return dets[a].conf > dets[b].conf; });
  std::vector<Box> boxes(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) boxes[i] = dets[i].box();

  std::vector<std::size_t> keep;
  std::vector<char> suppressed(dets.size(), 0);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t i = order[oi];
    if (suppressed[i]) continue;
    keep.push_back(i);
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t j = order[oj];
      if (!suppressed[j] && box_iou(boxes[i], boxes[j]) > iou_threshold) suppressed[j] = 1;
    }
  }
  return keep;
}

std::vector<FaceDetection> nms(std::span<const FaceDetection> dets, double iou_threshold) {
  std::vector<FaceDetection> out;
  for (std::size_t i : nms_indices(dets, iou_threshold)) out.push_back(dets[i]);
  return out;
}

Letterbox letterbox(const Tensor4& image, int target, float pad_value) {
  if (target < 1) throw ShapeError("imgsz", "letterbox target must be >= 1");
  const int h = image.height(), w = image.width();
  Letterbox lb;
  lb.scale = static_cast<double>(target) / std::max(h, w);
  const int nh = std::max(1, static_cast<int>(std::lround(h * lb.scale)));
  const int nw = std::max(1, static_cast<int>(std::lround(w * lb.scale)));
  const int top = (target - nh) / 2;
  const int left = (target - nw) / 2;
  lb.pad_x = left;
  lb.pad_y = top;
  lb.image = Tensor4({image.batch(), image.channels(), target, target}, pad_value);
  const double sy = static_cast<double>(h) / nh;
  const double sx = static_cast<double>(w) / nw;
  for (int n = 0; n < image.batch(); ++n) {
    for (int c = 0; c < image.channels(); ++c) {
      for (int y = 0; y < nh; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, h - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, h - 1);
        const double ty = fy - y0;
        for (int x = 0; x < nw; ++x) {
          const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, w - 1.0);
          const int x0 = static_cast<int>(fx);
          const int x1 = std::min(x0 + 1, w - 1);
          const double tx = fx - x0;
          const double v = (1 - ty) * ((1 - tx) * image.at(n, c, y0, x0) + tx * image.at(n, c, y0, x1)) +
                           ty * ((1 - tx) * image.at(n, c, y1, x0) + tx * image.at(n, c, y1, x1));
          lb.image.at(n, c, top + y, left + x) = static_cast<float>(v);
        }
      }
    }
  }
  return lb;
}

FaceDetection unletterbox(const FaceDetection& det, const Letterbox& lb) {
  FaceDetection out = det;
  out.cx = (det.cx - lb.pad_x) / lb.scale;
  out.cy = (det.cy - lb.pad_y) / lb.scale;
  out.w = det.w / lb.scale;
  out.h = det.h / lb.scale;
  for (auto& l : out.landmarks) {
    l.x = (l.x - lb.pad_x) / lb.scale;
    l.y = (l.y - lb.pad_y) / lb.scale;
  }
  return out;
}

}  // namespace facekit
