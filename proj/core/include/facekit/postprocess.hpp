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

// Anchor-free decoding of head activations into face detections, greedy NMS,
// and letterbox bookkeeping between source images and the square network input.

#include <span>
#include <vector>

#include "facekit/geometry.hpp"
#include "facekit/netgraph.hpp"

namespace facekit {

struct Landmark {
  double x = 0.0;  // pixels
  double y = 0.0;  // pixels
  double conf = 0.0;
};

/// Face box (center/size, pixels) with confidence and keypoints.
struct FaceDetection {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double conf = 0.0;
  std::vector<Landmark> landmarks;

  Box box() const { return {cx, cy, w, h}; }
};

struct DecodeConfig {
  double conf_threshold = 0.002;
  double iou_threshold = 0.7;
  int reg_max = 16;

  void validate() const;
};

/// Softmax expectation sum(i * p_i), in stride units, range [0, n - 1].
double dfl_decode(std::span<const float> bin_logits);
double dfl_decode(std::span<const double> bin_logits);

/// Cell-center anchor of grid cell (row, col) at the given stride.
inline double anchor_x(int col, int stride) { return (col + 0.5) * stride; }
inline double anchor_y(int row, int stride) { return (row + 0.5) * stride; }

/// Keypoint affine: x = (2 raw + col - 0.5) * stride (and likewise for y).
inline double keypoint_x(double raw, int col, int stride) { return (2.0 * raw + (col - 0.5)) * stride; }
inline double keypoint_y(double raw, int row, int stride) { return (2.0 * raw + (row - 0.5)) * stride; }

double sigmoid(double x);

/// Decodes every cell of one image of the batch whose face confidence exceeds
/// the threshold. Order: scale, then row, then column.
std::vector<FaceDetection> decode_boxes(const HeadOutputs& outputs, const DecodeConfig& cfg,
                                        int batch_index = 0);

/// Greedy class-agnostic suppression, descending confidence, ties by input order.
std::vector<FaceDetection> nms(std::span<const FaceDetection> dets, double iou_threshold);

/// Indices kept by nms(), in output order.
std::vector<std::size_t> nms_indices(std::span<const FaceDetection> dets, double iou_threshold);

struct Letterbox {
  Tensor4 image;     // square, side = target
  double scale = 1;  // network pixels per source pixel
  double pad_x = 0;  // network-space offset of the source origin
  double pad_y = 0;
};

/// Resizes the long side to `target` (bilinear), pads the short side with
/// `pad_value`, and records the transform.
Letterbox letterbox(const Tensor4& image, int target, float pad_value = 114.0f / 255.0f);

/// Maps a detection from network pixels back to source-image pixels.
FaceDetection unletterbox(const FaceDetection& det, const Letterbox& lb);

}  // namespace facekit
