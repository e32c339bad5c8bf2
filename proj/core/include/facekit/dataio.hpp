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

// File formats and dataset records.
//
// Annotation / prediction text (UTF-8, LF):
//   image <id> <width> <height>
//   <class> <cx> <cy> <w> <h> [<conf>] (<x> <y> <v>) x 68 [<yaw> <pitch> <roll>]
// Coordinates are normalized by image width/height. In annotations v is the
// visibility flag 0/1/2; in predictions it is the keypoint confidence and the
// face confidence follows the box. Blank lines and lines starting with '#' are
// ignored.
//
// Tensor files ("FKMT", little-endian):
//   char[4] magic, u32 version (1), u32 count,
//   count x { u32 name_len, name bytes, u32 rank, u32 dims[rank], f32 data[] }

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "facekit/geometry.hpp"
#include "facekit/loss.hpp"
#include "facekit/netgraph.hpp"
#include "facekit/pose.hpp"
#include "facekit/postprocess.hpp"

namespace facekit {

inline constexpr int kNumLandmarks = 68;

struct Angles {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  friend bool operator==(const Angles&, const Angles&) = default;
};

struct AnnotatedFace {
  int class_id = 0;
  Box box;                        // normalized
  std::vector<Point2> keypoints;  // normalized, 68
  std::vector<int> visibility;    // 0, 1, 2
  std::optional<Angles> angles;   // degrees
};

struct AnnotationRecord {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<AnnotatedFace> faces;
};

struct PredictedFace {
  int class_id = 0;
  Box box;  // normalized
  double conf = 0.0;
  std::vector<Point2> keypoints;  // normalized, 68
  std::vector<double> kconf;
  std::optional<Angles> angles;
};

struct PredictionRecord {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<PredictedFace> faces;
};

bool operator==(const Point2& a, const Point2& b);
bool operator==(const Box& a, const Box& b);
bool operator==(const AnnotatedFace& a, const AnnotatedFace& b);
bool operator==(const AnnotationRecord& a, const AnnotationRecord& b);
bool operator==(const PredictedFace& a, const PredictedFace& b);
bool operator==(const PredictionRecord& a, const PredictionRecord& b);

// Normalized <-> pixel conversions.
FaceTarget to_pixels(const AnnotatedFace& face, int width, int height);
FaceDetection to_pixels(const PredictedFace& face, int width, int height);
PredictedFace from_pixels(const FaceDetection& det, int width, int height);

std::vector<AnnotationRecord> parse_annotations(std::istream& in);
std::vector<AnnotationRecord> parse_annotations(const std::string& text);
std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path);
/// Every regular *.txt file of a directory, in file-name order.
std::vector<AnnotationRecord> read_annotation_dir(const std::filesystem::path& dir);
void write_annotations(std::ostream& out, const std::vector<AnnotationRecord>& records);
std::string format_annotations(const std::vector<AnnotationRecord>& records);
void save_annotations(const std::filesystem::path& path,
                      const std::vector<AnnotationRecord>& records);

std::vector<PredictionRecord> parse_predictions(std::istream& in);
std::vector<PredictionRecord> parse_predictions(const std::string& text);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records);
std::string format_predictions(const std::vector<PredictionRecord>& records);
void save_predictions(const std::filesystem::path& path,
                      const std::vector<PredictionRecord>& records);

// Tensor files.
void write_tensors(std::ostream& out, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensors(std::istream& in);
void save_tensors(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_tensors(const std::filesystem::path& path);

void save_weights(const Model& model, const std::filesystem::path& path);
/// Loads into a model built from `config`. Files holding fused tensors are
/// loaded into the deployed graph.
Model load_weights(const std::filesystem::path& path, const ModelConfig& config);

/// Single tensor named "image", rank 3 (C,H,W) or 4 (N,C,H,W).
void save_image_tensor(const std::filesystem::path& path, const Tensor4& image);
Tensor4 load_image_tensor(const std::filesystem::path& path);

// key = value model configuration ("tiny" and "small" name the presets).
ModelConfig parse_model_config(const std::string& text);
ModelConfig read_model_config(const std::filesystem::path& path);
std::string format_model_config(const ModelConfig& config);
/// Preset name or path to a config file.
ModelConfig resolve_model_config(const std::string& name_or_path);

// 3D face model: "name x y z" lines, then an "index_map" line followed by
// "name landmark_index" lines.
FaceModel3D parse_face_model(const std::string& text);
FaceModel3D read_face_model(const std::filesystem::path& path);
std::string format_face_model(const FaceModel3D& model);

// Dense 68-point 3D template: 68 "x y z" lines.
std::vector<Point3> parse_template68(const std::string& text);
std::vector<Point3> read_template68(const std::filesystem::path& path);
std::string format_template68(const std::vector<Point3>& points);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Synthetic scenes.

/// Symmetric 68-point face whose 8 pose anchors coincide with the generic model.
std::vector<Point3> default_template68();

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct SceneSpec {
  int n_images = 100;
  int image_width = 640;
  int image_height = 640;
  Range yaw{-85.0, 85.0};
  Range pitch{-60.0, 60.0};
  Range roll{-44.0, 44.0};
  Range tx{-150.0, 150.0};
  Range ty{-150.0, 150.0};
  Range tz{1800.0, 2600.0};
  double noise_sigma = 0.0;  // pixels
  std::optional<CameraIntrinsics> camera;  // default: from image size
  FaceModel3D model = FaceModel3D::generic();
  std::vector<Point3> template68 = default_template68();
  std::uint64_t seed = 0;
  int max_attempts = 1000;  // per image, for keeping the face inside the frame

  void validate() const;
  CameraIntrinsics resolved_camera() const;
};

struct SyntheticDataset {
  std::vector<AnnotationRecord> annotations;
  std::vector<HeadPose> poses;
};

/// One face per image. Landmark 68-point template is placed so that the model
/// anchors are exact, posed, projected, and optionally perturbed with
/// Gaussian pixel noise. Deterministic for a given scene.
SyntheticDataset generate_synthetic(const SceneSpec& scene);

}  // namespace facekit
