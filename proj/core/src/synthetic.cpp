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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "facekit/dataio.hpp"
#include "facekit/detail/rng.hpp"

namespace facekit {

std::vector<Point3> default_template68() {
  std::vector<Point3> p(kNumLandmarks);
  // Jaw: a U from the left cheek (0) through the chin (8) to the right cheek (16).
  for (int i = 0; i < 8; ++i) {
    const double a = std::numbers::pi * i / 16.0;
    p[i] = {-330.0 * std::cos(a), -30.0 + 360.0 * std::sin(a), 300.0 - 235.0 * std::sin(a)};
  }
  p[8] = {0.0, 330.0, 65.0};
  // Brows, left half; the right half is mirrored below.
  const double brow[5][3] = {{-280, -215, 150}, {-230, -240, 115}, {-175, -250, 95},
                             {-120, -245, 80},  {-65, -230, 70}};
  for (int i = 0; i < 5; ++i) p[17 + i] = {brow[i][0], brow[i][1], brow[i][2]};
  // Nose bridge down to the tip (30).
  for (int k = 0; k < 4; ++k) p[27 + k] = {0.0, -170.0 + 170.0 * k / 3.0, 90.0 - 30.0 * k};
  const double nostril[3][3] = {{-80, 50, 70}, {-40, 55, 60}, {0, 60, 55}};
  for (int i = 0; i < 3; ++i) p[31 + i] = {nostril[i][0], nostril[i][1], nostril[i][2]};
  const double eye[6][3] = {{-225, -170, 135}, {-190, -195, 125}, {-130, -195, 120},
                            {-95, -170, 120},  {-130, -150, 120}, {-190, -150, 125}};
  for (int i = 0; i < 6; ++i) p[36 + i] = {eye[i][0], eye[i][1], eye[i][2]};
  const double lip_top[4][3] = {{-150, 150, 125}, {-95, 125, 105}, {-40, 115, 95}, {0, 120, 92}};
  for (int i = 0; i < 4; ++i) p[48 + i] = {lip_top[i][0], lip_top[i][1], lip_top[i][2]};
  p[57] = {0, 200, 100};
  p[58] = {-40, 195, 102};
  p[59] = {-95, 180, 110};
  p[60] = {-120, 150, 115};
  p[61] = {-40, 140, 100};
  p[62] = {0, 140, 98};
  p[66] = {0, 165, 100};
  p[67] = {-40, 165, 102};

  const std::array<int, 68>& mirror = landmark_mirror_68();
  const int left_defined[] = {0,  1,  2,  3,  4,  5,  6,  7,  17, 18, 19, 20, 21, 31, 32,
                              36, 37, 38, 39, 40, 41, 48, 49, 50, 58, 59, 60, 61, 67};
  for (int i : left_defined) p[mirror[i]] = {-p[i].x, p[i].y, p[i].z};
  return p;
}

void SceneSpec::validate() const {
  if (n_images < 0) throw DomainError("n_images must be >= 0");
  if (image_width <= 0 || image_height <= 0) throw DomainError("image size must be > 0");
  auto check = [](const Range& r, double limit, const char* what, bool closed) {
    const bool inside = closed ? (r.lo >= -limit && r.hi <= limit)
                               : (r.lo > -limit && r.hi < limit);
    if (!(r.lo <= r.hi) || !inside)
      throw DomainError(std::string(what) + " range outside the safe interval (+-" +
                        std::to_string(static_cast<int>(limit)) + " degrees)");
  };
  check(yaw, 90.0, "yaw", false);
  check(pitch, 89.0, "pitch", false);
  check(roll, 45.0, "roll", false);
  if (!(tx.lo <= tx.hi) || !(ty.lo <= ty.hi)) throw DomainError("translation range is empty");
  if (!(tz.lo > 0.0) || !(tz.lo <= tz.hi)) throw DomainError("depth range must be positive");
  if (!(noise_sigma >= 0.0)) throw DomainError("noise sigma must be >= 0");
  if (template68.size() != static_cast<std::size_t>(kNumLandmarks))
    throw ShapeError("keypoints", "template must hold 68 points");
  if (max_attempts < 1) throw DomainError("max_attempts must be >= 1");
  model.validate();
  resolved_camera().validate();
}

CameraIntrinsics SceneSpec::resolved_camera() const {
  return camera ? *camera : CameraIntrinsics::from_image(image_width, image_height);
}

SyntheticDataset generate_synthetic(const SceneSpec& scene) {
  scene.validate();
  const CameraIntrinsics cam = scene.resolved_camera();
  std::vector<Point3> shape = scene.template68;
  for (const ModelPoint& mp : scene.model.points) shape[mp.landmark_index] = mp.position;

  detail::Rng rng(scene.seed);
  SyntheticDataset out;
  const double w = scene.image_width, h = scene.image_height;
  for (int n = 0; n < scene.n_images; ++n) {
    bool placed = false;
    for (int attempt = 0; attempt < scene.max_attempts && !placed; ++attempt) {
      const double yaw = rng.uniform(scene.yaw.lo, scene.yaw.hi);
      const double pitch = rng.uniform(scene.pitch.lo, scene.pitch.hi);
      const double roll = rng.uniform(scene.roll.lo, scene.roll.hi);
      const Vec3 t{rng.uniform(scene.tx.lo, scene.tx.hi), rng.uniform(scene.ty.lo, scene.ty.hi),
                   rng.uniform(scene.tz.lo, scene.tz.hi)};
      const HeadPose pose = make_pose(yaw, pitch, roll, t);

      std::vector<Point2> uv;
      try {
        uv = project(shape, pose, cam);
      } catch (const DomainError&) {
        continue;
      }
      if (scene.noise_sigma > 0.0)
        for (Point2& q : uv) {
          q.x += scene.noise_sigma * rng.normal();
          q.y += scene.noise_sigma * rng.normal();
        }

      double x1 = uv[0].x, x2 = uv[0].x, y1 = uv[0].y, y2 = uv[0].y;
      for (const Point2& q : uv) {
        x1 = std::min(x1, q.x);
        x2 = std::max(x2, q.x);
        y1 = std::min(y1, q.y);
        y2 = std::max(y2, q.y);
      }
      const double mx = 0.05 * (x2 - x1), my = 0.05 * (y2 - y1);
      x1 -= mx;
      x2 += mx;
      y1 -= my;
      y2 += my;
      if (x1 < 0.0 || y1 < 0.0 || x2 > w || y2 > h) continue;

      AnnotationRecord rec;
      rec.image_id = "synth_" + std::to_string(n);
      rec.width = scene.image_width;
      rec.height = scene.image_height;
      AnnotatedFace face;
      face.box = {0.5 * (x1 + x2) / w, 0.5 * (y1 + y2) / h, (x2 - x1) / w, (y2 - y1) / h};
      for (const Point2& q : uv) face.keypoints.push_back({q.x / w, q.y / h});
      face.visibility.assign(kNumLandmarks, 2);
      face.angles = Angles{yaw, pitch, roll};
      rec.faces.push_back(std::move(face));
      out.annotations.push_back(std::move(rec));
      out.poses.push_back(pose);
      placed = true;
    }
    if (!placed)
      throw DomainError("could not place face " + std::to_string(n) +
                        " inside the frame; widen the depth range");
  }
  return out;
}

}  // namespace facekit
