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

// Perspective projection, EPnP head-pose recovery from a handful of facial
// landmarks, and yaw/pitch/roll conversion.
//
// Frames: camera x right, y down, z forward. The reference face model uses the
// same axes (z pointing into the head), so R = I is a frontal face.
// Euler angles are intrinsic Y (yaw), then X (pitch), then Z (roll), degrees:
//   R = Ry(yaw) * Rx(pitch) * Rz(roll)

#include <array>
#include <span>
#include <string>
#include <vector>

#include "facekit/geometry.hpp"

namespace facekit {

struct FaceDetection;

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

Mat3 identity3();

struct CameraIntrinsics {
  double fx = 640.0;
  double fy = 640.0;
  double cx = 320.0;
  double cy = 320.0;

  void validate() const;
  /// Uncalibrated default: focal length = image width, principal point at center.
  static CameraIntrinsics from_image(double width, double height);
};

struct ModelPoint {
  std::string name;
  Point3 position;
  int landmark_index = 0;  // into the 68-point scheme
};

struct FaceModel3D {
  std::vector<ModelPoint> points;

  /// At least 4 points, indices in [0, 68), unique names, and not coplanar.
  void validate() const;
  std::vector<Point3> positions() const;
  std::vector<int> landmark_indices() const;

  /// Generic anthropometric 8-point model (millimetre-ish units x10).
  static FaceModel3D generic();
};

struct EulerAngles {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  bool gimbal_lock = false;
};

struct HeadPose {
  Mat3 R = identity3();
  Vec3 t{0.0, 0.0, 0.0};
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  double reprojection_error = 0.0;  // mean pixels over the solve points
};

Mat3 euler_to_rotation(double yaw, double pitch, double roll);
EulerAngles rotation_to_euler(const Mat3& R);

/// Pose with R built from the angles.
HeadPose make_pose(double yaw, double pitch, double roll, const Vec3& t);

/// Pinhole projection of R * X + t. Throws DomainError for points with Z <= 0.
std::vector<Point2> project(std::span<const Point3> points, const HeadPose& pose,
                            const CameraIntrinsics& cam);

struct EpnpOptions {
  int gauss_newton_iterations = 10;
};

/// EPnP with Gauss-Newton beta refinement and Procrustes recovery.
HeadPose epnp_solve(std::span<const Point2> image_points, std::span<const Point3> object_points,
                    const CameraIntrinsics& cam, const EpnpOptions& opts = {});

HeadPose epnp_solve(std::span<const Point2> image_points, const FaceModel3D& model,
                    const CameraIntrinsics& cam, const EpnpOptions& opts = {});

/// Picks the model-mapped landmarks of a 68-point detection and solves.
HeadPose pose_from_detection(const FaceDetection& det, const FaceModel3D& model,
                             const CameraIntrinsics& cam, const EpnpOptions& opts = {});

/// Left/right correspondence of the 68-point scheme (an involution).
const std::array<int, 68>& landmark_mirror_68();

/// Smallest absolute difference of two angles in degrees, in [0, 180].
double angle_diff_deg(double a, double b);

}  // namespace facekit
