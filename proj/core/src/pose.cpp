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

#include "facekit/pose.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "facekit/error.hpp"
#include "facekit/postprocess.hpp"

namespace facekit {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

Mat3 from_eigen(const Eigen::Matrix3d& m) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = m(i, j);
  return r;
}

}  // namespace

Mat3 identity3() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw DomainError("camera focal lengths must be > 0");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw DomainError("principal point must be finite");
}

CameraIntrinsics CameraIntrinsics::from_image(double width, double height) {
  if (!(width > 0.0) || !(height > 0.0)) throw DomainError("image size must be > 0");
  return {width, width, 0.5 * width, 0.5 * height};
}

void FaceModel3D::validate() const {
  if (points.size() < 4) throw DegenerateError("face model needs at least 4 points");
  std::set<std::string> names;
  for (const ModelPoint& p : points) {
    if (p.landmark_index < 0 || p.landmark_index >= 68)
      throw DomainError("landmark index of '" + p.name + "' outside [0, 68)");
    if (!names.insert(p.name).second) throw DomainError("duplicate model point '" + p.name + "'");
  }
  Eigen::MatrixXd a(points.size(), 3);
  Eigen::RowVector3d mean = Eigen::RowVector3d::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    a.row(i) << points[i].position.x, points[i].position.y, points[i].position.z;
    mean += a.row(i);
  }
  a.rowwise() -= mean / static_cast<double>(points.size());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto s = svd.singularValues();
  if (!(s(2) > 1e-9 * s(0))) throw DegenerateError("face model points are coplanar");
}

std::vector<Point3> FaceModel3D::positions() const {
  std::vector<Point3> out;
  for (const ModelPoint& p : points) out.push_back(p.position);
  return out;
}

std::vector<int> FaceModel3D::landmark_indices() const {
  std::vector<int> out;
  for (const ModelPoint& p : points) out.push_back(p.landmark_index);
  return out;
}

FaceModel3D FaceModel3D::generic() {
  return {{
      {"nose_tip", {0.0, 0.0, 0.0}, 30},
      {"chin", {0.0, 330.0, 65.0}, 8},
      {"eye_left_outer", {-225.0, -170.0, 135.0}, 36},
      {"eye_right_outer", {225.0, -170.0, 135.0}, 45},
      {"mouth_left", {-150.0, 150.0, 125.0}, 48},
      {"mouth_right", {150.0, 150.0, 125.0}, 54},
      {"cheek_left", {-330.0, -30.0, 300.0}, 0},
      {"cheek_right", {330.0, -30.0, 300.0}, 16},
  }};
}

Mat3 euler_to_rotation(double yaw, double pitch, double roll) {
  const Eigen::Matrix3d r =
      (Eigen::AngleAxisd(yaw / kDeg, Eigen::Vector3d::UnitY()) *
       Eigen::AngleAxisd(pitch / kDeg, Eigen::Vector3d::UnitX()) *
       Eigen::AngleAxisd(roll / kDeg, Eigen::Vector3d::UnitZ()))
          .toRotationMatrix();
  return from_eigen(r);
}

EulerAngles rotation_to_euler(const Mat3& R) {
  EulerAngles e;
  const double cp = std::hypot(R[1][0], R[1][1]);
  e.pitch = std::atan2(-R[1][2], cp) * kDeg;
  if (cp < 1e-6) {
    e.gimbal_lock = true;
    e.roll = 0.0;
    e.yaw = std::atan2(-R[2][0], R[0][0]) * kDeg;
  } else {
    e.roll = std::atan2(R[1][0], R[1][1]) * kDeg;
    e.yaw = std::atan2(R[0][2], R[2][2]) * kDeg;
  }
  return e;
}

HeadPose make_pose(double yaw, double pitch, double roll, const Vec3& t) {
  HeadPose p;
  p.R = euler_to_rotation(yaw, pitch, roll);
  p.t = t;
  p.yaw = yaw;
  p.pitch = pitch;
  p.roll = roll;
  return p;
}

std::vector<Point2> project(std::span<const Point3> points, const HeadPose& pose,
                            const CameraIntrinsics& cam) {
  cam.validate();
  std::vector<Point2> out;
  out.reserve(points.size());
  for (const Point3& p : points) {
    double c[3];
    for (int i = 0; i < 3; ++i)
      c[i] = pose.R[i][0] * p.x + pose.R[i][1] * p.y + pose.R[i][2] * p.z + pose.t[i];
    if (!(c[2] > 0.0)) throw DomainError("point at or behind the camera plane");
    out.push_back({cam.fx * c[0] / c[2] + cam.cx, cam.fy * c[1] / c[2] + cam.cy});
  }
  return out;
}

namespace {

using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat6x10 = Eigen::Matrix<double, 6, 10>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

constexpr int kPairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

// Products b_a * b_b in the column order of L.
Eigen::Matrix<double, 10, 1> beta_products(const Eigen::Vector4d& b) {
  Eigen::Matrix<double, 10, 1> p;
  p << b(0) * b(0), b(0) * b(1), b(1) * b(1), b(0) * b(2), b(1) * b(2), b(2) * b(2), b(0) * b(3),
      b(1) * b(3), b(2) * b(3), b(3) * b(3);
  return p;
}

struct Candidate {
  Eigen::Matrix3d R;
  Eigen::Vector3d t;
  double error = 0.0;
  bool valid = false;
};

class Epnp {
 public:
  Epnp(std::span<const Point2> image, std::span<const Point3> object, const CameraIntrinsics& cam)
      : n_(static_cast<int>(object.size())), cam_(cam), pw_(n_, 3), uv_(n_, 2), alphas_(n_, 4) {
    for (int i = 0; i < n_; ++i) {
      pw_.row(i) << object[i].x, object[i].y, object[i].z;
      uv_.row(i) << image[i].x, image[i].y;
    }
  }

  HeadPose solve(const EpnpOptions& opts) {
    choose_control_points();
    compute_alphas();

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n_, 12);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < 4; ++j) {
        const double a = alphas_(i, j);
        m(2 * i, 3 * j) = a * cam_.fx;
        m(2 * i, 3 * j + 2) = a * (cam_.cx - uv_(i, 0));
        m(2 * i + 1, 3 * j + 1) = a * cam_.fy;
        m(2 * i + 1, 3 * j + 2) = a * (cam_.cy - uv_(i, 1));
      }
    }
    const Eigen::Matrix<double, 12, 12> mtm = m.transpose() * m;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 12, 12>> eig(mtm);
    // Ascending eigenvalues: columns 0..3 span the approximate null space.
    std::array<Vec12, 4> v;
    for (int k = 0; k < 4; ++k) v[k] = eig.eigenvectors().col(k);

    Mat6x10 l;
    Vec6 rho;
    for (int p = 0; p < 6; ++p) {
      const int a = kPairs[p][0], b = kPairs[p][1];
      std::array<Eigen::Vector3d, 4> dv;
      for (int k = 0; k < 4; ++k) dv[k] = v[k].segment<3>(3 * a) - v[k].segment<3>(3 * b);
      l(p, 0) = dv[0].dot(dv[0]);
      l(p, 1) = 2.0 * dv[0].dot(dv[1]);
      l(p, 2) = dv[1].dot(dv[1]);
      l(p, 3) = 2.0 * dv[0].dot(dv[2]);
      l(p, 4) = 2.0 * dv[1].dot(dv[2]);
      l(p, 5) = dv[2].dot(dv[2]);
      l(p, 6) = 2.0 * dv[0].dot(dv[3]);
      l(p, 7) = 2.0 * dv[1].dot(dv[3]);
      l(p, 8) = 2.0 * dv[2].dot(dv[3]);
      l(p, 9) = dv[3].dot(dv[3]);
      rho(p) = (cw_.row(a) - cw_.row(b)).squaredNorm();
    }

    std::array<Eigen::Vector4d, 3> betas{beta_n1(l, rho), beta_n2(l, rho), beta_n3(l, rho)};
    Candidate best;
    for (Eigen::Vector4d& b : betas) {
      gauss_newton(l, rho, b, opts.gauss_newton_iterations);
      Candidate c = recover(v, b);
      if (!c.valid) continue;
      const bool better = !best.valid || c.error < best.error - 1e-12 * (1.0 + best.error) ||
                          (std::abs(c.error - best.error) <= 1e-12 * (1.0 + best.error) &&
                           c.t.norm() < best.t.norm());
      if (better) best = c;
    }
    if (!best.valid) throw DegenerateError("EPnP found no solution in front of the camera");

    HeadPose pose;
    pose.R = from_eigen(best.R);
    pose.t = {best.t(0), best.t(1), best.t(2)};
    const EulerAngles e = rotation_to_euler(pose.R);
    pose.yaw = e.yaw;
    pose.pitch = e.pitch;
    pose.roll = e.roll;
    pose.reprojection_error = best.error;
    return pose;
  }

 private:
  void choose_control_points() {
    const Eigen::RowVector3d c0 = pw_.colwise().mean();
    const Eigen::MatrixXd a = pw_.rowwise() - c0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(a.transpose() * a);
    const Eigen::Vector3d lam = eig.eigenvalues();
    if (!(lam(0) > 1e-12 * lam(2))) throw DegenerateError("object points are coplanar or collinear");
    cw_.row(0) = c0;
    for (int j = 0; j < 3; ++j)
      cw_.row(j + 1) = c0 + std::sqrt(lam(2 - j) / n_) * eig.eigenvectors().col(2 - j).transpose();
  }

  void compute_alphas() {
    Eigen::Matrix3d cc;
    for (int j = 0; j < 3; ++j) cc.col(j) = (cw_.row(j + 1) - cw_.row(0)).transpose();
    const Eigen::Matrix3d inv = cc.inverse();
    for (int i = 0; i < n_; ++i) {
      const Eigen::Vector3d a = inv * (pw_.row(i) - cw_.row(0)).transpose();
      alphas_(i, 0) = 1.0 - a.sum();
      alphas_.block<1, 3>(i, 1) = a.transpose();
    }
  }

  static Eigen::Vector4d beta_n1(const Mat6x10& l, const Vec6& rho) {
    Eigen::Matrix<double, 6, 4> a;
    a << l.col(0), l.col(1), l.col(3), l.col(6);
    const Eigen::Vector4d x = a.colPivHouseholderQr().solve(rho);
    Eigen::Vector4d b;
    if (x(0) < 0.0) {
      b(0) = std::sqrt(-x(0));
      for (int k = 1; k < 4; ++k) b(k) = -x(k) / b(0);
    } else {
      b(0) = std::sqrt(x(0));
      for (int k = 1; k < 4; ++k) b(k) = b(0) > 0.0 ? x(k) / b(0) : 0.0;
    }
    return b;
  }

  static Eigen::Vector4d beta_n2(const Mat6x10& l, const Vec6& rho) {
    Eigen::Matrix<double, 6, 3> a;
    a << l.col(0), l.col(1), l.col(2);
    const Eigen::Vector3d x = a.colPivHouseholderQr().solve(rho);
    Eigen::Vector4d b = Eigen::Vector4d::Zero();
    if (x(0) < 0.0) {
      b(0) = std::sqrt(-x(0));
      b(1) = x(2) < 0.0 ? std::sqrt(-x(2)) : 0.0;
    } else {
      b(0) = std::sqrt(x(0));
      b(1) = x(2) > 0.0 ? std::sqrt(x(2)) : 0.0;
    }
    if (x(1) < 0.0) b(0) = -b(0);
    return b;
  }

  static Eigen::Vector4d beta_n3(const Mat6x10& l, const Vec6& rho) {
    Eigen::Matrix<double, 6, 5> a;
    a << l.col(0), l.col(1), l.col(2), l.col(3), l.col(4);
    const Eigen::Matrix<double, 5, 1> x = a.colPivHouseholderQr().solve(rho);
    Eigen::Vector4d b = Eigen::Vector4d::Zero();
    if (x(0) < 0.0) {
      b(0) = std::sqrt(-x(0));
      b(1) = x(2) < 0.0 ? std::sqrt(-x(2)) : 0.0;
    } else {
      b(0) = std::sqrt(x(0));
      b(1) = x(2) > 0.0 ? std::sqrt(x(2)) : 0.0;
    }
    if (x(1) < 0.0) b(0) = -b(0);
    b(2) = b(0) != 0.0 ? x(3) / b(0) : 0.0;
    return b;
  }

  static void gauss_newton(const Mat6x10& l, const Vec6& rho, Eigen::Vector4d& b, int iters) {
    for (int it = 0; it < iters; ++it) {
      Eigen::Matrix<double, 6, 4> j;
      for (int p = 0; p < 6; ++p) {
        const auto r = l.row(p);
        j(p, 0) = 2 * r(0) * b(0) + r(1) * b(1) + r(3) * b(2) + r(6) * b(3);
        j(p, 1) = r(1) * b(0) + 2 * r(2) * b(1) + r(4) * b(2) + r(7) * b(3);
        j(p, 2) = r(3) * b(0) + r(4) * b(1) + 2 * r(5) * b(2) + r(8) * b(3);
        j(p, 3) = r(6) * b(0) + r(7) * b(1) + r(8) * b(2) + 2 * r(9) * b(3);
      }
      const Vec6 res = rho - l * beta_products(b);
      const Eigen::Vector4d step = j.colPivHouseholderQr().solve(res);
      if (!step.allFinite()) break;
      b += step;
      if (step.norm() <= 1e-15 * (1.0 + b.norm())) break;
    }
  }

  Candidate recover(const std::array<Vec12, 4>& v, const Eigen::Vector4d& b) const {
    Candidate c;
    Vec12 x = Vec12::Zero();
    for (int k = 0; k < 4; ++k) x += b(k) * v[k];
    Eigen::Matrix<double, 4, 3> cc;
    for (int j = 0; j < 4; ++j) cc.row(j) = x.segment<3>(3 * j).transpose();
    Eigen::MatrixXd pc = alphas_ * cc;
    int negative = 0;
    for (int i = 0; i < n_; ++i) negative += pc(i, 2) < 0.0;
    if (2 * negative > n_) pc = -pc;
    for (int i = 0; i < n_; ++i)
      if (!(pc(i, 2) > 0.0)) return c;

    const Eigen::RowVector3d mc = pc.colwise().mean();
    const Eigen::RowVector3d mw = pw_.colwise().mean();
    const Eigen::Matrix3d h = (pc.rowwise() - mc).transpose() * (pw_.rowwise() - mw);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    c.R = u * svd.matrixV().transpose();
    if (c.R.determinant() < 0.0) {
      u.col(2) = -u.col(2);
      c.R = u * svd.matrixV().transpose();
    }
    c.t = mc.transpose() - c.R * mw.transpose();

    double err = 0.0;
    for (int i = 0; i < n_; ++i) {
      const Eigen::Vector3d q = c.R * pw_.row(i).transpose() + c.t;
      if (!(q(2) > 0.0)) return c;
      const double du = cam_.fx * q(0) / q(2) + cam_.cx - uv_(i, 0);
      const double dv = cam_.fy * q(1) / q(2) + cam_.cy - uv_(i, 1);
      err += std::hypot(du, dv);
    }
    c.error = err / n_;
    c.valid = std::isfinite(c.error);
    return c;
  }

  int n_;
  CameraIntrinsics cam_;
  Eigen::MatrixXd pw_;
  Eigen::MatrixXd uv_;
  Eigen::MatrixXd alphas_;
  Eigen::Matrix<double, 4, 3> cw_;
};

}  // namespace

HeadPose epnp_solve(std::span<const Point2> image_points, std::span<const Point3> object_points,
                    const CameraIntrinsics& cam, const EpnpOptions& opts) {
  cam.validate();
  if (image_points.size() != object_points.size())
    throw ShapeError("points", "EPnP needs one image point per object point");
  if (object_points.size() < 4) throw DegenerateError("EPnP needs at least 4 points");
  for (const Point2& p : image_points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw DomainError("image points must be finite");
  return Epnp(image_points, object_points, cam).solve(opts);
}

HeadPose epnp_solve(std::span<const Point2> image_points, const FaceModel3D& model,
                    const CameraIntrinsics& cam, const EpnpOptions& opts) {
  model.validate();
  const std::vector<Point3> obj = model.positions();
  return epnp_solve(image_points, obj, cam, opts);
}

HeadPose pose_from_detection(const FaceDetection& det, const FaceModel3D& model,
                             const CameraIntrinsics& cam, const EpnpOptions& opts) {
  if (det.landmarks.size() != 68)
    throw ShapeError("keypoints", "pose needs a 68-landmark detection, got " +
                                      std::to_string(det.landmarks.size()));
  model.validate();
  std::vector<Point2> pts;
  for (const ModelPoint& p : model.points)
    pts.push_back({det.landmarks[p.landmark_index].x, det.landmarks[p.landmark_index].y});
  return epnp_solve(pts, model, cam, opts);
}

const std::array<int, 68>& landmark_mirror_68() {
  static const std::array<int, 68> map = [] {
    std::array<int, 68> m{};
    for (int i = 0; i < 68; ++i) m[i] = i;
    auto pair = [&m](int a, int b) {
      m[a] = b;
      m[b] = a;
    };
    for (int i = 0; i <= 7; ++i) pair(i, 16 - i);       // jaw
    for (int i = 17; i <= 21; ++i) pair(i, 43 - i);     // brows
    pair(31, 35);                                       // nostrils
    pair(32, 34);
    pair(36, 45);                                       // eyes
    pair(37, 44);
    pair(38, 43);
    pair(39, 42);
    pair(40, 47);
    pair(41, 46);
    for (int i = 48; i <= 50; ++i) pair(i, 102 - i);    // outer lip top
    pair(55, 59);
    pair(56, 58);
    pair(60, 64);                                       // inner lip
    pair(61, 63);
    pair(65, 67);
    return m;
  }();
  return map;
}

double angle_diff_deg(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

}  // namespace facekit
