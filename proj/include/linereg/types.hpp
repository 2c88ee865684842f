#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace linereg {

/// Pinhole camera intrinsics in pixels. fx, fy must be positive.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d K;
    K << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return K;
  }

  // Ray through pixel (z = 1, not normalized).
  Eigen::Vector3d backproject(const Eigen::Vector2d& px) const {
    return {(px.x() - cx) / fx, (px.y() - cy) / fy, 1.0};
  }
};

struct LineSegment2D {
  Eigen::Vector2d p;
  Eigen::Vector2d q;

  double length() const { return (q - p).norm(); }
  Eigen::Vector2d direction() const { return (q - p).normalized(); }
  Eigen::Vector2d midpoint() const { return 0.5 * (p + q); }
};

struct LineSegment3D {
  Eigen::Vector3d p;
  Eigen::Vector3d q;

  double length() const { return (q - p).norm(); }
  Eigen::Vector3d direction() const { return (q - p).normalized(); }
  Eigen::Vector3d center() const { return 0.5 * (p + q); }
};

/// Infinite image line a*x + b*y + c = 0 with a^2 + b^2 = 1.
struct ImageLine {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  static ImageLine through(const Eigen::Vector2d& p, const Eigen::Vector2d& q);

  // Signed point-to-line distance in pixels.
  double signed_distance(const Eigen::Vector2d& u) const {
    return a * u.x() + b * u.y() + c;
  }
};

/// Rigid transform mapping point-cloud coordinates to camera coordinates.
struct Pose {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return R * p + t; }

  Pose inverse() const { return {R.transpose(), -(R.transpose() * t)}; }

  friend Pose operator*(const Pose& a, const Pose& b) {
    return {a.R * b.R, a.R * b.t + a.t};
  }
};

/// se(3) tangent vector: translation part first, rotation part last.
using PoseTangent = Eigen::Matrix<double, 6, 1>;

struct Correspondence {
  int idx2d = -1;
  int idx3d = -1;

  friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

class RegistrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularInput : public RegistrationError {
 public:
  using RegistrationError::RegistrationError;
};

class InsufficientSegments : public RegistrationError {
 public:
  using RegistrationError::RegistrationError;
};

class NoClusterFound : public RegistrationError {
 public:
  using RegistrationError::RegistrationError;
};

class FewerThanKeep : public RegistrationError {
 public:
  using RegistrationError::RegistrationError;
};

class DegenerateBasis : public RegistrationError {
 public:
  using RegistrationError::RegistrationError;
};

class NoValidHypothesis : public RegistrationError {
 public:
  using RegistrationError::RegistrationError;
};

class AllCandidatesFailed : public RegistrationError {
 public:
  using RegistrationError::RegistrationError;
};

class InsufficientCorrespondences : public RegistrationError {
 public:
  using RegistrationError::RegistrationError;
};

}  // namespace linereg
