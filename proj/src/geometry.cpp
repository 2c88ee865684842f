#include "linereg/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace linereg {

ImageLine ImageLine::through(const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
  const Eigen::Vector2d d = q - p;
  const double len = d.norm();
  if (len <= 0.0) {
    throw SingularInput("ImageLine::through: identical endpoints");
  }
  ImageLine line;
  line.a = -d.y() / len;
  line.b = d.x() / len;
  line.c = -(line.a * p.x() + line.b * p.y());
  return line;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d S;
  S << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return S;
}

Eigen::Matrix3d orthonormalize_rotation(const Eigen::Matrix3d& M) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d s = svd.singularValues();
  if (s(2) <= 1e-12 * s(0)) {
    throw SingularInput("orthonormalize_rotation: rank-deficient input");
  }
  Eigen::Matrix3d U = svd.matrixU();
  const Eigen::Matrix3d V = svd.matrixV();
  if ((U * V.transpose()).determinant() < 0.0) {
    U.col(2) *= -1.0;
  }
  return U * V.transpose();
}

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  const Eigen::Matrix3d S = skew(phi);
  if (theta < 1e-10) {
    return Eigen::Matrix3d::Identity() + S + 0.5 * S * S;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * S + b * S * S;
}

Eigen::Vector3d log_so3(const Eigen::Matrix3d& R) {
  const double cos_theta = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  const Eigen::Vector3d w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (theta < 1e-10) {
    return 0.5 * w;
  }
  if (theta > M_PI - 1e-6) {
    // Near pi the skew part degenerates; recover the axis from R + I.
    int k = 0;
    if (R(1, 1) > R(0, 0)) k = 1;
    if (R(2, 2) > R(k, k)) k = 2;
    Eigen::Vector3d axis;
    axis(k) = std::sqrt(std::max(0.0, (R(k, k) + 1.0) * 0.5));
    for (int i = 0; i < 3; ++i) {
      if (i != k) axis(i) = (R(k, i) + R(i, k)) * 0.25 / axis(k);
    }
    axis.normalize();
    if (axis.dot(w) < 0.0) axis = -axis;
    return theta * axis;
  }
  return (theta / (2.0 * std::sin(theta))) * w;
}

namespace {

// Left Jacobian of SO(3): integrates the translation under a rotating frame.
Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  const Eigen::Matrix3d S = skew(phi);
  if (theta < 1e-7) {
    return Eigen::Matrix3d::Identity() + 0.5 * S + S * S / 6.0;
  }
  const double t2 = theta * theta;
  const double a = (1.0 - std::cos(theta)) / t2;
  const double b = (theta - std::sin(theta)) / (t2 * theta);
  return Eigen::Matrix3d::Identity() + a * S + b * S * S;
}

Eigen::Matrix3d so3_left_jacobian_inverse(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  const Eigen::Matrix3d S = skew(phi);
  if (theta < 1e-7) {
    return Eigen::Matrix3d::Identity() - 0.5 * S + S * S / 12.0;
  }
  const double half = 0.5 * theta;
  const double cot = std::cos(half) / std::sin(half);
  const double coeff = (1.0 - half * cot) / (theta * theta);
  return Eigen::Matrix3d::Identity() - 0.5 * S + coeff * S * S;
}

}  // namespace

Pose exp_se3(const PoseTangent& xi) {
  const Eigen::Vector3d rho = xi.head<3>();
  const Eigen::Vector3d phi = xi.tail<3>();
  Pose pose;
  pose.R = exp_so3(phi);
  pose.t = so3_left_jacobian(phi) * rho;
  return pose;
}

PoseTangent log_se3(const Pose& pose) {
  const Eigen::Vector3d phi = log_so3(pose.R);
  PoseTangent xi;
  xi.head<3>() = so3_left_jacobian_inverse(phi) * pose.t;
  xi.tail<3>() = phi;
  return xi;
}

std::optional<Eigen::Vector2d> project_point(const CameraIntrinsics& K,
                                             const Pose& pose,
                                             const Eigen::Vector3d& P) {
  const Eigen::Vector3d Pc = pose.apply(P);
  if (Pc.z() <= kDepthEpsilon) {
    return std::nullopt;
  }
  return Eigen::Vector2d(K.fx * Pc.x() / Pc.z() + K.cx,
                         K.fy * Pc.y() / Pc.z() + K.cy);
}

std::optional<Eigen::Vector3d> interpretation_plane_normal(
    const CameraIntrinsics& K, const LineSegment2D& seg) {
  const Eigen::Vector3d rp = K.backproject(seg.p).normalized();
  const Eigen::Vector3d rq = K.backproject(seg.q).normalized();
  const Eigen::Vector3d n = rp.cross(rq);
  const double norm = n.norm();
  if (norm < 1e-12) {
    return std::nullopt;
  }
  return n / norm;
}

double rotation_geodesic_error(const Eigen::Matrix3d& Ra,
                               const Eigen::Matrix3d& Rb) {
  const double trace = (Ra.transpose() * Rb).trace();
  return std::acos(std::clamp(0.5 * (trace - 1.0), -1.0, 1.0));
}

double line_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double denom = a.norm() * b.norm();
  if (denom <= 0.0) return 0.0;
  return std::acos(std::clamp(std::abs(a.dot(b)) / denom, 0.0, 1.0));
}

}  // namespace linereg
