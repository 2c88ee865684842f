#pragma once

#include <optional>

#include "linereg/types.hpp"

namespace linereg {

constexpr double kDepthEpsilon = 1e-9;

inline double deg2rad(double deg) { return deg * M_PI / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / M_PI; }

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Nearest rotation to M in Frobenius norm (SVD polar factor, det forced to +1).
/// Throws SingularInput if M is rank deficient.
Eigen::Matrix3d orthonormalize_rotation(const Eigen::Matrix3d& M);

/// SO(3) exponential (Rodrigues).
Eigen::Matrix3d exp_so3(const Eigen::Vector3d& phi);

/// SO(3) logarithm; returns a rotation vector with norm in [0, pi].
Eigen::Vector3d log_so3(const Eigen::Matrix3d& R);

/// SE(3) exponential with xi = [translation; rotation].
Pose exp_se3(const PoseTangent& xi);

/// SE(3) logarithm, inverse of exp_se3 for rotation angles below pi.
PoseTangent log_se3(const Pose& pose);

/// Projects a point-cloud point into the image. Empty if the transformed
/// depth is not positive (cheirality violation; caller discards).
std::optional<Eigen::Vector2d> project_point(const CameraIntrinsics& K,
                                             const Pose& pose,
                                             const Eigen::Vector3d& P);

/// Unit normal of the plane through the camera center and both back-projected
/// segment endpoints. The sign is unspecified; callers must treat n and -n as
/// equivalent. Empty if the endpoints back-project to near-parallel rays.
std::optional<Eigen::Vector3d> interpretation_plane_normal(
    const CameraIntrinsics& K, const LineSegment2D& seg);

/// Geodesic distance acos((trace(Ra^T Rb) - 1) / 2) in radians, in [0, pi].
double rotation_geodesic_error(const Eigen::Matrix3d& Ra,
                               const Eigen::Matrix3d& Rb);

/// Angle between two lines (sign-invariant), radians in [0, pi/2].
double line_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

}  // namespace linereg
