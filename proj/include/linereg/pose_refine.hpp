#pragma once

#include <optional>

#include "linereg/types.hpp"

namespace linereg {

struct RefineConfig {
  int max_lm_iters = 50;
  int max_outlier_rounds = 10;
  double outlier_px = 3.0;
  double lm_init_damping = 1e-3;
  double convergence_tol = 1e-10;  // relative cost change
};

struct RefineResult {
  Pose pose;
  std::vector<Correspondence> inliers;
  std::vector<double> cost_history;  // cost after each accepted LM step
  bool converged = true;
};

/// Signed point-to-line distances (px) of both projected 3D endpoints against
/// the infinite 2D line. Empty when either endpoint falls behind the camera.
std::optional<Eigen::Vector2d> line_residuals(const Pose& pose,
                                              const ImageLine& line,
                                              const LineSegment3D& seg3d,
                                              const CameraIntrinsics& K);

/// Analytic 2x6 Jacobian of line_residuals with respect to a left
/// perturbation exp(dxi) * pose; translation columns first.
std::optional<Eigen::Matrix<double, 2, 6>> residual_jacobian(
    const Pose& pose, const ImageLine& line, const LineSegment3D& seg3d,
    const CameraIntrinsics& K);

/// One line-to-line least-squares term: an observed infinite 2D line and the
/// 3D segment whose projected endpoints should fall on it.
struct LineTerm {
  ImageLine line;
  LineSegment3D seg3d;
};

/// Plain Levenberg-Marquardt over a fixed term set, no outlier handling.
Pose lm_minimize_terms(const Pose& pose0, const std::vector<LineTerm>& terms,
                       const CameraIntrinsics& K, int max_iters,
                       std::vector<double>* cost_history = nullptr,
                       double init_damping = 1e-3, double tol = 1e-10,
                       bool* converged = nullptr);

/// Levenberg-Marquardt over the 6-DOF tangent space with iterative outlier
/// rejection: after each converged run, correspondences with any endpoint
/// residual above cfg.outlier_px are dropped and the optimization restarts.
RefineResult refine_pose(const Pose& pose0,
                         const std::vector<Correspondence>& corrs,
                         const std::vector<LineSegment2D>& segs2d,
                         const std::vector<LineSegment3D>& segs3d,
                         const CameraIntrinsics& K, const RefineConfig& cfg);

}  // namespace linereg
