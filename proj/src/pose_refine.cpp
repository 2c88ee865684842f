#include "linereg/pose_refine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "linereg/geometry.hpp"

namespace linereg {

namespace {

// Row of the projection Jacobian chain for one endpoint: d(residual)/d(xi)
// with P' = R P + t perturbed on the left, translation columns first.
Eigen::Matrix<double, 1, 6> endpoint_jacobian(const ImageLine& line,
                                              const Eigen::Vector3d& Pc,
                                              const CameraIntrinsics& K) {
  const double X = Pc.x(), Y = Pc.y(), Z = Pc.z();
  const double iz = 1.0 / Z;
  const double iz2 = iz * iz;

  Eigen::Matrix<double, 2, 6> J_proj;
  J_proj << K.fx * iz, 0.0, -K.fx * X * iz2, -K.fx * X * Y * iz2,
      K.fx + K.fx * X * X * iz2, -K.fx * Y * iz,
      0.0, K.fy * iz, -K.fy * Y * iz2, -K.fy - K.fy * Y * Y * iz2,
      K.fy * X * Y * iz2, K.fy * X * iz;

  return Eigen::Matrix<double, 1, 2>(line.a, line.b) * J_proj;
}

}  // namespace

std::optional<Eigen::Vector2d> line_residuals(const Pose& pose,
                                              const ImageLine& line,
                                              const LineSegment3D& seg3d,
                                              const CameraIntrinsics& K) {
  const auto up = project_point(K, pose, seg3d.p);
  const auto uq = project_point(K, pose, seg3d.q);
  if (!up || !uq) return std::nullopt;
  return Eigen::Vector2d(line.signed_distance(*up), line.signed_distance(*uq));
}

std::optional<Eigen::Matrix<double, 2, 6>> residual_jacobian(
    const Pose& pose, const ImageLine& line, const LineSegment3D& seg3d,
    const CameraIntrinsics& K) {
  const Eigen::Vector3d Pp = pose.apply(seg3d.p);
  const Eigen::Vector3d Pq = pose.apply(seg3d.q);
  if (Pp.z() <= kDepthEpsilon || Pq.z() <= kDepthEpsilon) return std::nullopt;

  Eigen::Matrix<double, 2, 6> J;
  J.row(0) = endpoint_jacobian(line, Pp, K);
  J.row(1) = endpoint_jacobian(line, Pq, K);
  return J;
}

namespace {

double total_cost(const Pose& pose, const std::vector<LineTerm>& terms,
                  const CameraIntrinsics& K) {
  double cost = 0.0;
  for (const auto& term : terms) {
    const auto r = line_residuals(pose, term.line, term.seg3d, K);
    if (!r) continue;  // behind camera: excluded from this round
    cost += 0.5 * r->squaredNorm();
  }
  return cost;
}

}  // namespace

Pose lm_minimize_terms(const Pose& pose0, const std::vector<LineTerm>& terms,
                       const CameraIntrinsics& K, int max_iters,
                       std::vector<double>* cost_history, double init_damping,
                       double tol, bool* converged_out) {
  Pose pose = pose0;
  double lambda = init_damping;
  double cost = total_cost(pose, terms, K);
  if (cost_history) cost_history->push_back(cost);
  bool converged = false;

  for (int iter = 0; iter < max_iters; ++iter) {
    Eigen::Matrix<double, 6, 6> JtJ = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> Jtr = Eigen::Matrix<double, 6, 1>::Zero();
    for (const auto& term : terms) {
      const auto r = line_residuals(pose, term.line, term.seg3d, K);
      const auto J = residual_jacobian(pose, term.line, term.seg3d, K);
      if (!r || !J) continue;
      JtJ += J->transpose() * (*J);
      Jtr += J->transpose() * (*r);
    }

    if (Jtr.norm() < 1e-14) {
      converged = true;
      break;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 16; ++attempt) {
      Eigen::Matrix<double, 6, 6> H = JtJ;
      for (int d = 0; d < 6; ++d) {
        H(d, d) += lambda * std::max(JtJ(d, d), 1e-12);
      }
      const PoseTangent step = H.ldlt().solve(-Jtr);
      const Pose trial = exp_se3(step) * pose;
      const double trial_cost = total_cost(trial, terms, K);
      if (trial_cost <= cost) {
        pose = trial;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        const double change = cost - trial_cost;
        cost = trial_cost;
        if (cost_history) cost_history->push_back(cost);
        if (change <= tol * std::max(cost, 1e-300)) {
          converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      converged = true;  // no acceptable step: numerically at a minimum
      break;
    }
    if (converged) break;
  }
  if (converged_out) *converged_out = converged;
  return pose;
}

RefineResult refine_pose(const Pose& pose0,
                         const std::vector<Correspondence>& corrs,
                         const std::vector<LineSegment2D>& segs2d,
                         const std::vector<LineSegment3D>& segs3d,
                         const CameraIntrinsics& K, const RefineConfig& cfg) {
  if (corrs.size() < 3) {
    throw InsufficientCorrespondences("refine_pose: need at least 3 correspondences");
  }

  std::vector<Correspondence> remaining = corrs;
  std::vector<LineTerm> terms;
  terms.reserve(corrs.size());
  for (const auto& c : corrs) {
    const auto& seg2d = segs2d.at(static_cast<size_t>(c.idx2d));
    terms.push_back({ImageLine::through(seg2d.p, seg2d.q),
                     segs3d.at(static_cast<size_t>(c.idx3d))});
  }

  RefineResult result;
  result.pose = pose0;

  for (int round = 0; round < cfg.max_outlier_rounds; ++round) {
    if (terms.size() < 3) break;

    bool converged = false;
    result.pose =
        lm_minimize_terms(result.pose, terms, K, cfg.max_lm_iters,
                          &result.cost_history, cfg.lm_init_damping,
                          cfg.convergence_tol, &converged);
    result.converged = converged;

    // Annealed rejection: the first rounds trim only gross mismatches so the
    // optimum is not pulled by wrong pairs before the pose settles. Later
    // rounds descend to the configured threshold, floored by the residual
    // scale of the fit itself so that a noise-free set sheds every pair that
    // is merely near-coincident instead of exact.
    std::vector<double> residuals(terms.size());
    for (size_t i = 0; i < terms.size(); ++i) {
      const auto r = line_residuals(result.pose, terms[i].line, terms[i].seg3d, K);
      residuals[i] = r ? r->cwiseAbs().maxCoeff()
                       : std::numeric_limits<double>::infinity();
    }
    double threshold;
    const double scale = round == 0 ? 8.0 : (round == 1 ? 4.0 : 2.0);
    if (round < 2) {
      threshold = scale * cfg.outlier_px;
    } else {
      std::vector<double> sorted = residuals;
      std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                       sorted.end());
      const double median = sorted[sorted.size() / 2];
      threshold = std::min(cfg.outlier_px, std::max(10.0 * median, 1e-9));
    }

    std::vector<Correspondence> kept_corrs;
    std::vector<LineTerm> kept_terms;
    for (size_t i = 0; i < terms.size(); ++i) {
      if (residuals[i] > threshold) continue;
      kept_corrs.push_back(remaining[i]);
      kept_terms.push_back(terms[i]);
    }
    const bool stable = kept_terms.size() == terms.size() && round >= 2;
    remaining = std::move(kept_corrs);
    terms = std::move(kept_terms);
    if (stable) break;
  }

  result.inliers = std::move(remaining);
  return result;
}

}  // namespace linereg
