#include "linereg/rotation_candidates.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "linereg/geometry.hpp"

namespace linereg {

namespace {

Eigen::Matrix3d direction_basis(const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
  Eigen::Matrix3d B;
  B.col(0) = u;
  B.col(1) = v;
  B.col(2) = u.cross(v).normalized();
  return B;
}

double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

}  // namespace

std::vector<RotationCandidate> enumerate_rotations(
    const std::array<Eigen::Vector3d, 2>& v2d,
    const std::array<Eigen::Vector3d, 2>& v3d) {
  const double min_sep = deg2rad(kMinPairSeparationDeg);
  if (line_angle(v2d[0], v2d[1]) < min_sep || line_angle(v3d[0], v3d[1]) < min_sep) {
    throw DegenerateBasis("enumerate_rotations: direction pair closer than 10 deg");
  }

  const double angle_2d = angle_between(v2d[0], v2d[1]);
  const double consistency_tol = deg2rad(kPairAngleConsistencyDeg);
  const Eigen::Matrix3d B2d = direction_basis(v2d[0], v2d[1]);

  std::vector<RotationCandidate> candidates;
  for (int pairing = 0; pairing < 2; ++pairing) {
    const Eigen::Vector3d& d0 = v3d[pairing];
    const Eigen::Vector3d& d1 = v3d[1 - pairing];
    for (int signs = 0; signs < 4; ++signs) {
      const double s0 = (signs & 1) ? -1.0 : 1.0;
      const double s1 = (signs & 2) ? -1.0 : 1.0;
      const Eigen::Vector3d a = s0 * d0;
      const Eigen::Vector3d b = s1 * d1;

      // A rotation preserves angles: mismatched inter-angles cannot pair.
      if (std::abs(angle_between(a, b) - angle_2d) > consistency_tol) continue;

      const Eigen::Matrix3d B3d = direction_basis(a, b);
      const Eigen::Matrix3d M = B2d * B3d.inverse();
      const Eigen::Matrix3d R = orthonormalize_rotation(M);

      bool duplicate = false;
      for (const auto& existing : candidates) {
        if (rotation_geodesic_error(existing.R, R) < deg2rad(kCandidateDedupDeg)) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) {
        candidates.push_back({R, pairing, signs});
      }
    }
  }
  return candidates;
}

PolishedRotation refine_candidate_rotation(
    const RotationCandidate& candidate,
    std::span<const Eigen::Vector3d> normals, std::span<const double> lengths,
    const std::array<Eigen::Vector3d, 2>& v3d, double gate_deg) {
  Eigen::Matrix3d R = candidate.R;
  std::vector<int> assignment(normals.size(), -1);

  const double sin_gate = std::sin(deg2rad(gate_deg));
  for (int round = 0; round < 6; ++round) {
    // Assign each segment to the orientation whose rotated direction lies
    // closest to its interpretation plane, if within the gate.
    const Eigen::Vector3d Rd0 = R * v3d[0];
    const Eigen::Vector3d Rd1 = R * v3d[1];
    std::vector<int> next(normals.size(), -1);
    for (size_t i = 0; i < normals.size(); ++i) {
      const double r0 = std::abs(normals[i].dot(Rd0));
      const double r1 = std::abs(normals[i].dot(Rd1));
      const double best = std::min(r0, r1);
      if (best < sin_gate) next[i] = r0 <= r1 ? 0 : 1;
    }
    const bool stable = next == assignment;
    assignment = std::move(next);

    // Squared-length weights: endpoint noise perturbs a segment's normal
    // inversely to its length.
    for (int iter = 0; iter < 20; ++iter) {
      Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
      Eigen::Vector3d g = Eigen::Vector3d::Zero();
      const std::array<Eigen::Vector3d, 2> Rd = {R * v3d[0], R * v3d[1]};
      for (size_t i = 0; i < normals.size(); ++i) {
        if (assignment[i] < 0) continue;
        const Eigen::Vector3d& d = Rd[static_cast<size_t>(assignment[i])];
        const double w = lengths[i] * lengths[i];
        const double r = normals[i].dot(d);
        const Eigen::Vector3d J = d.cross(normals[i]);
        H += w * J * J.transpose();
        g += w * J * r;
      }
      H.diagonal().array() += 1e-12;
      const Eigen::Vector3d step = H.ldlt().solve(-g);
      R = exp_so3(step) * R;
      if (step.norm() < 1e-12) break;
    }
    if (stable) break;
  }

  PolishedRotation result;
  result.R = R;
  const Eigen::Vector3d Rd0 = R * v3d[0];
  const Eigen::Vector3d Rd1 = R * v3d[1];
  double residual_sum = 0.0;
  for (size_t i = 0; i < normals.size(); ++i) {
    if (assignment[i] < 0) continue;
    const double w = lengths[i] * lengths[i];
    const Eigen::Vector3d& d = assignment[i] == 0 ? Rd0 : Rd1;
    result.support += w;
    residual_sum += w * std::abs(normals[i].dot(d));
  }
  if (result.support > 0.0) {
    result.mean_residual = residual_sum / result.support;
  }
  return result;
}

}  // namespace linereg
