#pragma once

#include <array>
#include <span>

#include "linereg/types.hpp"

namespace linereg {

// Pairs closer than this give an ill-conditioned direction basis.
constexpr double kMinPairSeparationDeg = 10.0;
// A rigid pairing must preserve the inter-direction angle this closely. The
// bound absorbs the worst observed vanishing-direction fit error.
constexpr double kPairAngleConsistencyDeg = 20.0;
// Candidates closer than this are duplicates.
constexpr double kCandidateDedupDeg = 1.0;

/// One hypothesis for the camera rotation, tagged with the direction pairing
/// and sign pattern that produced it.
struct RotationCandidate {
  Eigen::Matrix3d R;
  int pairing = 0;       // 0: 2d[0]<->3d[0]; 1: 2d[0]<->3d[1]
  int sign_pattern = 0;  // bit k set: 3D direction k negated
};

/// Enumerates every rotation consistent with matching the two vanishing
/// directions to the two 3D orientations: 2 pairings x 4 sign patterns,
/// angle-consistency filtered and deduplicated. At most 8 candidates.
/// Throws DegenerateBasis when either pair is separated by less than
/// kMinPairSeparationDeg.
std::vector<RotationCandidate> enumerate_rotations(
    const std::array<Eigen::Vector3d, 2>& v2d,
    const std::array<Eigen::Vector3d, 2>& v3d);

struct PolishedRotation {
  Eigen::Matrix3d R;
  double support = 0.0;        // total weight of the assigned segments
  double mean_residual = 0.0;  // weighted mean |n . R d| over them
};

/// Joint rotation-membership polish of a candidate: alternately gathers the
/// segments whose interpretation-plane normals are consistent with either
/// rotated 3D orientation (within gate_deg) and Gauss-Newton fits R to
/// minimize the length-weighted residuals sum (L_i n_i . R d)^2. Using every
/// consistent segment instead of the two fitted directions recovers the axis
/// the per-cluster direction fit constrains weakly, and the regathering
/// sheds cluster contamination. The objective is sign-invariant, so the
/// candidate's ambiguity class is preserved.
PolishedRotation refine_candidate_rotation(
    const RotationCandidate& candidate,
    std::span<const Eigen::Vector3d> normals, std::span<const double> lengths,
    const std::array<Eigen::Vector3d, 2>& v3d, double gate_deg);

}  // namespace linereg
