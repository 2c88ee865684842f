#pragma once

#include <limits>
#include <optional>
#include <random>

#include "linereg/rotation_candidates.hpp"
#include "linereg/types.hpp"

namespace linereg {

struct RansacConfig {
  int max_iters = 4000;
  double overlap_fraction = 0.5;
  double early_exit_fraction = 0.7;
  double coplanarity_angle_deg = 2.0;
  double min_2d_length_px = 20.0;
  double min_3d_length = 0.0;  // <= 0: auto, 5% of the 3D bounding-box diagonal
  std::uint64_t rng_seed = 0;
};

// Projected and observed segments at larger image angles cannot be the same
// line even when their parameter intervals overlap.
constexpr double kOverlapAngleGateDeg = 5.0;
// 3D lines whose rotated direction leaves the 2D line's interpretation plane
// by more than this multiple of the coplanarity angle are not sampled as
// pairing hypotheses (they can never be inliers of a near-correct pose).
constexpr double kDirectionCompatFactor = 2.0;
// Local re-solve rounds applied when a hypothesis becomes the new best.
constexpr int kLocalOptRounds = 5;

/// Best translation hypothesis found for one rotation candidate. R_refined
/// starts as the candidate rotation and tracks the local-optimization polish
/// applied to winning hypotheses; the reported score and correspondences are
/// valid for (R_refined, t).
struct CandidateEstimate {
  Eigen::Matrix3d R_refined = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  std::vector<Correspondence> correspondences;  // original segment indices
  int score = 0;            // distinct matched 2D segments
  double overlap_sum = 0.0;  // summed per-segment best overlap, px
  double mean_coplanarity = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool early_exit = false;
};

/// Overlap between `proj` and `seg` measured along the infinite line of
/// `seg`, in pixels. Zero when the segments are disjoint or their directions
/// differ by more than max_angle_deg.
double overlap_length(const LineSegment2D& proj, const LineSegment2D& seg,
                      double max_angle_deg = kOverlapAngleGateDeg);

/// Solves n_i . (R c_i + t) = 0 for t from three (3D segment, interpretation
/// plane normal) pairs, using the segment centers. Empty when the stacked
/// normals are ill-conditioned (condition number above 1e6).
std::optional<Eigen::Vector3d> solve_translation(
    const Eigen::Matrix3d& R, const std::array<LineSegment3D, 3>& segs3d,
    const std::array<Eigen::Vector3d, 3>& normals);

/// All correspondences passing the coplanarity and overlap tests under the
/// given pose. Indices refer to the input vectors; segments shorter than the
/// configured minima never appear.
std::vector<Correspondence> count_inliers(
    const Eigen::Matrix3d& R, const Eigen::Vector3d& t,
    const std::vector<LineSegment2D>& segs2d,
    const std::vector<LineSegment3D>& segs3d, const CameraIntrinsics& K,
    const RansacConfig& cfg);

/// Hypothesis-testing loop for one rotation candidate: sample 3 direction-
/// compatible 2D-3D pairs, solve for t, score by overlap inliers, locally
/// re-solve new-best hypotheses, stop at the early-exit fraction or
/// max_iters. Throws InsufficientSegments / NoValidHypothesis.
CandidateEstimate estimate_translation(const Eigen::Matrix3d& R,
                                       const std::vector<LineSegment2D>& segs2d,
                                       const std::vector<LineSegment3D>& segs3d,
                                       const CameraIntrinsics& K,
                                       const RansacConfig& cfg,
                                       std::mt19937_64& rng);

inline CandidateEstimate estimate_translation(
    const RotationCandidate& candidate, const std::vector<LineSegment2D>& segs2d,
    const std::vector<LineSegment3D>& segs3d, const CameraIntrinsics& K,
    const RansacConfig& cfg, std::mt19937_64& rng) {
  return estimate_translation(candidate.R, segs2d, segs3d, K, cfg, rng);
}

/// Runs estimate_translation for every candidate with an independent
/// generator seeded cfg.rng_seed + candidate index. n_threads = 1 runs the
/// serial reference loop, 0 uses the OpenMP default, otherwise the given
/// thread count. Results are identical across all settings.
std::vector<CandidateEstimate> estimate_all_candidates(
    const std::vector<RotationCandidate>& candidates,
    const std::vector<LineSegment2D>& segs2d,
    const std::vector<LineSegment3D>& segs3d, const CameraIntrinsics& K,
    const RansacConfig& cfg, int n_threads = 0);

/// Index of the best estimate: highest summed overlap, ties by score, then
/// smaller mean coplanarity residual, then index. Throws AllCandidatesFailed
/// when every score is zero.
int select_best(const std::vector<CandidateEstimate>& results);

/// Indices of segments surviving the short-segment filters, per side.
std::pair<std::vector<int>, std::vector<int>> filter_segment_indices(
    const std::vector<LineSegment2D>& segs2d,
    const std::vector<LineSegment3D>& segs3d, const RansacConfig& cfg);

}  // namespace linereg
