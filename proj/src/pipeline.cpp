#include "linereg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <span>

#include "linereg/geometry.hpp"
#include "linereg/pose_refine.hpp"
#include "linereg/rotation_candidates.hpp"

namespace linereg {

namespace {

class StageClock {
 public:
  StageClock() : start_(std::chrono::steady_clock::now()) {}

  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

namespace {

RegistrationReport register_attempt(const std::vector<LineSegment2D>& segs2d,
                                    const std::vector<LineSegment3D>& segs3d,
                                    const CameraIntrinsics& K,
                                    const PipelineConfig& cfg) {
  RegistrationReport report;
  StageClock clock;
  const auto t0 = std::chrono::steady_clock::now();

  // One extra vanishing-direction cluster, when available, buys robustness:
  // a noisy scene sometimes promotes an accidental cluster into the top two,
  // and every 2D pair drawn from the top three gets its own candidate set.
  auto merge_top = [&](const std::vector<DirectionCluster>& clusters,
                       std::span<const Eigen::Vector3d> vectors,
                       std::span<const double> weights, DirectionFit mode) {
    const int want = std::max(cfg.keep, 3);
    try {
      return merge_and_rank(clusters, vectors, weights, mode,
                            cfg.cluster.merge_angle_deg, want);
    } catch (const FewerThanKeep&) {
      return merge_and_rank(clusters, vectors, weights, mode,
                            cfg.cluster.merge_angle_deg, cfg.keep);
    }
  };

  std::mt19937_64 rng2d(cfg.cluster.rng_seed);
  auto raw2d = cluster_2d_vanishing(segs2d, K, cfg.cluster, rng2d);
  const auto normals = interpretation_normals(segs2d, K);
  std::vector<double> lengths;
  lengths.reserve(segs2d.size());
  for (const auto& seg : segs2d) lengths.push_back(seg.length());
  std::vector<double> sq_lengths;
  sq_lengths.reserve(lengths.size());
  for (const double len : lengths) sq_lengths.push_back(len * len);
  const auto clusters2d =
      merge_top(raw2d, normals, sq_lengths, DirectionFit::kPlaneNormals);
  for (const auto& c : clusters2d) report.cluster_populations_2d.push_back(c.population());
  report.timings.emplace_back("cluster_2d", clock.lap());

  std::mt19937_64 rng3d(cfg.cluster.rng_seed + 1);
  auto raw3d = cluster_3d_parallel(segs3d, cfg.cluster, rng3d);
  const auto dirs = segment_directions(segs3d);
  const auto clusters3d = merge_and_rank(std::move(raw3d), dirs, {},
                                         DirectionFit::kLineDirections,
                                         cfg.cluster.merge_angle_deg, cfg.keep);
  for (const auto& c : clusters3d) report.cluster_populations_3d.push_back(c.population());
  report.timings.emplace_back("cluster_3d", clock.lap());

  const std::array<Eigen::Vector3d, 2> v3d = {clusters3d[0].direction,
                                              clusters3d[1].direction};

  std::vector<RotationCandidate> candidates;
  const int n2 = static_cast<int>(clusters2d.size());
  for (int a = 0; a < n2; ++a) {
    for (int b = a + 1; b < n2; ++b) {
      const std::array<Eigen::Vector3d, 2> v2d = {clusters2d[static_cast<size_t>(a)].direction,
                                                  clusters2d[static_cast<size_t>(b)].direction};
      std::vector<RotationCandidate> pair_candidates;
      try {
        pair_candidates = enumerate_rotations(v2d, v3d);
      } catch (const DegenerateBasis&) {
        continue;  // near-collinear cluster pair, try the next one
      }

      // Polish each candidate against all segments; the fitted direction
      // pair underconstrains the rotation under endpoint noise.
      for (auto& candidate : pair_candidates) {
        candidate.R = refine_candidate_rotation(
                          candidate, normals, lengths, v3d,
                          2.5 * cfg.cluster.inlier_angle_2d_deg)
                          .R;
        bool duplicate = false;
        for (const auto& existing : candidates) {
          if (rotation_geodesic_error(existing.R, candidate.R) < deg2rad(1.0)) {
            duplicate = true;
            break;
          }
        }
        if (!duplicate) candidates.push_back(candidate);
      }
    }
  }
  if (candidates.empty()) {
    throw DegenerateBasis("register_image: no usable direction pair");
  }
  report.candidate_count = static_cast<int>(candidates.size());
  report.timings.emplace_back("candidates", clock.lap());

  const auto estimates = estimate_all_candidates(candidates, segs2d, segs3d, K,
                                                 cfg.ransac, cfg.n_threads);
  const int best = select_best(estimates);
  report.best_candidate = best;
  report.ransac_score = estimates[static_cast<size_t>(best)].score;
  report.timings.emplace_back("ransac", clock.lap());

  // Refinement doubles as verification: a wrong candidate's correspondences
  // cannot all be made collinear, so its refined support collapses. The
  // leaders by RANSAC score are refined and the strongest survivor wins.
  struct Verified {
    int candidate = -1;
    RefineResult refined;
    double mean_residual = std::numeric_limits<double>::infinity();
  };
  std::vector<int> order;
  for (size_t i = 0; i < estimates.size(); ++i) {
    if (estimates[i].score > 0 && estimates[i].correspondences.size() >= 3) {
      order.push_back(static_cast<int>(i));
    }
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ea = estimates[static_cast<size_t>(a)];
    const auto& eb = estimates[static_cast<size_t>(b)];
    if (ea.overlap_sum != eb.overlap_sum) return ea.overlap_sum > eb.overlap_sum;
    return a < b;
  });
  if (order.size() > 3) order.resize(3);

  Verified winner;
  for (const int i : order) {
    const auto& estimate = estimates[static_cast<size_t>(i)];
    Verified v;
    v.candidate = i;
    v.refined = refine_pose(Pose{estimate.R_refined, estimate.t},
                            estimate.correspondences, segs2d, segs3d, K,
                            cfg.refine);
    double residual_sum = 0.0;
    int n_res = 0;
    for (const auto& c : v.refined.inliers) {
      const auto& seg2d = segs2d[static_cast<size_t>(c.idx2d)];
      const auto r = line_residuals(
          v.refined.pose, ImageLine::through(seg2d.p, seg2d.q),
          segs3d[static_cast<size_t>(c.idx3d)], K);
      if (r) {
        residual_sum += r->cwiseAbs().sum();
        n_res += 2;
      }
    }
    if (n_res > 0) v.mean_residual = residual_sum / n_res;

    const bool wins =
        winner.candidate < 0 ||
        v.refined.inliers.size() > winner.refined.inliers.size() ||
        (v.refined.inliers.size() == winner.refined.inliers.size() &&
         v.mean_residual < winner.mean_residual);
    if (wins) winner = std::move(v);
  }
  if (winner.candidate < 0) {
    // Fall back to the raw selection when no leader could be refined.
    const auto& estimate = estimates[static_cast<size_t>(best)];
    winner.candidate = best;
    winner.refined = refine_pose(Pose{estimate.R_refined, estimate.t},
                                 estimate.correspondences, segs2d, segs3d, K,
                                 cfg.refine);
  }
  report.best_candidate = winner.candidate;
  report.ransac_score = estimates[static_cast<size_t>(winner.candidate)].score;
  report.pose = winner.refined.pose;
  report.correspondences = winner.refined.inliers;
  report.refine_cost_history = winner.refined.cost_history;
  report.refine_converged = winner.refined.converged;
  report.timings.emplace_back("refine", clock.lap());

  report.timings.emplace_back(
      "total", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                   .count());
  return report;
}

}  // namespace

RegistrationReport register_image(const std::vector<LineSegment2D>& segs2d,
                                  const std::vector<LineSegment3D>& segs3d,
                                  const CameraIntrinsics& K,
                                  const PipelineConfig& cfg) {
  // A conspicuously weak result (few refined correspondences) almost always
  // traces back to an unlucky clustering draw, so one cheaper retry with
  // fresh clustering seeds buys most of the tail back. Deterministic: the
  // retry seeds derive from the configured ones.
  const auto [idx2d, idx3d] = filter_segment_indices(segs2d, segs3d, cfg.ransac);
  const size_t weak_threshold =
      std::max<size_t>(6, static_cast<size_t>(0.25 * static_cast<double>(idx2d.size())));

  RegistrationReport first;
  std::exception_ptr first_error;
  try {
    first = register_attempt(segs2d, segs3d, K, cfg);
    if (first.correspondences.size() >= weak_threshold) return first;
  } catch (const RegistrationError&) {
    first_error = std::current_exception();
  }

  PipelineConfig retry_cfg = cfg;
  retry_cfg.cluster.rng_seed = cfg.cluster.rng_seed + 0x9e3779b9ULL;
  retry_cfg.ransac.rng_seed = cfg.ransac.rng_seed + 0x9e3779b9ULL;
  retry_cfg.ransac.max_iters = std::max(1, cfg.ransac.max_iters / 2);
  try {
    RegistrationReport second = register_attempt(segs2d, segs3d, K, retry_cfg);
    if (first_error || second.correspondences.size() > first.correspondences.size()) {
      return second;
    }
    return first;
  } catch (const RegistrationError&) {
    if (first_error) std::rethrow_exception(first_error);
    return first;
  }
}

}  // namespace linereg
