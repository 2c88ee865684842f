#include "linereg/translation_ransac.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "linereg/geometry.hpp"
#include "linereg/pose_refine.hpp"

namespace linereg {

double overlap_length(const LineSegment2D& proj, const LineSegment2D& seg,
                      double max_angle_deg) {
  const Eigen::Vector2d u = seg.direction();
  const Eigen::Vector2d v = proj.direction();
  const double cos_gate = std::cos(deg2rad(max_angle_deg));
  if (std::abs(u.dot(v)) < cos_gate) return 0.0;

  const double a = (proj.p - seg.p).dot(u);
  const double b = (proj.q - seg.p).dot(u);
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  return std::max(0.0, std::min(seg.length(), hi) - std::max(0.0, lo));
}

std::optional<Eigen::Vector3d> solve_translation(
    const Eigen::Matrix3d& R, const std::array<LineSegment3D, 3>& segs3d,
    const std::array<Eigen::Vector3d, 3>& normals) {
  Eigen::Matrix3d N;
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) {
    N.row(i) = normals[i].transpose();
    rhs(i) = -normals[i].dot(R * segs3d[i].center());
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(N, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d s = svd.singularValues();
  if (s(2) <= 0.0 || s(0) / s(2) >= 1e6) {
    return std::nullopt;
  }
  return svd.solve(rhs);
}

namespace {

double effective_min_3d_length(const std::vector<LineSegment3D>& segs3d,
                               const RansacConfig& cfg) {
  if (cfg.min_3d_length > 0.0 || segs3d.empty()) {
    return cfg.min_3d_length;
  }
  Eigen::Vector3d lo = segs3d.front().p;
  Eigen::Vector3d hi = lo;
  for (const auto& s : segs3d) {
    lo = lo.cwiseMin(s.p).cwiseMin(s.q);
    hi = hi.cwiseMax(s.p).cwiseMax(s.q);
  }
  return 0.05 * (hi - lo).norm();
}

struct Filtered2D {
  LineSegment2D seg;
  Eigen::Vector3d normal;  // interpretation plane normal, unit
  Eigen::Vector2d dir;
  double length = 0.0;
  int orig_index = -1;
};

struct Filtered3D {
  LineSegment3D seg;
  int orig_index = -1;
};

// Length-filtered segments plus everything reusable across hypotheses.
struct MatchContext {
  std::vector<Filtered2D> s2;
  std::vector<Filtered3D> s3;
  CameraIntrinsics K;
  double sin_coplanarity = 0.0;
  double overlap_fraction = 0.5;
  double diameter = 1.0;  // 3D bounding-box diagonal
};

MatchContext build_context(const std::vector<LineSegment2D>& segs2d,
                           const std::vector<LineSegment3D>& segs3d,
                           const CameraIntrinsics& K, const RansacConfig& cfg) {
  MatchContext ctx;
  ctx.K = K;
  ctx.sin_coplanarity = std::sin(deg2rad(cfg.coplanarity_angle_deg));
  ctx.overlap_fraction = cfg.overlap_fraction;
  if (!segs3d.empty()) {
    Eigen::Vector3d lo = segs3d.front().p;
    Eigen::Vector3d hi = lo;
    for (const auto& s : segs3d) {
      lo = lo.cwiseMin(s.p).cwiseMin(s.q);
      hi = hi.cwiseMax(s.p).cwiseMax(s.q);
    }
    ctx.diameter = std::max(1e-12, (hi - lo).norm());
  }

  const double min_3d = effective_min_3d_length(segs3d, cfg);
  if (!segs3d.empty()) {
    Eigen::Vector3d lo = segs3d.front().p;
    Eigen::Vector3d hi = lo;
    for (const auto& s : segs3d) {
      lo = lo.cwiseMin(s.p).cwiseMin(s.q);
      hi = hi.cwiseMax(s.p).cwiseMax(s.q);
    }
    ctx.diameter = std::max(1e-12, (hi - lo).norm());
  }

  for (size_t i = 0; i < segs2d.size(); ++i) {
    const double len = segs2d[i].length();
    if (len < cfg.min_2d_length_px) continue;
    const auto n = interpretation_plane_normal(K, segs2d[i]);
    if (!n) continue;
    ctx.s2.push_back({segs2d[i], *n, segs2d[i].direction(), len,
                      static_cast<int>(i)});
  }
  for (size_t i = 0; i < segs3d.size(); ++i) {
    if (segs3d[i].length() < min_3d) continue;
    ctx.s3.push_back({segs3d[i], static_cast<int>(i)});
  }
  return ctx;
}

// Per-rotation precomputation: rotated 3D geometry and, for each 2D segment,
// the direction-compatible 3D segments it may legitimately pair with.
struct RotatedScene {
  Eigen::Matrix3d R;
  std::vector<Eigen::Vector3d> rc, rp, rq;
  std::vector<std::vector<int>> compat;
  std::vector<int> sampleable;  // 2D indices with non-empty compat list
};

RotatedScene rotate_scene(const MatchContext& ctx, const Eigen::Matrix3d& R,
                          double compat_angle_deg, bool with_compat = true) {
  RotatedScene rot;
  rot.R = R;
  rot.rc.reserve(ctx.s3.size());
  rot.rp.reserve(ctx.s3.size());
  rot.rq.reserve(ctx.s3.size());
  std::vector<Eigen::Vector3d> rdir;
  rdir.reserve(ctx.s3.size());
  for (const auto& f : ctx.s3) {
    rot.rc.push_back(R * f.seg.center());
    rot.rp.push_back(R * f.seg.p);
    rot.rq.push_back(R * f.seg.q);
    rdir.push_back(R * f.seg.direction());
  }
  if (!with_compat) return rot;

  const double sin_compat = std::sin(deg2rad(compat_angle_deg));
  rot.compat.resize(ctx.s2.size());
  for (size_t j = 0; j < ctx.s2.size(); ++j) {
    for (size_t k = 0; k < ctx.s3.size(); ++k) {
      if (std::abs(ctx.s2[j].normal.dot(rdir[k])) < sin_compat) {
        rot.compat[j].push_back(static_cast<int>(k));
      }
    }
    if (!rot.compat[j].empty()) {
      rot.sampleable.push_back(static_cast<int>(j));
    }
  }
  return rot;
}

struct Scored {
  std::vector<Correspondence> corrs;  // filtered-space indices
  std::vector<double> coplanarities;  // per correspondence
  int score = 0;
  double overlap_sum = 0.0;         // per-2D-segment best overlap, px
  double matched_length_sum = 0.0;  // total length of matched 2D segments, px
  double mean_coplanarity = std::numeric_limits<double>::infinity();

  // Fraction of the matched segments actually covered by their projections.
  double coverage() const {
    return matched_length_sum > 0.0 ? overlap_sum / matched_length_sum : 0.0;
  }
};

// Scores a translation hypothesis. When compat_only is set, only direction-
// compatible pairs are tested: near-correct poses lose no true inliers that
// way and the run stays cheap; the emitted estimate is rescored over all
// pairs at the end.
Scored score_translation(const MatchContext& ctx, const RotatedScene& rot,
                         const Eigen::Vector3d& t, bool compat_only = false) {
  Scored out;
  double coplanarity_sum = 0.0;

  const size_t n3 = ctx.s3.size();
  std::vector<Eigen::Vector3d> m(n3);
  std::vector<double> m_norm(n3);
  for (size_t k = 0; k < n3; ++k) {
    m[k] = rot.rc[k] + t;
    m_norm[k] = m[k].norm();
  }

  std::vector<int> all_indices;
  if (!compat_only) {
    all_indices.resize(n3);
    for (size_t k = 0; k < n3; ++k) all_indices[k] = static_cast<int>(k);
  }

  for (size_t j = 0; j < ctx.s2.size(); ++j) {
    const Filtered2D& f2 = ctx.s2[j];
    const auto& k_list = compat_only ? rot.compat[j] : all_indices;
    double best_overlap = 0.0;
    for (const int k_idx : k_list) {
      const size_t k = static_cast<size_t>(k_idx);
      if (m_norm[k] < 1e-12) continue;
      const double cop = std::abs(m[k].dot(f2.normal)) / m_norm[k];
      if (cop >= ctx.sin_coplanarity) continue;

      const Eigen::Vector3d pp = rot.rp[k] + t;
      const Eigen::Vector3d qq = rot.rq[k] + t;
      if (pp.z() <= kDepthEpsilon || qq.z() <= kDepthEpsilon) continue;

      const LineSegment2D proj{
          {ctx.K.fx * pp.x() / pp.z() + ctx.K.cx, ctx.K.fy * pp.y() / pp.z() + ctx.K.cy},
          {ctx.K.fx * qq.x() / qq.z() + ctx.K.cx, ctx.K.fy * qq.y() / qq.z() + ctx.K.cy}};
      if (proj.length() < 1e-9) continue;

      const double overlap = overlap_length(proj, f2.seg);
      if (overlap > ctx.overlap_fraction * f2.length) {
        out.corrs.push_back({static_cast<int>(j), static_cast<int>(k_idx)});
        out.coplanarities.push_back(cop);
        coplanarity_sum += cop;
        best_overlap = std::max(best_overlap, overlap);
      }
    }
    if (best_overlap > 0.0) {
      ++out.score;
      out.overlap_sum += best_overlap;
      out.matched_length_sum += f2.length;
    }
  }

  if (!out.corrs.empty()) {
    out.mean_coplanarity = coplanarity_sum / static_cast<double>(out.corrs.size());
  }
  return out;
}

// Least-squares re-solve of t over a correspondence set (center coplanarity
// constraints), used to polish promising hypotheses.
std::optional<Eigen::Vector3d> resolve_translation(
    const MatchContext& ctx, const RotatedScene& rot,
    const std::vector<Correspondence>& corrs) {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (const auto& c : corrs) {
    const Eigen::Vector3d& n = ctx.s2[static_cast<size_t>(c.idx2d)].normal;
    A += n * n.transpose();
    b -= n * n.dot(rot.rc[static_cast<size_t>(c.idx3d)]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(A);
  if (eig.eigenvalues()(0) <= 1e-9 * eig.eigenvalues()(2)) {
    return std::nullopt;
  }
  return A.ldlt().solve(b);
}

// Primary: summed best overlap, which multi-matches cannot inflate; it
// separates exact alignments from repeated-structure aliases that saturate
// the plain inlier count (an alias matches many segments, each at barely
// half coverage). Count and residual settle exact ties.
bool better(const Scored& a, const Scored& b) {
  if (a.overlap_sum != b.overlap_sum) return a.overlap_sum > b.overlap_sum;
  if (a.score != b.score) return a.score > b.score;
  return a.mean_coplanarity < b.mean_coplanarity;
}

CandidateEstimate estimate_translation_ctx(const MatchContext& ctx,
                                           const Eigen::Matrix3d& R,
                                           const RansacConfig& cfg,
                                           std::mt19937_64& rng) {
  if (ctx.s2.size() < 3 || ctx.s3.size() < 3) {
    throw InsufficientSegments(
        "estimate_translation: need 3 segments per side after filtering");
  }
  const RotatedScene rot = rotate_scene(
      ctx, R, kDirectionCompatFactor * cfg.coplanarity_angle_deg);

  CandidateEstimate best;
  best.R_refined = R;
  Scored best_scored;
  Eigen::Matrix3d best_R = R;
  Eigen::Vector3d best_t = Eigen::Vector3d::Zero();
  int valid_hypotheses = 0;
  const double early_exit_score =
      cfg.early_exit_fraction * static_cast<double>(ctx.s2.size());

  // Right-hand sides -n_j . (R c_k) for every compatible pair, aligned with
  // rot.compat; reused by the per-iteration consensus vote.
  std::vector<std::vector<double>> pair_rhs(ctx.s2.size());
  for (size_t j = 0; j < ctx.s2.size(); ++j) {
    pair_rhs[j].reserve(rot.compat[j].size());
    for (const int k : rot.compat[j]) {
      pair_rhs[j].push_back(-ctx.s2[j].normal.dot(rot.rc[static_cast<size_t>(k)]));
    }
  }
  const double vote_window = 0.02 * ctx.diameter;
  std::vector<double> vote_s;

  int iter = 0;
  if (rot.sampleable.size() >= 3) {
    std::uniform_int_distribution<size_t> pick2(0, rot.sampleable.size() - 1);
    for (; iter < cfg.max_iters; ++iter) {
      // Two random 2D segments, each paired with a compatible 3D segment.
      // Their coplanarity constraints pin the translation to a line; the
      // third pair is chosen by consensus along that line before the full
      // three-pair solve.
      size_t a = pick2(rng);
      size_t b = pick2(rng);
      while (b == a) b = pick2(rng);
      const int j1 = rot.sampleable[a];
      const int j2 = rot.sampleable[b];
      const auto& list1 = rot.compat[static_cast<size_t>(j1)];
      const auto& list2 = rot.compat[static_cast<size_t>(j2)];
      std::uniform_int_distribution<size_t> pk1(0, list1.size() - 1);
      std::uniform_int_distribution<size_t> pk2(0, list2.size() - 1);
      const size_t i1 = pk1(rng);
      const size_t i2 = pk2(rng);
      const int k1 = list1[i1];
      const int k2 = list2[i2];

      const Eigen::Vector3d& n1 = ctx.s2[static_cast<size_t>(j1)].normal;
      const Eigen::Vector3d& n2 = ctx.s2[static_cast<size_t>(j2)].normal;
      Eigen::Vector3d u = n1.cross(n2);
      const double u_norm = u.norm();
      if (u_norm < std::sin(deg2rad(10.0))) continue;
      u /= u_norm;

      // Least-norm particular solution of the two constraints.
      Eigen::Matrix2d G;
      G << 1.0, n1.dot(n2), n1.dot(n2), 1.0;
      const Eigen::Vector2d rhs2(pair_rhs[static_cast<size_t>(j1)][i1],
                                 pair_rhs[static_cast<size_t>(j2)][i2]);
      const Eigen::Vector2d w = G.inverse() * rhs2;
      const Eigen::Vector3d t0 = w(0) * n1 + w(1) * n2;

      // Vote: every compatible pair wants its own position along u.
      vote_s.clear();
      for (const int j : rot.sampleable) {
        if (j == j1 || j == j2) continue;
        const double denom = ctx.s2[static_cast<size_t>(j)].normal.dot(u);
        if (std::abs(denom) < 0.15) continue;
        const double offset = ctx.s2[static_cast<size_t>(j)].normal.dot(t0);
        const auto& rhs_j = pair_rhs[static_cast<size_t>(j)];
        for (const double r : rhs_j) {
          vote_s.push_back((r - offset) / denom);
        }
      }
      if (vote_s.empty()) continue;

      // Densest fixed-width window along s (histogram mode).
      double s_lo = vote_s.front(), s_hi = vote_s.front();
      for (const double s : vote_s) {
        s_lo = std::min(s_lo, s);
        s_hi = std::max(s_hi, s);
      }
      const int n_buckets = std::min(
          4096, std::max(1, static_cast<int>((s_hi - s_lo) / vote_window) + 1));
      const double bucket_width = (s_hi - s_lo) / n_buckets;
      std::vector<int> counts(static_cast<size_t>(n_buckets), 0);
      for (const double s : vote_s) {
        int idx = bucket_width > 0.0
                      ? static_cast<int>((s - s_lo) / bucket_width)
                      : 0;
        idx = std::clamp(idx, 0, n_buckets - 1);
        ++counts[static_cast<size_t>(idx)];
      }
      int best_bucket = 0;
      int best_count = -1;
      for (int i2b = 0; i2b < n_buckets; ++i2b) {
        const int count = counts[static_cast<size_t>(i2b)] +
                          (i2b + 1 < n_buckets ? counts[static_cast<size_t>(i2b) + 1] : 0);
        if (count > best_count) {
          best_count = count;
          best_bucket = i2b;
        }
      }
      const double s_center = s_lo + bucket_width * (best_bucket + 1.0);

      // Third pair: the compatible pair voting closest to the mode.
      int j3 = -1, k3 = -1;
      double best_gap = std::numeric_limits<double>::infinity();
      for (const int j : rot.sampleable) {
        if (j == j1 || j == j2) continue;
        const double denom = ctx.s2[static_cast<size_t>(j)].normal.dot(u);
        if (std::abs(denom) < 0.15) continue;
        const double offset = ctx.s2[static_cast<size_t>(j)].normal.dot(t0);
        const auto& list_j = rot.compat[static_cast<size_t>(j)];
        const auto& rhs_j = pair_rhs[static_cast<size_t>(j)];
        for (size_t m = 0; m < list_j.size(); ++m) {
          const double gap = std::abs((rhs_j[m] - offset) / denom - s_center);
          if (gap < best_gap) {
            best_gap = gap;
            j3 = j;
            k3 = list_j[m];
          }
        }
      }
      if (j3 < 0) continue;

      const std::array<LineSegment3D, 3> triple3d = {
          ctx.s3[static_cast<size_t>(k1)].seg, ctx.s3[static_cast<size_t>(k2)].seg,
          ctx.s3[static_cast<size_t>(k3)].seg};
      const std::array<Eigen::Vector3d, 3> normals = {
          n1, n2, ctx.s2[static_cast<size_t>(j3)].normal};

      const auto t = solve_translation(R, triple3d, normals);
      if (!t) continue;
      ++valid_hypotheses;

      Scored scored = score_translation(ctx, rot, *t, true);
      // Local optimization may grow a raw hypothesis well past the current
      // best, so it also runs on hypotheses within reach of the leader, not
      // only on strict improvements.
      const bool promising =
          scored.corrs.size() >= 6 &&
          scored.overlap_sum > 0.5 * best_scored.overlap_sum;
      if (!better(scored, best_scored) && !promising) continue;

      // Local optimization of winning hypotheses: refit the full pose over
      // the most coplanar half of the correspondence set (wrong pairs carry
      // systematically larger residuals and would drag the fit), rescore,
      // keep improvements.
      Eigen::Matrix3d R_cur = R;
      Eigen::Vector3d t_cur = *t;
      RotatedScene rot_cur = rot;
      for (int round = 0; round < kLocalOptRounds; ++round) {
        if (scored.corrs.size() < 3) break;
        bool improved = false;

        if (scored.corrs.size() >= 6) {
          std::vector<size_t> order(scored.corrs.size());
          for (size_t i = 0; i < order.size(); ++i) order[i] = i;
          std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return scored.coplanarities[a] < scored.coplanarities[b];
          });
          const size_t n_fit = std::max<size_t>(6, order.size() / 2);

          std::vector<LineTerm> terms;
          terms.reserve(n_fit);
          for (size_t i = 0; i < n_fit && i < order.size(); ++i) {
            const auto& c = scored.corrs[order[i]];
            const auto& f2 = ctx.s2[static_cast<size_t>(c.idx2d)];
            terms.push_back({ImageLine::through(f2.seg.p, f2.seg.q),
                             ctx.s3[static_cast<size_t>(c.idx3d)].seg});
          }
          const Pose polished =
              lm_minimize_terms({R_cur, t_cur}, terms, ctx.K, 15);
          RotatedScene rot2 = rotate_scene(
              ctx, polished.R, kDirectionCompatFactor * cfg.coplanarity_angle_deg);
          Scored rescored = score_translation(ctx, rot2, polished.t, true);
          if (better(rescored, scored)) {
            scored = std::move(rescored);
            R_cur = polished.R;
            t_cur = polished.t;
            rot_cur = std::move(rot2);
            improved = true;
          }
        }

        if (!improved) {
          const auto t_ls = resolve_translation(ctx, rot_cur, scored.corrs);
          if (!t_ls) break;
          Scored rescored = score_translation(ctx, rot_cur, *t_ls, true);
          if (!better(rescored, scored)) break;
          scored = std::move(rescored);
          t_cur = *t_ls;
        }
      }

      if (!better(scored, best_scored)) continue;
      best_scored = std::move(scored);
      best_t = t_cur;
      best_R = R_cur;
      // Exit only on configurations that are unambiguously aligned: enough
      // distinct segments matched and nearly fully covered by their
      // projections (aliases plateau near the overlap-fraction gate).
      if (static_cast<double>(best_scored.score) > early_exit_score &&
          best_scored.coverage() > 0.97) {
        best.early_exit = true;
        ++iter;
        break;
      }
    }
  }

  if (valid_hypotheses == 0) {
    throw NoValidHypothesis(
        "estimate_translation: no well-conditioned sample triple");
  }

  best.R_refined = best_R;
  best.t = best_t;
  best.score = best_scored.score;
  best.overlap_sum = best_scored.overlap_sum;
  best.mean_coplanarity = best_scored.mean_coplanarity;
  best.iterations = iter;
  best.correspondences.reserve(best_scored.corrs.size());
  for (const auto& c : best_scored.corrs) {
    best.correspondences.push_back(
        {ctx.s2[static_cast<size_t>(c.idx2d)].orig_index,
         ctx.s3[static_cast<size_t>(c.idx3d)].orig_index});
  }
  return best;
}

}  // namespace

std::vector<Correspondence> count_inliers(
    const Eigen::Matrix3d& R, const Eigen::Vector3d& t,
    const std::vector<LineSegment2D>& segs2d,
    const std::vector<LineSegment3D>& segs3d, const CameraIntrinsics& K,
    const RansacConfig& cfg) {
  const MatchContext ctx = build_context(segs2d, segs3d, K, cfg);
  const RotatedScene rot =
      rotate_scene(ctx, R, kDirectionCompatFactor * cfg.coplanarity_angle_deg);
  const Scored scored = score_translation(ctx, rot, t);
  std::vector<Correspondence> out;
  out.reserve(scored.corrs.size());
  for (const auto& c : scored.corrs) {
    out.push_back({ctx.s2[static_cast<size_t>(c.idx2d)].orig_index,
                   ctx.s3[static_cast<size_t>(c.idx3d)].orig_index});
  }
  return out;
}

CandidateEstimate estimate_translation(const Eigen::Matrix3d& R,
                                       const std::vector<LineSegment2D>& segs2d,
                                       const std::vector<LineSegment3D>& segs3d,
                                       const CameraIntrinsics& K,
                                       const RansacConfig& cfg,
                                       std::mt19937_64& rng) {
  const MatchContext ctx = build_context(segs2d, segs3d, K, cfg);
  return estimate_translation_ctx(ctx, R, cfg, rng);
}

std::vector<CandidateEstimate> estimate_all_candidates(
    const std::vector<RotationCandidate>& candidates,
    const std::vector<LineSegment2D>& segs2d,
    const std::vector<LineSegment3D>& segs3d, const CameraIntrinsics& K,
    const RansacConfig& cfg, int n_threads) {
  const MatchContext ctx = build_context(segs2d, segs3d, K, cfg);
  if (ctx.s2.size() < 3 || ctx.s3.size() < 3) {
    throw InsufficientSegments(
        "estimate_all_candidates: need 3 segments per side after filtering");
  }

  std::vector<CandidateEstimate> results(candidates.size());
  const int n = static_cast<int>(candidates.size());

  auto run_one = [&](int i) {
    std::mt19937_64 rng(cfg.rng_seed + static_cast<std::uint64_t>(i));
    try {
      results[static_cast<size_t>(i)] =
          estimate_translation_ctx(ctx, candidates[static_cast<size_t>(i)].R,
                                   cfg, rng);
    } catch (const NoValidHypothesis&) {
      results[static_cast<size_t>(i)] = CandidateEstimate{};
    }
  };

  if (n_threads == 1) {
    // Serial reference path, kept for testing against the parallel kernel.
    for (int i = 0; i < n; ++i) run_one(i);
  } else {
#ifdef _OPENMP
    if (n_threads > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(n_threads)
      for (int i = 0; i < n; ++i) run_one(i);
    } else {
#pragma omp parallel for schedule(dynamic, 1)
      for (int i = 0; i < n; ++i) run_one(i);
    }
#else
    for (int i = 0; i < n; ++i) run_one(i);
#endif
  }
  return results;
}

std::pair<std::vector<int>, std::vector<int>> filter_segment_indices(
    const std::vector<LineSegment2D>& segs2d,
    const std::vector<LineSegment3D>& segs3d, const RansacConfig& cfg) {
  std::pair<std::vector<int>, std::vector<int>> out;
  for (size_t i = 0; i < segs2d.size(); ++i) {
    if (segs2d[i].length() >= cfg.min_2d_length_px) {
      out.first.push_back(static_cast<int>(i));
    }
  }
  const double min_3d = effective_min_3d_length(segs3d, cfg);
  for (size_t i = 0; i < segs3d.size(); ++i) {
    if (segs3d[i].length() >= min_3d) {
      out.second.push_back(static_cast<int>(i));
    }
  }
  return out;
}

int select_best(const std::vector<CandidateEstimate>& results) {
  int best = -1;
  for (size_t i = 0; i < results.size(); ++i) {
    if (results[i].score == 0) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const auto& cur = results[i];
    const auto& win = results[static_cast<size_t>(best)];
    const bool wins = cur.overlap_sum != win.overlap_sum
                          ? cur.overlap_sum > win.overlap_sum
                          : (cur.score != win.score
                                 ? cur.score > win.score
                                 : cur.mean_coplanarity < win.mean_coplanarity);
    if (wins) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    throw AllCandidatesFailed("select_best: every candidate scored zero");
  }
  return best;
}

}  // namespace linereg
