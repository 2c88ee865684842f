#include "linereg/synthetic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <climits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "linereg/geometry.hpp"

namespace linereg {

namespace {

Eigen::Vector3d random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = {gauss(rng), gauss(rng), gauss(rng)};
  } while (v.norm() < 1e-6);
  return v.normalized();
}

// Liang-Barsky clip of a segment against [0,w] x [0,h]. False if nothing
// remains inside the image.
bool clip_to_image(LineSegment2D& seg, double w, double h) {
  const Eigen::Vector2d d = seg.q - seg.p;
  double t0 = 0.0, t1 = 1.0;
  const double checks[4][2] = {{-d.x(), seg.p.x()},
                               {d.x(), w - seg.p.x()},
                               {-d.y(), seg.p.y()},
                               {d.y(), h - seg.p.y()}};
  for (const auto& c : checks) {
    const double denom = c[0], dist = c[1];
    if (std::abs(denom) < 1e-15) {
      if (dist < 0.0) return false;
      continue;
    }
    const double t = dist / denom;
    if (denom < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
  }
  if (t0 >= t1) return false;
  const Eigen::Vector2d p = seg.p + t0 * d;
  const Eigen::Vector2d q = seg.p + t1 * d;
  seg.p = p;
  seg.q = q;
  return seg.length() > 1.0;  // slivers are not usable features
}

LineSegment3D random_segment_3d(const Eigen::Vector3d& dir, double box,
                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> center_dist(-box, box);
  std::uniform_real_distribution<double> length_dist(0.2, 0.8);
  const Eigen::Vector3d center(center_dist(rng), center_dist(rng), center_dist(rng));
  const double half = 0.5 * length_dist(rng);
  return {center - half * dir, center + half * dir};
}

Pose sample_look_at_pose(double box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist_dist(3.0, 5.0);
  std::uniform_real_distribution<double> roll_dist(0.0, 2.0 * M_PI);

  const Eigen::Vector3d eye = dist_dist(rng) * box * random_unit_vector(rng);
  const Eigen::Vector3d forward = (-eye).normalized();

  Eigen::Vector3d up0 = Eigen::Vector3d::UnitZ();
  if (std::abs(forward.dot(up0)) > 0.99) up0 = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d x0 = up0.cross(forward).normalized();
  const Eigen::Vector3d y0 = forward.cross(x0);

  const double roll = roll_dist(rng);
  const Eigen::Vector3d x = std::cos(roll) * x0 + std::sin(roll) * y0;
  const Eigen::Vector3d y = forward.cross(x);

  Eigen::Matrix3d R_wc;
  R_wc.col(0) = x;
  R_wc.col(1) = y;
  R_wc.col(2) = forward;

  Pose pose;
  pose.R = R_wc.transpose();
  pose.t = -(pose.R * eye);
  return pose;
}

}  // namespace

Scene generate_scene(const SimConfig& cfg, std::mt19937_64& rng) {
  Scene scene;
  scene.scene_box = cfg.scene_box;
  scene.K = {cfg.f, cfg.f, 0.5 * cfg.image_w, 0.5 * cfg.image_h};

  // Family directions, mutually separated by at least 30 degrees.
  while (static_cast<int>(scene.family_directions.size()) < cfg.n_families) {
    const Eigen::Vector3d d = random_unit_vector(rng);
    bool ok = true;
    for (const auto& other : scene.family_directions) {
      if (line_angle(d, other) < deg2rad(30.0)) ok = false;
    }
    if (ok) scene.family_directions.push_back(d);
  }

  std::vector<int> family_of;
  for (int f = 0; f < cfg.n_families; ++f) {
    int count = cfg.n_lines / cfg.n_families;
    if (f < cfg.n_lines % cfg.n_families) ++count;
    for (int i = 0; i < count; ++i) {
      scene.segs3d.push_back(random_segment_3d(
          scene.family_directions[static_cast<size_t>(f)], cfg.scene_box, rng));
      family_of.push_back(f);
    }
  }
  const int n_family = static_cast<int>(scene.segs3d.size());

  const int n_outlier_3d =
      static_cast<int>(std::lround(cfg.outlier_frac_3d * cfg.n_lines));
  for (int i = 0; i < n_outlier_3d; ++i) {
    scene.segs3d.push_back(
        random_segment_3d(random_unit_vector(rng), cfg.scene_box, rng));
  }

  // Occluded family lines stay in the 3D set but are never projected.
  std::vector<int> family_indices(static_cast<size_t>(n_family));
  std::iota(family_indices.begin(), family_indices.end(), 0);
  std::shuffle(family_indices.begin(), family_indices.end(), rng);
  const int n_occluded =
      static_cast<int>(std::lround(cfg.occlusion_frac * n_family));
  std::vector<bool> occluded(static_cast<size_t>(n_family), false);
  for (int i = 0; i < n_occluded; ++i) {
    occluded[static_cast<size_t>(family_indices[static_cast<size_t>(i)])] = true;
  }

  for (int attempt = 0; attempt < 1000; ++attempt) {
    scene.gt = sample_look_at_pose(cfg.scene_box, rng);
    scene.segs2d_clean.clear();
    scene.pairing.clear();
    for (int k = 0; k < n_family; ++k) {
      if (occluded[static_cast<size_t>(k)]) continue;
      const auto& s3 = scene.segs3d[static_cast<size_t>(k)];
      const auto up = project_point(scene.K, scene.gt, s3.p);
      const auto uq = project_point(scene.K, scene.gt, s3.q);
      if (!up || !uq) continue;
      LineSegment2D seg{*up, *uq};
      if (!clip_to_image(seg, cfg.image_w, cfg.image_h)) continue;
      scene.pairing.push_back({static_cast<int>(scene.segs2d_clean.size()), k});
      scene.segs2d_clean.push_back(seg);
    }
    if (static_cast<int>(scene.segs2d_clean.size()) >= 10) break;
  }

  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
  scene.segs2d.reserve(scene.segs2d_clean.size());
  for (const auto& clean : scene.segs2d_clean) {
    LineSegment2D noisy = clean;
    if (cfg.noise_sigma > 0.0) {
      do {
        noisy.p = clean.p + Eigen::Vector2d(noise(rng), noise(rng));
        noisy.q = clean.q + Eigen::Vector2d(noise(rng), noise(rng));
      } while (noisy.length() < 1e-6);
    }
    scene.segs2d.push_back(noisy);
  }

  const int n_outlier_2d = static_cast<int>(
      std::lround(cfg.outlier_frac_2d * static_cast<double>(scene.segs2d.size())));
  std::uniform_real_distribution<double> px(0.0, cfg.image_w);
  std::uniform_real_distribution<double> py(0.0, cfg.image_h);
  for (int i = 0; i < n_outlier_2d; ++i) {
    LineSegment2D seg;
    do {
      seg.p = {px(rng), py(rng)};
      seg.q = {px(rng), py(rng)};
    } while (seg.length() < 20.0);
    scene.segs2d.push_back(seg);
  }

  return scene;
}

TrialResult evaluate_pose(const Pose& estimate, const Scene& scene) {
  TrialResult result;
  result.rot_error_rad = rotation_geodesic_error(estimate.R, scene.gt.R);
  result.t_abs = (estimate.t - scene.gt.t).norm();
  const double t_gt_norm = scene.gt.t.norm();
  if (t_gt_norm < 1e-9) {
    // Relative error undefined at zero translation; fall back to absolute.
    result.t_rel = std::numeric_limits<double>::quiet_NaN();
    result.success = result.rot_error_rad < kSuccessRotationRad &&
                     result.t_abs < kSuccessTranslationRel * scene.scene_box;
  } else {
    result.t_rel = result.t_abs / t_gt_norm;
    result.success = result.rot_error_rad < kSuccessRotationRad &&
                     result.t_rel < kSuccessTranslationRel;
  }
  return result;
}

TrialResult run_pipeline(const Scene& scene, const PipelineConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  TrialResult result;
  try {
    const auto report = register_image(scene.segs2d, scene.segs3d, scene.K, cfg);
    result = evaluate_pose(report.pose, scene);
    result.n_correspondences = static_cast<int>(report.correspondences.size());
  } catch (const RegistrationError& err) {
    result.error = err.what();
    result.success = false;
  }
  result.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

TrialResult baseline_full_ransac(const Scene& scene, const RansacConfig& cfg,
                                 std::mt19937_64& rng) {
  const auto t0 = std::chrono::steady_clock::now();
  TrialResult result;

  const auto [idx2d, idx3d] =
      filter_segment_indices(scene.segs2d, scene.segs3d, cfg);
  if (idx2d.size() < 6 || idx3d.size() < 3) {
    result.error = "baseline: too few segments after filtering";
    result.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }

  std::vector<Eigen::Vector3d> normals(scene.segs2d.size());
  for (const int j : idx2d) {
    const auto n =
        interpretation_plane_normal(scene.K, scene.segs2d[static_cast<size_t>(j)]);
    normals[static_cast<size_t>(j)] = n ? *n : Eigen::Vector3d::Zero();
  }

  const double early_exit_score =
      cfg.early_exit_fraction * static_cast<double>(idx2d.size());
  std::uniform_int_distribution<size_t> pick2(0, idx2d.size() - 1);
  std::uniform_int_distribution<size_t> pick3(0, idx3d.size() - 1);

  // Budget matched to the pipeline's total: up to 8 rotation candidates each
  // run cfg.max_iters hypothesis tests, so the single RANSAC gets 8x.
  const int budget = cfg.max_iters > INT_MAX / 8 ? INT_MAX : 8 * cfg.max_iters;

  Pose best_pose;
  int best_score = -1;
  for (int iter = 0; iter < budget; ++iter) {
    // 6 distinct 2D segments, each paired with a random 3D segment; both
    // endpoints of each pair contribute one coplanarity row.
    std::array<size_t, 6> sel{};
    for (int i = 0; i < 6; ++i) {
      bool fresh = false;
      while (!fresh) {
        sel[static_cast<size_t>(i)] = pick2(rng);
        fresh = true;
        for (int k = 0; k < i; ++k) {
          if (sel[static_cast<size_t>(k)] == sel[static_cast<size_t>(i)]) fresh = false;
        }
      }
    }

    Eigen::Matrix<double, 12, 12> A;
    for (int i = 0; i < 6; ++i) {
      const int j = idx2d[sel[static_cast<size_t>(i)]];
      const int k = idx3d[pick3(rng)];
      const Eigen::Vector3d& n = normals[static_cast<size_t>(j)];
      const auto& seg = scene.segs3d[static_cast<size_t>(k)];
      for (int e = 0; e < 2; ++e) {
        const Eigen::Vector3d& P = (e == 0) ? seg.p : seg.q;
        Eigen::Matrix<double, 1, 12> row;
        for (int r = 0; r < 3; ++r) {
          for (int c = 0; c < 3; ++c) {
            row(3 * r + c) = n(r) * P(c);
          }
        }
        row.tail<3>() = n.transpose();
        A.row(2 * i + e) = row;
      }
    }

    Eigen::JacobiSVD<Eigen::Matrix<double, 12, 12>> svd(A, Eigen::ComputeFullV);
    const Eigen::Matrix<double, 12, 1> x = svd.matrixV().col(11);

    Eigen::Matrix3d B;
    B << x(0), x(1), x(2), x(3), x(4), x(5), x(6), x(7), x(8);
    const double alpha = std::cbrt(B.determinant());
    if (std::abs(alpha) < 1e-9) continue;

    Eigen::Matrix3d R;
    try {
      R = orthonormalize_rotation(B / alpha);
    } catch (const SingularInput&) {
      continue;
    }
    const Eigen::Vector3d t = x.tail<3>() / alpha;

    const auto corrs =
        count_inliers(R, t, scene.segs2d, scene.segs3d, scene.K, cfg);
    std::vector<int> matched;
    for (const auto& c : corrs) matched.push_back(c.idx2d);
    std::sort(matched.begin(), matched.end());
    matched.erase(std::unique(matched.begin(), matched.end()), matched.end());
    const int score = static_cast<int>(matched.size());

    if (score > best_score) {
      best_score = score;
      best_pose = {R, t};
      if (static_cast<double>(score) > early_exit_score) break;
    }
  }

  if (best_score <= 0) {
    result.error = "baseline: no scoring hypothesis";
  } else {
    result = evaluate_pose(best_pose, scene);
    result.n_correspondences = best_score;
  }
  result.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

PointResults run_sweep_point(const SweepPoint& point,
                             const PipelineConfig& base, bool with_baseline,
                             int sweep_index, std::uint64_t master_seed,
                             int n_threads) {
  const int n_trials = point.sim.n_trials;
  PointResults results;
  results.vp.resize(static_cast<size_t>(n_trials));
  if (with_baseline) results.baseline.resize(static_cast<size_t>(n_trials));

  auto run_trial = [&](int trial) {
    const std::uint64_t trial_seed = master_seed ^
                                     static_cast<std::uint64_t>(trial) ^
                                     static_cast<std::uint64_t>(sweep_index);
    std::mt19937_64 scene_rng(trial_seed);
    const Scene scene = generate_scene(point.sim, scene_rng);

    PipelineConfig cfg = base;
    cfg.cluster.rng_seed = mix_seed(trial_seed + 1);
    cfg.ransac.rng_seed = mix_seed(trial_seed + 2);
    results.vp[static_cast<size_t>(trial)] = run_pipeline(scene, cfg);

    if (with_baseline) {
      std::mt19937_64 baseline_rng(mix_seed(trial_seed + 3));
      results.baseline[static_cast<size_t>(trial)] =
          baseline_full_ransac(scene, cfg.ransac, baseline_rng);
    }
  };

  if (n_threads == 1) {
    for (int trial = 0; trial < n_trials; ++trial) run_trial(trial);
  } else {
#ifdef _OPENMP
    if (n_threads > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(n_threads)
      for (int trial = 0; trial < n_trials; ++trial) run_trial(trial);
    } else {
#pragma omp parallel for schedule(dynamic, 1)
      for (int trial = 0; trial < n_trials; ++trial) run_trial(trial);
    }
#else
    for (int trial = 0; trial < n_trials; ++trial) run_trial(trial);
#endif
  }
  return results;
}

MethodStats aggregate(const std::vector<TrialResult>& trials) {
  MethodStats stats;
  stats.n_trials = static_cast<int>(trials.size());
  if (trials.empty()) return stats;

  int n_success = 0;
  double runtime_sum = 0.0;
  std::vector<double> re_deg, t_abs;
  for (const auto& t : trials) {
    runtime_sum += t.runtime_s;
    if (!t.success) continue;
    ++n_success;
    re_deg.push_back(rad2deg(t.rot_error_rad));
    t_abs.push_back(t.t_abs);
  }
  stats.success_rate = static_cast<double>(n_success) / trials.size();
  stats.mean_runtime_s = runtime_sum / trials.size();

  auto mean_std = [](const std::vector<double>& xs) {
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double ss = 0.0;
    for (const double x : xs) ss += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(ss / (xs.size() - 1)) : 0.0;
    return std::make_pair(mean, sd);
  };
  if (n_success > 0) {
    std::tie(stats.mean_re_deg, stats.std_re_deg) = mean_std(re_deg);
    std::tie(stats.mean_t_abs, stats.std_t_abs) = mean_std(t_abs);
  }
  return stats;
}

std::vector<CampaignRow> campaign(const std::vector<SweepPoint>& sweep,
                                  const PipelineConfig& base,
                                  bool with_baseline,
                                  std::uint64_t master_seed, int n_threads) {
  std::vector<CampaignRow> rows;
  for (size_t s = 0; s < sweep.size(); ++s) {
    const auto point = run_sweep_point(sweep[s], base, with_baseline,
                                       static_cast<int>(s), master_seed,
                                       n_threads);
    rows.push_back({sweep[s].label, "vp", aggregate(point.vp)});
    if (with_baseline) {
      rows.push_back({sweep[s].label, "ransac", aggregate(point.baseline)});
    }
  }
  return rows;
}

std::string campaign_csv(const std::vector<CampaignRow>& rows,
                         bool include_runtime) {
  std::string csv =
      "sweep_param,method,n_trials,success_rate,mean_Re_deg,std_Re_deg,"
      "mean_t_abs,std_t_abs,mean_runtime_s\n";
  char buf[256];
  for (const auto& row : rows) {
    auto fmt = [&](double v) -> std::string {
      if (std::isnan(v)) return "nan";
      std::snprintf(buf, sizeof(buf), "%.6f", v);
      return buf;
    };
    csv += row.sweep_param + "," + row.method + "," +
           std::to_string(row.stats.n_trials) + "," +
           fmt(row.stats.success_rate) + "," + fmt(row.stats.mean_re_deg) +
           "," + fmt(row.stats.std_re_deg) + "," + fmt(row.stats.mean_t_abs) +
           "," + fmt(row.stats.std_t_abs) + "," +
           (include_runtime ? fmt(row.stats.mean_runtime_s) : "0.000000") +
           "\n";
  }
  return csv;
}

}  // namespace linereg
