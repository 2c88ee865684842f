#include "linereg/synthetic.hpp"

#include <doctest.h>

#include <random>

#include "linereg/clustering.hpp"
#include "linereg/geometry.hpp"
#include "linereg/pose_refine.hpp"

using namespace linereg;

TEST_CASE("clean scenes project pairing exactly") {
  SimConfig cfg;
  cfg.n_lines = 40;
  cfg.noise_sigma = 0.0;
  std::mt19937_64 rng(181);
  const Scene scene = generate_scene(cfg, rng);

  REQUIRE(scene.pairing.size() >= 10);
  REQUIRE(scene.segs2d_clean.size() == scene.pairing.size());
  for (const auto& pair : scene.pairing) {
    const auto& s2 = scene.segs2d[static_cast<size_t>(pair.idx2d)];
    const auto r = line_residuals(scene.gt, ImageLine::through(s2.p, s2.q),
                                  scene.segs3d[static_cast<size_t>(pair.idx3d)],
                                  scene.K);
    REQUIRE(r.has_value());
    CHECK(std::abs((*r)(0)) < 1e-9);
    CHECK(std::abs((*r)(1)) < 1e-9);
  }
}

TEST_CASE("noisy scenes stay consistent through the stored clean segments") {
  SimConfig cfg;
  cfg.n_lines = 40;
  cfg.noise_sigma = 2.0;
  cfg.outlier_frac_2d = 0.2;
  cfg.outlier_frac_3d = 0.2;
  std::mt19937_64 rng(191);
  const Scene scene = generate_scene(cfg, rng);

  for (size_t i = 0; i < scene.pairing.size(); ++i) {
    const auto& pair = scene.pairing[i];
    const auto& clean = scene.segs2d_clean[i];
    const auto r = line_residuals(scene.gt, ImageLine::through(clean.p, clean.q),
                                  scene.segs3d[static_cast<size_t>(pair.idx3d)],
                                  scene.K);
    REQUIRE(r.has_value());
    CHECK(std::abs((*r)(0)) < 1e-9);
    CHECK(std::abs((*r)(1)) < 1e-9);
    // The stored noisy segment is the clean one plus bounded perturbation.
    const auto& noisy = scene.segs2d[static_cast<size_t>(pair.idx2d)];
    CHECK((noisy.p - clean.p).norm() < 6.0 * cfg.noise_sigma + 1e-9);
    CHECK((noisy.q - clean.q).norm() < 6.0 * cfg.noise_sigma + 1e-9);
  }
}

TEST_CASE("scene generation is bitwise deterministic") {
  SimConfig cfg;
  cfg.n_lines = 30;
  cfg.noise_sigma = 2.0;
  cfg.outlier_frac_2d = 0.1;
  cfg.outlier_frac_3d = 0.1;
  cfg.occlusion_frac = 0.1;
  std::mt19937_64 rng_a(193), rng_b(193);
  const Scene a = generate_scene(cfg, rng_a);
  const Scene b = generate_scene(cfg, rng_b);

  REQUIRE(a.segs2d.size() == b.segs2d.size());
  REQUIRE(a.segs3d.size() == b.segs3d.size());
  for (size_t i = 0; i < a.segs2d.size(); ++i) {
    CHECK(a.segs2d[i].p == b.segs2d[i].p);
    CHECK(a.segs2d[i].q == b.segs2d[i].q);
  }
  for (size_t i = 0; i < a.segs3d.size(); ++i) {
    CHECK(a.segs3d[i].p == b.segs3d[i].p);
  }
  CHECK(a.gt.R == b.gt.R);
  CHECK(a.gt.t == b.gt.t);
}

TEST_CASE("generated scenes expose two recoverable vanishing directions") {
  SimConfig cfg;  // paper defaults: sigma 2, 640x480, f 800
  cfg.n_lines = 60;
  cfg.outlier_frac_2d = 0.1;
  cfg.outlier_frac_3d = 0.1;
  std::mt19937_64 rng(197);
  const Scene scene = generate_scene(cfg, rng);

  ClusterConfig ccfg;
  std::mt19937_64 cluster_rng(199);
  const auto clusters =
      cluster_2d_vanishing(scene.segs2d, scene.K, ccfg, cluster_rng);
  REQUIRE(clusters.size() >= 2);
  for (const auto& family : scene.family_directions) {
    const Eigen::Vector3d truth = scene.gt.R * family;
    double best = 1e9;
    for (const auto& c : clusters) {
      best = std::min(best, rad2deg(line_angle(c.direction, truth)));
    }
    CHECK(best < 3.0);
  }
}

TEST_CASE("occlusion withholds 3D lines from the image") {
  SimConfig cfg;
  cfg.n_lines = 40;
  cfg.noise_sigma = 0.0;
  cfg.occlusion_frac = 0.3;
  std::mt19937_64 rng(211);
  const Scene scene = generate_scene(cfg, rng);
  // All 40 family lines are present in 3D, but only the non-occluded subset
  // can appear in the pairing.
  CHECK(scene.segs3d.size() == 40);
  CHECK(scene.pairing.size() <= 28);
}

TEST_CASE("success flag recomputes from the stored errors") {
  SimConfig sim;
  sim.n_lines = 40;
  sim.noise_sigma = 2.0;
  PipelineConfig cfg;
  for (int trial = 0; trial < 5; ++trial) {
    std::mt19937_64 rng(300 + trial);
    const Scene scene = generate_scene(sim, rng);
    const TrialResult r = run_pipeline(scene, cfg);
    if (r.error.empty()) {
      const bool recomputed = r.rot_error_rad < kSuccessRotationRad &&
                              r.t_rel < kSuccessTranslationRel;
      CHECK(r.success == recomputed);
    } else {
      CHECK_FALSE(r.success);
    }
    CHECK(r.runtime_s >= 0.0);
  }
}

TEST_CASE("evaluate_pose falls back to absolute error at zero translation") {
  Scene scene;
  scene.gt = Pose{};
  scene.scene_box = 1.0;
  Pose estimate;
  estimate.t = Eigen::Vector3d(0.05, 0.0, 0.0);
  const TrialResult r = evaluate_pose(estimate, scene);
  CHECK(r.success);
  CHECK(r.t_abs == doctest::Approx(0.05));

  estimate.t = Eigen::Vector3d(0.2, 0.0, 0.0);
  CHECK_FALSE(evaluate_pose(estimate, scene).success);
}

TEST_CASE("baseline RANSAC is functional on a small clean scene") {
  // The 6-pair baseline rarely succeeds; with few lines and a generous
  // budget some seeds do land an all-correct sample.
  SimConfig sim;
  sim.n_lines = 10;
  sim.noise_sigma = 0.0;
  RansacConfig cfg;
  cfg.max_iters = 20000;  // baseline runs 8x this internally

  bool succeeded = false;
  for (const std::uint64_t seed : {11ULL, 29ULL, 47ULL}) {
    std::mt19937_64 scene_rng(seed);
    const Scene scene = generate_scene(sim, scene_rng);
    std::mt19937_64 rng(seed + 1);
    const TrialResult r = baseline_full_ransac(scene, cfg, rng);
    if (r.success) {
      succeeded = true;
      break;
    }
  }
  CHECK(succeeded);
}

TEST_CASE("run_sweep_point pairs methods on identical scenes") {
  SweepPoint point;
  point.label = "smoke";
  point.sim.n_lines = 30;
  point.sim.noise_sigma = 2.0;
  point.sim.n_trials = 4;
  PipelineConfig cfg;
  const auto res = run_sweep_point(point, cfg, true, 0, 999, 1);
  CHECK(res.vp.size() == 4);
  CHECK(res.baseline.size() == 4);
}

TEST_CASE("campaign output is deterministic and well formed") {
  std::vector<SweepPoint> sweep(1);
  sweep[0].label = "30";
  sweep[0].sim.n_lines = 30;
  sweep[0].sim.noise_sigma = 2.0;
  sweep[0].sim.n_trials = 3;
  PipelineConfig cfg;

  const auto rows_a = campaign(sweep, cfg, false, 31337, 0);
  const auto rows_b = campaign(sweep, cfg, false, 31337, 0);
  const std::string csv_a = campaign_csv(rows_a, false);
  const std::string csv_b = campaign_csv(rows_b, false);
  CHECK(csv_a == csv_b);
  CHECK(csv_a.rfind("sweep_param,method,n_trials,success_rate,mean_Re_deg,"
                    "std_Re_deg,mean_t_abs,std_t_abs,mean_runtime_s\n",
                    0) == 0);

  // Degenerate sweep: the single row reflects run_pipeline outcomes.
  REQUIRE(rows_a.size() == 1);
  CHECK(rows_a[0].sweep_param == "30");
  CHECK(rows_a[0].method == "vp");
  CHECK(rows_a[0].stats.n_trials == 3);

  // Runtime column is zeroed when timings are suppressed.
  std::istringstream stream(csv_a);
  std::string header, row;
  std::getline(stream, header);
  std::getline(stream, row);
  CHECK(row.substr(row.rfind(',') + 1) == "0.000000");
}

TEST_CASE("trial seeds derive from master, trial and sweep indices") {
  SweepPoint point;
  point.label = "x";
  point.sim.n_lines = 30;
  point.sim.noise_sigma = 2.0;
  point.sim.n_trials = 2;
  PipelineConfig cfg;

  const auto a = run_sweep_point(point, cfg, false, 0, 12345, 1);
  const auto b = run_sweep_point(point, cfg, false, 0, 12345, 1);
  for (size_t i = 0; i < a.vp.size(); ++i) {
    CHECK(a.vp[i].rot_error_rad == b.vp[i].rot_error_rad);
    CHECK(a.vp[i].t_abs == b.vp[i].t_abs);
  }
  // A different sweep index changes the scenes.
  const auto c = run_sweep_point(point, cfg, false, 1, 12345, 1);
  bool any_different = false;
  for (size_t i = 0; i < a.vp.size(); ++i) {
    any_different = any_different || a.vp[i].t_abs != c.vp[i].t_abs;
  }
  CHECK(any_different);
}
