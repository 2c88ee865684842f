#pragma once

#include <random>
#include <string>

#include "linereg/pipeline.hpp"

namespace linereg {

// Success metric thresholds for one trial.
constexpr double kSuccessRotationRad = 0.1;
constexpr double kSuccessTranslationRel = 0.1;

/// Deterministic seed mixing (splitmix64) for derived generators.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct SimConfig {
  int n_lines = 40;  // structured (family) 3D lines, split across families
  int n_families = 2;
  double outlier_frac_3d = 0.0;  // random-orientation 3D lines, never projected
  double outlier_frac_2d = 0.0;  // random image segments without 3D partner
  double occlusion_frac = 0.0;   // family lines withheld from projection
  double noise_sigma = 2.0;      // px, applied to 2D endpoints
  int image_w = 640;
  int image_h = 480;
  double f = 800.0;
  double scene_box = 1.0;  // half-extent of the line-center cube
  int n_trials = 50;
  std::uint64_t rng_seed = 0;
};

struct Scene {
  std::vector<LineSegment3D> segs3d;
  std::vector<LineSegment2D> segs2d;
  CameraIntrinsics K;
  Pose gt;
  std::vector<Correspondence> pairing;      // true 2D<->3D matches
  std::vector<LineSegment2D> segs2d_clean;  // pre-noise segments, one per pairing
  std::vector<Eigen::Vector3d> family_directions;
  double scene_box = 1.0;
};

struct TrialResult {
  double rot_error_rad = std::numeric_limits<double>::quiet_NaN();
  double t_rel = std::numeric_limits<double>::quiet_NaN();
  double t_abs = std::numeric_limits<double>::quiet_NaN();
  bool success = false;
  double runtime_s = 0.0;
  int n_correspondences = 0;
  std::string error;  // failure tag, empty on normal completion
};

/// Random structured scene per the Monte Carlo protocol: parallel line
/// families in [-scene_box, scene_box]^3, occlusion and outlier injection,
/// noisy projection through a camera placed 3-5 half-extents away looking at
/// the box center. Resamples the camera until at least 10 lines project.
Scene generate_scene(const SimConfig& cfg, std::mt19937_64& rng);

/// Success metric of §-style evaluation: rotation geodesic error and relative
/// translation error against the ground truth.
TrialResult evaluate_pose(const Pose& estimate, const Scene& scene);

/// Full vanishing-direction pipeline on one scene. Pipeline failures are
/// recorded in the result, never thrown.
TrialResult run_pipeline(const Scene& scene, const PipelineConfig& cfg);

/// Plain RANSAC baseline: 6 random 2D-3D pairs per iteration, both endpoint
/// coplanarity constraints stacked into a 12-unknown linear system, rotation
/// block orthonormalized, scored by the same inlier counter.
TrialResult baseline_full_ransac(const Scene& scene, const RansacConfig& cfg,
                                 std::mt19937_64& rng);

struct SweepPoint {
  std::string label;  // value of the swept parameter, e.g. "40"
  SimConfig sim;
};

struct PointResults {
  std::vector<TrialResult> vp;
  std::vector<TrialResult> baseline;
};

/// Runs sim.n_trials paired trials at one sweep point. Trial seeds derive
/// from master_seed XOR trial index XOR sweep index; trials run concurrently
/// when n_threads != 1 with identical results.
PointResults run_sweep_point(const SweepPoint& point,
                             const PipelineConfig& base, bool with_baseline,
                             int sweep_index, std::uint64_t master_seed,
                             int n_threads);

struct MethodStats {
  int n_trials = 0;
  double success_rate = 0.0;
  // Error statistics are over successful trials; runtime over all trials.
  double mean_re_deg = std::numeric_limits<double>::quiet_NaN();
  double std_re_deg = std::numeric_limits<double>::quiet_NaN();
  double mean_t_abs = std::numeric_limits<double>::quiet_NaN();
  double std_t_abs = std::numeric_limits<double>::quiet_NaN();
  double mean_runtime_s = 0.0;
};

MethodStats aggregate(const std::vector<TrialResult>& trials);

struct CampaignRow {
  std::string sweep_param;
  std::string method;  // "vp" or "ransac"
  MethodStats stats;
};

/// Runs every sweep point for the pipeline and (optionally) the baseline.
std::vector<CampaignRow> campaign(const std::vector<SweepPoint>& sweep,
                                  const PipelineConfig& base,
                                  bool with_baseline,
                                  std::uint64_t master_seed, int n_threads);

/// Deterministic CSV table; runtime column zeroed when include_runtime is
/// false so byte-identity can be asserted across runs.
std::string campaign_csv(const std::vector<CampaignRow>& rows,
                         bool include_runtime);

}  // namespace linereg
