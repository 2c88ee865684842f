// Compares the serial reference implementation against the OpenMP kernels:
// per-candidate translation RANSAC within one registration, and per-trial
// execution of a Monte Carlo sweep point. Results must match bitwise; only
// wall time differs.

#include <chrono>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "linereg/rotation_candidates.hpp"
#include "linereg/synthetic.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void bench_candidates(int n_lines, std::uint64_t seed) {
  linereg::SimConfig sim;
  sim.n_lines = n_lines;
  sim.outlier_frac_2d = 0.2;
  sim.outlier_frac_3d = 0.2;
  std::mt19937_64 rng(seed);
  const linereg::Scene scene = linereg::generate_scene(sim, rng);

  linereg::PipelineConfig cfg;
  cfg.cluster.rng_seed = linereg::mix_seed(seed + 1);
  cfg.ransac.rng_seed = linereg::mix_seed(seed + 2);

  std::mt19937_64 rng2d(cfg.cluster.rng_seed);
  auto c2 = linereg::cluster_2d_vanishing(scene.segs2d, scene.K, cfg.cluster, rng2d);
  const auto normals = linereg::interpretation_normals(scene.segs2d, scene.K);
  std::vector<double> sq_lengths;
  for (const auto& seg : scene.segs2d) {
    sq_lengths.push_back(seg.length() * seg.length());
  }
  c2 = linereg::merge_and_rank(std::move(c2), normals, sq_lengths,
                               linereg::DirectionFit::kPlaneNormals,
                               cfg.cluster.merge_angle_deg, 2);
  std::mt19937_64 rng3d(cfg.cluster.rng_seed + 1);
  auto c3 = linereg::cluster_3d_parallel(scene.segs3d, cfg.cluster, rng3d);
  const auto dirs = linereg::segment_directions(scene.segs3d);
  c3 = linereg::merge_and_rank(std::move(c3), dirs, {},
                               linereg::DirectionFit::kLineDirections,
                               cfg.cluster.merge_angle_deg, 2);

  const auto candidates = linereg::enumerate_rotations(
      {c2[0].direction, c2[1].direction}, {c3[0].direction, c3[1].direction});

  auto t0 = std::chrono::steady_clock::now();
  const auto serial = linereg::estimate_all_candidates(
      candidates, scene.segs2d, scene.segs3d, scene.K, cfg.ransac, 1);
  const double t_serial = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const auto parallel = linereg::estimate_all_candidates(
      candidates, scene.segs2d, scene.segs3d, scene.K, cfg.ransac, 0);
  const double t_parallel = seconds_since(t0);

  bool identical = serial.size() == parallel.size();
  for (size_t i = 0; identical && i < serial.size(); ++i) {
    identical = serial[i].t == parallel[i].t &&
                serial[i].score == parallel[i].score &&
                serial[i].correspondences == parallel[i].correspondences;
  }

  std::printf("candidate ransac  %3d lines  %zu candidates  serial %8.4fs  "
              "openmp %8.4fs  speedup %4.2fx  identical %s\n",
              n_lines, candidates.size(), t_serial, t_parallel,
              t_serial / t_parallel, identical ? "yes" : "NO");
}

void bench_trials(int n_lines, int n_trials, std::uint64_t seed) {
  linereg::SweepPoint point;
  point.label = std::to_string(n_lines);
  point.sim.n_lines = n_lines;
  point.sim.n_trials = n_trials;
  point.sim.outlier_frac_2d = 0.2;
  point.sim.outlier_frac_3d = 0.2;

  linereg::PipelineConfig cfg;

  auto t0 = std::chrono::steady_clock::now();
  const auto serial =
      linereg::run_sweep_point(point, cfg, false, 0, seed, 1);
  const double t_serial = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const auto parallel =
      linereg::run_sweep_point(point, cfg, false, 0, seed, 0);
  const double t_parallel = seconds_since(t0);

  bool identical = true;
  for (size_t i = 0; i < serial.vp.size(); ++i) {
    identical = identical &&
                serial.vp[i].rot_error_rad == parallel.vp[i].rot_error_rad &&
                serial.vp[i].t_abs == parallel.vp[i].t_abs &&
                serial.vp[i].success == parallel.vp[i].success;
  }

  std::printf("monte carlo sweep %3d lines  %3d trials     serial %8.4fs  "
              "openmp %8.4fs  speedup %4.2fx  identical %s\n",
              n_lines, n_trials, t_serial, t_parallel, t_serial / t_parallel,
              identical ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;
#ifdef _OPENMP
  std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("openmp disabled, parallel paths run serially\n");
#endif
  for (const int n_lines : {20, 40, 60, 80}) {
    bench_candidates(n_lines, seed);
  }
  for (const int n_lines : {40, 80}) {
    bench_trials(n_lines, 20, seed);
  }
  return 0;
}
