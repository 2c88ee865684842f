#pragma once

#include <string>

#include "linereg/clustering.hpp"
#include "linereg/pose_refine.hpp"
#include "linereg/translation_ransac.hpp"

namespace linereg {

struct PipelineConfig {
  ClusterConfig cluster;
  RansacConfig ransac;
  RefineConfig refine;
  int keep = 2;       // direction pairs used for rotation enumeration
  int n_threads = 0;  // 1 = serial reference, 0 = OpenMP default
};

/// Full result of one registration, serializable through io.hpp.
struct RegistrationReport {
  Pose pose;
  std::vector<Correspondence> correspondences;
  std::vector<int> cluster_populations_2d;
  std::vector<int> cluster_populations_3d;
  int candidate_count = 0;
  int best_candidate = -1;
  int ransac_score = 0;
  std::vector<double> refine_cost_history;
  bool refine_converged = true;
  std::vector<std::pair<std::string, double>> timings;  // stage -> seconds
};

/// Runs the full pipeline: direction clustering, rotation candidate
/// enumeration, per-candidate translation RANSAC, best-candidate selection
/// and pose refinement. Throws RegistrationError subtypes on failure.
RegistrationReport register_image(const std::vector<LineSegment2D>& segs2d,
                                  const std::vector<LineSegment3D>& segs3d,
                                  const CameraIntrinsics& K,
                                  const PipelineConfig& cfg);

}  // namespace linereg
