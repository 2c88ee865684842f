#pragma once

#include <random>
#include <span>

#include "linereg/types.hpp"

namespace linereg {

struct ClusterConfig {
  int num_clusters = 5;  // must be > 3
  double inlier_angle_2d_deg = 2.0;
  double inlier_angle_3d_deg = 1.0;
  double merge_angle_deg = 5.0;
  int ransac_iters = 500;
  std::uint64_t rng_seed = 0;
};

/// A set of segments sharing one direction (vanishing direction for 2D
/// segments, 3D orientation for 3D segments).
struct DirectionCluster {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
  std::vector<int> member_indices;

  int population() const { return static_cast<int>(member_indices.size()); }
};

enum class DirectionFit {
  kPlaneNormals,    // direction minimizes sum (n_i . v)^2
  kLineDirections,  // direction maximizes sum (d_i . v)^2
};

/// Interpretation-plane normals for all segments, index-aligned with segs.
std::vector<Eigen::Vector3d> interpretation_normals(
    const std::vector<LineSegment2D>& segs, const CameraIntrinsics& K);

std::vector<Eigen::Vector3d> segment_directions(
    const std::vector<LineSegment3D>& segs);

/// Direction that best fits the given per-member vectors, per the fit mode,
/// minimizing (or maximizing) the weighted sum of squared dot products.
/// Weights may be empty (uniform); the 2D path weights by squared segment
/// length since endpoint noise tilts a normal inversely to length. For
/// kPlaneNormals the result is canonicalized to positive z (ties broken
/// toward positive x, then y); for kLineDirections the sign follows align_to.
Eigen::Vector3d fit_cluster_direction(std::span<const Eigen::Vector3d> vectors,
                                      std::span<const double> weights,
                                      DirectionFit mode,
                                      const Eigen::Vector3d& align_to);

/// Sequential RANSAC vanishing-direction clustering: sample two segments,
/// hypothesize the direction as the cross product of their interpretation
/// plane normals, collect inliers, remove, repeat. Up to cfg.num_clusters
/// clusters are returned, each refit over its inlier normals.
std::vector<DirectionCluster> cluster_2d_vanishing(
    const std::vector<LineSegment2D>& segs, const CameraIntrinsics& K,
    const ClusterConfig& cfg, std::mt19937_64& rng);

/// Sequential RANSAC parallel-line clustering over 3D segment directions.
/// Inlier test is the sign-invariant angle between lines.
std::vector<DirectionCluster> cluster_3d_parallel(
    const std::vector<LineSegment3D>& segs, const ClusterConfig& cfg,
    std::mt19937_64& rng);

/// Greedily merges clusters whose directions are closer than merge_angle_deg,
/// refits merged directions from all member vectors, sorts by population
/// (descending) and returns the first `keep`. Throws FewerThanKeep when the
/// merged set is too small.
std::vector<DirectionCluster> merge_and_rank(
    std::vector<DirectionCluster> clusters,
    std::span<const Eigen::Vector3d> seg_vectors,
    std::span<const double> seg_weights, DirectionFit mode,
    double merge_angle_deg, int keep);

}  // namespace linereg
