#include "linereg/clustering.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "linereg/geometry.hpp"

namespace linereg {

std::vector<Eigen::Vector3d> interpretation_normals(
    const std::vector<LineSegment2D>& segs, const CameraIntrinsics& K) {
  std::vector<Eigen::Vector3d> normals;
  normals.reserve(segs.size());
  for (const auto& seg : segs) {
    const auto n = interpretation_plane_normal(K, seg);
    if (!n) {
      throw SingularInput("interpretation_normals: degenerate segment");
    }
    normals.push_back(*n);
  }
  return normals;
}

std::vector<Eigen::Vector3d> segment_directions(
    const std::vector<LineSegment3D>& segs) {
  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(segs.size());
  for (const auto& seg : segs) {
    dirs.push_back(seg.direction());
  }
  return dirs;
}

namespace {

Eigen::Vector3d canonicalize_forward(Eigen::Vector3d v) {
  if (v.z() > 1e-9) return v;
  if (v.z() < -1e-9) return -v;
  if (v.x() > 1e-9) return v;
  if (v.x() < -1e-9) return -v;
  return v.y() >= 0.0 ? v : -v;
}

}  // namespace

Eigen::Vector3d fit_cluster_direction(std::span<const Eigen::Vector3d> vectors,
                                      std::span<const double> weights,
                                      DirectionFit mode,
                                      const Eigen::Vector3d& align_to) {
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < vectors.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    M += w * vectors[i] * vectors[i].transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(M);
  // Eigenvalues are ascending: col 0 is the common orthogonal direction for
  // plane normals, col 2 the dominant direction for line directions.
  Eigen::Vector3d dir = (mode == DirectionFit::kPlaneNormals)
                            ? eig.eigenvectors().col(0)
                            : eig.eigenvectors().col(2);
  dir.normalize();
  if (mode == DirectionFit::kPlaneNormals) {
    return canonicalize_forward(dir);
  }
  return dir.dot(align_to) >= 0.0 ? dir : Eigen::Vector3d(-dir);
}

namespace {

struct BestHypothesis {
  std::vector<int> inliers;
  int seed = -1;
};

// Pixel-space consistency of a segment with a vanishing direction: both
// endpoints must lie near the image line through the vanishing point and the
// segment midpoint. Homogeneous handling keeps vanishing points at infinity
// well defined. Complements the plane-normal angle test, which alone lets a
// segment far from the vanishing point pass on accidental concurrency.
struct VpConsistency {
  std::vector<Eigen::Vector3d> p, q, mid;  // homogeneous pixel coordinates
  Eigen::Matrix3d K;
  double tol_px = 5.0;

  bool consistent(int idx, const Eigen::Vector3d& v) const {
    const Eigen::Vector3d vp_img = K * v;
    const Eigen::Vector3d line = vp_img.cross(mid[static_cast<size_t>(idx)]);
    const double scale = line.head<2>().norm();
    if (scale < 1e-12) return true;  // midpoint coincides with the point
    const double dp = std::abs(line.dot(p[static_cast<size_t>(idx)])) / scale;
    const double dq = std::abs(line.dot(q[static_cast<size_t>(idx)])) / scale;
    return dp < tol_px && dq < tol_px;
  }
};

std::vector<int> collect_inliers(const std::vector<Eigen::Vector3d>& vectors,
                                 const std::vector<int>& active,
                                 const Eigen::Vector3d& hyp, DirectionFit mode,
                                 double sin_tol, double cos_tol,
                                 const VpConsistency* vp) {
  std::vector<int> inliers;
  for (const int idx : active) {
    const double d = std::abs(vectors[idx].dot(hyp));
    bool in = (mode == DirectionFit::kPlaneNormals) ? d < sin_tol : d > cos_tol;
    if (in && vp != nullptr) in = vp->consistent(idx, hyp);
    if (in) inliers.push_back(idx);
  }
  return inliers;
}

std::vector<DirectionCluster> sequential_ransac(
    const std::vector<Eigen::Vector3d>& vectors,
    const std::vector<double>& weights, DirectionFit mode,
    double inlier_angle_deg, const ClusterConfig& cfg, std::mt19937_64& rng,
    const VpConsistency* vp = nullptr) {
  std::vector<int> active(vectors.size());
  for (size_t i = 0; i < vectors.size(); ++i) active[i] = static_cast<int>(i);

  const double sin_tol = std::sin(deg2rad(inlier_angle_deg));
  const double cos_tol = std::cos(deg2rad(inlier_angle_deg));
  // Two nearly-parallel interpretation planes give an unstable cross product.
  const double min_cross_norm = std::sin(deg2rad(10.0));

  std::vector<DirectionCluster> clusters;
  for (int round = 0; round < cfg.num_clusters; ++round) {
    if (active.size() < 2) break;

    BestHypothesis best;
    std::uniform_int_distribution<size_t> pick(0, active.size() - 1);
    for (int iter = 0; iter < cfg.ransac_iters; ++iter) {
      Eigen::Vector3d hyp;
      int seed = -1;
      if (mode == DirectionFit::kPlaneNormals) {
        const size_t a = pick(rng);
        size_t b = pick(rng);
        while (b == a) b = pick(rng);
        hyp = vectors[active[a]].cross(vectors[active[b]]);
        const double norm = hyp.norm();
        if (norm < min_cross_norm) continue;
        hyp /= norm;
        seed = active[a];
      } else {
        seed = active[pick(rng)];
        hyp = vectors[seed];
      }

      auto inliers =
          collect_inliers(vectors, active, hyp, mode, sin_tol, cos_tol, vp);
      if (inliers.size() > best.inliers.size()) {
        best.inliers = std::move(inliers);
        best.seed = seed;
      }
    }

    if (best.inliers.size() < 2) {
      if (clusters.empty()) {
        throw NoClusterFound("direction clustering: no hypothesis with 2 inliers");
      }
      break;
    }

    // Consensus refinement: refit the direction and regate until the member
    // set stabilizes, shedding accidental members that bias the fit.
    Eigen::Vector3d direction = Eigen::Vector3d::Zero();
    for (int refine = 0; refine < 5; ++refine) {
      std::vector<Eigen::Vector3d> member_vectors;
      std::vector<double> member_weights;
      member_vectors.reserve(best.inliers.size());
      for (const int idx : best.inliers) {
        member_vectors.push_back(vectors[idx]);
        if (!weights.empty()) member_weights.push_back(weights[idx]);
      }
      direction = fit_cluster_direction(member_vectors, member_weights, mode,
                                        vectors[best.seed]);
      auto regated =
          collect_inliers(vectors, active, direction, mode, sin_tol, cos_tol, vp);
      if (regated.size() < 2 || regated == best.inliers) break;
      best.inliers = std::move(regated);
    }

    DirectionCluster cluster;
    cluster.direction = direction;
    cluster.member_indices = best.inliers;
    std::sort(cluster.member_indices.begin(), cluster.member_indices.end());
    clusters.push_back(std::move(cluster));

    std::erase_if(active, [&](int idx) {
      return std::binary_search(clusters.back().member_indices.begin(),
                                clusters.back().member_indices.end(), idx);
    });
  }
  return clusters;
}

}  // namespace

std::vector<DirectionCluster> cluster_2d_vanishing(
    const std::vector<LineSegment2D>& segs, const CameraIntrinsics& K,
    const ClusterConfig& cfg, std::mt19937_64& rng) {
  if (segs.size() < 4) {
    throw InsufficientSegments("cluster_2d_vanishing: need at least 4 segments");
  }
  const auto normals = interpretation_normals(segs, K);
  std::vector<double> weights;
  weights.reserve(segs.size());
  for (const auto& seg : segs) {
    weights.push_back(seg.length() * seg.length());
  }
  VpConsistency vp;
  vp.K = K.matrix();
  vp.p.reserve(segs.size());
  for (const auto& seg : segs) {
    vp.p.emplace_back(seg.p.x(), seg.p.y(), 1.0);
    vp.q.emplace_back(seg.q.x(), seg.q.y(), 1.0);
    vp.mid.emplace_back(seg.midpoint().x(), seg.midpoint().y(), 1.0);
  }
  return sequential_ransac(normals, weights, DirectionFit::kPlaneNormals,
                           cfg.inlier_angle_2d_deg, cfg, rng, &vp);
}

std::vector<DirectionCluster> cluster_3d_parallel(
    const std::vector<LineSegment3D>& segs, const ClusterConfig& cfg,
    std::mt19937_64& rng) {
  if (segs.size() < 4) {
    throw InsufficientSegments("cluster_3d_parallel: need at least 4 segments");
  }
  const auto dirs = segment_directions(segs);
  return sequential_ransac(dirs, {}, DirectionFit::kLineDirections,
                           cfg.inlier_angle_3d_deg, cfg, rng);
}

std::vector<DirectionCluster> merge_and_rank(
    std::vector<DirectionCluster> clusters,
    std::span<const Eigen::Vector3d> seg_vectors,
    std::span<const double> seg_weights, DirectionFit mode,
    double merge_angle_deg, int keep) {
  const double merge_rad = deg2rad(merge_angle_deg);

  bool merged = true;
  while (merged) {
    merged = false;
    for (size_t i = 0; i < clusters.size() && !merged; ++i) {
      for (size_t j = i + 1; j < clusters.size() && !merged; ++j) {
        if (line_angle(clusters[i].direction, clusters[j].direction) >= merge_rad) {
          continue;
        }
        auto& dst = clusters[i];
        dst.member_indices.insert(dst.member_indices.end(),
                                  clusters[j].member_indices.begin(),
                                  clusters[j].member_indices.end());
        std::sort(dst.member_indices.begin(), dst.member_indices.end());
        std::vector<Eigen::Vector3d> member_vectors;
        std::vector<double> member_weights;
        member_vectors.reserve(dst.member_indices.size());
        for (const int idx : dst.member_indices) {
          member_vectors.push_back(seg_vectors[idx]);
          if (!seg_weights.empty()) member_weights.push_back(seg_weights[idx]);
        }
        dst.direction = fit_cluster_direction(member_vectors, member_weights,
                                              mode, dst.direction);
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
    }
  }

  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const DirectionCluster& a, const DirectionCluster& b) {
                     if (a.population() != b.population()) {
                       return a.population() > b.population();
                     }
                     return a.member_indices.front() < b.member_indices.front();
                   });

  if (static_cast<int>(clusters.size()) < keep) {
    throw FewerThanKeep("merge_and_rank: " + std::to_string(clusters.size()) +
                        " clusters after merging, need " + std::to_string(keep));
  }
  clusters.resize(static_cast<size_t>(keep));
  return clusters;
}

}  // namespace linereg
