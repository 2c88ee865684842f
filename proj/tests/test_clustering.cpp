#include "linereg/clustering.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "linereg/geometry.hpp"
#include "linereg/synthetic.hpp"
#include "test_util.hpp"

using namespace linereg;
using testing::random_unit;

namespace {

const CameraIntrinsics kCam{800.0, 800.0, 320.0, 240.0};

// Segments whose infinite image lines pass through the vanishing point of
// direction v (v_z > 0); their interpretation planes contain v exactly.
std::vector<LineSegment2D> bundle_through(const Eigen::Vector3d& v, int count,
                                          std::mt19937_64& rng) {
  const Eigen::Vector2d vp(kCam.fx * v.x() / v.z() + kCam.cx,
                           kCam.fy * v.y() / v.z() + kCam.cy);
  std::uniform_real_distribution<double> px(40.0, 600.0);
  std::uniform_real_distribution<double> py(40.0, 440.0);
  std::uniform_real_distribution<double> t1(0.35, 0.55);
  std::uniform_real_distribution<double> t2(0.65, 0.95);

  std::vector<LineSegment2D> segs;
  while (static_cast<int>(segs.size()) < count) {
    const Eigen::Vector2d anchor(px(rng), py(rng));
    if ((anchor - vp).norm() < 50.0) continue;
    const Eigen::Vector2d a = vp + t1(rng) * (anchor - vp);
    const Eigen::Vector2d b = vp + t2(rng) * (anchor - vp);
    if ((a - b).norm() < 30.0) continue;
    segs.push_back({a, b});
  }
  return segs;
}

Eigen::Vector3d forward_direction(std::mt19937_64& rng, double min_z) {
  Eigen::Vector3d v;
  do {
    v = random_unit(rng);
    if (v.z() < 0.0) v = -v;
  } while (v.z() < min_z);
  return v;
}

}  // namespace

TEST_CASE("cluster_2d_vanishing separates two exact bundles") {
  std::mt19937_64 rng(3);
  const Eigen::Vector3d d1 = forward_direction(rng, 0.5);
  Eigen::Vector3d d2;
  do {
    d2 = forward_direction(rng, 0.5);
  } while (line_angle(d1, d2) < deg2rad(30.0));

  auto segs = bundle_through(d1, 20, rng);
  const auto second = bundle_through(d2, 20, rng);
  segs.insert(segs.end(), second.begin(), second.end());

  ClusterConfig cfg;
  std::mt19937_64 cluster_rng(7);
  const auto clusters = cluster_2d_vanishing(segs, kCam, cfg, cluster_rng);

  REQUIRE(clusters.size() >= 2);
  CHECK(clusters[0].population() == 20);
  CHECK(clusters[1].population() == 20);
  for (const auto& truth : {d1, d2}) {
    double best = 1e9;
    for (const auto& c : clusters) {
      best = std::min(best, rad2deg(line_angle(c.direction, truth)));
    }
    CHECK(best < 0.1);
  }
}

TEST_CASE("cluster_2d_vanishing on a concurrent pencil forms one cluster") {
  // Segments through the principal point share the optical-axis vanishing
  // point, so they legitimately cluster together.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(0.0, M_PI);
  std::vector<LineSegment2D> segs;
  for (int i = 0; i < 12; ++i) {
    const double a = angle(rng) + 0.01 * i;
    const Eigen::Vector2d dir(std::cos(a), std::sin(a));
    const Eigen::Vector2d center(kCam.cx, kCam.cy);
    segs.push_back({center + 40.0 * dir, center + 180.0 * dir});
  }
  ClusterConfig cfg;
  std::mt19937_64 cluster_rng(13);
  const auto clusters = cluster_2d_vanishing(segs, kCam, cfg, cluster_rng);
  REQUIRE(!clusters.empty());
  CHECK(clusters[0].population() == 12);
  CHECK(rad2deg(line_angle(clusters[0].direction, Eigen::Vector3d::UnitZ())) < 0.1);
}

TEST_CASE("cluster_2d_vanishing recovers noisy scene families") {
  // sigma = 2 px endpoint noise leaves a few degrees of direction error on
  // weak-perspective families; 2 degrees in >= 90% of runs is what the
  // geometry supports at this noise level.
  SimConfig sim;
  sim.n_lines = 60;
  sim.noise_sigma = 2.0;
  sim.outlier_frac_2d = 0.2;
  sim.outlier_frac_3d = 0.2;

  int hits = 0;
  const int runs = 50;
  for (int run = 0; run < runs; ++run) {
    std::mt19937_64 scene_rng(900 + run);
    const Scene scene = generate_scene(sim, scene_rng);
    ClusterConfig cfg;
    std::mt19937_64 cluster_rng(4000 + run);
    const auto clusters =
        cluster_2d_vanishing(scene.segs2d, scene.K, cfg, cluster_rng);
    if (clusters.size() < 2) continue;

    bool both = true;
    for (const auto& family : scene.family_directions) {
      const Eigen::Vector3d truth = scene.gt.R * family;
      double best = 1e9;
      for (size_t i = 0; i < std::min<size_t>(2, clusters.size()); ++i) {
        best = std::min(best, rad2deg(line_angle(clusters[i].direction, truth)));
      }
      both = both && best < 2.0;
    }
    if (both) ++hits;
  }
  CHECK(hits >= 45);
}

TEST_CASE("cluster_3d_parallel recovers exact families") {
  std::mt19937_64 rng(17);
  std::vector<LineSegment3D> segs;
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    const Eigen::Vector3d c(coord(rng), coord(rng), coord(rng));
    segs.push_back({c - 0.3 * Eigen::Vector3d::UnitX(), c + 0.3 * Eigen::Vector3d::UnitX()});
  }
  for (int i = 0; i < 30; ++i) {
    const Eigen::Vector3d c(coord(rng), coord(rng), coord(rng));
    segs.push_back({c - 0.2 * Eigen::Vector3d::UnitZ(), c + 0.2 * Eigen::Vector3d::UnitZ()});
  }

  ClusterConfig cfg;
  std::mt19937_64 cluster_rng(19);
  const auto clusters = cluster_3d_parallel(segs, cfg, cluster_rng);
  REQUIRE(clusters.size() >= 2);
  CHECK(clusters[0].population() == 30);
  CHECK(clusters[1].population() == 30);
  CHECK(line_angle(clusters[0].direction, Eigen::Vector3d::UnitX()) +
            line_angle(clusters[1].direction, Eigen::Vector3d::UnitX()) <
        deg2rad(0.01) + M_PI_2);  // one cluster per axis
}

TEST_CASE("cluster_3d_parallel survives random-orientation outliers") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<LineSegment3D> segs;
  const Eigen::Vector3d dx = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d dz = Eigen::Vector3d::UnitZ();
  for (int i = 0; i < 30; ++i) {
    const Eigen::Vector3d c(coord(rng), coord(rng), coord(rng));
    segs.push_back({c - 0.3 * dx, c + 0.3 * dx});
  }
  for (int i = 0; i < 30; ++i) {
    const Eigen::Vector3d c(coord(rng), coord(rng), coord(rng));
    segs.push_back({c - 0.3 * dz, c + 0.3 * dz});
  }
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector3d c(coord(rng), coord(rng), coord(rng));
    const Eigen::Vector3d d = random_unit(rng);
    segs.push_back({c - 0.3 * d, c + 0.3 * d});
  }

  ClusterConfig cfg;
  std::mt19937_64 cluster_rng(29);
  const auto clusters = cluster_3d_parallel(segs, cfg, cluster_rng);
  REQUIRE(clusters.size() >= 2);
  CHECK(clusters[0].population() >= 30);
  CHECK(clusters[1].population() >= 30);
  CHECK(rad2deg(line_angle(clusters[0].direction, dx)) +
            rad2deg(line_angle(clusters[0].direction, dz)) >
        0.0);  // direction is one of the two axes
  for (int i = 0; i < 2; ++i) {
    const double to_x = rad2deg(line_angle(clusters[static_cast<size_t>(i)].direction, dx));
    const double to_z = rad2deg(line_angle(clusters[static_cast<size_t>(i)].direction, dz));
    CHECK(std::min(to_x, to_z) < 0.2);
  }
}

TEST_CASE("cluster_3d_parallel throws when nothing is parallel") {
  // Mutually separated directions: every hypothesis collects only itself.
  std::vector<LineSegment3D> segs;
  for (int i = 0; i < 8; ++i) {
    const double a = deg2rad(3.0 + 11.0 * i);
    const double b = deg2rad(7.0 * i);
    const Eigen::Vector3d d(std::cos(a) * std::cos(b), std::cos(a) * std::sin(b),
                            std::sin(a));
    segs.push_back({-0.4 * d, 0.4 * d});
  }
  ClusterConfig cfg;
  std::mt19937_64 rng(31);
  CHECK_THROWS_AS(cluster_3d_parallel(segs, cfg, rng), NoClusterFound);
}

TEST_CASE("clustering rejects undersized input") {
  ClusterConfig cfg;
  std::mt19937_64 rng(1);
  std::vector<LineSegment2D> two = {{{0, 0}, {10, 0}}, {{0, 5}, {10, 5}}};
  CHECK_THROWS_AS(cluster_2d_vanishing(two, kCam, cfg, rng), InsufficientSegments);
  std::vector<LineSegment3D> three(3, {{0, 0, 0}, {1, 0, 0}});
  CHECK_THROWS_AS(cluster_3d_parallel(three, cfg, rng), InsufficientSegments);
}

TEST_CASE("merge_and_rank merges nearby directions and ranks by population") {
  const Eigen::Vector3d base = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d tilted =
      (Eigen::AngleAxisd(deg2rad(3.0), Eigen::Vector3d::UnitX()) * base).normalized();
  const Eigen::Vector3d ortho = Eigen::Vector3d::UnitX();

  std::vector<Eigen::Vector3d> seg_vectors;
  std::vector<DirectionCluster> clusters(3);
  clusters[0].direction = base;
  clusters[1].direction = tilted;
  clusters[2].direction = ortho;
  for (int i = 0; i < 6; ++i) seg_vectors.push_back(base);
  for (int i = 0; i < 4; ++i) seg_vectors.push_back(tilted);
  for (int i = 0; i < 3; ++i) seg_vectors.push_back(ortho);
  clusters[0].member_indices = {0, 1, 2, 3, 4, 5};
  clusters[1].member_indices = {6, 7, 8, 9};
  clusters[2].member_indices = {10, 11, 12};

  SUBCASE("within threshold merges") {
    const auto merged = merge_and_rank(clusters, seg_vectors, {},
                                       DirectionFit::kLineDirections, 5.0, 2);
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].population() == 10);
    CHECK(merged[1].population() == 3);
  }

  SUBCASE("orthogonal clusters stay apart") {
    std::vector<DirectionCluster> two = {clusters[0], clusters[2]};
    const auto merged = merge_and_rank(two, seg_vectors, {},
                                       DirectionFit::kLineDirections, 5.0, 2);
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].population() == 6);
    CHECK(merged[1].population() == 3);
  }

  SUBCASE("fewer clusters than keep throws") {
    std::vector<DirectionCluster> one = {clusters[2]};
    CHECK_THROWS_AS(merge_and_rank(one, seg_vectors, {},
                                   DirectionFit::kLineDirections, 5.0, 2),
                    FewerThanKeep);
  }
}

TEST_CASE("merge_and_rank rejoins a split family") {
  // Three-family Manhattan scene where the detector split one family in two:
  // after merging, the top-2 are the two most populous families.
  std::mt19937_64 rng(37);
  std::normal_distribution<double> jitter(0.0, deg2rad(0.5));
  const std::array<Eigen::Vector3d, 3> family = {
      Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ()};

  std::vector<Eigen::Vector3d> seg_vectors;
  auto emit = [&](const Eigen::Vector3d& d, int count) {
    std::vector<int> idx;
    for (int i = 0; i < count; ++i) {
      const Eigen::Vector3d noise(jitter(rng), jitter(rng), jitter(rng));
      seg_vectors.push_back((d + noise).normalized());
      idx.push_back(static_cast<int>(seg_vectors.size()) - 1);
    }
    return idx;
  };

  std::vector<DirectionCluster> clusters(4);
  clusters[0].member_indices = emit(family[0], 12);  // family 0, half A
  clusters[1].member_indices = emit(family[0], 10);  // family 0, half B
  clusters[2].member_indices = emit(family[1], 15);
  clusters[3].member_indices = emit(family[2], 6);
  for (auto& c : clusters) {
    std::vector<Eigen::Vector3d> members;
    for (const int i : c.member_indices) members.push_back(seg_vectors[static_cast<size_t>(i)]);
    c.direction = fit_cluster_direction(members, {}, DirectionFit::kLineDirections,
                                        members.front());
  }

  const auto merged = merge_and_rank(clusters, seg_vectors, {},
                                     DirectionFit::kLineDirections, 5.0, 3);
  REQUIRE(merged.size() == 3);
  CHECK(merged[0].population() == 22);
  CHECK(merged[1].population() == 15);
  CHECK(merged[2].population() == 6);
  CHECK(rad2deg(line_angle(merged[0].direction, family[0])) < 0.5);
}

TEST_CASE("cluster invariants: disjoint members, relaxed inlier predicate") {
  SimConfig sim;
  sim.n_lines = 50;
  sim.noise_sigma = 2.0;
  sim.outlier_frac_2d = 0.15;
  std::mt19937_64 scene_rng(41);
  const Scene scene = generate_scene(sim, scene_rng);
  const auto normals = interpretation_normals(scene.segs2d, scene.K);

  ClusterConfig cfg;
  std::mt19937_64 rng(43);
  const auto clusters = cluster_2d_vanishing(scene.segs2d, scene.K, cfg, rng);

  std::vector<bool> seen(scene.segs2d.size(), false);
  const double relaxed = std::sin(deg2rad(2.0 * cfg.inlier_angle_2d_deg));
  for (const auto& c : clusters) {
    CHECK(c.population() >= 2);
    CHECK(std::abs(c.direction.norm() - 1.0) < 1e-12);
    for (const int idx : c.member_indices) {
      CHECK_FALSE(seen[static_cast<size_t>(idx)]);
      seen[static_cast<size_t>(idx)] = true;
      CHECK(std::abs(normals[static_cast<size_t>(idx)].dot(c.direction)) < relaxed);
    }
  }
}

TEST_CASE("clustering is deterministic under a fixed seed") {
  SimConfig sim;
  sim.n_lines = 40;
  sim.noise_sigma = 2.0;
  std::mt19937_64 scene_rng(47);
  const Scene scene = generate_scene(sim, scene_rng);

  ClusterConfig cfg;
  std::mt19937_64 rng_a(53), rng_b(53);
  const auto a = cluster_2d_vanishing(scene.segs2d, scene.K, cfg, rng_a);
  const auto b = cluster_2d_vanishing(scene.segs2d, scene.K, cfg, rng_b);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].member_indices == b[i].member_indices);
    CHECK(a[i].direction == b[i].direction);  // bitwise
  }
}

TEST_CASE("fit_cluster_direction minimizes the weighted objective") {
  // Exhaustive 1-degree sphere grid as the oracle.
  std::mt19937_64 rng(59);
  std::normal_distribution<double> noise(0.0, 0.01);
  const Eigen::Vector3d v_true = random_unit(rng);

  std::vector<Eigen::Vector3d> normals;
  std::vector<double> weights;
  for (int i = 0; i < 8; ++i) {
    Eigen::Vector3d n = random_unit(rng).cross(v_true).normalized();
    n = (n + Eigen::Vector3d(noise(rng), noise(rng), noise(rng))).normalized();
    normals.push_back(n);
    weights.push_back(1.0 + i % 3);
  }

  const Eigen::Vector3d fit = fit_cluster_direction(
      normals, weights, DirectionFit::kPlaneNormals, Eigen::Vector3d::UnitZ());

  auto objective = [&](const Eigen::Vector3d& v) {
    double s = 0.0;
    for (size_t i = 0; i < normals.size(); ++i) {
      const double d = normals[i].dot(v);
      s += weights[i] * d * d;
    }
    return s;
  };

  double grid_best = 1e18;
  for (int theta = 0; theta < 180; ++theta) {
    for (int phi = 0; phi < 360; ++phi) {
      const double th = deg2rad(theta), ph = deg2rad(phi);
      const Eigen::Vector3d v(std::sin(th) * std::cos(ph),
                              std::sin(th) * std::sin(ph), std::cos(th));
      grid_best = std::min(grid_best, objective(v));
    }
  }
  CHECK(objective(fit) <= grid_best + 1e-9);
}

TEST_CASE("merge_and_rank output populations are non-increasing") {
  SimConfig sim;
  sim.n_lines = 50;
  sim.noise_sigma = 2.0;
  sim.outlier_frac_2d = 0.2;
  std::mt19937_64 scene_rng(61);
  const Scene scene = generate_scene(sim, scene_rng);
  const auto normals = interpretation_normals(scene.segs2d, scene.K);

  ClusterConfig cfg;
  std::mt19937_64 rng(67);
  auto clusters = cluster_2d_vanishing(scene.segs2d, scene.K, cfg, rng);
  const int total = static_cast<int>(clusters.size());
  if (total >= 2) {
    const auto merged = merge_and_rank(std::move(clusters), normals, {},
                                       DirectionFit::kPlaneNormals, 5.0, 2);
    for (size_t i = 1; i < merged.size(); ++i) {
      CHECK(merged[i - 1].population() >= merged[i].population());
    }
  }
}
