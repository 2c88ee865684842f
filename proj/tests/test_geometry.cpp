#include "linereg/geometry.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "test_util.hpp"

using namespace linereg;
using testing::random_rotation;
using testing::random_unit;
using testing::rot_z;

namespace {

// Independent polar-factor oracle: Newton iteration X <- (X + X^-T)/2
// converges to the orthonormal factor without touching the SVD path.
Eigen::Matrix3d polar_factor_newton(const Eigen::Matrix3d& M) {
  Eigen::Matrix3d X = M;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Matrix3d next = 0.5 * (X + X.inverse().transpose());
    if ((next - X).norm() < 1e-15) return next;
    X = next;
  }
  return X;
}

// Truncated series of the 4x4 twist exponential.
Pose exp_se3_series(const PoseTangent& xi, int terms) {
  Eigen::Matrix4d twist = Eigen::Matrix4d::Zero();
  twist.block<3, 3>(0, 0) = skew(xi.tail<3>());
  twist.block<3, 1>(0, 3) = xi.head<3>();
  Eigen::Matrix4d sum = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d term = Eigen::Matrix4d::Identity();
  for (int k = 1; k <= terms; ++k) {
    term = term * twist / static_cast<double>(k);
    sum += term;
  }
  return {sum.block<3, 3>(0, 0), sum.block<3, 1>(0, 3)};
}

}  // namespace

TEST_CASE("orthonormalize_rotation identity passes through") {
  const Eigen::Matrix3d R = orthonormalize_rotation(Eigen::Matrix3d::Identity());
  CHECK((R - Eigen::Matrix3d::Identity()).norm() < 1e-12);
}

TEST_CASE("orthonormalize_rotation removes uniform scaling") {
  const Eigen::Matrix3d R = rot_z(deg2rad(30.0));
  const Eigen::Matrix3d result = orthonormalize_rotation(2.0 * R);
  CHECK((result - R).norm() < 1e-12);
}

TEST_CASE("orthonormalize_rotation matches the polar oracle on noisy input") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Matrix3d M = random_rotation(rng);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) M(i, j) += noise(rng);
    const Eigen::Matrix3d R = orthonormalize_rotation(M);
    const Eigen::Matrix3d oracle = polar_factor_newton(M);
    CHECK((R - oracle).norm() < 1e-9);
    CHECK((R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("orthonormalize_rotation rejects rank-deficient input") {
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  M(0, 0) = 1.0;
  M(1, 1) = 1.0;
  CHECK_THROWS_AS(orthonormalize_rotation(M), SingularInput);
}

TEST_CASE("exp_se3 identity and pure translation") {
  const Pose id = exp_se3(PoseTangent::Zero());
  CHECK((id.R - Eigen::Matrix3d::Identity()).norm() < 1e-15);
  CHECK(id.t.norm() < 1e-15);

  PoseTangent xi = PoseTangent::Zero();
  xi.head<3>() = Eigen::Vector3d(1.0, 2.0, 3.0);
  const Pose pure = exp_se3(xi);
  CHECK((pure.R - Eigen::Matrix3d::Identity()).norm() < 1e-15);
  CHECK((pure.t - Eigen::Vector3d(1.0, 2.0, 3.0)).norm() < 1e-15);
}

TEST_CASE("exp_se3 matches the truncated series") {
  PoseTangent xi;
  xi << 0.3, -0.2, 0.5, 0.0, 0.0, M_PI / 2.0;
  const Pose pose = exp_se3(xi);
  CHECK((pose.R * Eigen::Vector3d::UnitX() - Eigen::Vector3d::UnitY()).norm() < 1e-12);

  const Pose series = exp_se3_series(xi, 20);
  CHECK((pose.R - series.R).norm() < 1e-10);
  CHECK((pose.t - series.t).norm() < 1e-10);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    for (int i = 0; i < 6; ++i) xi(i) = coord(rng);
    const Pose p = exp_se3(xi);
    const Pose s = exp_se3_series(xi, 30);
    CHECK((p.R - s.R).norm() < 1e-10);
    CHECK((p.t - s.t).norm() < 1e-10);
  }
}

TEST_CASE("log_se3 inverts exp_se3 below pi") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> trans(-5.0, 5.0);
  std::uniform_real_distribution<double> angle(0.0, M_PI - 0.1);
  for (int trial = 0; trial < 200; ++trial) {
    PoseTangent xi;
    xi.head<3>() = Eigen::Vector3d(trans(rng), trans(rng), trans(rng));
    xi.tail<3>() = angle(rng) * random_unit(rng);
    const PoseTangent back = log_se3(exp_se3(xi));
    CHECK((back - xi).norm() < 1e-8);
  }
}

TEST_CASE("project_point principal point and off-axis") {
  const CameraIntrinsics K{800.0, 800.0, 320.0, 240.0};
  const Pose identity;

  const auto center = project_point(K, identity, {0.0, 0.0, 5.0});
  REQUIRE(center.has_value());
  CHECK((*center - Eigen::Vector2d(320.0, 240.0)).norm() < 1e-12);

  const auto off = project_point(K, identity, {1.0, 0.0, 4.0});
  REQUIRE(off.has_value());
  CHECK((*off - Eigen::Vector2d(520.0, 240.0)).norm() < 1e-12);

  CHECK_FALSE(project_point(K, identity, {0.0, 0.0, -1.0}).has_value());
  CHECK_FALSE(project_point(K, identity, {0.0, 0.0, 0.0}).has_value());
}

TEST_CASE("project_point commutes with pre-transforming the point") {
  const CameraIntrinsics K{800.0, 800.0, 320.0, 240.0};
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Pose pose{random_rotation(rng), {coord(rng), coord(rng), coord(rng) + 4.0}};
    const Eigen::Vector3d P(coord(rng), coord(rng), coord(rng));
    const auto direct = project_point(K, pose, P);
    const auto composed = project_point(K, Pose{}, pose.apply(P));
    REQUIRE(direct.has_value() == composed.has_value());
    if (direct) {
      CHECK((*direct - *composed).norm() < 1e-10);
    }
  }
}

TEST_CASE("interpretation_plane_normal horizontal segment") {
  const CameraIntrinsics K{800.0, 800.0, 320.0, 240.0};
  const LineSegment2D seg{{320.0, 240.0}, {520.0, 240.0}};
  const auto n = interpretation_plane_normal(K, seg);
  REQUIRE(n.has_value());
  CHECK(std::abs(std::abs(n->y()) - 1.0) < 1e-12);
  CHECK(std::abs(n->x()) < 1e-12);
  CHECK(std::abs(n->z()) < 1e-12);
}

TEST_CASE("interpretation_plane_normal is orthogonal to both rays") {
  const CameraIntrinsics K{800.0, 800.0, 320.0, 240.0};
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> px(0.0, 640.0);
  std::uniform_real_distribution<double> py(0.0, 480.0);
  for (int trial = 0; trial < 100; ++trial) {
    const LineSegment2D seg{{px(rng), py(rng)}, {px(rng), py(rng)}};
    if (seg.length() < 1.0) continue;
    const auto n = interpretation_plane_normal(K, seg);
    REQUIRE(n.has_value());
    CHECK(std::abs(n->dot(K.backproject(seg.p).normalized())) < 1e-10);
    CHECK(std::abs(n->dot(K.backproject(seg.q).normalized())) < 1e-10);

    const auto swapped = interpretation_plane_normal(K, {seg.q, seg.p});
    REQUIRE(swapped.has_value());
    CHECK(std::min((*n - *swapped).norm(), (*n + *swapped).norm()) < 1e-12);
  }
}

TEST_CASE("interpretation_plane_normal rejects degenerate segments") {
  const CameraIntrinsics K{800.0, 800.0, 320.0, 240.0};
  const LineSegment2D seg{{100.0, 100.0}, {100.0, 100.0}};
  CHECK_FALSE(interpretation_plane_normal(K, seg).has_value());
}

TEST_CASE("rotation_geodesic_error basics and symmetry") {
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  CHECK(rotation_geodesic_error(I, I) == 0.0);
  CHECK(rotation_geodesic_error(I, rot_z(M_PI)) == doctest::Approx(M_PI).epsilon(1e-12));

  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Matrix3d Ra = random_rotation(rng);
    const Eigen::Matrix3d Rb = random_rotation(rng);
    CHECK(rotation_geodesic_error(Ra, Rb) == rotation_geodesic_error(Rb, Ra));
  }
}
