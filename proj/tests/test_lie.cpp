#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fgtrack/lie.hpp"
#include "test_util.hpp"

using namespace fgtrack;

TEST_CASE("exp_se3 of zero is identity") {
  const Pose p = exp_se3(Tangent6::Zero());
  CHECK(p.translation.norm() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(rotation_angle(p.rotation) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("exp_se3 with zero rho has zero translation") {
  const Tangent6 x = tangent(Vec3::Zero(), Vec3(0, 0, M_PI_2));
  const Pose p = exp_se3(x);
  CHECK(p.translation.norm() < 1e-15);
  CHECK(rotation_angle(p.rotation) == doctest::Approx(M_PI_2).epsilon(1e-12));
  const Vec3 rotated = p.rotation * Vec3::UnitX();
  CHECK((rotated - Vec3::UnitY()).norm() < 1e-12);
}

TEST_CASE("exp_se3 matches the matrix exponential oracle") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const Tangent6 x = testutil::random_tangent(rng, 3.0, 2.0);
    const Eigen::Matrix4d expected = testutil::matrix_exp(testutil::twist_matrix(x));
    const Eigen::Matrix4d actual = exp_se3(x).matrix();
    CHECK((expected - actual).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("log_se3 of identity is zero") {
  CHECK(log_se3(Pose::identity()).norm() < 1e-15);
}

TEST_CASE("log_se3 of a pure translation") {
  const Pose p(Rotation::identity(), Vec3(0.1, 0, 0));
  const Tangent6 x = log_se3(p);
  CHECK((rho(x) - Vec3(0.1, 0, 0)).norm() < 1e-15);
  CHECK(theta(x).norm() < 1e-15);
}

TEST_CASE("exp/log roundtrip over random tangents") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Tangent6 x = testutil::random_tangent(rng, 3.0, 1.5);
    const Tangent6 back = log_se3(exp_se3(x));
    CHECK((back - x).norm() < 1e-8);
  }
}

TEST_CASE("log/exp roundtrip over random poses") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 1000; ++i) {
    const Pose p = testutil::random_pose(rng, 3.0, 1.5);
    const Pose q = exp_se3(log_se3(p));
    CHECK(translation_distance(p, q) < 1e-9);
    CHECK(rotation_distance(p.rotation, q.rotation) < 1e-9);
  }
}

TEST_CASE("group axioms hold for random triples") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    const Pose a = testutil::random_pose(rng);
    const Pose b = testutil::random_pose(rng);
    const Pose c = testutil::random_pose(rng);

    const Pose ab_c = (a * b) * c;
    const Pose a_bc = a * (b * c);
    CHECK(translation_distance(ab_c, a_bc) < 1e-9);
    CHECK(rotation_distance(ab_c.rotation, a_bc.rotation) < 1e-9);

    const Pose left = (a * b).inverse();
    const Pose right = b.inverse() * a.inverse();
    CHECK(translation_distance(left, right) < 1e-9);
    CHECK(rotation_distance(left.rotation, right.rotation) < 1e-9);
  }
}

TEST_CASE("rotation stays orthonormal over long composition chains") {
  std::mt19937_64 rng(19);
  Rotation r = Rotation::identity();
  const Rotation step = testutil::random_pose(rng, 0.3).rotation;
  for (int i = 0; i < 10000; ++i) r = r * step;
  const Mat3 m = r.matrix();
  CHECK((m * m.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(m.determinant() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("between and compose are inverses") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    const Pose a = testutil::random_pose(rng);
    const Pose b = testutil::random_pose(rng);
    const Pose d = between(a, b);
    CHECK(translation_distance(a * d, b) < 1e-9);
    CHECK(rotation_distance((a * d).rotation, b.rotation) < 1e-9);
  }
  const Pose t = testutil::random_pose(rng);
  CHECK(log_se3(between(t, t)).norm() < 1e-12);
  CHECK(translation_distance(between(Pose::identity(), t), t) < 1e-12);
}

TEST_CASE("rotation_angle basics") {
  CHECK(rotation_angle(Rotation::identity()) == doctest::Approx(0.0));
  std::mt19937_64 rng(29);
  const Vec3 axis = testutil::random_unit(rng);
  CHECK(rotation_angle(Rotation::from_axis_angle(axis, M_PI)) ==
        doctest::Approx(M_PI).epsilon(1e-12));
  for (int i = 0; i < 200; ++i) {
    const Rotation r = testutil::random_pose(rng).rotation;
    CHECK(rotation_angle(r) == doctest::Approx(log_so3(r).norm()).epsilon(1e-10));
  }
}

TEST_CASE("log branch ambiguity is reported near pi") {
  const Rotation near_pi =
      Rotation::from_axis_angle(Vec3::UnitX(), M_PI - 1e-9);
  const Rotation safe = Rotation::from_axis_angle(Vec3::UnitX(), M_PI - 1e-3);
  CHECK(log_branch_ambiguous(near_pi));
  CHECK(!log_branch_ambiguous(safe));
  // Either branch still roundtrips through exp.
  const Vec3 log_vec = log_so3(near_pi);
  CHECK(rotation_distance(exp_so3(log_vec), near_pi) < 1e-8);
}

TEST_CASE("exp of small tangents matches first order") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 50; ++i) {
    Tangent6 x = testutil::random_tangent(rng, 1.0, 1.0);
    x.normalize();
    for (const double eps : {1e-2, 1e-3}) {
      const Pose p = exp_se3(eps * x);
      const double err = (p.translation - eps * rho(x)).norm();
      CHECK(err < 2.0 * eps * eps);  // O(eps^2) with a small constant
    }
  }
}

TEST_CASE("small-angle branches agree with closed forms at the seam") {
  for (const double angle : {2e-5, 1e-5, 0.9e-5, 0.5e-5}) {
    const Tangent6 x = tangent(Vec3(0.3, -0.2, 0.1), angle * Vec3(1, 0, 0));
    const Eigen::Matrix4d expected =
        testutil::matrix_exp(testutil::twist_matrix(x));
    CHECK((exp_se3(x).matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((log_se3(exp_se3(x)) - x).norm() < 1e-10);
  }
}

TEST_CASE("se3 left jacobian satisfies its defining first-order expansion") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 100; ++i) {
    const Tangent6 x = testutil::random_tangent(rng, 2.0, 1.0);
    const Mat6 jl = left_jacobian_se3(x);
    const double h = 1e-6;
    for (int k = 0; k < 6; ++k) {
      Tangent6 dx = Tangent6::Zero();
      dx(k) = h;
      // exp(x + dx) ~= exp(Jl dx) * exp(x)
      const Tangent6 lhs = log_se3(exp_se3(x + dx) * exp_se3(x).inverse());
      CHECK((lhs - jl * dx).norm() < 1e-9);
    }
    const Mat6 jli = left_jacobian_inv_se3(x);
    CHECK((jl * jli - Mat6::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("adjoint moves tangents across composition") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 100; ++i) {
    const Pose t = testutil::random_pose(rng);
    const Tangent6 x = 1e-3 * testutil::random_tangent(rng, 1.0, 1.0);
    const Pose lhs = t * exp_se3(x);
    const Pose rhs = exp_se3(adjoint(t) * x) * t;
    CHECK(translation_distance(lhs, rhs) < 1e-9);
    CHECK(rotation_distance(lhs.rotation, rhs.rotation) < 1e-9);
  }
}
