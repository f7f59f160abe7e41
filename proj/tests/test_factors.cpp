#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "fgtrack/factors.hpp"
#include "test_util.hpp"

using namespace fgtrack;

TEST_CASE("camera residual is zero on equal poses") {
  std::mt19937_64 rng(1);
  const Pose t = testutil::random_pose(rng);
  CHECK(camera_residual(t, t).norm() < 1e-12);
}

TEST_CASE("camera residual of a pure translation offset") {
  const Pose estimate = Pose::identity();
  const Pose measured(Rotation::identity(), Vec3(0.01, 0, 0));
  const Tangent6 r = camera_residual(estimate, measured);
  CHECK((rho(r) - Vec3(0.01, 0, 0)).norm() < 1e-12);
  CHECK(theta(r).norm() < 1e-12);
}

TEST_CASE("camera residual equals the log of the relative pose") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Pose a = testutil::random_pose(rng);
    const Pose b = testutil::random_pose(rng);
    CHECK((camera_residual(a, b) - log_se3(between(a, b))).norm() < 1e-12);
  }
}

TEST_CASE("object residual vanishes on consistent triples") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Pose camera = testutil::random_pose(rng);
    const Pose meas = testutil::random_pose(rng);
    const Pose object = camera * meas;
    CHECK(object_residual(object, camera, meas).norm() < 1e-10);
  }
}

TEST_CASE("object residual reduces to camera residual at identity camera") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const Pose object = testutil::random_pose(rng);
    const Pose meas = testutil::random_pose(rng);
    const Tangent6 a = object_residual(object, Pose::identity(), meas);
    const Tangent6 b = camera_residual(object, meas);
    CHECK((a - b).norm() < 1e-12);
  }
}

TEST_CASE("object residual matches compose-then-log") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Pose object = testutil::random_pose(rng);
    const Pose camera = testutil::random_pose(rng);
    const Pose meas = testutil::random_pose(rng);
    const Tangent6 expected = log_se3(object.inverse() * camera * meas);
    CHECK((object_residual(object, camera, meas) - expected).norm() < 1e-12);
  }
}

TEST_CASE("residual norms are symmetric in their arguments") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const Pose a = testutil::random_pose(rng, 2.5);
    const Pose b = testutil::random_pose(rng, 2.5);
    CHECK(camera_residual(a, b).norm() ==
          doctest::Approx(camera_residual(b, a).norm()).epsilon(1e-9));
  }
}

TEST_CASE("sigma model basics") {
  CHECK(sigma(1234.0, 0.05, 0.0) == doctest::Approx(0.05));
  CHECK(sigma(0.0, 0.05, 1e-3) == doctest::Approx(0.05));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> npx(0.0, 5000.0);
  for (int i = 0; i < 100; ++i) {
    const double n1 = npx(rng), n2 = npx(rng);
    const double ratio = sigma(n1, 0.04, 2e-4) / sigma(n2, 0.04, 2e-4);
    CHECK(ratio == doctest::Approx(std::exp(-2e-4 * (n1 - n2))).epsilon(1e-12));
  }
}

namespace {

CovModelParams test_params() {
  CovModelParams params;
  params.xy = {0.02, 3e-4};
  params.z = {0.08, 3e-4};
  params.rot = {0.15, 3e-4};
  return params;
}

}  // namespace

TEST_CASE("measurement covariance on the optical axis is diagonal") {
  const Pose meas(Rotation::identity(), Vec3(0, 0, 0.5));
  const double n_px = 2000.0;
  const CovModelParams params = test_params();
  const Cov6 cov = measurement_covariance(Pose::identity(), meas, n_px, params);

  const double sxy = sigma(n_px, params.xy.a, params.xy.b);
  const double sz = sigma(n_px, params.z.a, params.z.b);
  const double sr = sigma(n_px, params.rot.a, params.rot.b);
  CHECK(cov(0, 0) == doctest::Approx(sxy * sxy).epsilon(1e-12));
  CHECK(cov(1, 1) == doctest::Approx(sxy * sxy).epsilon(1e-12));
  CHECK(cov(2, 2) == doctest::Approx(sz * sz).epsilon(1e-12));
  for (int i = 3; i < 6; ++i) {
    CHECK(cov(i, i) == doctest::Approx(sr * sr).epsilon(1e-12));
  }
  CHECK(cov.topLeftCorner<3, 3>().cwiseAbs().sum() ==
        doctest::Approx(cov.topLeftCorner<3, 3>().diagonal().cwiseAbs().sum())
            .epsilon(1e-12));
}

TEST_CASE("ray variance lands on the bearing axis") {
  const Pose meas(Rotation::identity(), Vec3(0.5, 0, 0));
  const double n_px = 2000.0;
  const CovModelParams params = test_params();
  const Cov6 cov = measurement_covariance(Pose::identity(), meas, n_px, params);
  const double sxy = sigma(n_px, params.xy.a, params.xy.b);
  const double sz = sigma(n_px, params.z.a, params.z.b);
  CHECK(cov(0, 0) == doctest::Approx(sz * sz).epsilon(1e-9));
  const Mat3 tblock = cov.topLeftCorner<3, 3>();
  CHECK(tblock.trace() ==
        doctest::Approx(2 * sxy * sxy + sz * sz).epsilon(1e-12));
}

TEST_CASE("translation block determinant is invariant to the ray direction") {
  std::mt19937_64 rng(8);
  const CovModelParams params = test_params();
  const double n_px = 1500.0;
  const double sxy = sigma(n_px, params.xy.a, params.xy.b);
  const double sz = sigma(n_px, params.z.a, params.z.b);
  const double expected = sxy * sxy * sxy * sxy * sz * sz;
  for (int i = 0; i < 100; ++i) {
    const Pose meas = testutil::random_pose(rng, 3.0, 0.8);
    const Cov6 cov =
        measurement_covariance(testutil::random_pose(rng), meas, n_px, params);
    CHECK(cov.topLeftCorner<3, 3>().determinant() ==
          doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("measurement covariance eigenvalues match the model sigmas") {
  std::mt19937_64 rng(9);
  const CovModelParams params = test_params();
  for (int i = 0; i < 100; ++i) {
    std::uniform_real_distribution<double> npx(50.0, 6000.0);
    const double n_px = npx(rng);
    const Pose meas = testutil::random_pose(rng, 3.0, 0.8);
    const Cov6 cov =
        measurement_covariance(testutil::random_pose(rng), meas, n_px, params);

    Eigen::SelfAdjointEigenSolver<Mat3> tsolve(cov.topLeftCorner<3, 3>());
    const double sxy = sigma(n_px, params.xy.a, params.xy.b);
    const double sz = sigma(n_px, params.z.a, params.z.b);
    Eigen::Vector3d expected(sxy * sxy, sxy * sxy, sz * sz);
    std::sort(expected.data(), expected.data() + 3);
    CHECK((tsolve.eigenvalues() - expected).cwiseAbs().maxCoeff() < 1e-10);

    const double sr = sigma(n_px, params.rot.a, params.rot.b);
    CHECK((cov.bottomRightCorner<3, 3>() - sr * sr * Mat3::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}

TEST_CASE("covariance model ablation flags") {
  std::mt19937_64 rng(10);
  const Pose meas = testutil::random_pose(rng, 2.0, 0.7);
  const double n_px = 900.0;

  CovModelParams isotropic = test_params();
  isotropic.decoupled = false;
  const Cov6 iso = measurement_covariance(Pose::identity(), meas, n_px, isotropic);
  Eigen::SelfAdjointEigenSolver<Mat3> solver(iso.topLeftCorner<3, 3>());
  const double sxy = sigma(n_px, isotropic.xy.a, isotropic.xy.b);
  CHECK((solver.eigenvalues() - Eigen::Vector3d::Constant(sxy * sxy))
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  CovModelParams constant = test_params();
  constant.visibility_dependent = false;
  const Cov6 c1 = measurement_covariance(Pose::identity(), meas, 10.0, constant);
  const Cov6 c2 = measurement_covariance(Pose::identity(), meas, 5000.0, constant);
  CHECK((c1 - c2).cwiseAbs().maxCoeff() < 1e-15);

  // Camera-frame variant: the C' rotation is skipped, so an identity-rotation
  // measurement keeps the diagonal regardless of the ray.
  CovModelParams camera_frame = test_params();
  camera_frame.ray_aligned = false;
  const Pose off_axis(Rotation::identity(), Vec3(0.4, 0.1, 0.3));
  const Cov6 cam =
      measurement_covariance(Pose::identity(), off_axis, n_px, camera_frame);
  const double sz = sigma(n_px, camera_frame.z.a, camera_frame.z.b);
  CHECK(cam(0, 0) == doctest::Approx(sxy * sxy).epsilon(1e-12));
  CHECK(cam(2, 2) == doctest::Approx(sz * sz).epsilon(1e-12));
}

TEST_CASE("degenerate ray is rejected") {
  const Pose meas(Rotation::identity(), Vec3::Zero());
  CHECK_THROWS_AS(
      measurement_covariance(Pose::identity(), meas, 100.0, test_params()),
      std::invalid_argument);
}

TEST_CASE("constant pose residual and covariance") {
  std::mt19937_64 rng(11);
  const Pose t = testutil::random_pose(rng);
  CHECK(constant_pose_residual(t, t).norm() < 1e-12);

  for (int i = 0; i < 50; ++i) {
    const Pose a = testutil::random_pose(rng);
    const Pose b = testutil::random_pose(rng);
    CHECK((constant_pose_residual(a, b) - log_se3(between(a, b))).norm() < 1e-12);
  }

  MotionNoise noise;
  const Cov6 c1 = constant_pose_cov(noise, 0.5);
  const Cov6 c2 = constant_pose_cov(noise, 1.0);
  CHECK((2.0 * c1 - c2).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(constant_pose_cov(noise, 0.0), std::invalid_argument);
}

TEST_CASE("constant velocity residuals") {
  std::mt19937_64 rng(12);
  const Tangent6 twist = testutil::random_tangent(rng, 0.8, 0.3);
  const Pose prev = testutil::random_pose(rng);
  const double dt = 1.0 / 30.0;
  const Pose cur = prev * exp_se3(dt * twist);

  const auto [smooth, integ] =
      constant_velocity_residuals(prev, cur, twist, twist, dt);
  CHECK(smooth.norm() < 1e-12);
  CHECK(integ.norm() < 1e-10);

  // A sampled constant-twist trajectory satisfies both residuals everywhere.
  Pose pose = prev;
  for (int k = 0; k < 30; ++k) {
    const Pose next = pose * exp_se3(dt * twist);
    const auto [s, g] = constant_velocity_residuals(pose, next, twist, twist, dt);
    CHECK(s.norm() < 1e-12);
    CHECK(g.norm() < 1e-9);
    pose = next;
  }

  CHECK_THROWS_AS(constant_velocity_residuals(prev, cur, twist, twist, 0.0),
                  std::invalid_argument);
}

TEST_CASE("fit recovers exact exponential decay") {
  std::vector<std::pair<double, double>> samples;
  for (int bin = 0; bin < 10; ++bin) {
    const double n_px = 100.0 + 200.0 * bin;
    for (int i = 0; i < 200; ++i) {
      samples.emplace_back(n_px, sigma(n_px, 0.05, 0.001));
    }
  }
  const SigmaFit fit = fit_sigma_model(samples, 10);
  CHECK(fit.bin_resolved);
  CHECK(fit.a == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(fit.b == doctest::Approx(0.001).epsilon(1e-6));
}

TEST_CASE("fit of constant errors gives b near zero") {
  std::vector<std::pair<double, double>> samples;
  for (int i = 0; i < 1000; ++i) {
    samples.emplace_back(10.0 + i, 0.03);
  }
  const SigmaFit fit = fit_sigma_model(samples, 10);
  CHECK(std::abs(fit.b) < 1e-12);
  CHECK(fit.a == doctest::Approx(0.03).epsilon(1e-9));
}

TEST_CASE("fit falls back to pooled std with a single bin") {
  std::vector<std::pair<double, double>> samples;
  for (int i = 0; i < 100; ++i) samples.emplace_back(500.0, 0.02);
  const SigmaFit fit = fit_sigma_model(samples, 10);
  CHECK(!fit.bin_resolved);
  CHECK(fit.b == 0.0);
  CHECK(fit.a == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("fit recovers a within 10 percent from gaussian samples") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double a = 0.04, b = 5e-4;
  std::vector<std::pair<double, double>> samples;
  for (int bin = 0; bin < 10; ++bin) {
    const double n_px = 200.0 + 400.0 * bin;
    const double s = sigma(n_px, a, b);
    for (int i = 0; i < 10000; ++i) {
      samples.emplace_back(n_px, std::abs(s * gauss(rng)));
    }
  }
  const SigmaFit fit = fit_sigma_model(samples, 10);
  CHECK(fit.a == doctest::Approx(a).epsilon(0.10));
  CHECK(fit.b == doctest::Approx(b).epsilon(0.20));
}

TEST_CASE("fit input validation") {
  std::vector<std::pair<double, double>> one{{100.0, 0.01}};
  CHECK_THROWS_AS(fit_sigma_model(one, 10), std::invalid_argument);
  std::vector<std::pair<double, double>> negative{{100.0, 0.01}, {200.0, -0.01}};
  CHECK_THROWS_AS(fit_sigma_model(negative, 10), std::invalid_argument);
}
