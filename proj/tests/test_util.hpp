#pragma once

// Shared helpers for the test suites: seeded random group elements and a
// scaling-and-squaring matrix exponential used as the independent oracle
// for exp_se3.

#include <random>

#include <Eigen/Dense>

#include "fgtrack/lie.hpp"

namespace fgtrack::testutil {

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec3 v(gauss(rng), gauss(rng), gauss(rng));
  while (v.norm() < 1e-9) v = Vec3(gauss(rng), gauss(rng), gauss(rng));
  return v.normalized();
}

inline Tangent6 random_tangent(std::mt19937_64& rng, double max_angle = 3.0,
                               double max_shift = 1.0) {
  std::uniform_real_distribution<double> angle(0.0, max_angle);
  std::uniform_real_distribution<double> shift(0.0, max_shift);
  return tangent(shift(rng) * random_unit(rng), angle(rng) * random_unit(rng));
}

inline Pose random_pose(std::mt19937_64& rng, double max_angle = 3.0,
                        double max_shift = 1.0) {
  return exp_se3(random_tangent(rng, max_angle, max_shift));
}

// 4x4 twist matrix of a tangent vector.
inline Eigen::Matrix4d twist_matrix(const Tangent6& x) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = hat(theta(x));
  m.topRightCorner<3, 1>() = rho(x);
  return m;
}

// Matrix exponential by scaling and squaring with a long Taylor series;
// independent of the closed-form exp_se3.
inline Eigen::Matrix4d matrix_exp(const Eigen::Matrix4d& a) {
  int squarings = 0;
  Eigen::Matrix4d scaled = a;
  while (scaled.cwiseAbs().maxCoeff() > 0.25) {
    scaled *= 0.5;
    ++squarings;
  }
  Eigen::Matrix4d result = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d term = Eigen::Matrix4d::Identity();
  for (int k = 1; k <= 24; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

}  // namespace fgtrack::testutil
