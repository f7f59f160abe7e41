#pragma once

// Residual families of the smoothing objective and the measurement
// covariance model, plus the fit that calibrates it from error logs.
//
// All residuals live in the tangent space of the *estimated* variable
// (right-multiplicative convention), so every covariance here is
// expressed in that frame as well.

#include <span>
#include <utility>

#include "fgtrack/lie.hpp"

namespace fgtrack {

// Noise of the forward-kinematics camera pose measurement.
struct CameraNoise {
  double sigma_ct = 0.002;                     // m
  double sigma_cr = 0.2 * M_PI / 180.0;        // rad

  Cov6 covariance() const;
};

// sigma(n_px) = a * exp(-b * n_px)
double sigma(double n_px, double a, double b);

// Visibility-dependent measurement covariance model. The translation
// standard deviations live in a camera-centered frame whose z-axis points
// along the camera->object ray, capturing the weak depth observability of
// monocular estimates; the rotation block is isotropic in the object frame.
struct CovModelParams {
  struct ExpModel {
    double a = 0.0;  // std at n_px = 0 (m or rad)
    double b = 0.0;  // decay per pixel
  };
  ExpModel xy{0.02, 3e-4};
  ExpModel z{0.08, 3e-4};
  ExpModel rot{0.15, 3e-4};

  // Ablation switches: isotropic translation (sigma_z := sigma_xy),
  // constant vs. pixel-count-dependent sigmas, and whether the translation
  // block is built in the ray-aligned frame or left in the camera frame.
  bool decoupled = true;
  bool visibility_dependent = true;
  bool ray_aligned = true;
};

// 6x6 covariance of one object pose measurement, in the tangent frame of
// the object variable. `camera` is accepted for interface symmetry with the
// residual; the result depends only on the camera-frame measurement.
Cov6 measurement_covariance(const Pose& camera, const Pose& cam_object_meas,
                            double n_px, const CovModelParams& params);

// Process noise of the two motion models. The constant-pose sigmas are
// per-sqrt-second pose diffusion rates; the constant-velocity sigmas are
// per-sqrt-second twist diffusion rates.
struct MotionNoise {
  double sigma_mt = 0.05;  // m / sqrt(s)
  double sigma_mr = 0.30;  // rad / sqrt(s)
  double sigma_vt = 0.50;  // (m/s) / sqrt(s)
  double sigma_vr = 1.00;  // (rad/s) / sqrt(s)
};

Tangent6 camera_residual(const Pose& estimate, const Pose& measured);
Tangent6 object_residual(const Pose& object, const Pose& camera,
                         const Pose& cam_object_meas);

Tangent6 constant_pose_residual(const Pose& prev, const Pose& cur);
Cov6 constant_pose_cov(const MotionNoise& noise, double dt);

// Twist-difference (smoothness) and exp-integration residuals of the
// constant-velocity model. Twists are body twists at the later state.
std::pair<Tangent6, Tangent6> constant_velocity_residuals(
    const Pose& prev, const Pose& cur, const Tangent6& twist_prev,
    const Tangent6& twist_cur, double dt);
Cov6 twist_smoothness_cov(const MotionNoise& noise, double dt);
Cov6 twist_integration_cov(double dt);

// Least-squares fit of log sigma = log a - b * n_px against per-bin RMS
// errors. `bin_resolved` is false when the samples span a single bin, in
// which case b = 0 and a is the pooled RMS.
struct SigmaFit {
  double a = 0.0;
  double b = 0.0;
  bool bin_resolved = true;
};

SigmaFit fit_sigma_model(std::span<const std::pair<double, double>> samples,
                         int bins = 10);

}  // namespace fgtrack
