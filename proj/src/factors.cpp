#include "fgtrack/factors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fgtrack {

Cov6 CameraNoise::covariance() const {
  Cov6 cov = Cov6::Zero();
  cov.diagonal().head<3>().setConstant(sigma_ct * sigma_ct);
  cov.diagonal().tail<3>().setConstant(sigma_cr * sigma_cr);
  return cov;
}

double sigma(double n_px, double a, double b) {
  return a * std::exp(-b * n_px);
}

Cov6 measurement_covariance(const Pose& /*camera*/, const Pose& cam_object_meas,
                            double n_px, const CovModelParams& params) {
  const double sxy = params.visibility_dependent
                         ? sigma(n_px, params.xy.a, params.xy.b)
                         : params.xy.a;
  double sz = params.visibility_dependent ? sigma(n_px, params.z.a, params.z.b)
                                          : params.z.a;
  const double sr = params.visibility_dependent
                        ? sigma(n_px, params.rot.a, params.rot.b)
                        : params.rot.a;
  if (!params.decoupled) sz = sxy;

  const Vec3 ray = cam_object_meas.translation;
  if (ray.norm() < 1e-9) {
    throw std::invalid_argument(
        "measurement_covariance: object center coincides with camera origin");
  }

  // Rotation taking C'-frame vectors (z along the ray) into the object
  // frame of the measurement; the camera pose itself cancels out.
  Mat3 basis = Mat3::Identity();
  if (params.ray_aligned) {
    basis = Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), ray)
                .toRotationMatrix();
  }
  const Mat3 rot_obj_from_cprime =
      cam_object_meas.rotation.inverse().matrix() * basis;

  const Vec3 tvar(sxy * sxy, sxy * sxy, sz * sz);
  Cov6 cov = Cov6::Zero();
  cov.topLeftCorner<3, 3>() =
      rot_obj_from_cprime * tvar.asDiagonal() * rot_obj_from_cprime.transpose();
  cov.bottomRightCorner<3, 3>() = (sr * sr) * Mat3::Identity();
  return cov;
}

Tangent6 camera_residual(const Pose& estimate, const Pose& measured) {
  return log_se3(between(estimate, measured));
}

Tangent6 object_residual(const Pose& object, const Pose& camera,
                         const Pose& cam_object_meas) {
  return log_se3(object.inverse() * camera * cam_object_meas);
}

Tangent6 constant_pose_residual(const Pose& prev, const Pose& cur) {
  return log_se3(between(prev, cur));
}

Cov6 constant_pose_cov(const MotionNoise& noise, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("constant_pose_cov: dt must be > 0");
  Cov6 cov = Cov6::Zero();
  cov.diagonal().head<3>().setConstant(noise.sigma_mt * noise.sigma_mt * dt);
  cov.diagonal().tail<3>().setConstant(noise.sigma_mr * noise.sigma_mr * dt);
  return cov;
}

std::pair<Tangent6, Tangent6> constant_velocity_residuals(
    const Pose& prev, const Pose& cur, const Tangent6& twist_prev,
    const Tangent6& twist_cur, double dt) {
  if (dt <= 0.0) {
    throw std::invalid_argument("constant_velocity_residuals: dt must be > 0");
  }
  const Tangent6 smoothness = twist_cur - twist_prev;
  const Tangent6 integration =
      log_se3(between(cur, prev * exp_se3(dt * twist_cur)));
  return {smoothness, integration};
}

Cov6 twist_smoothness_cov(const MotionNoise& noise, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("twist_smoothness_cov: dt must be > 0");
  Cov6 cov = Cov6::Zero();
  cov.diagonal().head<3>().setConstant(noise.sigma_vt * noise.sigma_vt * dt);
  cov.diagonal().tail<3>().setConstant(noise.sigma_vr * noise.sigma_vr * dt);
  return cov;
}

Cov6 twist_integration_cov(double dt) {
  if (dt <= 0.0) throw std::invalid_argument("twist_integration_cov: dt must be > 0");
  return 1e-6 * dt * Cov6::Identity();
}

SigmaFit fit_sigma_model(std::span<const std::pair<double, double>> samples,
                         int bins) {
  if (samples.size() < 2) {
    throw std::invalid_argument("fit_sigma_model: need at least two samples");
  }
  if (bins < 1) throw std::invalid_argument("fit_sigma_model: bins must be >= 1");
  for (const auto& [n_px, err] : samples) {
    if (err < 0.0) throw std::invalid_argument("fit_sigma_model: negative error");
  }

  std::vector<std::pair<double, double>> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  const double pooled_rms = [&] {
    double s = 0.0;
    for (const auto& [n, e] : sorted) s += e * e;
    return std::sqrt(s / static_cast<double>(sorted.size()));
  }();

  // Equal-population bins over n_px; sigma-hat per bin is the RMS of the
  // (zero-mean) errors in the bin.
  const size_t n = sorted.size();
  const size_t nbins = std::min<size_t>(static_cast<size_t>(bins), n);
  std::vector<std::pair<double, double>> points;  // (mean n_px, rms)
  for (size_t b = 0; b < nbins; ++b) {
    const size_t lo = b * n / nbins;
    const size_t hi = (b + 1) * n / nbins;
    if (hi <= lo) continue;
    double npx_sum = 0.0, sq_sum = 0.0;
    for (size_t i = lo; i < hi; ++i) {
      npx_sum += sorted[i].first;
      sq_sum += sorted[i].second * sorted[i].second;
    }
    const double count = static_cast<double>(hi - lo);
    const double rms = std::sqrt(sq_sum / count);
    if (rms > 0.0) points.emplace_back(npx_sum / count, rms);
  }

  // The log-linear fit needs at least two bins at distinct n_px.
  const bool distinct =
      points.size() >= 2 &&
      std::any_of(points.begin(), points.end(), [&](const auto& p) {
        return std::abs(p.first - points.front().first) > 1e-12;
      });
  if (!distinct) {
    return SigmaFit{pooled_rms, 0.0, false};
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, rms] : points) {
    const double y = std::log(rms);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(points.size());
  const double denom = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  return SigmaFit{std::exp(intercept), -slope, true};
}

}  // namespace fgtrack
