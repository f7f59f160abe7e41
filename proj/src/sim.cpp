#include "fgtrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace fgtrack {

Pose Trajectory::pose_at(double t) const {
  Pose pose = initial;
  for (const TwistSegment& seg : segments) {
    if (t <= seg.start) break;
    const double dt = std::min(t - seg.start, seg.duration);
    pose = pose * exp_se3(dt * seg.twist);
  }
  return pose;
}

Tangent6 Trajectory::twist_at(double t) const {
  for (const TwistSegment& seg : segments) {
    if (t >= seg.start && t < seg.start + seg.duration) return seg.twist;
  }
  return Tangent6::Zero();
}

namespace {

double npx_for(double radius, double distance, double scale) {
  const double raw = scale * (radius / distance) * (radius / distance);
  return std::max(1.0, std::round(raw));
}

bool occluded_at(const CorruptionConfig& cfg, double t, double ray_angle) {
  for (const OcclusionWindow& w : cfg.occlusions) {
    if (t >= w.start && t < w.start + w.duration && ray_angle <= w.half_angle) {
      return true;
    }
  }
  return false;
}

Pose uniform_outlier_pose(std::mt19937_64& rng, const CorruptionConfig& cfg) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Vec3 t = cfg.workspace_center +
                 cfg.workspace_half_extent * Vec3(unit(rng), unit(rng), unit(rng));
  // Uniform random rotation via a normalized Gaussian quaternion.
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  return Pose(Rotation(q), t);
}

}  // namespace

GeneratedStreams generate(const Scenario& scenario) {
  if (scenario.frame_rate <= 0.0) {
    throw std::invalid_argument("scenario: frame_rate must be positive");
  }
  GeneratedStreams out;
  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const int frame_count =
      static_cast<int>(std::floor(scenario.duration * scenario.frame_rate));
  out.truth.reserve(frame_count);
  out.frames.reserve(frame_count);

  for (int k = 0; k < frame_count; ++k) {
    const double t = static_cast<double>(k) / scenario.frame_rate;
    const Pose camera = scenario.camera.pose_at(t);
    const Pose camera_inv = camera.inverse();

    TruthFrame truth;
    truth.timestamp = t;
    truth.camera = camera;
    Frame frame;
    frame.timestamp = t;
    frame.camera = camera;

    for (const ObjectSpec& object : scenario.objects) {
      const Pose object_pose = object.trajectory.pose_at(t);
      TruthObject record;
      record.label = object.label;
      record.pose = object_pose;

      const Pose cam_object = camera_inv * object_pose;
      const double distance = cam_object.translation.norm();
      if (distance < 1e-6) {
        throw std::runtime_error("generate: object passes through camera origin");
      }
      const double ray_angle =
          std::acos(std::clamp(cam_object.translation.z() / distance, -1.0, 1.0));

      const bool in_view = cam_object.translation.z() > 0.0 &&
                           ray_angle <= scenario.corruption.fov_half_angle;
      const bool occ = occluded_at(scenario.corruption, t, ray_angle);
      record.visible = in_view && !occ;

      if (!record.visible) {
        record.detected = false;
        truth.objects.push_back(std::move(record));
        continue;
      }

      if (uniform(rng) < scenario.corruption.dropout_prob) {
        record.detected = false;
        truth.objects.push_back(std::move(record));
        continue;
      }

      const double n_px =
          npx_for(object.radius, distance, scenario.corruption.n_px_scale);
      Detection detection;
      detection.label = object.label;
      detection.n_px = n_px;
      detection.timestamp = t;

      if (uniform(rng) < scenario.corruption.outlier_prob) {
        record.outlier = true;
        if (scenario.corruption.outlier_mode == OutlierMode::kSymmetryFlip &&
            object.symmetries.size() > 1) {
          std::uniform_int_distribution<std::size_t> pick(
              1, object.symmetries.size() - 1);
          detection.pose_in_camera = cam_object * object.symmetries[pick(rng)];
        } else {
          detection.pose_in_camera =
              camera_inv * uniform_outlier_pose(rng, scenario.corruption);
        }
        detection.n_px = npx_for(object.radius,
                                 detection.pose_in_camera.translation.norm(),
                                 scenario.corruption.n_px_scale);
      } else {
        const Cov6 cov = measurement_covariance(
            camera, cam_object, n_px, scenario.corruption.noise);
        Tangent6 eps = Tangent6::Zero();
        if (scenario.corruption.noise_scale > 0.0) {
          Tangent6 z;
          for (int i = 0; i < 6; ++i) z(i) = gauss(rng);
          const Eigen::LLT<Cov6> llt(cov);
          const Tangent6 correlated = llt.matrixL() * z;
          eps = scenario.corruption.noise_scale * correlated;
        }
        detection.pose_in_camera = cam_object * exp_se3(eps);

        if (scenario.corruption.noise_scale > 0.0) {
          // Calibration record: translation error in the ray-aligned frame,
          // rotation error as body log components.
          const Mat3 cprime = Eigen::Quaterniond::FromTwoVectors(
                                  Vec3::UnitZ(), cam_object.translation)
                                  .toRotationMatrix();
          const Vec3 dt_cam = detection.pose_in_camera.translation -
                              cam_object.translation;
          const Vec3 e = cprime.transpose() * dt_cam;
          const Vec3 rlog = log_so3(cam_object.rotation.inverse() *
                                    detection.pose_in_camera.rotation);
          out.errors.push_back(
              {n_px, e.x(), e.y(), e.z(), rlog.x(), rlog.y(), rlog.z()});
        }
      }

      record.detected = true;
      frame.detections.push_back(std::move(detection));
      truth.objects.push_back(std::move(record));
    }

    out.truth.push_back(std::move(truth));
    out.frames.push_back(std::move(frame));
  }
  return out;
}

namespace {

// Camera pose looking at `target` from `eye`, z-axis forward, with the
// world -z (downward) direction mapped near the image +y axis.
Pose look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 down = -Vec3::UnitZ() - (-Vec3::UnitZ()).dot(forward) * forward;
  if (down.norm() < 1e-9) down = Vec3::UnitX();
  down.normalize();
  const Vec3 right = down.cross(forward);
  Mat3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  return Pose(Rotation(r), eye);
}

// Circular orbit about the world z-axis through `eye`, expressed as a
// single constant body twist so the motion is exactly piecewise-twist.
Trajectory orbit_camera(const Vec3& eye, const Vec3& target, double rate,
                        double duration) {
  Trajectory traj;
  traj.initial = look_at(eye, target);
  Tangent6 spatial = Tangent6::Zero();
  spatial.tail<3>() = rate * Vec3::UnitZ();
  // spatial velocity of a pure rotation about the origin: v = w x 0 ... the
  // twist of T(t) = Rot_z(rate t) * T0 in body coordinates:
  spatial.head<3>() = Vec3::Zero();
  const Tangent6 body = adjoint(traj.initial.inverse()) * spatial;
  traj.segments.push_back({0.0, duration, body});
  return traj;
}

std::string object_label(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "obj_%02d", index);
  return buf;
}

std::vector<Pose> box_symmetries() {
  // 180-degree flip about the object z-axis.
  return {Pose::identity(),
          Pose(Rotation::from_axis_angle(Vec3::UnitZ(), M_PI), Vec3::Zero())};
}

std::vector<Vec3> scatter_positions(int n, double min_separation,
                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> span(-0.28, 0.28);
  // Keep the packing fraction sane for large n, relax further if rejection
  // sampling stalls.
  double sep = std::min(min_separation, 0.45 / std::sqrt(static_cast<double>(n)));
  std::vector<Vec3> positions;
  int attempts = 0;
  while (static_cast<int>(positions.size()) < n) {
    const Vec3 p(span(rng), span(rng), 0.0);
    const bool clash = std::any_of(
        positions.begin(), positions.end(),
        [&](const Vec3& q) { return (p - q).norm() < sep; });
    if (!clash) {
      positions.push_back(p);
      attempts = 0;
    } else if (++attempts > 2000) {
      sep *= 0.8;
      attempts = 0;
    }
  }
  return positions;
}

}  // namespace

Scenario make_static_scene(int n_objects, std::uint64_t seed) {
  if (n_objects < 1 || n_objects > 20) {
    throw std::invalid_argument("make_static_scene: n_objects must be in [1, 20]");
  }
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 1);
  std::uniform_real_distribution<double> radius_dist(0.035, 0.06);
  std::uniform_real_distribution<double> yaw_dist(-M_PI, M_PI);

  Scenario scenario;
  scenario.duration = 10.0;
  scenario.frame_rate = 30.0;
  scenario.seed = seed;

  const auto positions = scatter_positions(n_objects, 0.16, rng);
  for (int i = 0; i < n_objects; ++i) {
    ObjectSpec object;
    object.label = object_label(i);
    object.radius = radius_dist(rng);
    const Pose rest(Rotation::from_axis_angle(Vec3::UnitZ(), yaw_dist(rng)),
                    positions[i] + Vec3(0, 0, object.radius));
    object.trajectory = Trajectory::fixed(rest);
    object.symmetries = box_symmetries();
    scenario.objects.push_back(std::move(object));
  }

  scenario.camera = orbit_camera(Vec3(0.75, 0.0, 0.55), Vec3(0, 0, 0.05), 0.12,
                                 scenario.duration);
  return scenario;
}

Scenario make_dynamic_scene(int n_objects, std::uint64_t seed) {
  if (n_objects < 1 || n_objects > 20) {
    throw std::invalid_argument("make_dynamic_scene: n_objects must be in [1, 20]");
  }
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 2);
  std::uniform_real_distribution<double> radius_dist(0.035, 0.06);
  std::uniform_real_distribution<double> yaw_dist(-M_PI, M_PI);
  std::uniform_real_distribution<double> seg_dist(1.0, 2.5);
  std::uniform_real_distribution<double> speed_dist(0.05, 0.27);
  std::uniform_real_distribution<double> spin_dist(0.1, 0.9);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Scenario scenario;
  scenario.duration = 10.0;
  scenario.frame_rate = 30.0;
  scenario.seed = seed;

  const Vec3 scene_center(0.0, 0.0, 0.10);
  const auto positions = scatter_positions(n_objects, 0.16, rng);
  for (int i = 0; i < n_objects; ++i) {
    ObjectSpec object;
    object.label = object_label(i);
    object.radius = radius_dist(rng);
    object.symmetries = box_symmetries();
    object.trajectory.initial =
        Pose(Rotation::from_axis_angle(Vec3::UnitZ(), yaw_dist(rng)),
             positions[i] + Vec3(0, 0, 0.10));
    Pose cursor = object.trajectory.initial;
    double t = 0.0;
    while (t < scenario.duration) {
      const double dur = std::min(seg_dist(rng), scenario.duration - t);
      Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
      // Bias wandering objects back toward the scene center so they stay in
      // the camera's view cone.
      const Vec3 offset = cursor.translation - scene_center;
      if (offset.norm() > 0.20) dir = -offset + 0.1 * dir;
      if (dir.norm() < 1e-9) dir = Vec3::UnitX();
      const Vec3 v_world = dir.normalized() * speed_dist(rng);
      Vec3 w(gauss(rng), gauss(rng), gauss(rng));
      w = w.norm() > 1e-9 ? Vec3(w.normalized() * spin_dist(rng)) : Vec3::Zero();
      const Tangent6 twist =
          tangent(cursor.rotation.inverse() * v_world, w);
      object.trajectory.segments.push_back({t, dur, twist});
      cursor = cursor * exp_se3(dur * twist);
      t += dur;
    }
    scenario.objects.push_back(std::move(object));
  }

  scenario.camera = orbit_camera(Vec3(0.85, 0.0, 0.6), Vec3(0, 0, 0.08), 0.08,
                                 scenario.duration);
  scenario.corruption.occlusions.push_back(
      {0.4 * scenario.duration, 0.8, 0.30});
  return scenario;
}

std::vector<ObjectModel> models_for_scenario(const Scenario& scenario) {
  std::vector<ObjectModel> models;
  models.reserve(scenario.objects.size());
  for (const ObjectSpec& object : scenario.objects) {
    ObjectModel model;
    model.label = object.label;
    model.symmetries = object.symmetries;
    model.diameter = 2.0 * object.radius;
    // Fibonacci sphere on the bounding surface.
    constexpr int kPoints = 64;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < kPoints; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / kPoints;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * i;
      model.points.push_back(object.radius *
                             Vec3(r * std::cos(phi), r * std::sin(phi), z));
    }
    models.push_back(std::move(model));
  }
  return models;
}

}  // namespace fgtrack
