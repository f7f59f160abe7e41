#pragma once

// Synthetic scenario generator: ground-truth trajectories built from
// piecewise constant-twist segments plus a detection corruption pipeline
// (noise drawn from the measurement covariance model, dropouts, occlusion
// windows and outliers).

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fgtrack/eval.hpp"
#include "fgtrack/factors.hpp"
#include "fgtrack/tracker.hpp"

namespace fgtrack {

struct TwistSegment {
  double start = 0.0;
  double duration = 0.0;
  Tangent6 twist = Tangent6::Zero();  // body twist, constant on the segment
};

// Continuous trajectory: initial pose composed with the exponentials of the
// segment twists. Continuity at segment boundaries holds by construction.
struct Trajectory {
  Pose initial;
  std::vector<TwistSegment> segments;

  static Trajectory fixed(const Pose& pose) { return Trajectory{pose, {}}; }

  Pose pose_at(double t) const;
  // Body twist active at time t (zero outside all segments).
  Tangent6 twist_at(double t) const;
};

struct ObjectSpec {
  std::string label;
  double radius = 0.05;  // bounding sphere, m
  Trajectory trajectory;
  std::vector<Pose> symmetries;  // discrete symmetry set, includes identity
};

// All detections whose camera-frame ray lies within half_angle of the
// optical axis are suppressed (and marked invisible) during the window.
struct OcclusionWindow {
  double start = 0.0;
  double duration = 0.0;
  double half_angle = M_PI;  // default: full-frame occlusion
};

enum class OutlierMode { kUniform, kSymmetryFlip };

struct CorruptionConfig {
  double dropout_prob = 0.2;
  double outlier_prob = 0.1;
  OutlierMode outlier_mode = OutlierMode::kSymmetryFlip;
  double noise_scale = 1.0;  // 0 disables measurement noise
  CovModelParams noise;      // generative covariance model
  double n_px_scale = 4e5;   // n_px = n_px_scale * (radius / distance)^2
  double fov_half_angle = 0.6;  // rad, visibility cone around the optical axis
  Vec3 workspace_center = Vec3::Zero();
  double workspace_half_extent = 0.6;  // m, uniform-outlier sampling box
  std::vector<OcclusionWindow> occlusions;
};

struct Scenario {
  double duration = 10.0;
  double frame_rate = 30.0;
  std::vector<ObjectSpec> objects;
  Trajectory camera;
  CorruptionConfig corruption;
  std::uint64_t seed = 0;
};

struct TruthObject {
  std::string label;
  Pose pose;  // reference frame
  bool visible = true;   // inside the view cone and not occluded
  bool detected = true;  // a detection was emitted for this object
  bool outlier = false;  // the emitted detection was an outlier
};

struct TruthFrame {
  double timestamp = 0.0;
  Pose camera;
  std::vector<TruthObject> objects;
};

// One calibration record per noisy inlier detection: signed translation
// error components in the ray-aligned frame plus rotation log components.
struct ErrorRecord {
  double n_px = 0.0;
  double ex = 0.0, ey = 0.0, ez = 0.0;
  double rx = 0.0, ry = 0.0, rz = 0.0;
};

struct GeneratedStreams {
  std::vector<TruthFrame> truth;
  std::vector<Frame> frames;
  std::vector<ErrorRecord> errors;
};

GeneratedStreams generate(const Scenario& scenario);

// Desk scene with static objects and an orbiting camera.
Scenario make_static_scene(int n_objects, std::uint64_t seed);
// Objects on bounded random piecewise twists, moving camera, one occlusion
// window mid-sequence.
Scenario make_dynamic_scene(int n_objects, std::uint64_t seed);

// Surface point sets and symmetry sets for the scenario's objects, for the
// pose-error metrics.
std::vector<ObjectModel> models_for_scenario(const Scenario& scenario);

}  // namespace fgtrack
