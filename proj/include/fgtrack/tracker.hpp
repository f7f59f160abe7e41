#pragma once

// Online fixed-lag smoother over a stream of frames: per-frame data
// association with outlier gating, track maintenance (including discrete
// symmetry branches as separate tracks) and confidence-gated predictions.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fgtrack/factors.hpp"
#include "fgtrack/graph.hpp"

namespace fgtrack {

// One object pose measurement in the camera frame.
struct Detection {
  std::string label;
  Pose pose_in_camera;
  double n_px = 1.0;
  double timestamp = 0.0;
};

struct Frame {
  double timestamp = 0.0;
  Pose camera;  // measured by forward kinematics
  std::vector<Detection> detections;
};

enum class MotionModel { kConstPose, kConstVel };

struct GateConfig {
  double tau_outlier_t = 0.1;                 // m
  double tau_outlier_r = 10.0 * M_PI / 180.0;  // rad
  double tau_pred_t = 1e-3;                   // m^3, ellipsoid volume
  double tau_pred_r = 5e-2;                   // rad^3
  double horizon = 1.0;                       // s
};

struct TrackerConfig {
  MotionModel motion = MotionModel::kConstPose;
  WindowMode window_mode = WindowMode::kMarginalPrior;
  GateConfig gates;
  CameraNoise camera_noise;
  CovModelParams cov_model;
  MotionNoise motion_noise;
  std::map<std::string, double> object_radius;  // bounding sphere, per label
  double default_radius = 0.05;
  double retire_after = 2.0;  // multiples of the horizon without a detection
  SolveConfig solve;

  double radius_for(const std::string& label) const {
    auto it = object_radius.find(label);
    return it == object_radius.end() ? default_radius : it->second;
  }
};

struct Prediction {
  std::int64_t track_id = 0;
  std::string label;
  Pose pose;  // reference frame
  double volume_t = 0.0;  // translation covariance ellipsoid volume, m^3
  double volume_r = 0.0;  // rotation covariance ellipsoid volume, rad^3
  double timestamp = 0.0;
};

// Immutable per-track state exported after each solve; predictions are a
// pure function of this, so readers can extrapolate at any rate without
// touching the graph.
struct TrackSnapshot {
  std::int64_t id = 0;
  std::string label;
  double radius = 0.0;
  MotionModel motion = MotionModel::kConstPose;
  Pose pose;
  Tangent6 twist = Tangent6::Zero();
  Cov6 marginal = Cov6::Zero();
  double state_time = 0.0;
  double last_detection_time = 0.0;
  bool constrained = false;
};

struct Snapshot {
  double solve_time = 0.0;
  bool any_solve = false;
  std::vector<TrackSnapshot> tracks;
  GateConfig gates;
  MotionNoise motion_noise;
};

// Track covariance after coasting dt seconds beyond its last solved state.
Cov6 extrapolate_covariance(const TrackSnapshot& track,
                            const MotionNoise& noise, double dt);

Pose extrapolate_pose(const TrackSnapshot& track, double dt);

std::vector<Prediction> predict_from(const Snapshot& snapshot, double now);

// Result of associating one detection: an existing track or a new one.
struct Association {
  bool matched = false;
  std::int64_t track_id = 0;  // valid when matched
  double score = 0.0;         // Mahalanobis distance of the winning candidate
};

class Tracker {
 public:
  explicit Tracker(TrackerConfig config) : config_(std::move(config)) {}

  // Absorbs one frame: camera factor, association, motion extension,
  // windowing and one solve.
  SolveReport ingest(const Frame& frame);

  // Gated predictions extrapolated to `now` from the last solve snapshot.
  std::vector<Prediction> predict(double now) const {
    return predict_from(snapshot_, now);
  }

  Association associate(const Detection& detection,
                        const Pose& camera_estimate) const;

  const Snapshot& snapshot() const { return snapshot_; }
  const TrackerConfig& config() const { return config_; }
  const Graph& graph() const { return graph_; }
  std::size_t num_tracks() const { return tracks_.size(); }
  std::vector<std::int64_t> track_ids() const;
  std::size_t frames_ingested() const { return frames_ingested_; }

 private:
  struct StampedState {
    double timestamp = 0.0;
    VariableId pose_var;
    std::optional<VariableId> twist_var;
  };

  struct TrackState {
    std::int64_t id = 0;
    std::string label;
    double radius = 0.0;
    MotionModel motion = MotionModel::kConstPose;
    double last_detection_time = 0.0;
    bool retired = false;
    std::deque<StampedState> states;
  };

  Association associate_internal(const Detection& detection,
                                 const Pose& camera_estimate,
                                 const std::vector<std::int64_t>& excluded) const;
  const TrackSnapshot* snapshot_track(std::int64_t id) const;
  void rebuild_snapshot(double now);
  void prune_window_artifacts();

  TrackerConfig config_;
  Graph graph_;
  std::map<std::int64_t, TrackState> tracks_;
  Snapshot snapshot_;
  std::int64_t next_track_ = 1;
  double last_frame_time_ = -std::numeric_limits<double>::infinity();
  std::size_t frames_ingested_ = 0;
};

}  // namespace fgtrack
