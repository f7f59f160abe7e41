#include "fgtrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace fgtrack {

namespace {

double ellipsoid_volume(const Mat3& cov) {
  const double det = cov.determinant();
  return det > 0.0 ? (4.0 / 3.0) * M_PI * std::sqrt(det) : 0.0;
}

}  // namespace

Cov6 extrapolate_covariance(const TrackSnapshot& track,
                            const MotionNoise& noise, double dt) {
  if (dt < 0.0) throw std::invalid_argument("extrapolate_covariance: dt < 0");
  if (dt == 0.0) return track.marginal;
  return track.marginal + constant_pose_cov(noise, dt);
}

Pose extrapolate_pose(const TrackSnapshot& track, double dt) {
  if (track.motion == MotionModel::kConstVel && dt > 0.0) {
    return track.pose * exp_se3(dt * track.twist);
  }
  return track.pose;
}

std::vector<Prediction> predict_from(const Snapshot& snapshot, double now) {
  std::vector<Prediction> out;
  if (!snapshot.any_solve) return out;

  struct Candidate {
    Prediction pred;
    double radius;
  };
  std::vector<Candidate> passing;
  for (const TrackSnapshot& track : snapshot.tracks) {
    if (!track.constrained) continue;
    const double dt = std::max(0.0, now - track.state_time);
    const Cov6 cov = extrapolate_covariance(track, snapshot.motion_noise, dt);
    const double vol_t = ellipsoid_volume(cov.topLeftCorner<3, 3>());
    const double vol_r = ellipsoid_volume(cov.bottomRightCorner<3, 3>());
    if (vol_t >= snapshot.gates.tau_pred_t) continue;
    if (vol_r >= snapshot.gates.tau_pred_r) continue;
    Prediction p;
    p.track_id = track.id;
    p.label = track.label;
    p.pose = extrapolate_pose(track, dt);
    p.volume_t = vol_t;
    p.volume_r = vol_r;
    p.timestamp = now;
    passing.push_back({std::move(p), track.radius});
  }

  // Same-label candidates closer than the bounding sphere are hypotheses of
  // one physical object; keep only the most confident one.
  std::sort(passing.begin(), passing.end(), [](const auto& a, const auto& b) {
    return std::tie(a.pred.volume_t, a.pred.track_id) <
           std::tie(b.pred.volume_t, b.pred.track_id);
  });
  std::vector<Candidate> accepted;
  for (const auto& cand : passing) {
    const bool duplicate =
        std::any_of(accepted.begin(), accepted.end(), [&](const auto& acc) {
          return acc.pred.label == cand.pred.label &&
                 (acc.pred.pose.translation - cand.pred.pose.translation)
                         .norm() < cand.radius;
        });
    if (!duplicate) accepted.push_back(cand);
  }

  std::sort(accepted.begin(), accepted.end(), [](const auto& a, const auto& b) {
    return a.pred.track_id < b.pred.track_id;
  });
  out.reserve(accepted.size());
  for (auto& cand : accepted) out.push_back(std::move(cand.pred));
  return out;
}

const TrackSnapshot* Tracker::snapshot_track(std::int64_t id) const {
  for (const TrackSnapshot& t : snapshot_.tracks) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

Association Tracker::associate(const Detection& detection,
                               const Pose& camera_estimate) const {
  return associate_internal(detection, camera_estimate, {});
}

Association Tracker::associate_internal(
    const Detection& detection, const Pose& camera_estimate,
    const std::vector<std::int64_t>& excluded) const {
  Association result;
  const Pose detected_pose = camera_estimate * detection.pose_in_camera;
  const Cov6 meas_cov = measurement_covariance(
      camera_estimate, detection.pose_in_camera, detection.n_px,
      config_.cov_model);

  double best_score = std::numeric_limits<double>::infinity();
  const TrackSnapshot* best = nullptr;
  Pose best_pose;
  for (const TrackSnapshot& track : snapshot_.tracks) {
    if (track.label != detection.label || !track.constrained) continue;
    if (std::find(excluded.begin(), excluded.end(), track.id) != excluded.end()) {
      continue;
    }
    const double dt = std::max(0.0, detection.timestamp - track.state_time);
    const Pose predicted = extrapolate_pose(track, dt);
    const Cov6 cov =
        extrapolate_covariance(track, config_.motion_noise, dt) + meas_cov;
    const Tangent6 residual = log_se3(between(predicted, detected_pose));
    const double score = residual.dot(cov.ldlt().solve(residual));
    if (score < best_score) {
      best_score = score;
      best = &track;
      best_pose = predicted;
    }
  }

  if (best != nullptr) {
    const double dist_t = translation_distance(best_pose, detected_pose);
    const double dist_r =
        rotation_distance(best_pose.rotation, detected_pose.rotation);
    if (dist_t < config_.gates.tau_outlier_t &&
        dist_r < config_.gates.tau_outlier_r) {
      result.matched = true;
      result.track_id = best->id;
      result.score = best_score;
    }
  }
  return result;
}

SolveReport Tracker::ingest(const Frame& frame) {
  if (frame.timestamp < last_frame_time_) {
    throw std::invalid_argument("ingest: out-of-order frame");
  }
  const double now = frame.timestamp;

  // Camera pose chain: one variable per frame shared by all detections.
  const VariableId camera_var =
      graph_.add_pose_variable(frame.camera, now, kCameraOwner);
  graph_.add_factor(PosePriorFactor{camera_var, frame.camera},
                    config_.camera_noise.covariance());
  const Pose camera_estimate = frame.camera;

  // Extend every live track to this frame with its motion model.
  for (auto& [id, track] : tracks_) {
    if (track.retired || track.states.empty()) continue;
    if (now - track.last_detection_time >
        config_.retire_after * config_.gates.horizon) {
      track.retired = true;
      continue;
    }
    const StampedState& prev = track.states.back();
    const double dt = now - prev.timestamp;
    if (dt <= 0.0) continue;

    StampedState next;
    next.timestamp = now;
    if (track.motion == MotionModel::kConstVel) {
      const Tangent6 twist = graph_.vector_value(*prev.twist_var);
      const Pose seed = graph_.pose_value(prev.pose_var) * exp_se3(dt * twist);
      next.pose_var = graph_.add_pose_variable(seed, now, id);
      next.twist_var = graph_.add_vector_variable(twist, now, id);
      graph_.add_factor(TwistSmoothnessFactor{*prev.twist_var, *next.twist_var},
                        twist_smoothness_cov(config_.motion_noise, dt));
      graph_.add_factor(
          TwistIntegrationFactor{prev.pose_var, next.pose_var, *next.twist_var,
                                 dt},
          twist_integration_cov(dt));
    } else {
      next.pose_var =
          graph_.add_pose_variable(graph_.pose_value(prev.pose_var), now, id);
      graph_.add_factor(BetweenFactor{prev.pose_var, next.pose_var,
                                      Pose::identity()},
                        constant_pose_cov(config_.motion_noise, dt));
    }
    track.states.push_back(next);
  }

  // Associate detections greedily in stream order; each track absorbs at
  // most one detection per frame, everything else spawns a new track.
  std::vector<std::int64_t> matched_this_frame;
  for (const Detection& detection : frame.detections) {
    if (detection.n_px < 1.0) {
      throw std::invalid_argument("ingest: detection with n_px < 1");
    }
    const Cov6 meas_cov = measurement_covariance(
        camera_estimate, detection.pose_in_camera, detection.n_px,
        config_.cov_model);
    const Association assoc =
        associate_internal(detection, camera_estimate, matched_this_frame);

    if (assoc.matched) {
      TrackState& track = tracks_.at(assoc.track_id);
      // Extension above created this frame's state for live tracks.
      if (!track.states.empty() && track.states.back().timestamp == now) {
        graph_.add_factor(
            ObjectPoseFactor{track.states.back().pose_var, camera_var,
                             detection.pose_in_camera},
            meas_cov);
        track.last_detection_time = now;
        matched_this_frame.push_back(track.id);
        continue;
      }
    }

    TrackState track;
    track.id = next_track_++;
    track.label = detection.label;
    track.radius = config_.radius_for(detection.label);
    track.motion = config_.motion;
    track.last_detection_time = now;
    StampedState state;
    state.timestamp = now;
    state.pose_var = graph_.add_pose_variable(
        camera_estimate * detection.pose_in_camera, now, track.id);
    if (track.motion == MotionModel::kConstVel) {
      state.twist_var =
          graph_.add_vector_variable(Tangent6::Zero(), now, track.id);
      // A lone twist needs an anchor until the next frame links it; a weak
      // zero prior keeps the graph full rank without biasing the estimate.
      Cov6 weak = Cov6::Identity() * 1e2;
      graph_.add_factor(VectorPriorFactor{*state.twist_var, Tangent6::Zero()},
                        weak);
    }
    graph_.add_factor(
        ObjectPoseFactor{state.pose_var, camera_var, detection.pose_in_camera},
        meas_cov);
    track.states.push_back(state);
    const std::int64_t new_id = track.id;
    tracks_.emplace(new_id, std::move(track));
  }

  graph_.apply_window(config_.gates.horizon, now, config_.window_mode);
  prune_window_artifacts();

  SolveReport report = graph_.solve(config_.solve);
  last_frame_time_ = now;
  ++frames_ingested_;
  rebuild_snapshot(now);
  return report;
}

void Tracker::prune_window_artifacts() {
  for (auto& [id, track] : tracks_) {
    while (!track.states.empty() &&
           !graph_.has_variable(track.states.front().pose_var)) {
      track.states.pop_front();
    }
    if (track.states.empty()) {
      track.retired = true;
      continue;
    }
    // Plain-deletion windows keep no prior; a track with no detection left
    // inside the window would be an unanchored motion chain, so drop it.
    if (config_.window_mode == WindowMode::kDelete &&
        track.last_detection_time < track.states.front().timestamp) {
      for (const StampedState& s : track.states) {
        graph_.remove_variable(s.pose_var);
        if (s.twist_var) graph_.remove_variable(*s.twist_var);
      }
      track.states.clear();
      track.retired = true;
    }
  }
}

void Tracker::rebuild_snapshot(double now) {
  snapshot_.solve_time = now;
  snapshot_.any_solve = true;
  snapshot_.gates = config_.gates;
  snapshot_.motion_noise = config_.motion_noise;
  snapshot_.tracks.clear();
  for (const auto& [id, track] : tracks_) {
    if (track.retired || track.states.empty()) continue;
    const StampedState& latest = track.states.back();
    TrackSnapshot snap;
    snap.id = track.id;
    snap.label = track.label;
    snap.radius = track.radius;
    snap.motion = track.motion;
    snap.state_time = latest.timestamp;
    snap.last_detection_time = track.last_detection_time;
    snap.pose = graph_.pose_value(latest.pose_var);
    if (latest.twist_var) snap.twist = graph_.vector_value(*latest.twist_var);
    try {
      snap.marginal = graph_.marginal_covariance(latest.pose_var);
      snap.constrained = snap.marginal.allFinite();
    } catch (const std::exception&) {
      snap.constrained = false;
    }
    snapshot_.tracks.push_back(std::move(snap));
  }
}

std::vector<std::int64_t> Tracker::track_ids() const {
  std::vector<std::int64_t> out;
  out.reserve(tracks_.size());
  for (const auto& [id, t] : tracks_) out.push_back(id);
  return out;
}

}  // namespace fgtrack
