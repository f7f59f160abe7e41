#pragma once

// Pose-error metrics (maximum symmetry-aware surface / projection distance)
// and precision/recall scoring of prediction streams against ground truth.

#include <map>
#include <string>
#include <vector>

#include "fgtrack/lie.hpp"

namespace fgtrack {

struct ObjectModel {
  std::string label;
  std::vector<Vec3> points;     // sampled on the object surface, m
  std::vector<Pose> symmetries; // discrete symmetries, includes identity
  double diameter = 0.0;        // m
};

struct Intrinsics {
  double fx = 525.0;
  double fy = 525.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
};

// min over symmetries S of max over points p of |E p - T S p|, in meters.
double mssd(const Pose& estimate, const Pose& truth, const ObjectModel& model);

// Same, but measured in pixels after pinhole projection. Both poses must be
// expressed in the camera frame; throws if a model point falls behind the
// camera.
double mspd(const Pose& estimate, const Pose& truth, const ObjectModel& model,
            const Intrinsics& intrinsics);

// One scored object pose per frame; visibility comes from the simulator.
struct EvalTruthObject {
  std::string label;
  Pose pose;  // reference frame
  bool visible = true;
};

struct EvalFrame {
  double timestamp = 0.0;
  Pose camera;  // ground-truth camera pose, reference frame
  std::vector<EvalTruthObject> objects;
};

struct EvalPrediction {
  std::string label;
  Pose pose;  // reference frame
};

struct EvalPredictionFrame {
  double timestamp = 0.0;
  std::vector<EvalPrediction> predictions;
};

struct MetricGrid {
  // MSSD thresholds as fractions of the object diameter.
  std::vector<double> mssd_fractions = {0.05, 0.10, 0.15, 0.20, 0.25,
                                        0.30, 0.35, 0.40, 0.45, 0.50};
  std::vector<double> mspd_pixels = {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
  Intrinsics intrinsics;
};

struct ThresholdScore {
  std::string metric;  // "mssd" or "mspd"
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct MetricReport {
  double average_recall = 0.0;     // over both metrics and all thresholds
  double average_precision = 0.0;
  double mssd_recall = 0.0;
  double mssd_precision = 0.0;
  double mspd_recall = 0.0;
  double mspd_precision = 0.0;
  std::vector<ThresholdScore> curve;
  std::size_t frames = 0;
};

// Matches predictions to visible ground truth per frame (same label,
// minimal MSSD, one-to-one) and scores them across the threshold grids.
// Frames with no emitted predictions score precision 1 by convention;
// frames with no visible objects do not contribute to recall.
MetricReport precision_recall(const std::vector<EvalPredictionFrame>& predictions,
                              const std::vector<EvalFrame>& truth,
                              const std::vector<ObjectModel>& models,
                              const MetricGrid& grid = {});

}  // namespace fgtrack
