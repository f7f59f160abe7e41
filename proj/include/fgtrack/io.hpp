#pragma once

// JSON/JSONL (de)serialization for every file format: frame and truth
// streams, prediction output, configs, scenarios, object models, error
// records and metric reports.

#include <iosfwd>
#include <string>
#include <vector>

#include "fgtrack/eval.hpp"
#include "fgtrack/graph.hpp"
#include "fgtrack/json_util.hpp"
#include "fgtrack/sim.hpp"
#include "fgtrack/tracker.hpp"

namespace fgtrack::io {

json frame_to_json(const Frame& frame);
Frame frame_from_json(const json& j);

json truth_frame_to_json(const TruthFrame& frame);
TruthFrame truth_frame_from_json(const json& j);

json prediction_batch_to_json(double timestamp,
                              const std::vector<Prediction>& predictions,
                              const SolveReport& report);
struct PredictionBatch {
  double timestamp = 0.0;
  std::vector<Prediction> predictions;
};
PredictionBatch prediction_batch_from_json(const json& j);

json error_record_to_json(const ErrorRecord& rec);
ErrorRecord error_record_from_json(const json& j);

json models_to_json(const std::vector<ObjectModel>& models);
std::vector<ObjectModel> models_from_json(const json& j);

json cov_model_to_json(const CovModelParams& params);
CovModelParams cov_model_from_json(const json& j);

json tracker_config_to_json(const TrackerConfig& config);
TrackerConfig tracker_config_from_json(const json& j);

json scenario_to_json(const Scenario& scenario);
// Accepts either a full scenario description or a generator shorthand
// ({"generator": "static"|"dynamic", "n_objects": N, "seed": S}).
Scenario scenario_from_json(const json& j);

json metric_report_to_json(const MetricReport& report);
std::string metric_curve_to_csv(const MetricReport& report);

// Named gate/motion-noise presets; see TrackerConfig docs in the README.
TrackerConfig apply_preset(TrackerConfig config, const std::string& preset);

std::vector<json> read_jsonl(const std::string& path);
void write_lines(const std::string& path, const std::vector<json>& lines);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace fgtrack::io
