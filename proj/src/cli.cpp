#include "fgtrack/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fgtrack/io.hpp"

namespace fgtrack::cli {

namespace {

int log_level() {
  const char* env = std::getenv("FGTRACK_LOG");
  if (env == nullptr) return 1;
  const std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[fgtrack] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[fgtrack] " << msg << "\n";
}

struct TrackOptions {
  std::string config_path;
  std::string frames_path;
  std::string out_path;
  std::string preset;
  std::string motion;
  std::string window_mode;
  double horizon = -1.0;
};

TrackerConfig load_tracker_config(const TrackOptions& opt) {
  TrackerConfig config;
  if (!opt.config_path.empty()) {
    config = io::tracker_config_from_json(json::parse(io::read_file(opt.config_path)));
  }
  if (!opt.preset.empty()) config = io::apply_preset(config, opt.preset);
  if (!opt.motion.empty()) {
    if (opt.motion == "const_pose") {
      config.motion = MotionModel::kConstPose;
    } else if (opt.motion == "const_vel") {
      config.motion = MotionModel::kConstVel;
    } else {
      throw std::invalid_argument("--motion: expected const_pose or const_vel");
    }
  }
  if (!opt.window_mode.empty()) {
    if (opt.window_mode == "prior") {
      config.window_mode = WindowMode::kMarginalPrior;
    } else if (opt.window_mode == "delete") {
      config.window_mode = WindowMode::kDelete;
    } else {
      throw std::invalid_argument("--window-mode: expected prior or delete");
    }
  }
  if (opt.horizon >= 0.0) config.gates.horizon = opt.horizon;
  return config;
}

std::vector<json> run_tracker(const TrackerConfig& config,
                              const std::vector<json>& frame_lines) {
  Tracker tracker(config);
  std::vector<json> out;
  out.reserve(frame_lines.size());
  std::size_t index = 0;
  for (const json& line : frame_lines) {
    const Frame frame = io::frame_from_json(line);
    const auto start = std::chrono::steady_clock::now();
    SolveReport report;
    try {
      report = tracker.ingest(frame);
    } catch (const std::exception& e) {
      throw std::runtime_error("frame " + std::to_string(index) + ": " + e.what());
    }
    const auto predictions = tracker.predict(frame.timestamp);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start)
            .count();
    // Wall time goes to the log only; files must be bit-reproducible.
    log_debug("frame " + std::to_string(index) + ": " +
              std::to_string(predictions.size()) + " predictions, " +
              std::to_string(report.iterations) + " iters, " +
              std::to_string(wall_ms) + " ms");
    out.push_back(io::prediction_batch_to_json(frame.timestamp, predictions, report));
    ++index;
  }
  return out;
}

std::vector<EvalFrame> eval_truth_from_lines(const std::vector<json>& lines) {
  std::vector<EvalFrame> out;
  out.reserve(lines.size());
  for (const json& line : lines) {
    const TruthFrame t = io::truth_frame_from_json(line);
    EvalFrame f;
    f.timestamp = t.timestamp;
    f.camera = t.camera;
    for (const TruthObject& o : t.objects) {
      f.objects.push_back({o.label, o.pose, o.visible});
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<EvalPredictionFrame> eval_predictions_from_lines(
    const std::vector<json>& lines) {
  std::vector<EvalPredictionFrame> out;
  out.reserve(lines.size());
  for (const json& line : lines) {
    const io::PredictionBatch batch = io::prediction_batch_from_json(line);
    EvalPredictionFrame f;
    f.timestamp = batch.timestamp;
    for (const Prediction& p : batch.predictions) {
      f.predictions.push_back({p.label, p.pose});
    }
    out.push_back(std::move(f));
  }
  return out;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_prefix,
                 const std::string& errors_path) {
  const Scenario scenario =
      io::scenario_from_json(json::parse(io::read_file(scenario_path)));
  const GeneratedStreams streams = generate(scenario);

  std::vector<json> frame_lines, truth_lines;
  frame_lines.reserve(streams.frames.size());
  truth_lines.reserve(streams.truth.size());
  for (const Frame& f : streams.frames) frame_lines.push_back(io::frame_to_json(f));
  for (const TruthFrame& t : streams.truth) {
    truth_lines.push_back(io::truth_frame_to_json(t));
  }
  io::write_lines(out_prefix + ".frames.jsonl", frame_lines);
  io::write_lines(out_prefix + ".truth.jsonl", truth_lines);
  io::write_file(out_prefix + ".models.json",
                 io::models_to_json(models_for_scenario(scenario)).dump(2) + "\n");
  if (!errors_path.empty()) {
    std::vector<json> error_lines;
    error_lines.reserve(streams.errors.size());
    for (const ErrorRecord& r : streams.errors) {
      error_lines.push_back(io::error_record_to_json(r));
    }
    io::write_lines(errors_path, error_lines);
  }
  log_info("simulate: " + std::to_string(streams.frames.size()) + " frames, " +
           std::to_string(scenario.objects.size()) + " objects -> " + out_prefix +
           ".{frames,truth}.jsonl");
  return 0;
}

int cmd_track(const TrackOptions& opt) {
  const TrackerConfig config = load_tracker_config(opt);
  const std::vector<json> frame_lines = io::read_jsonl(opt.frames_path);
  const std::vector<json> out = run_tracker(config, frame_lines);
  io::write_lines(opt.out_path, out);
  log_info("track: " + std::to_string(out.size()) + " frames -> " + opt.out_path);
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path,
             const std::string& models_path, const std::string& out_path,
             const std::string& csv_path) {
  const auto truth = eval_truth_from_lines(io::read_jsonl(truth_path));
  const auto predictions = eval_predictions_from_lines(io::read_jsonl(pred_path));
  const auto models =
      io::models_from_json(json::parse(io::read_file(models_path)));
  const MetricReport report = precision_recall(predictions, truth, models);
  io::write_file(out_path, io::metric_report_to_json(report).dump(2) + "\n");
  if (!csv_path.empty()) {
    io::write_file(csv_path, io::metric_curve_to_csv(report));
  }
  log_info("eval: recall " + std::to_string(report.average_recall) +
           ", precision " + std::to_string(report.average_precision));
  return 0;
}

int cmd_sweep(const std::string& scenario_path, const std::string& config_path,
              const std::string& grid_path, const std::string& out_path) {
  const Scenario scenario =
      io::scenario_from_json(json::parse(io::read_file(scenario_path)));
  TrackerConfig base;
  if (!config_path.empty()) {
    base = io::tracker_config_from_json(json::parse(io::read_file(config_path)));
  }
  const json grid = json::parse(io::read_file(grid_path));
  auto axis = [&](const char* name, double fallback) {
    std::vector<double> values;
    if (grid.contains(name)) {
      for (const json& v : grid.at(name)) values.push_back(v.get<double>());
    }
    if (values.empty()) values.push_back(fallback);
    return values;
  };
  const auto tau_t = axis("tau_pred_t", base.gates.tau_pred_t);
  const auto tau_r = axis("tau_pred_r", base.gates.tau_pred_r);
  const auto sigma_mt = axis("sigma_mt", base.motion_noise.sigma_mt);
  const auto sigma_mr = axis("sigma_mr", base.motion_noise.sigma_mr);

  const GeneratedStreams streams = generate(scenario);
  std::vector<json> frame_lines;
  frame_lines.reserve(streams.frames.size());
  for (const Frame& f : streams.frames) frame_lines.push_back(io::frame_to_json(f));
  std::vector<EvalFrame> truth;
  truth.reserve(streams.truth.size());
  for (const TruthFrame& t : streams.truth) {
    EvalFrame f;
    f.timestamp = t.timestamp;
    f.camera = t.camera;
    for (const TruthObject& o : t.objects) {
      f.objects.push_back({o.label, o.pose, o.visible});
    }
    truth.push_back(std::move(f));
  }
  const auto models = models_for_scenario(scenario);

  std::ostringstream csv;
  csv << "tau_pred_t,tau_pred_r,sigma_mt,sigma_mr,recall,precision\n";
  for (double tt : tau_t) {
    for (double tr : tau_r) {
      for (double mt : sigma_mt) {
        for (double mr : sigma_mr) {
          TrackerConfig config = base;
          config.gates.tau_pred_t = tt;
          config.gates.tau_pred_r = tr;
          config.motion_noise.sigma_mt = mt;
          config.motion_noise.sigma_mr = mr;
          const auto pred_lines = run_tracker(config, frame_lines);
          const auto predictions = eval_predictions_from_lines(pred_lines);
          const MetricReport report = precision_recall(predictions, truth, models);
          csv << tt << "," << tr << "," << mt << "," << mr << ","
              << report.average_recall << "," << report.average_precision << "\n";
          log_debug("sweep point done");
        }
      }
    }
  }
  io::write_file(out_path, csv.str());
  log_info("sweep -> " + out_path);
  return 0;
}

int cmd_fitcov(const std::string& errors_path, const std::string& out_path,
               int bins) {
  const std::vector<json> lines = io::read_jsonl(errors_path);
  if (lines.empty()) {
    throw std::runtime_error("fitcov: no error records in " + errors_path);
  }
  std::vector<std::pair<double, double>> xy, z, rot;
  for (const json& line : lines) {
    const ErrorRecord r = io::error_record_from_json(line);
    xy.emplace_back(r.n_px, std::abs(r.ex));
    xy.emplace_back(r.n_px, std::abs(r.ey));
    z.emplace_back(r.n_px, std::abs(r.ez));
    rot.emplace_back(r.n_px, std::abs(r.rx));
    rot.emplace_back(r.n_px, std::abs(r.ry));
    rot.emplace_back(r.n_px, std::abs(r.rz));
  }
  const SigmaFit fit_xy = fit_sigma_model(xy, bins);
  const SigmaFit fit_z = fit_sigma_model(z, bins);
  const SigmaFit fit_rot = fit_sigma_model(rot, bins);

  CovModelParams params;
  params.xy = {fit_xy.a, fit_xy.b};
  params.z = {fit_z.a, fit_z.b};
  params.rot = {fit_rot.a, fit_rot.b};
  json out = io::cov_model_to_json(params);
  out["fit"] = json{{"bins", bins},
                    {"samples", lines.size()},
                    {"xy_bin_resolved", fit_xy.bin_resolved},
                    {"z_bin_resolved", fit_z.bin_resolved},
                    {"rot_bin_resolved", fit_rot.bin_resolved}};
  io::write_file(out_path, out.dump(2) + "\n");
  log_info("fitcov: xy a=" + std::to_string(fit_xy.a) +
           " b=" + std::to_string(fit_xy.b) + " -> " + out_path);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Fixed-lag multi-object pose smoothing pipeline"};
  app.require_subcommand(1);

  std::string scenario_path, out_prefix, errors_out;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate frame and ground-truth streams from a scenario");
  simulate->add_option("scenario", scenario_path, "scenario JSON file")
      ->required();
  simulate->add_option("--out-prefix", out_prefix, "output path prefix")
      ->required();
  simulate->add_option("--errors", errors_out,
                       "also write detection error records (JSONL)");

  TrackOptions track_opt;
  CLI::App* track = app.add_subcommand(
      "track", "Run the fixed-lag smoother over a frame stream");
  track->add_option("--config", track_opt.config_path, "tracker config JSON");
  track->add_option("--frames", track_opt.frames_path, "input frames JSONL")
      ->required();
  track->add_option("--out", track_opt.out_path, "output predictions JSONL")
      ->required();
  track->add_option("--preset", track_opt.preset,
                    "recall-oriented | precision-oriented | custom");
  track->add_option("--motion", track_opt.motion, "const_pose | const_vel");
  track->add_option("--window-mode", track_opt.window_mode, "prior | delete");
  track->add_option("--horizon", track_opt.horizon, "window length, seconds");

  std::string pred_path, truth_path, models_path, report_path, csv_path;
  CLI::App* eval = app.add_subcommand(
      "eval", "Score a prediction stream against ground truth");
  eval->add_option("--pred", pred_path, "predictions JSONL")->required();
  eval->add_option("--truth", truth_path, "ground-truth JSONL")->required();
  eval->add_option("--models", models_path, "object models JSON")->required();
  eval->add_option("--out", report_path, "metric report JSON")->required();
  eval->add_option("--csv", csv_path, "per-threshold curve CSV");

  std::string sweep_scenario, sweep_config, grid_path, sweep_out;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Track+eval over a grid of gate/noise settings");
  sweep->add_option("--scenario", sweep_scenario, "scenario JSON")->required();
  sweep->add_option("--config", sweep_config, "base tracker config JSON");
  sweep->add_option("--grid", grid_path, "grid JSON (lists per parameter)")
      ->required();
  sweep->add_option("--out", sweep_out, "output PR curve CSV")->required();

  std::string fit_errors, fit_out;
  int fit_bins = 10;
  CLI::App* fitcov = app.add_subcommand(
      "fitcov", "Fit the covariance model from detection error records");
  fitcov->add_option("--errors", fit_errors, "error records JSONL")->required();
  fitcov->add_option("--out", fit_out, "output params JSON")->required();
  fitcov->add_option("--bins", fit_bins, "histogram bins (default 10)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (simulate->parsed()) {
      return cmd_simulate(scenario_path, out_prefix, errors_out);
    }
    if (track->parsed()) return cmd_track(track_opt);
    if (eval->parsed()) {
      return cmd_eval(pred_path, truth_path, models_path, report_path, csv_path);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_scenario, sweep_config, grid_path, sweep_out);
    }
    if (fitcov->parsed()) return cmd_fitcov(fit_errors, fit_out, fit_bins);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run_main(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace fgtrack::cli
