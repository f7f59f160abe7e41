#include "fgtrack/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fgtrack::io {

namespace {

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw std::invalid_argument(context + ": " + what);
}

const json& field(const json& j, const char* name, const std::string& context) {
  if (!j.is_object()) fail(context, "expected an object");
  auto it = j.find(name);
  if (it == j.end()) fail(context + "." + name, "missing field");
  return *it;
}

double num_field(const json& j, const char* name, const std::string& context) {
  const json& f = field(j, name, context);
  if (!f.is_number()) fail(context + "." + name, "expected a number");
  return f.get<double>();
}

double num_or(const json& j, const char* name, double fallback,
              const std::string& context) {
  if (!j.is_object() || !j.contains(name)) return fallback;
  return num_field(j, name, context);
}

bool bool_or(const json& j, const char* name, bool fallback,
             const std::string& context) {
  if (!j.contains(name)) return fallback;
  const json& f = j.at(name);
  if (!f.is_boolean()) fail(context + "." + name, "expected a boolean");
  return f.get<bool>();
}

std::string str_field(const json& j, const char* name,
                      const std::string& context) {
  const json& f = field(j, name, context);
  if (!f.is_string()) fail(context + "." + name, "expected a string");
  return f.get<std::string>();
}

Vec3 vec3_from(const json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 3) fail(context, "expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Tangent6 tangent_from(const json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 6) fail(context, "expected a 6-vector");
  Tangent6 x;
  for (int i = 0; i < 6; ++i) x(i) = j[i].get<double>();
  return x;
}

json tangent_to(const Tangent6& x) {
  return json{x(0), x(1), x(2), x(3), x(4), x(5)};
}

}  // namespace

json frame_to_json(const Frame& frame) {
  json detections = json::array();
  for (const Detection& d : frame.detections) {
    detections.push_back(json{{"label", d.label},
                              {"pose", pose_to_json(d.pose_in_camera)},
                              {"n_px", d.n_px}});
  }
  return json{{"t", frame.timestamp},
              {"camera", pose_to_json(frame.camera)},
              {"detections", std::move(detections)}};
}

Frame frame_from_json(const json& j) {
  const std::string ctx = "frame";
  Frame frame;
  frame.timestamp = num_field(j, "t", ctx);
  frame.camera = pose_from_json(field(j, "camera", ctx));
  for (const json& jd : field(j, "detections", ctx)) {
    Detection d;
    d.label = str_field(jd, "label", ctx + ".detections");
    d.pose_in_camera = pose_from_json(field(jd, "pose", ctx + ".detections"));
    d.n_px = num_field(jd, "n_px", ctx + ".detections");
    d.timestamp = frame.timestamp;
    frame.detections.push_back(std::move(d));
  }
  return frame;
}

json truth_frame_to_json(const TruthFrame& frame) {
  json objects = json::array();
  for (const TruthObject& o : frame.objects) {
    objects.push_back(json{{"label", o.label},
                           {"pose", pose_to_json(o.pose)},
                           {"visible", o.visible},
                           {"detected", o.detected},
                           {"outlier", o.outlier}});
  }
  return json{{"t", frame.timestamp},
              {"camera", pose_to_json(frame.camera)},
              {"objects", std::move(objects)}};
}

TruthFrame truth_frame_from_json(const json& j) {
  const std::string ctx = "truth";
  TruthFrame frame;
  frame.timestamp = num_field(j, "t", ctx);
  frame.camera = pose_from_json(field(j, "camera", ctx));
  for (const json& jo : field(j, "objects", ctx)) {
    TruthObject o;
    o.label = str_field(jo, "label", ctx + ".objects");
    o.pose = pose_from_json(field(jo, "pose", ctx + ".objects"));
    o.visible = bool_or(jo, "visible", true, ctx + ".objects");
    o.detected = bool_or(jo, "detected", true, ctx + ".objects");
    o.outlier = bool_or(jo, "outlier", false, ctx + ".objects");
    frame.objects.push_back(std::move(o));
  }
  return frame;
}

json prediction_batch_to_json(double timestamp,
                              const std::vector<Prediction>& predictions,
                              const SolveReport& report) {
  json preds = json::array();
  for (const Prediction& p : predictions) {
    preds.push_back(json{{"track", p.track_id},
                         {"label", p.label},
                         {"pose", pose_to_json(p.pose)},
                         {"vol_t", p.volume_t},
                         {"vol_r", p.volume_r}});
  }
  return json{{"t", timestamp},
              {"predictions", std::move(preds)},
              {"solve",
               {{"iterations", report.iterations},
                {"chi2_initial", report.chi2_initial},
                {"chi2_final", report.chi2_final},
                {"converged", report.converged}}}};
}

PredictionBatch prediction_batch_from_json(const json& j) {
  const std::string ctx = "predictions";
  PredictionBatch batch;
  batch.timestamp = num_field(j, "t", ctx);
  for (const json& jp : field(j, "predictions", ctx)) {
    Prediction p;
    p.track_id = static_cast<std::int64_t>(num_field(jp, "track", ctx));
    p.label = str_field(jp, "label", ctx);
    p.pose = pose_from_json(field(jp, "pose", ctx));
    p.volume_t = num_or(jp, "vol_t", 0.0, ctx);
    p.volume_r = num_or(jp, "vol_r", 0.0, ctx);
    p.timestamp = batch.timestamp;
    batch.predictions.push_back(std::move(p));
  }
  return batch;
}

json error_record_to_json(const ErrorRecord& rec) {
  return json{{"n_px", rec.n_px}, {"ex", rec.ex}, {"ey", rec.ey},
              {"ez", rec.ez},     {"rx", rec.rx}, {"ry", rec.ry},
              {"rz", rec.rz}};
}

ErrorRecord error_record_from_json(const json& j) {
  const std::string ctx = "error_record";
  ErrorRecord rec;
  rec.n_px = num_field(j, "n_px", ctx);
  rec.ex = num_field(j, "ex", ctx);
  rec.ey = num_field(j, "ey", ctx);
  rec.ez = num_field(j, "ez", ctx);
  rec.rx = num_field(j, "rx", ctx);
  rec.ry = num_field(j, "ry", ctx);
  rec.rz = num_field(j, "rz", ctx);
  return rec;
}

json models_to_json(const std::vector<ObjectModel>& models) {
  json arr = json::array();
  for (const ObjectModel& m : models) {
    json points = json::array();
    for (const Vec3& p : m.points) points.push_back({p.x(), p.y(), p.z()});
    json syms = json::array();
    for (const Pose& s : m.symmetries) syms.push_back(pose_to_json(s));
    arr.push_back(json{{"label", m.label},
                       {"diameter", m.diameter},
                       {"points", std::move(points)},
                       {"symmetries", std::move(syms)}});
  }
  return json{{"models", std::move(arr)}};
}

std::vector<ObjectModel> models_from_json(const json& j) {
  const std::string ctx = "models";
  std::vector<ObjectModel> models;
  for (const json& jm : field(j, "models", ctx)) {
    ObjectModel m;
    m.label = str_field(jm, "label", ctx);
    m.diameter = num_field(jm, "diameter", ctx);
    for (const json& jp : field(jm, "points", ctx)) {
      m.points.push_back(vec3_from(jp, ctx + ".points"));
    }
    for (const json& js : field(jm, "symmetries", ctx)) {
      m.symmetries.push_back(pose_from_json(js));
    }
    if (m.points.empty()) fail(ctx + ".points", "must be non-empty");
    if (m.symmetries.empty()) fail(ctx + ".symmetries", "must contain identity");
    models.push_back(std::move(m));
  }
  return models;
}

json cov_model_to_json(const CovModelParams& params) {
  auto exp_model = [](const CovModelParams::ExpModel& m) {
    return json{{"a", m.a}, {"b", m.b}};
  };
  return json{{"xy", exp_model(params.xy)},
              {"z", exp_model(params.z)},
              {"rot", exp_model(params.rot)},
              {"decoupled", params.decoupled},
              {"visibility_dependent", params.visibility_dependent},
              {"ray_aligned", params.ray_aligned}};
}

CovModelParams cov_model_from_json(const json& j) {
  const std::string ctx = "cov_model";
  CovModelParams params;
  auto exp_model = [&](const char* name, CovModelParams::ExpModel fallback) {
    if (!j.contains(name)) return fallback;
    const json& jm = j.at(name);
    CovModelParams::ExpModel m;
    m.a = num_field(jm, "a", ctx + "." + name);
    m.b = num_or(jm, "b", 0.0, ctx + "." + name);
    if (m.a <= 0.0) fail(ctx + "." + name + ".a", "must be positive");
    if (m.b < 0.0) fail(ctx + "." + name + ".b", "must be non-negative");
    return m;
  };
  params.xy = exp_model("xy", params.xy);
  params.z = exp_model("z", params.z);
  params.rot = exp_model("rot", params.rot);
  params.decoupled = bool_or(j, "decoupled", params.decoupled, ctx);
  params.visibility_dependent =
      bool_or(j, "visibility_dependent", params.visibility_dependent, ctx);
  params.ray_aligned = bool_or(j, "ray_aligned", params.ray_aligned, ctx);
  return params;
}

TrackerConfig apply_preset(TrackerConfig config, const std::string& preset) {
  // Gate volumes and motion noise selected from the synthetic-scene sweep
  // (see README); "custom" leaves the config untouched.
  if (preset == "recall-oriented") {
    config.gates.tau_pred_t = 2e-3;
    config.gates.tau_pred_r = 2e-1;
    config.motion_noise.sigma_mt = 0.05;
    config.motion_noise.sigma_mr = 0.30;
    config.motion_noise.sigma_vt = 0.50;
    config.motion_noise.sigma_vr = 1.00;
  } else if (preset == "precision-oriented") {
    config.gates.tau_pred_t = 2e-7;
    config.gates.tau_pred_r = 1e-4;
    config.motion_noise.sigma_mt = 0.02;
    config.motion_noise.sigma_mr = 0.15;
    config.motion_noise.sigma_vt = 0.30;
    config.motion_noise.sigma_vr = 0.60;
  } else if (preset != "custom") {
    fail("config.preset", "unknown preset '" + preset + "'");
  }
  return config;
}

json tracker_config_to_json(const TrackerConfig& config) {
  json objects = json::object();
  for (const auto& [label, radius] : config.object_radius) {
    objects[label] = radius;
  }
  return json{
      {"preset", "custom"},
      {"motion_model",
       config.motion == MotionModel::kConstVel ? "const_vel" : "const_pose"},
      {"window_mode",
       config.window_mode == WindowMode::kDelete ? "delete" : "prior"},
      {"horizon_s", config.gates.horizon},
      {"gates",
       {{"tau_outlier_t", config.gates.tau_outlier_t},
        {"tau_outlier_r", config.gates.tau_outlier_r},
        {"tau_pred_t", config.gates.tau_pred_t},
        {"tau_pred_r", config.gates.tau_pred_r}}},
      {"camera_noise",
       {{"sigma_ct", config.camera_noise.sigma_ct},
        {"sigma_cr", config.camera_noise.sigma_cr}}},
      {"cov_model", cov_model_to_json(config.cov_model)},
      {"motion_noise",
       {{"sigma_mt", config.motion_noise.sigma_mt},
        {"sigma_mr", config.motion_noise.sigma_mr},
        {"sigma_vt", config.motion_noise.sigma_vt},
        {"sigma_vr", config.motion_noise.sigma_vr}}},
      {"objects", std::move(objects)},
      {"default_radius", config.default_radius}};
}

TrackerConfig tracker_config_from_json(const json& j) {
  const std::string ctx = "config";
  TrackerConfig config;
  if (j.contains("preset")) {
    config = apply_preset(config, str_field(j, "preset", ctx));
  }
  if (j.contains("motion_model")) {
    const std::string m = str_field(j, "motion_model", ctx);
    if (m == "const_pose") {
      config.motion = MotionModel::kConstPose;
    } else if (m == "const_vel") {
      config.motion = MotionModel::kConstVel;
    } else {
      fail(ctx + ".motion_model", "expected const_pose or const_vel");
    }
  }
  if (j.contains("window_mode")) {
    const std::string w = str_field(j, "window_mode", ctx);
    if (w == "prior") {
      config.window_mode = WindowMode::kMarginalPrior;
    } else if (w == "delete") {
      config.window_mode = WindowMode::kDelete;
    } else {
      fail(ctx + ".window_mode", "expected prior or delete");
    }
  }
  config.gates.horizon = num_or(j, "horizon_s", config.gates.horizon, ctx);
  if (config.gates.horizon < 0.0) fail(ctx + ".horizon_s", "must be >= 0");
  if (j.contains("gates")) {
    const json& jg = j.at("gates");
    const std::string gctx = ctx + ".gates";
    config.gates.tau_outlier_t =
        num_or(jg, "tau_outlier_t", config.gates.tau_outlier_t, gctx);
    config.gates.tau_outlier_r =
        num_or(jg, "tau_outlier_r", config.gates.tau_outlier_r, gctx);
    config.gates.tau_pred_t =
        num_or(jg, "tau_pred_t", config.gates.tau_pred_t, gctx);
    config.gates.tau_pred_r =
        num_or(jg, "tau_pred_r", config.gates.tau_pred_r, gctx);
  }
  if (j.contains("camera_noise")) {
    const json& jc = j.at("camera_noise");
    config.camera_noise.sigma_ct =
        num_or(jc, "sigma_ct", config.camera_noise.sigma_ct, ctx + ".camera_noise");
    config.camera_noise.sigma_cr =
        num_or(jc, "sigma_cr", config.camera_noise.sigma_cr, ctx + ".camera_noise");
  }
  if (j.contains("cov_model")) {
    config.cov_model = cov_model_from_json(j.at("cov_model"));
  }
  if (j.contains("motion_noise")) {
    const json& jm = j.at("motion_noise");
    const std::string mctx = ctx + ".motion_noise";
    config.motion_noise.sigma_mt =
        num_or(jm, "sigma_mt", config.motion_noise.sigma_mt, mctx);
    config.motion_noise.sigma_mr =
        num_or(jm, "sigma_mr", config.motion_noise.sigma_mr, mctx);
    config.motion_noise.sigma_vt =
        num_or(jm, "sigma_vt", config.motion_noise.sigma_vt, mctx);
    config.motion_noise.sigma_vr =
        num_or(jm, "sigma_vr", config.motion_noise.sigma_vr, mctx);
  }
  if (j.contains("objects")) {
    const json& jo = j.at("objects");
    if (!jo.is_object()) fail(ctx + ".objects", "expected label->radius map");
    for (auto it = jo.begin(); it != jo.end(); ++it) {
      config.object_radius[it.key()] = it.value().get<double>();
    }
  }
  config.default_radius = num_or(j, "default_radius", config.default_radius, ctx);
  return config;
}

namespace {

json trajectory_to_json(const Trajectory& traj) {
  json segments = json::array();
  for (const TwistSegment& s : traj.segments) {
    segments.push_back(json{{"start", s.start},
                            {"duration", s.duration},
                            {"twist", tangent_to(s.twist)}});
  }
  return json{{"initial", pose_to_json(traj.initial)},
              {"segments", std::move(segments)}};
}

Trajectory trajectory_from_json(const json& j, const std::string& ctx) {
  Trajectory traj;
  traj.initial = pose_from_json(field(j, "initial", ctx));
  if (j.contains("segments")) {
    for (const json& js : j.at("segments")) {
      TwistSegment s;
      s.start = num_field(js, "start", ctx + ".segments");
      s.duration = num_field(js, "duration", ctx + ".segments");
      if (s.duration < 0.0) fail(ctx + ".segments.duration", "must be >= 0");
      s.twist = tangent_from(field(js, "twist", ctx + ".segments"),
                             ctx + ".segments.twist");
      traj.segments.push_back(std::move(s));
    }
  }
  return traj;
}

void corruption_from_json(const json& j, CorruptionConfig& c,
                          const std::string& ctx) {
  c.dropout_prob = num_or(j, "dropout_prob", c.dropout_prob, ctx);
  c.outlier_prob = num_or(j, "outlier_prob", c.outlier_prob, ctx);
  if (c.dropout_prob < 0.0 || c.dropout_prob > 1.0) {
    fail(ctx + ".dropout_prob", "must be in [0, 1]");
  }
  if (c.outlier_prob < 0.0 || c.outlier_prob > 1.0) {
    fail(ctx + ".outlier_prob", "must be in [0, 1]");
  }
  if (j.contains("outlier_mode")) {
    const std::string m = str_field(j, "outlier_mode", ctx);
    if (m == "uniform") {
      c.outlier_mode = OutlierMode::kUniform;
    } else if (m == "symmetry_flip") {
      c.outlier_mode = OutlierMode::kSymmetryFlip;
    } else {
      fail(ctx + ".outlier_mode", "expected uniform or symmetry_flip");
    }
  }
  c.noise_scale = num_or(j, "noise_scale", c.noise_scale, ctx);
  if (j.contains("noise")) c.noise = cov_model_from_json(j.at("noise"));
  c.n_px_scale = num_or(j, "n_px_scale", c.n_px_scale, ctx);
  c.fov_half_angle = num_or(j, "fov_half_angle", c.fov_half_angle, ctx);
  if (j.contains("workspace_center")) {
    c.workspace_center =
        vec3_from(j.at("workspace_center"), ctx + ".workspace_center");
  }
  c.workspace_half_extent =
      num_or(j, "workspace_half_extent", c.workspace_half_extent, ctx);
  if (j.contains("occlusions")) {
    c.occlusions.clear();
    for (const json& jo : j.at("occlusions")) {
      OcclusionWindow w;
      w.start = num_field(jo, "start", ctx + ".occlusions");
      w.duration = num_field(jo, "duration", ctx + ".occlusions");
      w.half_angle = num_or(jo, "half_angle", M_PI, ctx + ".occlusions");
      c.occlusions.push_back(w);
    }
  }
}

json corruption_to_json(const CorruptionConfig& c) {
  json occlusions = json::array();
  for (const OcclusionWindow& w : c.occlusions) {
    occlusions.push_back(json{{"start", w.start},
                              {"duration", w.duration},
                              {"half_angle", w.half_angle}});
  }
  return json{
      {"dropout_prob", c.dropout_prob},
      {"outlier_prob", c.outlier_prob},
      {"outlier_mode",
       c.outlier_mode == OutlierMode::kUniform ? "uniform" : "symmetry_flip"},
      {"noise_scale", c.noise_scale},
      {"noise", cov_model_to_json(c.noise)},
      {"n_px_scale", c.n_px_scale},
      {"fov_half_angle", c.fov_half_angle},
      {"workspace_center",
       {c.workspace_center.x(), c.workspace_center.y(), c.workspace_center.z()}},
      {"workspace_half_extent", c.workspace_half_extent},
      {"occlusions", std::move(occlusions)}};
}

}  // namespace

json scenario_to_json(const Scenario& scenario) {
  json objects = json::array();
  for (const ObjectSpec& o : scenario.objects) {
    json syms = json::array();
    for (const Pose& s : o.symmetries) syms.push_back(pose_to_json(s));
    objects.push_back(json{{"label", o.label},
                           {"radius", o.radius},
                           {"trajectory", trajectory_to_json(o.trajectory)},
                           {"symmetries", std::move(syms)}});
  }
  return json{{"duration", scenario.duration},
              {"frame_rate", scenario.frame_rate},
              {"seed", scenario.seed},
              {"camera", trajectory_to_json(scenario.camera)},
              {"objects", std::move(objects)},
              {"corruption", corruption_to_json(scenario.corruption)}};
}

Scenario scenario_from_json(const json& j) {
  const std::string ctx = "scenario";
  if (!j.is_object()) fail(ctx, "expected an object");

  Scenario scenario;
  if (j.contains("generator")) {
    const std::string kind = str_field(j, "generator", ctx);
    const int n = static_cast<int>(num_or(j, "n_objects", 5, ctx));
    const auto seed = static_cast<std::uint64_t>(num_or(j, "seed", 0, ctx));
    if (kind == "static") {
      scenario = make_static_scene(n, seed);
    } else if (kind == "dynamic") {
      scenario = make_dynamic_scene(n, seed);
    } else {
      fail(ctx + ".generator", "expected static or dynamic");
    }
    scenario.duration = num_or(j, "duration", scenario.duration, ctx);
    scenario.frame_rate = num_or(j, "frame_rate", scenario.frame_rate, ctx);
    if (j.contains("corruption")) {
      corruption_from_json(j.at("corruption"), scenario.corruption,
                           ctx + ".corruption");
    }
  } else {
    scenario.duration = num_field(j, "duration", ctx);
    scenario.frame_rate = num_field(j, "frame_rate", ctx);
    scenario.seed = static_cast<std::uint64_t>(num_or(j, "seed", 0, ctx));
    scenario.camera = trajectory_from_json(field(j, "camera", ctx), ctx + ".camera");
    for (const json& jo : field(j, "objects", ctx)) {
      ObjectSpec o;
      o.label = str_field(jo, "label", ctx + ".objects");
      o.radius = num_field(jo, "radius", ctx + ".objects");
      if (o.radius <= 0.0) fail(ctx + ".objects.radius", "must be positive");
      o.trajectory = trajectory_from_json(field(jo, "trajectory", ctx + ".objects"),
                                          ctx + ".objects.trajectory");
      if (jo.contains("symmetries")) {
        for (const json& js : jo.at("symmetries")) {
          o.symmetries.push_back(pose_from_json(js));
        }
      }
      if (o.symmetries.empty()) o.symmetries.push_back(Pose::identity());
      scenario.objects.push_back(std::move(o));
    }
    if (j.contains("corruption")) {
      corruption_from_json(j.at("corruption"), scenario.corruption,
                           ctx + ".corruption");
    }
  }
  if (scenario.duration < 0.0) fail(ctx + ".duration", "must be >= 0");
  if (scenario.frame_rate <= 0.0) fail(ctx + ".frame_rate", "must be positive");
  return scenario;
}

json metric_report_to_json(const MetricReport& report) {
  json curve = json::array();
  for (const ThresholdScore& s : report.curve) {
    curve.push_back(json{{"metric", s.metric},
                         {"threshold", s.threshold},
                         {"recall", s.recall},
                         {"precision", s.precision}});
  }
  return json{{"average_recall", report.average_recall},
              {"average_precision", report.average_precision},
              {"mssd", {{"recall", report.mssd_recall},
                        {"precision", report.mssd_precision}}},
              {"mspd", {{"recall", report.mspd_recall},
                        {"precision", report.mspd_precision}}},
              {"frames", report.frames},
              {"curve", std::move(curve)}};
}

std::string metric_curve_to_csv(const MetricReport& report) {
  std::ostringstream out;
  out << "metric,threshold,recall,precision\n";
  for (const ThresholdScore& s : report.curve) {
    out << s.metric << "," << s.threshold << "," << s.recall << ","
        << s.precision << "\n";
  }
  return out.str();
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<json> lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      lines.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  return lines;
}

void write_lines(const std::string& path, const std::vector<json>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const json& j : lines) out << j.dump() << "\n";
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace fgtrack::io
