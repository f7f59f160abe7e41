#include "fgtrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace fgtrack {

double mssd(const Pose& estimate, const Pose& truth, const ObjectModel& model) {
  if (model.points.empty()) {
    throw std::invalid_argument("mssd: model has no surface points");
  }
  if (model.symmetries.empty()) {
    throw std::invalid_argument("mssd: symmetry set must contain identity");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const Pose& sym : model.symmetries) {
    const Pose symmetric_truth = truth * sym;
    double worst = 0.0;
    for (const Vec3& p : model.points) {
      worst = std::max(worst, (estimate * p - symmetric_truth * p).norm());
      if (worst >= best) break;
    }
    best = std::min(best, worst);
  }
  return best;
}

namespace {

Eigen::Vector2d project(const Vec3& p, const Intrinsics& k) {
  if (p.z() <= 0.0) {
    throw std::domain_error("mspd: model point behind the camera");
  }
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

}  // namespace

double mspd(const Pose& estimate, const Pose& truth, const ObjectModel& model,
            const Intrinsics& intrinsics) {
  if (model.points.empty()) {
    throw std::invalid_argument("mspd: model has no surface points");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const Pose& sym : model.symmetries) {
    const Pose symmetric_truth = truth * sym;
    double worst = 0.0;
    for (const Vec3& p : model.points) {
      const auto a = project(estimate * p, intrinsics);
      const auto b = project(symmetric_truth * p, intrinsics);
      worst = std::max(worst, (a - b).norm());
      if (worst >= best) break;
    }
    best = std::min(best, worst);
  }
  return best;
}

namespace {

struct MatchedPair {
  std::size_t pred_index;
  std::size_t truth_index;
  double mssd_value;
  double mspd_value;  // +inf when a point fell behind the camera
  double diameter;
};

}  // namespace

MetricReport precision_recall(const std::vector<EvalPredictionFrame>& predictions,
                              const std::vector<EvalFrame>& truth,
                              const std::vector<ObjectModel>& models,
                              const MetricGrid& grid) {
  if (truth.empty()) {
    throw std::invalid_argument("precision_recall: empty ground truth stream");
  }
  std::map<std::string, const ObjectModel*> model_by_label;
  for (const ObjectModel& m : models) model_by_label[m.label] = &m;

  std::map<double, const EvalPredictionFrame*> preds_by_time;
  for (const EvalPredictionFrame& f : predictions) preds_by_time[f.timestamp] = &f;

  struct Accum {
    double recall_sum = 0.0;
    std::size_t recall_frames = 0;
    double precision_sum = 0.0;
    std::size_t precision_frames = 0;
  };
  // One accumulator per (metric, threshold index).
  std::vector<Accum> mssd_acc(grid.mssd_fractions.size());
  std::vector<Accum> mspd_acc(grid.mspd_pixels.size());

  static const EvalPredictionFrame kEmpty{};

  for (const EvalFrame& frame : truth) {
    const auto it = preds_by_time.find(frame.timestamp);
    const EvalPredictionFrame& pred_frame =
        it == preds_by_time.end() ? kEmpty : *it->second;

    std::vector<std::size_t> visible;
    for (std::size_t g = 0; g < frame.objects.size(); ++g) {
      if (frame.objects[g].visible) visible.push_back(g);
    }
    const std::size_t emitted = pred_frame.predictions.size();

    // Greedy one-to-one matching by label and minimal surface distance,
    // evaluated in the ground-truth camera frame.
    const Pose camera_inv = frame.camera.inverse();
    struct Cand {
      double d;
      std::size_t p, g;
    };
    std::vector<Cand> cands;
    for (std::size_t p = 0; p < emitted; ++p) {
      const EvalPrediction& pred = pred_frame.predictions[p];
      const auto model_it = model_by_label.find(pred.label);
      if (model_it == model_by_label.end()) continue;
      for (std::size_t g : visible) {
        if (frame.objects[g].label != pred.label) continue;
        const double d = mssd(camera_inv * pred.pose,
                              camera_inv * frame.objects[g].pose,
                              *model_it->second);
        cands.push_back({d, p, g});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      return std::tie(a.d, a.p, a.g) < std::tie(b.d, b.p, b.g);
    });
    std::vector<bool> pred_used(emitted, false);
    std::vector<bool> truth_used(frame.objects.size(), false);
    std::vector<MatchedPair> matches;
    for (const Cand& c : cands) {
      if (pred_used[c.p] || truth_used[c.g]) continue;
      pred_used[c.p] = true;
      truth_used[c.g] = true;
      const ObjectModel& model =
          *model_by_label.at(pred_frame.predictions[c.p].label);
      double pixel_err = std::numeric_limits<double>::infinity();
      try {
        pixel_err = mspd(camera_inv * pred_frame.predictions[c.p].pose,
                         camera_inv * frame.objects[c.g].pose, model,
                         grid.intrinsics);
      } catch (const std::domain_error&) {
        // behind-camera geometry fails every pixel threshold
      }
      matches.push_back({c.p, c.g, c.d, pixel_err, model.diameter});
    }

    auto score = [&](std::vector<Accum>& acc, auto threshold_of, auto err_of) {
      for (std::size_t i = 0; i < acc.size(); ++i) {
        std::size_t correct = 0;
        for (const MatchedPair& m : matches) {
          if (err_of(m) < threshold_of(i, m)) ++correct;
        }
        if (!visible.empty()) {
          acc[i].recall_sum +=
              static_cast<double>(correct) / static_cast<double>(visible.size());
          acc[i].recall_frames += 1;
        }
        // No emissions means no false positives: precision 1 by convention.
        acc[i].precision_sum +=
            emitted == 0 ? 1.0
                         : static_cast<double>(correct) /
                               static_cast<double>(emitted);
        acc[i].precision_frames += 1;
      }
    };
    score(
        mssd_acc,
        [&](std::size_t i, const MatchedPair& m) {
          return grid.mssd_fractions[i] * m.diameter;
        },
        [](const MatchedPair& m) { return m.mssd_value; });
    score(
        mspd_acc,
        [&](std::size_t i, const MatchedPair&) { return grid.mspd_pixels[i]; },
        [](const MatchedPair& m) { return m.mspd_value; });
  }

  MetricReport report;
  report.frames = truth.size();
  auto finalize = [&](const std::vector<Accum>& acc, const std::string& name,
                      auto threshold_value, double& recall_out,
                      double& precision_out) {
    double r = 0.0, p = 0.0;
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const double rec = acc[i].recall_frames
                             ? acc[i].recall_sum / acc[i].recall_frames
                             : 0.0;
      const double prec = acc[i].precision_frames
                              ? acc[i].precision_sum / acc[i].precision_frames
                              : 1.0;
      report.curve.push_back({name, threshold_value(i), rec, prec});
      r += rec;
      p += prec;
    }
    recall_out = acc.empty() ? 0.0 : r / acc.size();
    precision_out = acc.empty() ? 1.0 : p / acc.size();
  };
  finalize(
      mssd_acc, "mssd", [&](std::size_t i) { return grid.mssd_fractions[i]; },
      report.mssd_recall, report.mssd_precision);
  finalize(
      mspd_acc, "mspd", [&](std::size_t i) { return grid.mspd_pixels[i]; },
      report.mspd_recall, report.mspd_precision);
  report.average_recall = 0.5 * (report.mssd_recall + report.mspd_recall);
  report.average_precision = 0.5 * (report.mssd_precision + report.mspd_precision);
  return report;
}

}  // namespace fgtrack
