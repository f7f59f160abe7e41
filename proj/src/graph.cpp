#include "fgtrack/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "fgtrack/json_util.hpp"

namespace fgtrack {

namespace {

constexpr double kMinCovEigenvalue = 1e-12;
constexpr double kLambdaMax = 1e10;
constexpr double kPivotRelTol = 1e-12;

Eigen::MatrixXd inverse_cholesky_factor(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("factor covariance is not positive definite");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  return lower.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
}

void check_spd(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw std::invalid_argument("factor covariance must be square");
  }
  if (!cov.isApprox(cov.transpose(), 1e-9)) {
    throw std::invalid_argument("factor covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.eigenvalues().minCoeff() <= kMinCovEigenvalue) {
    throw std::invalid_argument("factor covariance must be positive definite");
  }
}

}  // namespace

VariableId Graph::add_pose_variable(const Pose& initial, double timestamp,
                                    std::int64_t owner) {
  if (!std::isfinite(timestamp)) {
    throw std::invalid_argument("variable timestamp must be finite");
  }
  Variable v;
  v.id = VariableId{next_variable_++};
  v.kind = VarKind::kPose;
  v.timestamp = timestamp;
  v.owner = owner;
  v.pose = initial;
  adjacency_[v.id];
  variables_.emplace(v.id, std::move(v));
  info_valid_ = false;
  return VariableId{next_variable_ - 1};
}

VariableId Graph::add_vector_variable(const Eigen::VectorXd& initial,
                                      double timestamp, std::int64_t owner) {
  if (!std::isfinite(timestamp)) {
    throw std::invalid_argument("variable timestamp must be finite");
  }
  if (initial.size() == 0) {
    throw std::invalid_argument("vector variable must have nonzero dimension");
  }
  Variable v;
  v.id = VariableId{next_variable_++};
  v.kind = VarKind::kVector;
  v.timestamp = timestamp;
  v.owner = owner;
  v.vec = initial;
  adjacency_[v.id];
  variables_.emplace(v.id, std::move(v));
  info_valid_ = false;
  return VariableId{next_variable_ - 1};
}

std::vector<VariableId> Graph::connected_variables(const FactorModel& model) {
  return std::visit(
      [](const auto& m) -> std::vector<VariableId> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PosePriorFactor>) {
          return {m.var};
        } else if constexpr (std::is_same_v<T, ObjectPoseFactor>) {
          return {m.object, m.camera};
        } else if constexpr (std::is_same_v<T, BetweenFactor>) {
          return {m.from, m.to};
        } else if constexpr (std::is_same_v<T, VectorPriorFactor>) {
          return {m.var};
        } else if constexpr (std::is_same_v<T, TwistSmoothnessFactor>) {
          return {m.prev, m.next};
        } else {
          return {m.pose_prev, m.pose_next, m.twist_next};
        }
      },
      model);
}

FactorId Graph::add_factor(FactorModel model, const Eigen::MatrixXd& covariance) {
  for (VariableId v : connected_variables(model)) {
    if (!has_variable(v)) {
      throw std::invalid_argument("factor references unknown variable");
    }
  }
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TwistIntegrationFactor>) {
          if (m.dt <= 0.0) {
            throw std::invalid_argument("integration factor needs dt > 0");
          }
        }
      },
      model);
  check_spd(covariance);

  Factor f;
  f.id = FactorId{next_factor_++};
  f.model = std::move(model);
  f.covariance = covariance;
  f.sqrt_info = inverse_cholesky_factor(covariance);
  for (VariableId v : connected_variables(f.model)) {
    adjacency_[v].insert(f.id);
  }
  factors_.emplace(f.id, std::move(f));
  info_valid_ = false;
  return FactorId{next_factor_ - 1};
}

void Graph::remove_factor(FactorId id) {
  auto it = factors_.find(id);
  if (it == factors_.end()) return;
  for (VariableId v : connected_variables(it->second.model)) {
    auto adj = adjacency_.find(v);
    if (adj != adjacency_.end()) adj->second.erase(id);
  }
  factors_.erase(it);
  info_valid_ = false;
}

void Graph::remove_variable(VariableId id) {
  auto it = variables_.find(id);
  if (it == variables_.end()) return;
  const auto attached = adjacency_[id];  // copy: remove_factor edits the set
  for (FactorId f : attached) remove_factor(f);
  adjacency_.erase(id);
  variables_.erase(it);
  info_valid_ = false;
}

const Variable& Graph::variable(VariableId id) const {
  auto it = variables_.find(id);
  if (it == variables_.end()) throw std::out_of_range("unknown variable id");
  return it->second;
}

const Pose& Graph::pose_value(VariableId id) const {
  const Variable& v = variable(id);
  if (v.kind != VarKind::kPose) throw std::invalid_argument("not a pose variable");
  return v.pose;
}

const Eigen::VectorXd& Graph::vector_value(VariableId id) const {
  const Variable& v = variable(id);
  if (v.kind != VarKind::kVector) {
    throw std::invalid_argument("not a vector variable");
  }
  return v.vec;
}

void Graph::set_pose_value(VariableId id, const Pose& value) {
  auto it = variables_.find(id);
  if (it == variables_.end()) throw std::out_of_range("unknown variable id");
  if (it->second.kind != VarKind::kPose) {
    throw std::invalid_argument("not a pose variable");
  }
  it->second.pose = value;
  info_valid_ = false;
}

void Graph::set_vector_value(VariableId id, const Eigen::VectorXd& value) {
  auto it = variables_.find(id);
  if (it == variables_.end()) throw std::out_of_range("unknown variable id");
  if (it->second.kind != VarKind::kVector) {
    throw std::invalid_argument("not a vector variable");
  }
  if (value.size() != it->second.vec.size()) {
    throw std::invalid_argument("vector variable dimension mismatch");
  }
  it->second.vec = value;
  info_valid_ = false;
}

std::vector<VariableId> Graph::variable_ids() const {
  std::vector<VariableId> out;
  out.reserve(variables_.size());
  for (const auto& [id, v] : variables_) out.push_back(id);
  return out;
}

std::vector<FactorId> Graph::factor_ids() const {
  std::vector<FactorId> out;
  out.reserve(factors_.size());
  for (const auto& [id, f] : factors_) out.push_back(id);
  return out;
}

const Factor& Graph::factor(FactorId id) const {
  auto it = factors_.find(id);
  if (it == factors_.end()) throw std::out_of_range("unknown factor id");
  return it->second;
}

Eigen::VectorXd Graph::factor_residual(const Factor& f) const {
  return std::visit(
      [&](const auto& m) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PosePriorFactor>) {
          return camera_residual(pose_value(m.var), m.measurement);
        } else if constexpr (std::is_same_v<T, ObjectPoseFactor>) {
          return object_residual(pose_value(m.object), pose_value(m.camera),
                                 m.measurement);
        } else if constexpr (std::is_same_v<T, BetweenFactor>) {
          return log_se3(m.measurement.inverse() *
                         between(pose_value(m.from), pose_value(m.to)));
        } else if constexpr (std::is_same_v<T, VectorPriorFactor>) {
          return vector_value(m.var) - m.mean;
        } else if constexpr (std::is_same_v<T, TwistSmoothnessFactor>) {
          return vector_value(m.next) - vector_value(m.prev);
        } else {
          const Tangent6 twist = vector_value(m.twist_next);
          return log_se3(between(pose_value(m.pose_next),
                                 pose_value(m.pose_prev) *
                                     exp_se3(m.dt * twist)));
        }
      },
      f.model);
}

void Graph::factor_jacobians(const Factor& f,
                             std::vector<Eigen::MatrixXd>& jacobians) const {
  jacobians.clear();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PosePriorFactor>) {
          const Tangent6 r = camera_residual(pose_value(m.var), m.measurement);
          jacobians.push_back(-left_jacobian_inv_se3(r));
        } else if constexpr (std::is_same_v<T, ObjectPoseFactor>) {
          const Tangent6 r = object_residual(pose_value(m.object),
                                             pose_value(m.camera), m.measurement);
          jacobians.push_back(-left_jacobian_inv_se3(r));
          jacobians.push_back(right_jacobian_inv_se3(r) *
                              adjoint(m.measurement.inverse()));
        } else if constexpr (std::is_same_v<T, BetweenFactor>) {
          const Tangent6 r = log_se3(m.measurement.inverse() *
                                     between(pose_value(m.from), pose_value(m.to)));
          jacobians.push_back(-left_jacobian_inv_se3(r) *
                              adjoint(m.measurement.inverse()));
          jacobians.push_back(right_jacobian_inv_se3(r));
        } else if constexpr (std::is_same_v<T, VectorPriorFactor>) {
          const auto dim = m.mean.size();
          jacobians.push_back(Eigen::MatrixXd::Identity(dim, dim));
        } else if constexpr (std::is_same_v<T, TwistSmoothnessFactor>) {
          const auto dim = vector_value(m.prev).size();
          jacobians.push_back(-Eigen::MatrixXd::Identity(dim, dim));
          jacobians.push_back(Eigen::MatrixXd::Identity(dim, dim));
        } else {
          const Tangent6 twist = vector_value(m.twist_next);
          const Pose step = exp_se3(m.dt * twist);
          const Tangent6 r = log_se3(
              between(pose_value(m.pose_next), pose_value(m.pose_prev) * step));
          const Mat6 jr_inv = right_jacobian_inv_se3(r);
          jacobians.push_back(jr_inv * adjoint(step.inverse()));
          jacobians.push_back(-left_jacobian_inv_se3(r));
          jacobians.push_back(jr_inv * right_jacobian_se3(m.dt * twist) * m.dt);
        }
      },
      f.model);
}

Eigen::VectorXd Graph::residual_of(FactorId id) const {
  return factor_residual(factor(id));
}

void Graph::linearize_factor(FactorId id, Eigen::VectorXd& whitened_residual,
                             std::vector<Eigen::MatrixXd>& whitened_jacobians) const {
  const Factor& f = factor(id);
  whitened_residual = f.sqrt_info * factor_residual(f);
  factor_jacobians(f, whitened_jacobians);
  for (auto& j : whitened_jacobians) j = f.sqrt_info * j;
}

double Graph::chi2() const {
  double total = 0.0;
  for (const auto& [id, f] : factors_) {
    const Eigen::VectorXd wr = f.sqrt_info * factor_residual(f);
    total += wr.squaredNorm();
  }
  return total;
}

Graph::Layout Graph::build_layout() const {
  Layout layout;
  layout.order.reserve(variables_.size());
  for (const auto& [id, v] : variables_) layout.order.push_back(id);
  std::sort(layout.order.begin(), layout.order.end(),
            [&](VariableId a, VariableId b) {
              const Variable& va = variables_.at(a);
              const Variable& vb = variables_.at(b);
              return std::tie(va.timestamp, va.owner, a.value) <
                     std::tie(vb.timestamp, vb.owner, b.value);
            });
  int offset = 0;
  for (VariableId id : layout.order) {
    layout.offset[id] = offset;
    offset += variables_.at(id).dof();
  }
  layout.total_dof = offset;
  return layout;
}

void Graph::build_normal_equations(const Layout& layout,
                                   Eigen::SparseMatrix<double>& info,
                                   Eigen::VectorXd& gradient) const {
  gradient = Eigen::VectorXd::Zero(layout.total_dof);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(64 * factors_.size() + layout.total_dof);

  Eigen::VectorXd wr;
  std::vector<Eigen::MatrixXd> wj;
  for (const auto& [fid, f] : factors_) {
    linearize_factor(fid, wr, wj);
    const auto vars = connected_variables(f.model);
    for (std::size_t a = 0; a < vars.size(); ++a) {
      const int off_a = layout.offset.at(vars[a]);
      gradient.segment(off_a, wj[a].cols()).noalias() += wj[a].transpose() * wr;
      for (std::size_t b = 0; b < vars.size(); ++b) {
        const int off_b = layout.offset.at(vars[b]);
        const Eigen::MatrixXd block = wj[a].transpose() * wj[b];
        for (int r = 0; r < block.rows(); ++r) {
          for (int c = 0; c < block.cols(); ++c) {
            triplets.emplace_back(off_a + r, off_b + c, block(r, c));
          }
        }
      }
    }
  }
  // Structural diagonal so damping can be applied in place.
  for (int k = 0; k < layout.total_dof; ++k) triplets.emplace_back(k, k, 0.0);

  info.resize(layout.total_dof, layout.total_dof);
  info.setFromTriplets(triplets.begin(), triplets.end());
}

void Graph::retract(const Layout& layout, const Eigen::VectorXd& delta) {
  for (VariableId id : layout.order) {
    Variable& v = variables_.at(id);
    const int off = layout.offset.at(id);
    if (v.kind == VarKind::kPose) {
      v.pose = v.pose * exp_se3(delta.segment<6>(off));
    } else {
      v.vec += delta.segment(off, v.vec.size());
    }
  }
  info_valid_ = false;
}

std::vector<VariableId> Graph::factorless_variables() const {
  std::vector<VariableId> out;
  for (const auto& [id, adj] : adjacency_) {
    if (adj.empty()) out.push_back(id);
  }
  return out;
}

SolveReport Graph::solve(const SolveConfig& config) {
  SolveReport report;
  report.chi2_initial = chi2();
  report.chi2_final = report.chi2_initial;

  report.unconstrained = factorless_variables();
  if (factors_.empty() || !report.unconstrained.empty()) {
    return report;  // rank deficiency reported, nothing solved
  }

  const Layout layout = build_layout();
  Eigen::SparseMatrix<double> info;
  Eigen::VectorXd gradient;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool pattern_analyzed = false;

  double lambda = config.lambda_init;
  double chi2_cur = report.chi2_initial;
  bool converged = false;

  for (int iter = 0; iter < config.max_iterations && !converged; ++iter) {
    build_normal_equations(layout, info, gradient);
    if (!pattern_analyzed) {
      ldlt.analyzePattern(info);
      pattern_analyzed = true;
    }

    bool stepped = false;
    while (lambda <= kLambdaMax) {
      Eigen::SparseMatrix<double> damped = info;
      for (int k = 0; k < layout.total_dof; ++k) damped.coeffRef(k, k) += lambda;
      ldlt.factorize(damped);
      if (ldlt.info() != Eigen::Success) {
        lambda *= config.lambda_up;
        continue;
      }
      const Eigen::VectorXd delta = ldlt.solve(-gradient);
      if (!delta.allFinite()) {
        lambda *= config.lambda_up;
        continue;
      }

      const auto saved = variables_;
      retract(layout, delta);
      const double chi2_new = chi2();
      if (chi2_new <= chi2_cur) {
        report.iterations = iter + 1;
        report.damping_trace.push_back(lambda);
        const double decrease = chi2_cur - chi2_new;
        chi2_cur = chi2_new;
        lambda = std::max(lambda / config.lambda_down, 1e-12);
        stepped = true;
        if (decrease <= config.rel_decrease_tol * std::max(chi2_cur, 1e-300) ||
            delta.norm() < 1e-14) {
          converged = true;
        }
        break;
      }
      variables_ = saved;
      info_valid_ = false;
      lambda *= config.lambda_up;
    }
    if (!stepped) break;  // damping exhausted
  }

  // One undamped polish step: with small residual curvature this lands
  // linear problems on the exact normal-equation solution.
  if (converged && (report.damping_trace.empty() ||
                    report.damping_trace.back() > 1e-10)) {
    build_normal_equations(layout, info, gradient);
    if (!pattern_analyzed) ldlt.analyzePattern(info);
    ldlt.factorize(info);
    if (ldlt.info() == Eigen::Success) {
      const Eigen::VectorXd delta = ldlt.solve(-gradient);
      if (delta.allFinite()) {
        const auto saved = variables_;
        retract(layout, delta);
        const double chi2_new = chi2();
        if (chi2_new <= chi2_cur * (1.0 + 1e-12) + 1e-300) {
          chi2_cur = std::min(chi2_cur, chi2_new);
        } else {
          variables_ = saved;
          info_valid_ = false;
        }
      }
    }
  }

  report.converged = converged;
  report.chi2_final = chi2_cur;

  // Refresh the information factorization at the solution; doubles as the
  // rank-deficiency check.
  ensure_information();
  if (info_singular_) {
    const Eigen::VectorXd d = info_ldlt_->vectorD();
    const double dmax = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
    const auto& perm = info_ldlt_->permutationP().indices();
    std::set<VariableId> suspects;
    for (int i = 0; i < d.size(); ++i) {
      if (!(d(i) > kPivotRelTol * dmax)) {
        // Map the eliminated column back to its variable (best effort).
        const int orig = perm(i);
        for (VariableId id : info_layout_.order) {
          const int off = info_layout_.offset.at(id);
          if (orig >= off && orig < off + variables_.at(id).dof()) {
            suspects.insert(id);
            break;
          }
        }
      }
    }
    report.unconstrained.assign(suspects.begin(), suspects.end());
  }
  return report;
}

void Graph::ensure_information() {
  if (info_valid_) return;
  info_layout_ = build_layout();
  Eigen::SparseMatrix<double> info;
  Eigen::VectorXd gradient;
  build_normal_equations(info_layout_, info, gradient);
  info_ldlt_ =
      std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
  info_ldlt_->analyzePattern(info);
  info_ldlt_->factorize(info);
  info_singular_ = info_ldlt_->info() != Eigen::Success;
  if (!info_singular_) {
    const Eigen::VectorXd d = info_ldlt_->vectorD();
    const double dmax = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
    for (int i = 0; i < d.size(); ++i) {
      if (!(d(i) > kPivotRelTol * dmax)) {
        info_singular_ = true;
        break;
      }
    }
  }
  info_valid_ = true;
}

Eigen::MatrixXd Graph::marginal_covariance(VariableId id) {
  const Variable& v = variable(id);
  if (adjacency_.at(id).empty()) {
    throw std::runtime_error("marginal_covariance: variable is unconstrained");
  }
  ensure_information();
  if (info_singular_) {
    throw std::runtime_error(
        "marginal_covariance: information matrix is singular");
  }
  const int off = info_layout_.offset.at(id);
  const int dof = v.dof();
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(info_layout_.total_dof, dof);
  for (int k = 0; k < dof; ++k) rhs(off + k, k) = 1.0;
  const Eigen::MatrixXd cols = info_ldlt_->solve(rhs);
  Eigen::MatrixXd cov = cols.middleRows(off, dof);
  return 0.5 * (cov + cov.transpose());
}

void Graph::apply_window(double horizon_s, double now, WindowMode mode) {
  const double cutoff = now - horizon_s;
  std::vector<VariableId> to_remove;
  std::set<std::int64_t> owners_hit;
  for (const auto& [id, v] : variables_) {
    if (v.timestamp < cutoff) {
      to_remove.push_back(id);
      owners_hit.insert(v.owner);
    }
  }
  if (to_remove.empty()) return;

  struct PendingPrior {
    VariableId var;
    Variable value;
    Eigen::MatrixXd cov;
  };
  std::vector<PendingPrior> pending;

  if (mode == WindowMode::kMarginalPrior) {
    for (std::int64_t owner : owners_hit) {
      if (owner == kCameraOwner) continue;
      // Earliest retained timestamp of this owner.
      double t_min = std::numeric_limits<double>::infinity();
      for (const auto& [id, v] : variables_) {
        if (v.owner == owner && v.timestamp >= cutoff) {
          t_min = std::min(t_min, v.timestamp);
        }
      }
      if (!std::isfinite(t_min)) continue;  // owner fully aged out
      for (const auto& [id, v] : variables_) {
        if (v.owner == owner && v.timestamp == t_min) {
          pending.push_back({id, v, marginal_covariance(id)});
        }
      }
    }
  }

  for (VariableId id : to_remove) remove_variable(id);

  for (const auto& p : pending) {
    if (p.value.kind == VarKind::kPose) {
      add_factor(PosePriorFactor{p.var, p.value.pose}, p.cov);
    } else {
      add_factor(VectorPriorFactor{p.var, p.value.vec}, p.cov);
    }
  }
}

namespace {

json factor_model_to_json(const FactorModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PosePriorFactor>) {
          return json{{"kind", "pose_prior"},
                      {"var", m.var.value},
                      {"measurement", pose_to_json(m.measurement)}};
        } else if constexpr (std::is_same_v<T, ObjectPoseFactor>) {
          return json{{"kind", "object_pose"},
                      {"object", m.object.value},
                      {"camera", m.camera.value},
                      {"measurement", pose_to_json(m.measurement)}};
        } else if constexpr (std::is_same_v<T, BetweenFactor>) {
          return json{{"kind", "between"},
                      {"from", m.from.value},
                      {"to", m.to.value},
                      {"measurement", pose_to_json(m.measurement)}};
        } else if constexpr (std::is_same_v<T, VectorPriorFactor>) {
          return json{{"kind", "vector_prior"},
                      {"var", m.var.value},
                      {"mean", vector_to_json(m.mean)}};
        } else if constexpr (std::is_same_v<T, TwistSmoothnessFactor>) {
          return json{{"kind", "twist_smoothness"},
                      {"prev", m.prev.value},
                      {"next", m.next.value}};
        } else {
          return json{{"kind", "twist_integration"},
                      {"pose_prev", m.pose_prev.value},
                      {"pose_next", m.pose_next.value},
                      {"twist_next", m.twist_next.value},
                      {"dt", m.dt}};
        }
      },
      model);
}

FactorModel factor_model_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "pose_prior") {
    return PosePriorFactor{VariableId{j.at("var").get<std::uint64_t>()},
                           pose_from_json(j.at("measurement"))};
  }
  if (kind == "object_pose") {
    return ObjectPoseFactor{VariableId{j.at("object").get<std::uint64_t>()},
                            VariableId{j.at("camera").get<std::uint64_t>()},
                            pose_from_json(j.at("measurement"))};
  }
  if (kind == "between") {
    return BetweenFactor{VariableId{j.at("from").get<std::uint64_t>()},
                         VariableId{j.at("to").get<std::uint64_t>()},
                         pose_from_json(j.at("measurement"))};
  }
  if (kind == "vector_prior") {
    return VectorPriorFactor{VariableId{j.at("var").get<std::uint64_t>()},
                             vector_from_json(j.at("mean"))};
  }
  if (kind == "twist_smoothness") {
    return TwistSmoothnessFactor{VariableId{j.at("prev").get<std::uint64_t>()},
                                 VariableId{j.at("next").get<std::uint64_t>()}};
  }
  if (kind == "twist_integration") {
    return TwistIntegrationFactor{
        VariableId{j.at("pose_prev").get<std::uint64_t>()},
        VariableId{j.at("pose_next").get<std::uint64_t>()},
        VariableId{j.at("twist_next").get<std::uint64_t>()},
        j.at("dt").get<double>()};
  }
  throw std::invalid_argument("unknown factor kind: " + kind);
}

}  // namespace

std::string Graph::dump_json() const {
  json vars = json::array();
  for (const auto& [id, v] : variables_) {
    json jv{{"id", id.value},
            {"timestamp", v.timestamp},
            {"owner", v.owner}};
    if (v.kind == VarKind::kPose) {
      jv["kind"] = "pose";
      jv["value"] = pose_to_json(v.pose);
    } else {
      jv["kind"] = "vector";
      jv["value"] = vector_to_json(v.vec);
    }
    vars.push_back(std::move(jv));
  }
  json facs = json::array();
  for (const auto& [id, f] : factors_) {
    facs.push_back(json{{"id", id.value},
                        {"model", factor_model_to_json(f.model)},
                        {"covariance", matrix_to_json(f.covariance)}});
  }
  return json{{"variables", vars},
              {"factors", facs},
              {"next_variable", next_variable_},
              {"next_factor", next_factor_}}
      .dump(2);
}

Graph Graph::load_json(const std::string& text) {
  const json j = json::parse(text);
  Graph g;
  for (const auto& jv : j.at("variables")) {
    Variable v;
    v.id = VariableId{jv.at("id").get<std::uint64_t>()};
    v.timestamp = jv.at("timestamp").get<double>();
    v.owner = jv.at("owner").get<std::int64_t>();
    if (jv.at("kind").get<std::string>() == "pose") {
      v.kind = VarKind::kPose;
      v.pose = pose_from_json(jv.at("value"));
    } else {
      v.kind = VarKind::kVector;
      v.vec = vector_from_json(jv.at("value"));
    }
    g.adjacency_[v.id];
    g.variables_.emplace(v.id, std::move(v));
  }
  for (const auto& jf : j.at("factors")) {
    Factor f;
    f.id = FactorId{jf.at("id").get<std::uint64_t>()};
    f.model = factor_model_from_json(jf.at("model"));
    f.covariance = matrix_from_json(jf.at("covariance"));
    f.sqrt_info = inverse_cholesky_factor(f.covariance);
    for (VariableId v : connected_variables(f.model)) {
      if (!g.has_variable(v)) {
        throw std::invalid_argument("graph json: factor references unknown variable");
      }
      g.adjacency_[v].insert(f.id);
    }
    g.factors_.emplace(f.id, std::move(f));
  }
  g.next_variable_ = j.at("next_variable").get<std::uint64_t>();
  g.next_factor_ = j.at("next_factor").get<std::uint64_t>();
  return g;
}

}  // namespace fgtrack
