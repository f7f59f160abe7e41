#pragma once

// Sparse factor graph over SE(3) pose and Euclidean vector variables with
// Levenberg-Marquardt solving, marginal covariance recovery and fixed-lag
// window maintenance.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "fgtrack/factors.hpp"
#include "fgtrack/lie.hpp"

namespace fgtrack {

struct VariableId {
  std::uint64_t value = 0;
  auto operator<=>(const VariableId&) const = default;
};
struct FactorId {
  std::uint64_t value = 0;
  auto operator<=>(const FactorId&) const = default;
};

// Owner of the camera pose chain; track owners are non-negative.
inline constexpr std::int64_t kCameraOwner = -1;

enum class VarKind { kPose, kVector };

struct Variable {
  VariableId id;
  VarKind kind = VarKind::kPose;
  double timestamp = 0.0;
  std::int64_t owner = kCameraOwner;
  Pose pose;             // valid when kind == kPose
  Eigen::VectorXd vec;   // valid when kind == kVector

  int dof() const {
    return kind == VarKind::kPose ? 6 : static_cast<int>(vec.size());
  }
};

// r = Log(T^-1 * measurement); anchors a pose variable. Used for the
// camera pose measurements and for window-boundary marginals.
struct PosePriorFactor {
  VariableId var;
  Pose measurement;
};

// r = Log(T_object^-1 * T_camera * measurement), the detection factor.
struct ObjectPoseFactor {
  VariableId object;
  VariableId camera;
  Pose measurement;  // measured object pose in the camera frame
};

// r = Log(measurement^-1 * A^-1 * B). With identity measurement this is
// the constant-pose motion residual.
struct BetweenFactor {
  VariableId from;
  VariableId to;
  Pose measurement;
};

// r = x - mean on a vector variable.
struct VectorPriorFactor {
  VariableId var;
  Eigen::VectorXd mean;
};

// r = x_next - x_prev, the constant-velocity smoothness residual.
struct TwistSmoothnessFactor {
  VariableId prev;
  VariableId next;
};

// r = Log(T_next^-1 * T_prev * exp(dt * twist_next)); couples the twist
// chain back to the pose chain.
struct TwistIntegrationFactor {
  VariableId pose_prev;
  VariableId pose_next;
  VariableId twist_next;
  double dt = 0.0;
};

using FactorModel =
    std::variant<PosePriorFactor, ObjectPoseFactor, BetweenFactor,
                 VectorPriorFactor, TwistSmoothnessFactor,
                 TwistIntegrationFactor>;

struct Factor {
  FactorId id;
  FactorModel model;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd sqrt_info;  // inverse lower Cholesky factor of covariance
};

struct SolveConfig {
  int max_iterations = 50;
  double lambda_init = 1e-4;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  double rel_decrease_tol = 1e-8;
};

struct SolveReport {
  int iterations = 0;
  double chi2_initial = 0.0;
  double chi2_final = 0.0;
  bool converged = false;
  std::vector<double> damping_trace;
  std::vector<VariableId> unconstrained;
};

enum class WindowMode { kMarginalPrior, kDelete };

class Graph {
 public:
  VariableId add_pose_variable(const Pose& initial, double timestamp,
                               std::int64_t owner);
  VariableId add_vector_variable(const Eigen::VectorXd& initial,
                                 double timestamp, std::int64_t owner);
  FactorId add_factor(FactorModel model, const Eigen::MatrixXd& covariance);

  void remove_factor(FactorId id);
  // Removes the variable together with every factor referencing it.
  void remove_variable(VariableId id);

  bool has_variable(VariableId id) const { return variables_.count(id) > 0; }
  const Variable& variable(VariableId id) const;
  const Pose& pose_value(VariableId id) const;
  const Eigen::VectorXd& vector_value(VariableId id) const;
  void set_pose_value(VariableId id, const Pose& value);
  void set_vector_value(VariableId id, const Eigen::VectorXd& value);

  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_factors() const { return factors_.size(); }
  std::vector<VariableId> variable_ids() const;
  std::vector<FactorId> factor_ids() const;
  const Factor& factor(FactorId id) const;

  // Residual of one factor at the current variable values (unwhitened).
  Eigen::VectorXd residual_of(FactorId id) const;
  // Whitened residual and Jacobian blocks w.r.t. each connected variable,
  // in the order reported by connected_variables().
  void linearize_factor(FactorId id, Eigen::VectorXd& whitened_residual,
                        std::vector<Eigen::MatrixXd>& whitened_jacobians) const;
  static std::vector<VariableId> connected_variables(const FactorModel& model);

  double chi2() const;

  SolveReport solve(const SolveConfig& config = {});

  // 6x6 (pose/twist) or dxd block of the inverse information matrix at the
  // current linearization point. Throws if the information is singular.
  Eigen::MatrixXd marginal_covariance(VariableId id);

  // Drops variables older than now - horizon_s. In marginal-prior mode each
  // non-camera owner with removed variables gets priors on its earliest
  // retained variables so the window does not forget the past.
  void apply_window(double horizon_s, double now,
                    WindowMode mode = WindowMode::kMarginalPrior);

  std::string dump_json() const;
  static Graph load_json(const std::string& text);

 private:
  struct Layout {
    std::vector<VariableId> order;
    std::map<VariableId, int> offset;
    int total_dof = 0;
  };

  Layout build_layout() const;
  Eigen::VectorXd factor_residual(const Factor& f) const;
  void factor_jacobians(const Factor& f,
                        std::vector<Eigen::MatrixXd>& jacobians) const;
  void build_normal_equations(const Layout& layout,
                              Eigen::SparseMatrix<double>& info,
                              Eigen::VectorXd& gradient) const;
  void retract(const Layout& layout, const Eigen::VectorXd& delta);
  void ensure_information();
  std::vector<VariableId> factorless_variables() const;

  std::map<VariableId, Variable> variables_;
  std::map<FactorId, Factor> factors_;
  std::map<VariableId, std::set<FactorId>> adjacency_;
  std::uint64_t next_variable_ = 1;
  std::uint64_t next_factor_ = 1;

  // Undamped information factorization at the current values, reused by
  // marginal queries until the graph is mutated. Owned through a pointer
  // because Eigen solvers are neither copyable nor movable.
  bool info_valid_ = false;
  Layout info_layout_;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> info_ldlt_;
  bool info_singular_ = false;
};

}  // namespace fgtrack
