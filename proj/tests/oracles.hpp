#pragma once

// Test-only reference implementations: central-difference factor Jacobians,
// a dense brute-force Gauss-Newton solver and explicit dense marginals.
// These drive the graph exclusively through its public value accessors so
// they stay independent of the sparse solver and the analytic Jacobians
// they are used to check.

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "fgtrack/graph.hpp"

namespace fgtrack::testoracle {

inline void perturb(Graph& g, VariableId id, const Eigen::VectorXd& delta) {
  const Variable& v = g.variable(id);
  if (v.kind == VarKind::kPose) {
    g.set_pose_value(id, v.pose * exp_se3(Tangent6(delta)));
  } else {
    g.set_vector_value(id, v.vec + delta);
  }
}

// Central-difference Jacobians of the raw residual w.r.t. each connected
// variable, step 1e-6.
inline std::vector<Eigen::MatrixXd> numeric_jacobians(Graph& g, FactorId fid,
                                                      double step = 1e-6) {
  const Factor& f = g.factor(fid);
  const auto vars = Graph::connected_variables(f.model);
  std::vector<Eigen::MatrixXd> jacobians;
  for (VariableId vid : vars) {
    const Variable saved = g.variable(vid);
    const int dof = saved.dof();
    Eigen::MatrixXd j(g.residual_of(fid).size(), dof);
    for (int k = 0; k < dof; ++k) {
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(dof);
      delta(k) = step;
      perturb(g, vid, delta);
      const Eigen::VectorXd plus = g.residual_of(fid);
      if (saved.kind == VarKind::kPose) {
        g.set_pose_value(vid, saved.pose);
      } else {
        g.set_vector_value(vid, saved.vec);
      }
      delta(k) = -step;
      perturb(g, vid, delta);
      const Eigen::VectorXd minus = g.residual_of(fid);
      if (saved.kind == VarKind::kPose) {
        g.set_pose_value(vid, saved.pose);
      } else {
        g.set_vector_value(vid, saved.vec);
      }
      j.col(k) = (plus - minus) / (2.0 * step);
    }
    jacobians.push_back(std::move(j));
  }
  return jacobians;
}

struct DenseLayout {
  std::vector<VariableId> order;
  std::map<VariableId, int> offset;
  int total_dof = 0;
};

inline DenseLayout dense_layout(const Graph& g) {
  DenseLayout layout;
  layout.order = g.variable_ids();
  int off = 0;
  for (VariableId id : layout.order) {
    layout.offset[id] = off;
    off += g.variable(id).dof();
  }
  layout.total_dof = off;
  return layout;
}

// Whitener of one factor computed independently from its covariance.
inline Eigen::MatrixXd whitener(const Graph& g, FactorId fid) {
  const Eigen::MatrixXd cov = g.factor(fid).covariance;
  const Eigen::MatrixXd lower = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
  return lower.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
}

inline Eigen::MatrixXd dense_information(Graph& g, const DenseLayout& layout) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(layout.total_dof, layout.total_dof);
  for (FactorId fid : g.factor_ids()) {
    const Eigen::MatrixXd w = whitener(g, fid);
    const auto vars = Graph::connected_variables(g.factor(fid).model);
    const auto jacs = numeric_jacobians(g, fid);
    for (std::size_t a = 0; a < vars.size(); ++a) {
      const Eigen::MatrixXd ja = w * jacs[a];
      for (std::size_t b = 0; b < vars.size(); ++b) {
        const Eigen::MatrixXd jb = w * jacs[b];
        h.block(layout.offset.at(vars[a]), layout.offset.at(vars[b]),
                ja.cols(), jb.cols()) += ja.transpose() * jb;
      }
    }
  }
  return h;
}

// Plain dense Gauss-Newton with numeric Jacobians; no damping, no sparsity.
inline void dense_gauss_newton(Graph& g, int max_iterations = 100,
                               double tol = 1e-14) {
  const DenseLayout layout = dense_layout(g);
  for (int iter = 0; iter < max_iterations; ++iter) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(layout.total_dof, layout.total_dof);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout.total_dof);
    for (FactorId fid : g.factor_ids()) {
      const Eigen::MatrixXd w = whitener(g, fid);
      const Eigen::VectorXd r = w * g.residual_of(fid);
      const auto vars = Graph::connected_variables(g.factor(fid).model);
      const auto jacs = numeric_jacobians(g, fid);
      for (std::size_t a = 0; a < vars.size(); ++a) {
        const Eigen::MatrixXd ja = w * jacs[a];
        grad.segment(layout.offset.at(vars[a]), ja.cols()).noalias() +=
            ja.transpose() * r;
        for (std::size_t b = 0; b < vars.size(); ++b) {
          const Eigen::MatrixXd jb = w * jacs[b];
          h.block(layout.offset.at(vars[a]), layout.offset.at(vars[b]),
                  ja.cols(), jb.cols()) += ja.transpose() * jb;
        }
      }
    }
    const Eigen::VectorXd delta = h.fullPivLu().solve(-grad);
    for (VariableId id : layout.order) {
      perturb(g, id, delta.segment(layout.offset.at(id), g.variable(id).dof()));
    }
    if (delta.norm() < tol) break;
  }
}

// Marginal covariance as the block of the explicit dense inverse.
inline Eigen::MatrixXd dense_marginal(Graph& g, VariableId id) {
  const DenseLayout layout = dense_layout(g);
  const Eigen::MatrixXd h = dense_information(g, layout);
  const Eigen::MatrixXd cov = h.inverse();
  const int off = layout.offset.at(id);
  const int dof = g.variable(id).dof();
  return cov.block(off, off, dof, dof);
}

}  // namespace fgtrack::testoracle
