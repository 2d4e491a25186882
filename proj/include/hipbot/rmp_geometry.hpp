#pragma once

#include "hipbot/types.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string_view>

namespace hipbot::rmp {

// Differentiable map from configuration space into a task space.
struct TaskMap {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> map;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
};

TaskMap identity_map(int dim);

// A motion policy expressed in its task space: a forcing term and a
// symmetric positive semidefinite importance metric, both functions of the
// task-space position/velocity and the environment snapshot.
struct TaskRmp {
    std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& x_dot,
                                  const EnvContext& ctx)>
        force;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd& x, const Eigen::VectorXd& x_dot,
                                  const EnvContext& ctx)>
        metric;
};

// Policy pulled back to configuration space: f = J^T f_x, M = J^T M_x J.
struct PulledRmp {
    Eigen::VectorXd f;
    Eigen::MatrixXd M;
};

// Evaluates the task map and policy at `state` and pulls both back through
// the Jacobian.  Throws std::runtime_error naming `label` if anything
// non-finite comes out.
PulledRmp pullback(const TaskRmp& rmp, const TaskMap& task_map, const State& state,
                   std::string_view label = "policy");

// Moore-Penrose pseudo-inverse of a symmetric matrix via eigendecomposition;
// eigenvalues at or below `eigen_floor` are treated as exact zeros.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& sym, double eigen_floor = 1e-9);

// Metric-weighted combination of pulled policies:
//   a = pinv(sum_i w_i M_i) * (sum_i w_i f_i).
// Weights are normalized by their maximum before summing, so scaling all
// weights by k > 0 leaves the result unchanged; all-zero weights (or an
// all-zero weighted metric) yield zero acceleration.  Negative weights or a
// size mismatch throw std::invalid_argument.
Eigen::VectorXd blend(std::span<const PulledRmp> pulled, std::span<const double> weights);

// Quadratic deviation of an acceleration from a policy's own preference:
//   E = 1/2 (a - pinv(M) f)^T M (a - pinv(M) f).
double energy(const PulledRmp& rmp, const Eigen::VectorXd& acceleration);

}  // namespace hipbot::rmp
