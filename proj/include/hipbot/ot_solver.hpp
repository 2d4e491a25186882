#pragma once

#include <Eigen/Dense>
#include <string>

namespace hipbot::ot {

using MassVector = Eigen::VectorXd;
using CostMatrix = Eigen::MatrixXd;

// Tuning knobs for the scaling solvers.  `tolerance` is relative: the
// iteration stops when the per-sweep change of the log scaling vectors drops
// below it (and, for the balanced solver, the marginal error per unit of
// transported mass does too).
struct SolverConfig {
    double lambda_entropy = 1e-2;
    double lambda_kl = 1.0;  // marginal relaxation strength, unbalanced solver only
    int max_iterations = 1000;
    double tolerance = 1e-6;
    bool stabilized = true;  // iterate in the log domain
};

struct TransportPlan {
    Eigen::MatrixXd entries;
    bool converged = false;
    int iterations = 0;
    // Absolute max-norm deviation of the returned plan's marginals from the
    // requested ones.  Informational for the unbalanced solver, where the
    // marginals are only softly enforced.
    double marginal_error = 0.0;
};

// Entropy of a nonnegative matrix, -sum p*(log p - 1), with 0*log 0 = 0.
double entropy(const Eigen::MatrixXd& plan);

// Generalized KL divergence sum w*log(w/z) - sum w + sum z with 0*log 0 = 0.
// Throws std::invalid_argument when some z entry is <= 0 while the paired w
// entry is positive, or any entry is negative.
double generalized_kl(const MassVector& w, const MassVector& z);

// Entropic optimal transport between row_marginal and col_marginal (equal
// total mass required; zero entries allowed and their rows/columns stay
// exactly zero in the plan).  Non-convergence within max_iterations is
// reported through the flag, never an exception.
TransportPlan solve_balanced(const CostMatrix& cost, const MassVector& row_marginal,
                             const MassVector& col_marginal, const SolverConfig& config);

// Unbalanced entropic transport: marginal constraints replaced by soft
// divergence penalties of strength lambda_kl against strictly positive
// priors.  Scaling updates are damped by the exponent
// lambda_kl / (lambda_kl + lambda_entropy).  Optional warm starts are the
// logs of the initial scaling vectors.  Every plan entry is strictly
// positive.  Note: mass on an entry grows like exp(-cost/lambda_kl)-style
// factors, so strongly negative costs can push entries past double range;
// costs in this toolkit are nonnegative by construction.
TransportPlan solve_unbalanced(const CostMatrix& cost, const MassVector& row_prior,
                               const MassVector& col_prior, const SolverConfig& config,
                               const Eigen::VectorXd& row_log_scale_init = {},
                               const Eigen::VectorXd& col_log_scale_init = {});

// One-line JSON record of a solve, for debug streams.
std::string solve_debug_json(const CostMatrix& cost, const MassVector& row,
                             const MassVector& col, const TransportPlan& plan);

}  // namespace hipbot::ot
