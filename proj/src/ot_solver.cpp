#include "hipbot/ot_solver.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hipbot::ot {
namespace {

void check_problem(const CostMatrix& cost, const MassVector& row, const MassVector& col) {
    if (cost.rows() != row.size() || cost.cols() != col.size())
        throw std::invalid_argument("transport problem dimensions disagree");
    if (cost.size() == 0)
        throw std::invalid_argument("transport problem is empty");
    if (!cost.allFinite())
        throw std::invalid_argument("cost matrix has non-finite entries");
    if (!row.allFinite() || !col.allFinite())
        throw std::invalid_argument("marginals must be finite");
    if ((row.array() < 0).any() || (col.array() < 0).any())
        throw std::invalid_argument("marginals must be nonnegative");
}

void check_config(const SolverConfig& c) {
    if (!(c.lambda_entropy > 0) || !(c.tolerance > 0) || c.max_iterations < 1)
        throw std::invalid_argument("solver config requires positive lambda, positive tolerance, max_iterations >= 1");
}

double log_sum_exp(const Eigen::ArrayXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v - m).exp().sum());
}

// One scaling problem on the active (positive-marginal) block.
struct ScaleProblem {
    Eigen::MatrixXd cost;
    Eigen::ArrayXd row_mass;  // marginals (balanced) or priors (unbalanced)
    Eigen::ArrayXd col_mass;
    double lambda = 1e-2;
    double exponent = 1.0;  // 1 = hard marginals; <1 damps toward soft priors
    double kl_strength = 0.0;  // lambda_kl when marginals are soft, else 0
    double tolerance = 1e-6;
    int max_iterations = 1000;
    bool require_marginals = false;  // also demand marginal feasibility to stop
    double mass_scale = 1.0;         // total mass, for relative marginal stopping
};

// Closed-form solve for uniform potential shifts (delta on rows, eps on
// columns) that restore both total-mass optimality conditions
//   sum_ij P_ij = sum_i n_i e^(-f_i/kl) = sum_j m_j e^(-g_j/kl).
// The damped sweeps contract these two translation modes only at rate
// (kl/(kl+lambda))^2 per sweep, which is hopeless for large kl; solving them
// exactly each sweep restores the usual convergence speed.
struct ShiftPair {
    double row = 0.0;
    double col = 0.0;
};

ShiftPair translation_shifts(double log_total, double log_row_target, double log_col_target,
                             double lambda, double kl_strength) {
    const double a = log_row_target - log_total;
    const double b = log_col_target - log_total;
    const double sum = (a + b) / (2.0 / lambda + 1.0 / kl_strength);
    const double diff = kl_strength * (a - b);
    return {0.5 * (sum + diff), 0.5 * (sum - diff)};
}

struct ScaleResult {
    Eigen::MatrixXd plan;
    bool converged = false;
    int iterations = 0;
    Eigen::ArrayXd f, g;  // final log-domain potentials, for warm restarts
};

ScaleResult scale_log_domain(const ScaleProblem& p, Eigen::ArrayXd f, Eigen::ArrayXd g) {
    const Eigen::Index n = p.cost.rows();
    const Eigen::Index m = p.cost.cols();
    const double lam = p.lambda;
    const Eigen::ArrayXd log_row = p.row_mass.log();
    const Eigen::ArrayXd log_col = p.col_mass.log();
    ScaleResult out;

    auto build_plan = [&]() {
        Eigen::MatrixXd plan(n, m);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                plan(i, j) = std::exp((f[i] + g[j] - p.cost(i, j)) / lam);
        return plan;
    };

    Eigen::ArrayXd f_old(n), g_old(m);
    for (int it = 1; it <= p.max_iterations; ++it) {
        f_old = f;
        g_old = g;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::ArrayXd arg = (g - p.cost.row(i).transpose().array()) / lam;
            f[i] = p.exponent * lam * (log_row[i] - log_sum_exp(arg));
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            const Eigen::ArrayXd arg = (f - p.cost.col(j).array()) / lam;
            g[j] = p.exponent * lam * (log_col[j] - log_sum_exp(arg));
        }
        if (p.kl_strength > 0) {
            Eigen::ArrayXd log_row_sums(n);
            for (Eigen::Index i = 0; i < n; ++i)
                log_row_sums[i] = f[i] / lam + log_sum_exp((g - p.cost.row(i).transpose().array()) / lam);
            const ShiftPair s = translation_shifts(
                log_sum_exp(log_row_sums), log_sum_exp(log_row - f / p.kl_strength),
                log_sum_exp(log_col - g / p.kl_strength), lam, p.kl_strength);
            f += s.row;
            g += s.col;
        }
        const double change =
            std::max((f - f_old).abs().maxCoeff(), (g - g_old).abs().maxCoeff()) / lam;
        out.iterations = it;
        if (change < p.tolerance) {
            if (!p.require_marginals) {
                out.converged = true;
                break;
            }
            Eigen::MatrixXd plan = build_plan();
            const double err = std::max(
                (plan.rowwise().sum().array() - p.row_mass).abs().maxCoeff(),
                (plan.colwise().sum().transpose().array() - p.col_mass).abs().maxCoeff());
            if (err / p.mass_scale < p.tolerance) {
                out.plan = std::move(plan);
                out.converged = true;
                out.f = f;
                out.g = g;
                return out;
            }
        }
    }
    out.plan = build_plan();
    out.f = f;
    out.g = g;
    return out;
}

// Plain scaling-vector iteration; cheap, but can underflow/overflow on hard
// problems.  Sets `failed` instead of producing non-finite plans.
ScaleResult scale_plain(const ScaleProblem& p, Eigen::ArrayXd u, Eigen::ArrayXd v, bool& failed) {
    const Eigen::Index n = p.cost.rows();
    const Eigen::Index m = p.cost.cols();
    const Eigen::MatrixXd kernel = (-p.cost / p.lambda).array().exp().matrix();
    ScaleResult out;
    failed = false;

    auto raise = [&](const Eigen::ArrayXd& x) -> Eigen::ArrayXd {
        if (p.exponent == 1.0) return x;
        return x.pow(p.exponent);
    };
    auto healthy = [](const Eigen::ArrayXd& x) {
        return x.allFinite() && (x > 0).all();
    };
    auto build_plan = [&]() {
        return Eigen::MatrixXd(u.matrix().asDiagonal() * kernel * v.matrix().asDiagonal());
    };

    Eigen::ArrayXd u_old(n), v_old(m);
    for (int it = 1; it <= p.max_iterations; ++it) {
        u_old = u;
        v_old = v;
        u = raise(p.row_mass / (kernel * v.matrix()).array());
        if (!healthy(u)) { failed = true; return out; }
        v = raise(p.col_mass / (kernel.transpose() * u.matrix()).array());
        if (!healthy(v)) { failed = true; return out; }
        if (p.kl_strength > 0) {
            const double total = u.matrix().dot(kernel * v.matrix());
            const double row_target = (p.row_mass * u.pow(-p.lambda / p.kl_strength)).sum();
            const double col_target = (p.col_mass * v.pow(-p.lambda / p.kl_strength)).sum();
            if (!(total > 0) || !std::isfinite(total) || !std::isfinite(row_target) ||
                !std::isfinite(col_target)) {
                failed = true;
                return out;
            }
            const ShiftPair s = translation_shifts(std::log(total), std::log(row_target),
                                                   std::log(col_target), p.lambda, p.kl_strength);
            u *= std::exp(s.row / p.lambda);
            v *= std::exp(s.col / p.lambda);
            if (!healthy(u) || !healthy(v)) { failed = true; return out; }
        }
        const double change = std::max((u / u_old).log().abs().maxCoeff(),
                                       (v / v_old).log().abs().maxCoeff());
        out.iterations = it;
        if (change < p.tolerance) {
            if (!p.require_marginals) {
                out.converged = true;
                break;
            }
            Eigen::MatrixXd plan = build_plan();
            const double err = std::max(
                (plan.rowwise().sum().array() - p.row_mass).abs().maxCoeff(),
                (plan.colwise().sum().transpose().array() - p.col_mass).abs().maxCoeff());
            if (err / p.mass_scale < p.tolerance) {
                out.plan = std::move(plan);
                out.converged = true;
                return out;
            }
        }
    }
    out.plan = build_plan();
    if (!out.plan.allFinite()) failed = true;
    return out;
}

std::vector<Eigen::Index> positive_indices(const MassVector& v) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v[i] > 0) idx.push_back(i);
    return idx;
}

double full_marginal_error(const Eigen::MatrixXd& plan, const MassVector& row,
                           const MassVector& col) {
    return std::max((plan.rowwise().sum() - row).cwiseAbs().maxCoeff(),
                    (plan.colwise().sum().transpose() - col).cwiseAbs().maxCoeff());
}

}  // namespace

double entropy(const Eigen::MatrixXd& plan) {
    if (!plan.allFinite() || (plan.array() < 0).any())
        throw std::invalid_argument("entropy needs finite nonnegative entries");
    double h = 0.0;
    for (Eigen::Index j = 0; j < plan.cols(); ++j)
        for (Eigen::Index i = 0; i < plan.rows(); ++i) {
            const double x = plan(i, j);
            if (x > 0) h -= x * (std::log(x) - 1.0);
        }
    return h;
}

double generalized_kl(const MassVector& w, const MassVector& z) {
    if (w.size() != z.size())
        throw std::invalid_argument("generalized_kl needs equal-size vectors");
    if (!w.allFinite() || !z.allFinite() || (w.array() < 0).any() || (z.array() < 0).any())
        throw std::invalid_argument("generalized_kl needs finite nonnegative entries");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (z[i] == 0.0) {
            if (w[i] > 0)
                throw std::invalid_argument("generalized_kl: zero reference with positive mass");
            continue;  // 0 log(0/0) - 0 + 0
        }
        if (w[i] > 0) acc += w[i] * std::log(w[i] / z[i]);
        acc += z[i] - w[i];
    }
    return acc;
}

TransportPlan solve_balanced(const CostMatrix& cost, const MassVector& row_marginal,
                             const MassVector& col_marginal, const SolverConfig& config) {
    check_problem(cost, row_marginal, col_marginal);
    check_config(config);
    const double row_total = row_marginal.sum();
    const double col_total = col_marginal.sum();
    if (row_total <= 0 || col_total <= 0)
        throw std::invalid_argument("balanced marginals need positive total mass");
    if (std::abs(row_total - col_total) > 1e-9 * std::max({1.0, row_total, col_total}))
        throw std::invalid_argument("balanced marginals must carry equal total mass");

    const auto rows = positive_indices(row_marginal);
    const auto cols = positive_indices(col_marginal);
    ScaleProblem p;
    p.cost.resize(rows.size(), cols.size());
    p.row_mass.resize(rows.size());
    p.col_mass.resize(cols.size());
    for (size_t i = 0; i < rows.size(); ++i) p.row_mass[i] = row_marginal[rows[i]];
    for (size_t j = 0; j < cols.size(); ++j) p.col_mass[j] = col_marginal[cols[j]];
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j)
            p.cost(i, j) = cost(rows[i], cols[j]);
    p.lambda = config.lambda_entropy;
    p.exponent = 1.0;
    p.tolerance = config.tolerance;
    p.max_iterations = config.max_iterations;
    p.require_marginals = true;
    p.mass_scale = row_total;

    ScaleResult r;
    if (config.stabilized) {
        // Temperature continuation: when lambda sits far below the cost scale
        // a cold start converges glacially, so walk lambda down a decade at a
        // time and hand each stage's potentials to the next.  The potentials
        // approach the exact dual prices as lambda falls, which makes the
        // final stage cheap.  The ladder is relative to the cost range, so
        // jointly rescaling costs and lambda replays the same trajectory.
        Eigen::ArrayXd f = Eigen::ArrayXd::Zero(rows.size());
        Eigen::ArrayXd g = Eigen::ArrayXd::Zero(cols.size());
        int spent = 0;
        const double range =
            p.cost.size() > 0 ? p.cost.maxCoeff() - p.cost.minCoeff() : 0.0;
        for (double warm = 0.1 * range; warm > 1.5 * p.lambda && spent < p.max_iterations;
             warm /= 10.0) {
            ScaleProblem stage = p;
            stage.lambda = warm;
            stage.tolerance = std::max(p.tolerance, 1e-4);
            stage.max_iterations = std::min(p.max_iterations - spent, 500);
            stage.require_marginals = false;
            const ScaleResult warmed = scale_log_domain(stage, f, g);
            f = warmed.f;
            g = warmed.g;
            spent += warmed.iterations;
        }
        ScaleProblem last = p;
        last.max_iterations = p.max_iterations - spent;
        r = scale_log_domain(last, f, g);
        r.iterations += spent;
    } else {
        bool failed = false;
        r = scale_plain(p, Eigen::ArrayXd::Ones(rows.size()), Eigen::ArrayXd::Ones(cols.size()), failed);
        if (failed)
            r = scale_log_domain(p, Eigen::ArrayXd::Zero(rows.size()), Eigen::ArrayXd::Zero(cols.size()));
    }

    TransportPlan plan;
    plan.entries = Eigen::MatrixXd::Zero(cost.rows(), cost.cols());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j)
            plan.entries(rows[i], cols[j]) = r.plan(i, j);
    plan.converged = r.converged;
    plan.iterations = r.iterations;
    plan.marginal_error = full_marginal_error(plan.entries, row_marginal, col_marginal);
    return plan;
}

TransportPlan solve_unbalanced(const CostMatrix& cost, const MassVector& row_prior,
                               const MassVector& col_prior, const SolverConfig& config,
                               const Eigen::VectorXd& row_log_scale_init,
                               const Eigen::VectorXd& col_log_scale_init) {
    check_problem(cost, row_prior, col_prior);
    check_config(config);
    if (!(config.lambda_kl > 0))
        throw std::invalid_argument("unbalanced solver needs lambda_kl > 0");
    if ((row_prior.array() <= 0).any() || (col_prior.array() <= 0).any())
        throw std::invalid_argument("unbalanced priors must be strictly positive");
    if (row_log_scale_init.size() != 0 && row_log_scale_init.size() != cost.rows())
        throw std::invalid_argument("row warm start has wrong size");
    if (col_log_scale_init.size() != 0 && col_log_scale_init.size() != cost.cols())
        throw std::invalid_argument("column warm start has wrong size");

    ScaleProblem p;
    p.cost = cost;
    p.row_mass = row_prior.array();
    p.col_mass = col_prior.array();
    p.lambda = config.lambda_entropy;
    p.exponent = config.lambda_kl / (config.lambda_kl + config.lambda_entropy);
    p.kl_strength = config.lambda_kl;
    p.tolerance = config.tolerance;
    p.max_iterations = config.max_iterations;
    p.require_marginals = false;

    Eigen::ArrayXd f0 = Eigen::ArrayXd::Zero(cost.rows());
    Eigen::ArrayXd g0 = Eigen::ArrayXd::Zero(cost.cols());
    if (row_log_scale_init.size() > 0) f0 = config.lambda_entropy * row_log_scale_init.array();
    if (col_log_scale_init.size() > 0) g0 = config.lambda_entropy * col_log_scale_init.array();

    ScaleResult r;
    if (config.stabilized) {
        r = scale_log_domain(p, f0, g0);
    } else {
        bool failed = false;
        r = scale_plain(p, (f0 / config.lambda_entropy).exp(), (g0 / config.lambda_entropy).exp(),
                        failed);
        if (failed) r = scale_log_domain(p, f0, g0);
    }

    TransportPlan plan;
    // Strict positivity: exact zeros would break downstream log-based
    // diagnostics, so floor at the smallest positive double.
    plan.entries = r.plan.cwiseMax(std::numeric_limits<double>::denorm_min());
    plan.converged = r.converged;
    plan.iterations = r.iterations;
    plan.marginal_error = full_marginal_error(plan.entries, row_prior, col_prior);
    return plan;
}

std::string solve_debug_json(const CostMatrix& cost, const MassVector& row,
                             const MassVector& col, const TransportPlan& plan) {
    nlohmann::json j;
    auto matrix_rows = [](const Eigen::MatrixXd& m) {
        std::vector<std::vector<double>> rows;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            std::vector<double> r(m.cols());
            for (Eigen::Index k = 0; k < m.cols(); ++k) r[k] = m(i, k);
            rows.push_back(std::move(r));
        }
        return rows;
    };
    j["cost"] = matrix_rows(cost);
    j["row_marginal"] = std::vector<double>(row.data(), row.data() + row.size());
    j["col_marginal"] = std::vector<double>(col.data(), col.data() + col.size());
    j["plan"] = matrix_rows(plan.entries);
    j["iterations"] = plan.iterations;
    j["converged"] = plan.converged;
    j["marginal_error"] = plan.marginal_error;
    return j.dump();
}

}  // namespace hipbot::ot
