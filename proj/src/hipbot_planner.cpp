#include "hipbot/hipbot_planner.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hipbot::planner {

void RolloutDynamics::advance(State& s, const Vec2& action) const {
    s.q_dot += action * dt;
    const double speed = s.q_dot.norm();
    if (speed > arena.v_max) s.q_dot *= arena.v_max / speed;
    s.q += s.q_dot * dt;
    for (auto& ob : s.context.obstacles) ob.center += ob.velocity * dt;
}

RolloutTrace rollout_expert(const State& state, const experts::ExpertPool& pool, int expert_index,
                            const RolloutDynamics& dynamics, int horizon) {
    if (horizon < 1) throw std::invalid_argument("rollout horizon must be >= 1");
    RolloutTrace trace;
    trace.states.reserve(horizon);
    State s = state;
    for (int t = 0; t < horizon; ++t) {
        const rmp::PulledRmp pulled = pool.evaluate_one(s, expert_index);
        Eigen::VectorXd a;
        if (pulled.M.cwiseAbs().maxCoeff() < 1e-12) {
            a = pulled.f;  // zero-metric experts still follow their force
        } else {
            a = rmp::pseudo_inverse(pulled.M) * pulled.f;
        }
        if (!a.allFinite()) {
            trace.truncated = true;
            break;
        }
        dynamics.advance(s, Vec2(a));
        trace.states.push_back(s);
    }
    return trace;
}

TraceCost score_trace(const RolloutTrace& trace, const PlannerConfig& config, double agent_radius) {
    TraceCost out;
    out.truncated = trace.truncated || trace.states.empty();
    if (trace.states.empty()) return out;
    const double two_margin_sq = 2.0 * config.collision_margin * config.collision_margin;
    for (const State& s : trace.states) {
        const Vec2 q(s.q);
        out.goal += (q - s.context.goal).norm();
        const double sd = world::min_sdf(q, s.context.obstacles) - agent_radius;
        if (std::isfinite(sd)) {
            const double over = std::max(sd, 0.0);
            out.collision += std::exp(-over * over / two_margin_sq);
        }
    }
    out.goal /= trace.states.size();
    out.collision /= trace.states.size();
    return out;
}

Eigen::MatrixXd build_cost_matrix(const State& state, const experts::ExpertPool& pool,
                                  const PlannerConfig& config, const RolloutDynamics& dynamics,
                                  bool parallel) {
    const int n = pool.size();
    const int m = pool.agent_count();
    Eigen::MatrixXd goal_term(n, m), collision_term(n, m);
    Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> truncated(n, m);
    bool failed = false;

#ifdef _OPENMP
#pragma omp parallel for collapse(2) if (parallel)
#endif
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            try {
                const RolloutTrace trace = rollout_expert(state, pool, i, dynamics, config.horizon);
                const TraceCost tc = score_trace(trace, config, dynamics.arena.agent_radius);
                goal_term(i, j) = tc.goal;
                collision_term(i, j) = tc.collision;
                truncated(i, j) = tc.truncated ? 1 : 0;
            } catch (...) {
                failed = true;
            }
        }
    }
    (void)parallel;
    if (failed) throw std::runtime_error("build_cost_matrix: rollout evaluation failed");

    double g_min = std::numeric_limits<double>::infinity();
    double g_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (!truncated(i, j)) {
                g_min = std::min(g_min, goal_term(i, j));
                g_max = std::max(g_max, goal_term(i, j));
            }
    const bool any_finite = g_min <= g_max;
    const double spread = any_finite ? g_max - g_min : 0.0;
    const double arena_diag = std::hypot(dynamics.arena.width, dynamics.arena.height);

    Eigen::MatrixXd cost(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double g;
            if (truncated(i, j)) {
                g = config.cost_normalization == CostNormalization::minmax
                        ? 1.0
                        : (any_finite ? g_max : arena_diag);
                cost(i, j) = config.goal_weight * g + config.collision_weight * 1.0;
                continue;
            }
            if (config.cost_normalization == CostNormalization::minmax) {
                g = spread > 1e-12 ? (goal_term(i, j) - g_min) / spread : 0.0;
            } else {
                g = goal_term(i, j);
            }
            cost(i, j) = config.goal_weight * g + config.collision_weight * collision_term(i, j);
        }
    }
    return cost;
}

SolveOutcome solve_temperatures(const Eigen::MatrixXd& cost, const PlannerConfig& config,
                                int solved_from_step) {
    const Eigen::Index n = cost.rows();
    const Eigen::Index m = cost.cols();
    ot::MassVector row = config.row_prior;
    ot::MassVector col = config.col_prior;
    if (row.size() == 0) row = ot::MassVector::Constant(n, 1.0 / static_cast<double>(n));
    if (col.size() == 0) col = ot::MassVector::Constant(m, 1.0 / static_cast<double>(m));
    if (row.size() != n || col.size() != m)
        throw std::invalid_argument("temperature priors disagree with the cost matrix shape");

    ot::SolverConfig sc = config.solver;
    sc.lambda_entropy = config.lambda_entropy;
    sc.lambda_kl = config.lambda_kl;
    const ot::TransportPlan plan = ot::solve_unbalanced(cost, row, col, sc);

    SolveOutcome out;
    out.temperatures.beta = plan.entries;
    out.temperatures.solved_from = solved_from_step;
    out.converged = plan.converged;
    out.iterations = plan.iterations;
    return out;
}

Eigen::VectorXd act(const State& state, const experts::ExpertPool& pool,
                    const TemperatureMatrix& temperatures) {
    if (temperatures.beta.rows() != pool.size() || temperatures.beta.cols() != pool.agent_count())
        throw std::invalid_argument("temperature matrix disagrees with the pool shape");
    const std::vector<rmp::PulledRmp> pulled = pool.evaluate(state);
    Eigen::VectorXd total = Eigen::VectorXd::Zero(state.q.size());
    std::vector<double> weights(pulled.size());
    for (Eigen::Index j = 0; j < temperatures.beta.cols(); ++j) {
        for (size_t i = 0; i < pulled.size(); ++i) weights[i] = temperatures.beta(i, j);
        total += rmp::blend(pulled, weights);
    }
    return total;
}

Planner::Planner(const experts::ExpertPool& pool, const PlannerConfig& config,
                 const RolloutDynamics& dynamics)
    : pool_(pool), config_(config), dynamics_(dynamics) {
    if (config_.latency < 0) throw std::invalid_argument("latency must be >= 0");
    if (config_.horizon < 1) throw std::invalid_argument("look-ahead horizon must be >= 1");
    current_.beta = Eigen::MatrixXd::Ones(pool.size(), pool.agent_count());
    current_.solved_from = -1;
}

Vec2 Planner::step(const State& state, int t) {
    if (!config_.constant_temperatures) {
        const auto t0 = std::chrono::steady_clock::now();
        const Eigen::MatrixXd cost = build_cost_matrix(state, pool_, config_, dynamics_, parallel_);
        SolveOutcome outcome = solve_temperatures(cost, config_, t);
        plan_seconds_total_ +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        solve_count_ += 1;
        if (debug_) {
            nlohmann::json j;
            j["step"] = t;
            j["iterations"] = outcome.iterations;
            j["converged"] = outcome.converged;
            std::vector<std::vector<double>> rows;
            for (Eigen::Index i = 0; i < cost.rows(); ++i)
                rows.push_back({cost.row(i).begin(), cost.row(i).end()});
            j["cost"] = rows;
            rows.clear();
            for (Eigen::Index i = 0; i < outcome.temperatures.beta.rows(); ++i)
                rows.push_back({outcome.temperatures.beta.row(i).begin(),
                                outcome.temperatures.beta.row(i).end()});
            j["temperatures"] = rows;
            (*debug_) << j.dump() << "\n";
        }
        pending_.push_back(Pending{t + config_.latency, std::move(outcome)});
        while (!pending_.empty() && pending_.front().available_at <= t) {
            Pending ready = std::move(pending_.front());
            pending_.pop_front();
            if (ready.outcome.converged) {
                current_ = std::move(ready.outcome.temperatures);
            } else {
                rejected_ += 1;  // keep the previous temperatures in force
            }
        }
        if (current_.solved_from >= 0) staleness_.push_back(t - current_.solved_from);
    }
    const Eigen::VectorXd a = act(state, pool_, current_);
    return Vec2(a);
}

double Planner::mean_plan_seconds() const {
    return solve_count_ > 0 ? plan_seconds_total_ / solve_count_ : 0.0;
}

}  // namespace hipbot::planner
