#pragma once

#include "hipbot/expert_library.hpp"
#include "hipbot/ot_solver.hpp"
#include "hipbot/planar_world.hpp"
#include "hipbot/types.hpp"

#include <deque>
#include <iosfwd>
#include <vector>

namespace hipbot::planner {

enum class CostNormalization { none, minmax };

struct PlannerConfig {
    int horizon = 10;
    double goal_weight = 1.0;
    double collision_weight = 10.0;
    double collision_margin = 3.0;  // length scale of the collision proximity score
    double lambda_entropy = 0.01;
    double lambda_kl = 0.1;
    CostNormalization cost_normalization = CostNormalization::minmax;
    ot::MassVector row_prior;  // empty = uniform 1/n over experts
    ot::MassVector col_prior;  // empty = uniform 1/m over agents
    int latency = 0;           // steps between launching a solve and adopting it
    bool constant_temperatures = false;  // keep temperatures at 1 (diagnostics)
    ot::SolverConfig solver{.lambda_entropy = 0.01, .lambda_kl = 0.1, .max_iterations = 2000,
                            .tolerance = 1e-8, .stabilized = true};
};

// Transition model used inside look-ahead rollouts: same integrator as the
// world, obstacles extrapolated at their current velocities (no reflection,
// no noise).
struct RolloutDynamics {
    world::Arena arena;
    double dt = 1.0;
    void advance(State& s, const Vec2& action) const;
};

struct RolloutTrace {
    std::vector<State> states;  // h successor states (the start state excluded)
    bool truncated = false;     // rollout aborted on a non-finite action
};

// Rolls a single expert forward h steps under its own preferred action
// (pinv(M) f, or the raw force when the metric is numerically zero, so
// zero-metric experts still express a direction).
RolloutTrace rollout_expert(const State& state, const experts::ExpertPool& pool, int expert_index,
                            const RolloutDynamics& dynamics, int horizon);

struct TraceCost {
    double goal = 0.0;       // mean distance-to-goal over the trace
    double collision = 0.0;  // mean proximity score in [0, 1]
    bool truncated = false;
};

// Scores one trace: goal term plus Gaussian proximity exp(-max(sd,0)^2 /
// (2 margin^2)) of the agent's surface distance, both averaged over steps.
TraceCost score_trace(const RolloutTrace& trace, const PlannerConfig& config, double agent_radius);

// Expert-by-agent cost matrix from per-expert rollouts.  With minmax
// normalization the goal column is rescaled to [0, 1] over finite traces;
// truncated traces receive the worst finite goal score plus full collision
// weight.  The parallel path fills independent entries concurrently and is
// bitwise identical to the serial one.
Eigen::MatrixXd build_cost_matrix(const State& state, const experts::ExpertPool& pool,
                                  const PlannerConfig& config, const RolloutDynamics& dynamics,
                                  bool parallel = false);

struct TemperatureMatrix {
    Eigen::MatrixXd beta;  // experts x agents, strictly positive
    int solved_from = -1;  // step index of the state the solve saw (-1 = initial)
};

struct SolveOutcome {
    TemperatureMatrix temperatures;
    bool converged = false;
    int iterations = 0;
};

// One unbalanced-transport solve over the cost matrix against the prior
// masses (uniform by default).
SolveOutcome solve_temperatures(const Eigen::MatrixXd& cost, const PlannerConfig& config,
                                int solved_from_step);

// Blended acceleration under a temperature assignment: per agent column,
// metric-weighted combination of the pool, summed over agents.
Eigen::VectorXd act(const State& state, const experts::ExpertPool& pool,
                    const TemperatureMatrix& temperatures);

// Receding-horizon executive.  Every step launches a solve from the current
// state; its result becomes adoptable `latency` steps later (latency 0 =
// synchronous planning).  Actions always use the newest adopted
// temperatures; non-converged solves are discarded with a warning counter
// and the previous temperatures stay in force.
class Planner {
public:
    Planner(const experts::ExpertPool& pool, const PlannerConfig& config,
            const RolloutDynamics& dynamics);

    Vec2 step(const State& state, int t);

    const TemperatureMatrix& temperatures() const { return current_; }
    int solve_count() const { return solve_count_; }
    int rejected_solve_count() const { return rejected_; }
    double mean_plan_seconds() const;
    // Age (in steps) of the adopted temperatures at each act, once a real
    // solve has been adopted; initial all-ones temperatures are excluded.
    const std::vector<int>& staleness_log() const { return staleness_; }
    void set_parallel(bool on) { parallel_ = on; }
    void set_debug_stream(std::ostream* os) { debug_ = os; }

private:
    struct Pending {
        int available_at = 0;
        SolveOutcome outcome;
    };

    const experts::ExpertPool& pool_;
    PlannerConfig config_;
    RolloutDynamics dynamics_;
    TemperatureMatrix current_;
    std::deque<Pending> pending_;
    std::vector<int> staleness_;
    int solve_count_ = 0;
    int rejected_ = 0;
    double plan_seconds_total_ = 0.0;
    bool parallel_ = false;
    std::ostream* debug_ = nullptr;
};

}  // namespace hipbot::planner
