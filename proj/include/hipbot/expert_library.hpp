#pragma once

#include "hipbot/rmp_geometry.hpp"
#include "hipbot/types.hpp"

#include <string>
#include <vector>

namespace hipbot::experts {

// Shared gain set for the planar expert pool.
struct ExpertParams {
    double attractor_gain = 2.0;
    double attractor_damping = 1.2;
    double soft_norm_eps = 2.0;       // softening of direction normalizations
    double repulsor_gain = 8.0;
    double repulsor_length_scale = 6.0;
    double curl_gain = 3.0;
    double curl_blend_range = 6.0;  // softmin range merging nearby obstacles for the swirl
    double damper_gain = 0.3;
};

enum class ExpertKind { goal_attractor, obstacle_avoid, curl_ccw, curl_cw, damper };

struct ExpertSpec {
    ExpertKind kind = ExpertKind::goal_attractor;
    int obstacle_slot = -1;  // obstacle_avoid: index into context; -1 = nearest
    std::string name;
};

// v / (||v|| + eps): bounded, smooth at the origin.
Eigen::Vector2d soft_normalize(const Eigen::Vector2d& v, double eps);

// Pulls the agent toward the goal with critically-tunable damping; identity
// metric.
rmp::TaskRmp goal_attractor(double gain, double damping, double eps);

// Pushes away from one obstacle (or the nearest one when slot = -1) along
// the SDF gradient, with weight exp(-max(d,0)/length_scale) that saturates
// at 1 on and inside the surface; metric is the weighted outer product of
// the push direction, so only that direction carries importance.
rmp::TaskRmp obstacle_repulsor(int slot, double gain, double length_scale);

// Proximity-weighted blend of per-obstacle SDF gradients: a softmin over
// clearances with the given range, so close obstacles dominate, clusters
// merge into one composite wall, and opposed gradients (mid-gap) cancel.
// Magnitude is at most 1 and exactly 1 against a single obstacle.
Eigen::Vector2d swirl_axis(const Eigen::Vector2d& x, const EnvContext& ctx, double range);

// Swirls perpendicular to the swirl axis (the merged obstacle gradient
// turned a quarter turn), so its rollouts circumnavigate whatever blocks
// the way — a whole cluster when several obstacles crowd together; the
// force fades where gradients cancel and vanishes with nothing to swirl
// around.  Importance metric is zero, so a curl never claims authority in
// a blend and an opposing pair cancels exactly.
rmp::TaskRmp curl_expert(bool counterclockwise, double gain, double blend_range);

// Pure viscous damping; identity metric.
rmp::TaskRmp damper(double gain);

class ExpertPool {
public:
    ExpertPool(std::vector<ExpertSpec> specs, ExpertParams params, int agent_count = 1);
    int size() const { return static_cast<int>(specs_.size()); }
    int agent_count() const { return agent_count_; }
    const std::vector<ExpertSpec>& specs() const { return specs_; }
    const ExpertParams& params() const { return params_; }

    rmp::PulledRmp evaluate_one(const State& state, int index) const;
    std::vector<rmp::PulledRmp> evaluate(const State& state) const;

private:
    std::vector<ExpertSpec> specs_;
    ExpertParams params_;
    int agent_count_;
    std::vector<rmp::TaskRmp> rmps_;
    rmp::TaskMap task_map_;
};

// Standard pool for a planar point agent: goal attractor, one repulsor per
// obstacle, an opposing pair of curl experts, and a damper.
ExpertPool make_planar_pool(const ExpertParams& params, int obstacle_count);

// Classical fixed-weight blend of the whole pool (every expert at weight 1).
Eigen::VectorXd rmpflow_baseline(const State& state, const ExpertPool& pool);

}  // namespace hipbot::experts
