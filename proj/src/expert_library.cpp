#include "hipbot/expert_library.hpp"

#include "hipbot/planar_world.hpp"

#include <stdexcept>

namespace hipbot::experts {
namespace {

const Obstacle* nearest_obstacle(const Eigen::Vector2d& x, const EnvContext& ctx) {
    const Obstacle* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& ob : ctx.obstacles) {
        const double d = world::sdf(x, ob);
        if (d < best_d) {
            best_d = d;
            best = &ob;
        }
    }
    return best;
}

const Obstacle* pick_obstacle(int slot, const Eigen::Vector2d& x, const EnvContext& ctx) {
    if (slot < 0) return nearest_obstacle(x, ctx);
    if (slot >= static_cast<int>(ctx.obstacles.size()))
        throw std::out_of_range("obstacle_repulsor: slot outside the context");
    return &ctx.obstacles[slot];
}

Eigen::Vector2d repulsor_force_at(const Eigen::Vector2d& x, const Obstacle& ob, double gain,
                                  double length_scale) {
    const double d = world::sdf(x, ob);
    const double w = std::exp(-std::max(d, 0.0) / length_scale);
    return gain * w * world::sdf_gradient(x, ob);
}

}  // namespace

Eigen::Vector2d soft_normalize(const Eigen::Vector2d& v, double eps) {
    return v / (v.norm() + eps);
}

rmp::TaskRmp goal_attractor(double gain, double damping, double eps) {
    rmp::TaskRmp out;
    out.force = [gain, damping, eps](const Eigen::VectorXd& x, const Eigen::VectorXd& x_dot,
                                     const EnvContext& ctx) -> Eigen::VectorXd {
        const Eigen::Vector2d pull = soft_normalize(ctx.goal - Eigen::Vector2d(x), eps);
        return gain * pull - damping * Eigen::Vector2d(x_dot);
    };
    out.metric = [](const Eigen::VectorXd&, const Eigen::VectorXd&, const EnvContext&) {
        return Eigen::MatrixXd(Eigen::Matrix2d::Identity());
    };
    return out;
}

rmp::TaskRmp obstacle_repulsor(int slot, double gain, double length_scale) {
    rmp::TaskRmp out;
    out.force = [slot, gain, length_scale](const Eigen::VectorXd& x, const Eigen::VectorXd&,
                                           const EnvContext& ctx) -> Eigen::VectorXd {
        const Obstacle* ob = pick_obstacle(slot, x, ctx);
        if (!ob) return Eigen::Vector2d::Zero();
        return repulsor_force_at(x, *ob, gain, length_scale);
    };
    out.metric = [slot, length_scale](const Eigen::VectorXd& x, const Eigen::VectorXd&,
                                      const EnvContext& ctx) -> Eigen::MatrixXd {
        const Obstacle* ob = pick_obstacle(slot, x, ctx);
        if (!ob) return Eigen::MatrixXd(Eigen::Matrix2d::Zero());
        const double d = world::sdf(Eigen::Vector2d(x), *ob);
        const double w = std::exp(-std::max(d, 0.0) / length_scale);
        const Eigen::Vector2d u = world::sdf_gradient(Eigen::Vector2d(x), *ob);
        return Eigen::MatrixXd(w * u * u.transpose());
    };
    return out;
}

Eigen::Vector2d swirl_axis(const Eigen::Vector2d& x, const EnvContext& ctx, double range) {
    if (ctx.obstacles.empty()) return Eigen::Vector2d::Zero();
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& ob : ctx.obstacles) nearest = std::min(nearest, world::sdf(x, ob));
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    double total = 0.0;
    for (const auto& ob : ctx.obstacles) {
        const double w = std::exp(-(world::sdf(x, ob) - nearest) / range);
        acc += w * world::sdf_gradient(x, ob);
        total += w;
    }
    return acc / total;
}

rmp::TaskRmp curl_expert(bool counterclockwise, double gain, double blend_range) {
    rmp::TaskRmp out;
    out.force = [counterclockwise, gain, blend_range](const Eigen::VectorXd& x,
                                                      const Eigen::VectorXd&,
                                                      const EnvContext& ctx) -> Eigen::VectorXd {
        const Eigen::Vector2d u = swirl_axis(Eigen::Vector2d(x), ctx, blend_range);
        const Eigen::Vector2d rotated = counterclockwise ? Eigen::Vector2d(-u.y(), u.x())
                                                         : Eigen::Vector2d(u.y(), -u.x());
        return gain * rotated;
    };
    out.metric = [](const Eigen::VectorXd&, const Eigen::VectorXd&, const EnvContext&) {
        return Eigen::MatrixXd(Eigen::Matrix2d::Zero());
    };
    return out;
}

rmp::TaskRmp damper(double gain) {
    rmp::TaskRmp out;
    out.force = [gain](const Eigen::VectorXd&, const Eigen::VectorXd& x_dot,
                       const EnvContext&) -> Eigen::VectorXd {
        return -gain * Eigen::Vector2d(x_dot);
    };
    out.metric = [](const Eigen::VectorXd&, const Eigen::VectorXd&, const EnvContext&) {
        return Eigen::MatrixXd(Eigen::Matrix2d::Identity());
    };
    return out;
}

ExpertPool::ExpertPool(std::vector<ExpertSpec> specs, ExpertParams params, int agent_count)
    : specs_(std::move(specs)), params_(params), agent_count_(agent_count),
      task_map_(rmp::identity_map(2)) {
    if (specs_.empty()) throw std::invalid_argument("expert pool must not be empty");
    if (agent_count_ < 1) throw std::invalid_argument("expert pool needs at least one agent");
    rmps_.reserve(specs_.size());
    for (const auto& s : specs_) {
        switch (s.kind) {
            case ExpertKind::goal_attractor:
                rmps_.push_back(goal_attractor(params_.attractor_gain, params_.attractor_damping,
                                               params_.soft_norm_eps));
                break;
            case ExpertKind::obstacle_avoid:
                rmps_.push_back(obstacle_repulsor(s.obstacle_slot, params_.repulsor_gain,
                                                  params_.repulsor_length_scale));
                break;
            case ExpertKind::curl_ccw:
                rmps_.push_back(curl_expert(true, params_.curl_gain, params_.curl_blend_range));
                break;
            case ExpertKind::curl_cw:
                rmps_.push_back(curl_expert(false, params_.curl_gain, params_.curl_blend_range));
                break;
            case ExpertKind::damper:
                rmps_.push_back(damper(params_.damper_gain));
                break;
        }
    }
}

rmp::PulledRmp ExpertPool::evaluate_one(const State& state, int index) const {
    if (index < 0 || index >= size()) throw std::out_of_range("expert index outside the pool");
    return rmp::pullback(rmps_[index], task_map_, state, specs_[index].name);
}

std::vector<rmp::PulledRmp> ExpertPool::evaluate(const State& state) const {
    std::vector<rmp::PulledRmp> out;
    out.reserve(specs_.size());
    for (int i = 0; i < size(); ++i) out.push_back(evaluate_one(state, i));
    return out;
}

ExpertPool make_planar_pool(const ExpertParams& params, int obstacle_count) {
    std::vector<ExpertSpec> specs;
    specs.push_back({ExpertKind::goal_attractor, -1, "goal_attractor"});
    for (int k = 0; k < obstacle_count; ++k)
        specs.push_back({ExpertKind::obstacle_avoid, k, "obstacle_avoid_" + std::to_string(k)});
    specs.push_back({ExpertKind::curl_ccw, -1, "curl_ccw"});
    specs.push_back({ExpertKind::curl_cw, -1, "curl_cw"});
    specs.push_back({ExpertKind::damper, -1, "damper"});
    return ExpertPool(std::move(specs), params);
}

Eigen::VectorXd rmpflow_baseline(const State& state, const ExpertPool& pool) {
    const std::vector<rmp::PulledRmp> pulled = pool.evaluate(state);
    const std::vector<double> ones(pulled.size(), 1.0);
    return rmp::blend(pulled, ones);
}

}  // namespace hipbot::experts
