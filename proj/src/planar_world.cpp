#include "hipbot/planar_world.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hipbot::world {
namespace {

Vec2 shape_extent(const Obstacle& ob) {
    return ob.shape == ObstacleShape::circle ? Vec2(ob.radius, ob.radius) : ob.half_extents;
}

// Reflects a moving obstacle so its shape stays inside [motion_lo, motion_hi].
void reflect_into_bounds(Obstacle& ob) {
    const Vec2 ext = shape_extent(ob);
    for (int axis = 0; axis < 2; ++axis) {
        const double lo = ob.motion_lo[axis] + ext[axis];
        const double hi = ob.motion_hi[axis] - ext[axis];
        if (lo > hi) {  // band narrower than the shape: park it
            ob.center[axis] = 0.5 * (lo + hi);
            ob.velocity[axis] = 0.0;
            continue;
        }
        if (ob.center[axis] < lo) {
            ob.center[axis] = 2.0 * lo - ob.center[axis];
            ob.velocity[axis] = -ob.velocity[axis];
        } else if (ob.center[axis] > hi) {
            ob.center[axis] = 2.0 * hi - ob.center[axis];
            ob.velocity[axis] = -ob.velocity[axis];
        }
    }
}

}  // namespace

double sdf(const Vec2& p, const Obstacle& ob) {
    if (ob.shape == ObstacleShape::circle) return (p - ob.center).norm() - ob.radius;
    const Vec2 d = (p - ob.center).cwiseAbs() - ob.half_extents;
    const Vec2 outside = d.cwiseMax(0.0);
    const double inside = std::min(std::max(d.x(), d.y()), 0.0);
    return outside.norm() + inside;
}

double min_sdf(const Vec2& p, const std::vector<Obstacle>& obstacles) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ob : obstacles) best = std::min(best, sdf(p, ob));
    return best;
}

Vec2 sdf_gradient(const Vec2& p, const Obstacle& ob) {
    const Vec2 d = p - ob.center;
    if (ob.shape == ObstacleShape::circle) {
        const double n = d.norm();
        return n > 0 ? Vec2(d / n) : Vec2(1.0, 0.0);
    }
    const Vec2 q = d.cwiseAbs() - ob.half_extents;
    auto sign_of = [](double x) { return x < 0 ? -1.0 : 1.0; };  // ties resolve to +
    if (q.x() > 0 || q.y() > 0) {
        const Vec2 v(std::max(q.x(), 0.0) * sign_of(d.x()), std::max(q.y(), 0.0) * sign_of(d.y()));
        return v / v.norm();
    }
    // Inside: climb toward the nearest face, +x on ties.
    if (q.x() >= q.y()) return Vec2(sign_of(d.x()), 0.0);
    return Vec2(0.0, sign_of(d.y()));
}

EnvContext WorldState::context() const {
    EnvContext ctx;
    ctx.obstacles = obstacles;
    ctx.goal = arena.goal;
    return ctx;
}

void refresh_events(WorldState& w) {
    if (min_sdf(w.q, w.obstacles) < w.arena.agent_radius) w.collided = true;
    if ((w.q - w.arena.goal).norm() < w.arena.goal_radius) w.reached_goal = true;
}

void step_world(WorldState& w, const Vec2& action, double dt) {
    if (!action.allFinite()) throw std::invalid_argument("step_world: non-finite action");
    if (!(dt > 0)) throw std::invalid_argument("step_world: dt must be positive");
    w.q_dot += action * dt;
    const double speed = w.q_dot.norm();
    if (speed > w.arena.v_max) w.q_dot *= w.arena.v_max / speed;
    w.q += w.q_dot * dt;
    for (auto& ob : w.obstacles) {
        ob.center += ob.velocity * dt;
        reflect_into_bounds(ob);
    }
    w.step += 1;
    refresh_events(w);
}

void inject_acceleration_noise(WorldState& w, double std_dev, std::mt19937_64& rng) {
    if (std_dev < 0) throw std::invalid_argument("noise std must be nonnegative");
    if (std_dev == 0) return;
    std::normal_distribution<double> gauss(0.0, std_dev);
    for (auto& ob : w.obstacles) {
        ob.velocity.x() += gauss(rng);
        ob.velocity.y() += gauss(rng);
        ob.accel_noise_std = std_dev;
    }
}

WorldState sample_maze(std::uint64_t seed, int count, double velocity_level, const Arena& base) {
    if (count < 0) throw std::invalid_argument("sample_maze: count must be >= 0");
    if (velocity_level < 0) throw std::invalid_argument("sample_maze: velocity level must be >= 0");
    std::mt19937_64 rng(seed);
    WorldState w;
    w.arena = base;
    std::uniform_real_distribution<double> start_x(15.0, 35.0);
    std::uniform_real_distribution<double> goal_x(w.arena.width - 35.0, w.arena.width - 15.0);
    std::uniform_real_distribution<double> side_y(30.0, w.arena.height - 30.0);
    w.arena.start = Vec2(start_x(rng), side_y(rng));
    w.arena.goal = Vec2(goal_x(rng), side_y(rng));
    w.q = w.arena.start;
    w.q_dot = Vec2::Zero();

    // Obstacles form small walls straddling the start-goal corridor: each wall
    // is a cluster of touching circles spread across the path, its flanks bent
    // slightly back toward the start so the approach side is a shallow pocket.
    const Vec2 path = w.arena.goal - w.arena.start;
    const Vec2 along = path.normalized();
    const Vec2 across(-along.y(), along.x());
    const double lo_x = 57.0, hi_x = w.arena.width - 57.0;
    const double lo_y = 15.0, hi_y = w.arena.height - 15.0;

    std::vector<int> sizes;
    for (int left = count; left > 0;) {
        const int take = std::min(3, left);
        sizes.push_back(take);
        left -= take;
    }
    std::uniform_real_distribution<double> t_jitter(-0.04, 0.04);
    std::uniform_real_distribution<double> side_offset(-18.0, 18.0);
    std::uniform_real_distribution<double> radius(9.0, 14.0);
    std::uniform_real_distribution<double> bend(3.0, 6.0);
    std::bernoulli_distribution pocketed(0.5);  // straight walls are easier to slide around

    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const double t_base = sizes.size() == 1
            ? 0.5
            : 0.28 + 0.44 * static_cast<double>(k) / static_cast<double>(sizes.size() - 1);
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            const Vec2 anchor =
                w.arena.start + (t_base + t_jitter(rng)) * path + side_offset(rng) * across;
            const double setback = pocketed(rng) ? bend(rng) : 0.0;
            std::vector<Obstacle> wall;
            double base_radius = 0.0;
            for (int j = 0; j < sizes[k]; ++j) {
                Obstacle ob;
                ob.shape = ObstacleShape::circle;
                ob.radius = radius(rng);
                if (j == 0) base_radius = ob.radius;
                // Flanks touch the central circle from either side, overlapping
                // it a little so the wall reads as one solid blob.
                const double lane = (j == 0) ? 0.0 : (j % 2 == 1 ? 1.0 : -1.0);
                const double gap =
                    base_radius + ob.radius - 0.3 * std::min(base_radius, ob.radius);
                ob.center = anchor + lane * gap * across - (lane != 0.0 ? setback : 0.0) * along;
                ob.center.x() = std::clamp(ob.center.x(), lo_x, hi_x);
                ob.center.y() = std::clamp(ob.center.y(), lo_y, hi_y);
                ob.motion_lo = Vec2(0.0, 0.0);
                ob.motion_hi = Vec2(w.arena.width, w.arena.height);
                wall.push_back(ob);
            }
            bool clear = true;
            for (const auto& ob : wall) {
                const double start_clear = ob.radius + w.arena.agent_radius + 12.0;
                const double goal_clear = ob.radius + w.arena.goal_radius + 6.0;
                if ((ob.center - w.arena.start).norm() <= start_clear) clear = false;
                if ((ob.center - w.arena.goal).norm() <= goal_clear) clear = false;
            }
            if (!clear) continue;
            w.obstacles.insert(w.obstacles.end(), wall.begin(), wall.end());
            placed = true;
        }
        if (!placed) throw std::runtime_error("sample_maze: could not place obstacles");
    }
    // Headings drawn after placement so geometry is invariant to the speed level.
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    for (auto& ob : w.obstacles) {
        const double a = angle(rng);
        ob.velocity = velocity_level * Vec2(std::cos(a), std::sin(a));
    }
    refresh_events(w);
    return w;
}

WorldState sample_box(std::uint64_t seed, bool dynamic, double velocity_level, const Arena& base) {
    if (velocity_level < 0) throw std::invalid_argument("sample_box: velocity level must be >= 0");
    std::mt19937_64 rng(seed);
    WorldState w;
    w.arena = base;
    const double mid_x = 0.5 * w.arena.width;
    std::uniform_real_distribution<double> center_y(0.45 * w.arena.height, 0.55 * w.arena.height);
    const double cy = center_y(rng);

    Obstacle box;
    box.shape = ObstacleShape::box;
    box.center = Vec2(mid_x, cy);
    box.half_extents = Vec2(12.0, 26.0);
    const double band = 8.0;  // vertical travel of the box center when dynamic
    box.motion_lo = Vec2(box.center.x() - box.half_extents.x(),
                         cy - band - box.half_extents.y());
    box.motion_hi = Vec2(box.center.x() + box.half_extents.x(),
                         cy + band + box.half_extents.y());

    // The corridor runs a little off the box's midline, so one way around is
    // genuinely shorter — but it stays covered for every box position.
    std::bernoulli_distribution start_left(0.5);
    std::bernoulli_distribution upper_lane(0.5);
    std::uniform_real_distribution<double> near_x(20.0, 40.0);
    std::uniform_real_distribution<double> far_x(w.arena.width - 40.0, w.arena.width - 20.0);
    std::uniform_real_distribution<double> lane_offset(8.0, 12.0);
    const bool left = start_left(rng);
    const double side = upper_lane(rng) ? 1.0 : -1.0;
    w.arena.start = Vec2(left ? near_x(rng) : far_x(rng), cy + side * lane_offset(rng));
    w.arena.goal = Vec2(left ? far_x(rng) : near_x(rng), cy + side * lane_offset(rng));
    w.q = w.arena.start;
    w.q_dot = Vec2::Zero();

    if (dynamic) {
        std::bernoulli_distribution up(0.5);
        box.velocity = Vec2(0.0, (up(rng) ? 1.0 : -1.0) * velocity_level);
    }
    w.obstacles.push_back(box);
    refresh_events(w);
    return w;
}

}  // namespace hipbot::world
