#pragma once

#include "hipbot/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace hipbot::world {

// Fixed geometry and limits of an episode.
struct Arena {
    double width = 200.0;
    double height = 200.0;
    Vec2 start = Vec2::Zero();
    Vec2 goal = Vec2::Zero();
    double goal_radius = 10.0;
    double agent_radius = 3.0;
    double v_max = 6.0;
    int episode_cap = 500;
};

// Signed distance from a point to an obstacle's surface (negative inside).
double sdf(const Vec2& p, const Obstacle& ob);

// Minimum signed distance over a set of obstacles; +infinity when empty.
double min_sdf(const Vec2& p, const std::vector<Obstacle>& obstacles);

// Unit outward direction of steepest SDF increase.  Degenerate points
// (circle center, box axis ties) resolve toward +x deterministically.
Vec2 sdf_gradient(const Vec2& p, const Obstacle& ob);

struct WorldState {
    Arena arena;
    Vec2 q = Vec2::Zero();
    Vec2 q_dot = Vec2::Zero();
    std::vector<Obstacle> obstacles;
    int step = 0;
    bool collided = false;      // latched for the rest of the episode
    bool reached_goal = false;  // latched
    EnvContext context() const;
};

// Re-evaluates collision/goal events at the current pose (used right after
// sampling a world, before any step is taken).
void refresh_events(WorldState& w);

// Semi-implicit Euler step: velocity first (clamped to v_max in norm), then
// position; obstacles advance with their velocities and reflect off their
// motion bounds; events latch afterwards.  The action must be finite.
void step_world(WorldState& w, const Vec2& action, double dt = 1.0);

// Adds one Gaussian increment (std `std_dev` per axis) to every obstacle
// velocity.  Draw order is fixed, so a given generator state yields a
// reproducible perturbation.
void inject_acceleration_noise(WorldState& w, double std_dev, std::mt19937_64& rng);

// Random corridor world: start on the left, goal on the right, `count`
// circular obstacles confined to the band between them.  velocity_level > 0
// gives each obstacle a random constant-speed heading.  Deterministic in
// `seed`.
WorldState sample_maze(std::uint64_t seed, int count, double velocity_level,
                       const Arena& base = {});

// Single large box blocking the straight line between start and goal.  When
// `dynamic`, the box slides vertically at velocity_level and reflects inside
// a band around its spawn height.  Deterministic in `seed`.
WorldState sample_box(std::uint64_t seed, bool dynamic, double velocity_level,
                      const Arena& base = {});

}  // namespace hipbot::world
