#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hipbot {

using Vec2 = Eigen::Vector2d;

enum class ObstacleShape { circle, box };

// A rigid planar obstacle.  Circles use `radius`; boxes use `half_extents`
// (axis-aligned).  Moving obstacles carry a velocity and reflect off the
// axis-aligned motion bounds so they stay inside their assigned region.
struct Obstacle {
    ObstacleShape shape = ObstacleShape::circle;
    Vec2 center = Vec2::Zero();
    double radius = 1.0;
    Vec2 half_extents = Vec2::Ones();
    Vec2 velocity = Vec2::Zero();
    double accel_noise_std = 0.0;
    Vec2 motion_lo = Vec2::Constant(-1e18);
    Vec2 motion_hi = Vec2::Constant(1e18);
};

// Snapshot of everything an expert may react to.
struct EnvContext {
    std::vector<Obstacle> obstacles;
    Vec2 goal = Vec2::Zero();
};

// Configuration-space state plus the environment snapshot it was taken in.
struct State {
    Eigen::VectorXd q;
    Eigen::VectorXd q_dot;
    EnvContext context;
};

}  // namespace hipbot
