#pragma once

#include "hipbot/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hipbot::bench {

struct TrajectoryRow {
    int step = 0;
    Vec2 q = Vec2::Zero();
    Vec2 q_dot = Vec2::Zero();
    double min_sdf = 0.0;
    bool collided = false;
    bool reached = false;
    std::vector<Vec2> obstacle_centers;
};

struct EpisodeRecord {
    std::uint64_t seed = 0;
    bool success = false;  // reached the goal without ever colliding
    bool safe = true;      // never collided
    bool reached = false;  // reached the goal, collisions notwithstanding
    int time_steps = 0;    // steps to the goal; episode cap exactly when never reached
    double final_distance = 0.0;
    double mean_plan_ms = 0.0;
    std::vector<TrajectoryRow> trajectory;  // filled only when requested
};

// Runs one seeded episode under the scenario.  Collisions latch but do not
// end the episode (safety and plain goal-reaching are scored separately);
// only reaching the goal or the episode cap ends it.
EpisodeRecord run_episode(const ScenarioConfig& config, std::uint64_t seed,
                          bool keep_trajectory = false, std::ostream* debug = nullptr);

struct MetricsRow {
    std::string method;
    int horizon = 0;  // 0 for the fixed-weight baseline
    std::string mode;
    std::string env;
    double velocity_level = 0.0;  // stress sweeps annotate these two
    double noise_std = 0.0;
    int seeds = 0;
    double suc = 0.0;       // fraction reaching the goal collision-free
    double safe = 0.0;      // fraction never colliding
    double goal_any = 0.0;  // fraction reaching the goal at all
    double d2g_mean = 0.0, d2g_std = 0.0;
    double ts_mean = 0.0, ts_std = 0.0;
    double plan_ms_mean = 0.0;
};

MetricsRow aggregate(const ScenarioConfig& config, const std::vector<EpisodeRecord>& records);

// All seeds of the scenario; episodes run independently (optionally across
// OpenMP threads) and aggregate in seed order, so the row is identical
// either way.
MetricsRow run_batch(const ScenarioConfig& config, bool parallel = true);

// Cartesian sweep over obstacle speed and acceleration-noise levels.
std::vector<MetricsRow> stress_sweep(const ScenarioConfig& config,
                                     const std::vector<double>& velocities,
                                     const std::vector<double>& noises, bool parallel = true);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);
std::string stress_csv_header();
std::string stress_csv_row(const MetricsRow& row);
std::string trajectory_csv(const EpisodeRecord& record);

}  // namespace hipbot::bench
