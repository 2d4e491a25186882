#pragma once

#include "hipbot/expert_library.hpp"
#include "hipbot/hipbot_planner.hpp"
#include "hipbot/planar_world.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace hipbot::bench {

enum class EnvType { maze, box };
enum class ExecMode { sync, async };

struct EnvironmentConfig {
    EnvType type = EnvType::maze;
    int obstacle_count = 8;       // maze only
    double velocity_level = 0.0;  // obstacle speed (maze moves when > 0)
    bool dynamic = false;         // box only: the box slides when true
    double noise_std = 0.0;       // per-step Gaussian obstacle-velocity noise
    world::Arena arena;
};

// Everything needed to reproduce an evaluation: environment, expert gains,
// method, planner settings, execution mode, and the seed list.
struct ScenarioConfig {
    int schema_version = 1;
    EnvironmentConfig environment;
    experts::ExpertParams experts;
    std::string method = "hipbot";  // "hipbot" | "rmpflow"
    planner::PlannerConfig planner;
    ExecMode mode = ExecMode::sync;
    int latency = 2;  // applied to the planner in async mode only
    std::vector<std::uint64_t> seeds;
    bool deterministic_timing = false;  // report plan_ms as 0 for byte-stable output
};

// Strict parser: unknown keys anywhere raise std::invalid_argument naming
// the offending path, as does a schema_version this build does not speak.
// Every field is optional and defaults to the values above.  seeds may be an
// explicit array or {"base": b, "count": k}.
ScenarioConfig parse_scenario(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::string& path);

// Full-fidelity serialization; parse_scenario(scenario_to_json(c)) round-trips.
nlohmann::json scenario_to_json(const ScenarioConfig& c);

std::string env_label(const EnvironmentConfig& e);
std::string mode_label(ExecMode m);

}  // namespace hipbot::bench
