#include "hipbot/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace hipbot::bench {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("scenario config: " + path + ": " + what);
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known) fail(path + "/" + item.key(), "unknown key");
    }
}

template <typename T>
void read_field(const json& j, const std::string& path, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(path + "/" + key, e.what());
    }
}

Eigen::VectorXd read_vector(const json& j, const std::string& path, const char* key,
                            Eigen::VectorXd fallback) {
    if (!j.contains(key)) return fallback;
    const json& arr = j.at(key);
    if (!arr.is_array()) fail(path + "/" + key, "expected an array of numbers");
    Eigen::VectorXd v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) fail(path + "/" + key, "expected an array of numbers");
        v[i] = arr[i].get<double>();
    }
    return v;
}

void parse_arena(const json& j, const std::string& path, world::Arena& a) {
    check_keys(j, path, {"width", "height", "goal_radius", "agent_radius", "v_max", "episode_cap"});
    read_field(j, path, "width", a.width);
    read_field(j, path, "height", a.height);
    read_field(j, path, "goal_radius", a.goal_radius);
    read_field(j, path, "agent_radius", a.agent_radius);
    read_field(j, path, "v_max", a.v_max);
    read_field(j, path, "episode_cap", a.episode_cap);
}

void parse_environment(const json& j, const std::string& path, EnvironmentConfig& e) {
    check_keys(j, path,
               {"type", "obstacle_count", "velocity_level", "dynamic", "noise_std", "arena"});
    if (j.contains("type")) {
        const std::string t = j.at("type").get<std::string>();
        if (t == "maze")
            e.type = EnvType::maze;
        else if (t == "box")
            e.type = EnvType::box;
        else
            fail(path + "/type", "expected \"maze\" or \"box\"");
    }
    read_field(j, path, "obstacle_count", e.obstacle_count);
    read_field(j, path, "velocity_level", e.velocity_level);
    read_field(j, path, "dynamic", e.dynamic);
    read_field(j, path, "noise_std", e.noise_std);
    if (j.contains("arena")) parse_arena(j.at("arena"), path + "/arena", e.arena);
}

void parse_experts(const json& j, const std::string& path, experts::ExpertParams& p) {
    check_keys(j, path,
               {"attractor_gain", "attractor_damping", "soft_norm_eps", "repulsor_gain",
                "repulsor_length_scale", "curl_gain", "curl_blend_range", "damper_gain"});
    read_field(j, path, "attractor_gain", p.attractor_gain);
    read_field(j, path, "attractor_damping", p.attractor_damping);
    read_field(j, path, "soft_norm_eps", p.soft_norm_eps);
    read_field(j, path, "repulsor_gain", p.repulsor_gain);
    read_field(j, path, "repulsor_length_scale", p.repulsor_length_scale);
    read_field(j, path, "curl_gain", p.curl_gain);
    read_field(j, path, "curl_blend_range", p.curl_blend_range);
    read_field(j, path, "damper_gain", p.damper_gain);
}

void parse_solver(const json& j, const std::string& path, ot::SolverConfig& s) {
    check_keys(j, path, {"max_iterations", "tolerance", "stabilized"});
    read_field(j, path, "max_iterations", s.max_iterations);
    read_field(j, path, "tolerance", s.tolerance);
    read_field(j, path, "stabilized", s.stabilized);
}

void parse_planner(const json& j, const std::string& path, ScenarioConfig& c) {
    check_keys(j, path,
               {"method", "horizon", "goal_weight", "collision_weight", "collision_margin",
                "lambda_entropy", "lambda_kl", "cost_normalization", "row_prior", "col_prior",
                "constant_temperatures", "solver"});
    if (j.contains("method")) {
        const std::string m = j.at("method").get<std::string>();
        if (m != "hipbot" && m != "rmpflow") fail(path + "/method", "expected \"hipbot\" or \"rmpflow\"");
        c.method = m;
    }
    auto& p = c.planner;
    read_field(j, path, "horizon", p.horizon);
    read_field(j, path, "goal_weight", p.goal_weight);
    read_field(j, path, "collision_weight", p.collision_weight);
    read_field(j, path, "collision_margin", p.collision_margin);
    read_field(j, path, "lambda_entropy", p.lambda_entropy);
    read_field(j, path, "lambda_kl", p.lambda_kl);
    if (j.contains("cost_normalization")) {
        const std::string n = j.at("cost_normalization").get<std::string>();
        if (n == "none")
            p.cost_normalization = planner::CostNormalization::none;
        else if (n == "minmax")
            p.cost_normalization = planner::CostNormalization::minmax;
        else
            fail(path + "/cost_normalization", "expected \"none\" or \"minmax\"");
    }
    p.row_prior = read_vector(j, path, "row_prior", p.row_prior);
    p.col_prior = read_vector(j, path, "col_prior", p.col_prior);
    read_field(j, path, "constant_temperatures", p.constant_temperatures);
    if (j.contains("solver")) parse_solver(j.at("solver"), path + "/solver", p.solver);
}

void parse_execution(const json& j, const std::string& path, ScenarioConfig& c) {
    check_keys(j, path, {"mode", "latency"});
    if (j.contains("mode")) {
        const std::string m = j.at("mode").get<std::string>();
        if (m == "sync")
            c.mode = ExecMode::sync;
        else if (m == "async")
            c.mode = ExecMode::async;
        else
            fail(path + "/mode", "expected \"sync\" or \"async\"");
    }
    read_field(j, path, "latency", c.latency);
    if (c.latency < 0) fail(path + "/latency", "latency must be >= 0");
}

void parse_seeds(const json& j, const std::string& path, std::vector<std::uint64_t>& seeds) {
    seeds.clear();
    if (j.is_array()) {
        for (const auto& s : j) {
            if (!s.is_number_unsigned() && !s.is_number_integer())
                fail(path, "seed entries must be integers");
            seeds.push_back(s.get<std::uint64_t>());
        }
        return;
    }
    if (j.is_object()) {
        check_keys(j, path, {"base", "count"});
        std::uint64_t base = 0;
        int count = 0;
        read_field(j, path, "base", base);
        read_field(j, path, "count", count);
        if (count < 0) fail(path + "/count", "count must be >= 0");
        for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
        return;
    }
    fail(path, "expected an array of seeds or {base, count}");
}

}  // namespace

ScenarioConfig parse_scenario(const nlohmann::json& j) {
    ScenarioConfig c;
    check_keys(j, "", {"schema_version", "environment", "experts", "planner", "execution", "seeds",
                       "deterministic_timing"});
    read_field(j, "", "schema_version", c.schema_version);
    if (c.schema_version != 1) fail("/schema_version", "this build speaks version 1 only");
    if (j.contains("environment")) parse_environment(j.at("environment"), "/environment", c.environment);
    if (j.contains("experts")) parse_experts(j.at("experts"), "/experts", c.experts);
    if (j.contains("planner")) parse_planner(j.at("planner"), "/planner", c);
    if (j.contains("execution")) parse_execution(j.at("execution"), "/execution", c);
    if (j.contains("seeds")) parse_seeds(j.at("seeds"), "/seeds", c.seeds);
    read_field(j, "", "deterministic_timing", c.deterministic_timing);
    if (c.seeds.empty()) for (std::uint64_t s = 0; s < 10; ++s) c.seeds.push_back(s);
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("scenario config: " + path + ": " + e.what());
    }
    return parse_scenario(j);
}

nlohmann::json scenario_to_json(const ScenarioConfig& c) {
    nlohmann::json j;
    j["schema_version"] = c.schema_version;
    j["environment"] = {
        {"type", c.environment.type == EnvType::maze ? "maze" : "box"},
        {"obstacle_count", c.environment.obstacle_count},
        {"velocity_level", c.environment.velocity_level},
        {"dynamic", c.environment.dynamic},
        {"noise_std", c.environment.noise_std},
        {"arena",
         {{"width", c.environment.arena.width},
          {"height", c.environment.arena.height},
          {"goal_radius", c.environment.arena.goal_radius},
          {"agent_radius", c.environment.arena.agent_radius},
          {"v_max", c.environment.arena.v_max},
          {"episode_cap", c.environment.arena.episode_cap}}},
    };
    j["experts"] = {
        {"attractor_gain", c.experts.attractor_gain},
        {"attractor_damping", c.experts.attractor_damping},
        {"soft_norm_eps", c.experts.soft_norm_eps},
        {"repulsor_gain", c.experts.repulsor_gain},
        {"repulsor_length_scale", c.experts.repulsor_length_scale},
        {"curl_gain", c.experts.curl_gain},
        {"curl_blend_range", c.experts.curl_blend_range},
        {"damper_gain", c.experts.damper_gain},
    };
    const auto& p = c.planner;
    j["planner"] = {
        {"method", c.method},
        {"horizon", p.horizon},
        {"goal_weight", p.goal_weight},
        {"collision_weight", p.collision_weight},
        {"collision_margin", p.collision_margin},
        {"lambda_entropy", p.lambda_entropy},
        {"lambda_kl", p.lambda_kl},
        {"cost_normalization",
         p.cost_normalization == planner::CostNormalization::minmax ? "minmax" : "none"},
        {"row_prior", std::vector<double>(p.row_prior.data(), p.row_prior.data() + p.row_prior.size())},
        {"col_prior", std::vector<double>(p.col_prior.data(), p.col_prior.data() + p.col_prior.size())},
        {"constant_temperatures", p.constant_temperatures},
        {"solver",
         {{"max_iterations", p.solver.max_iterations},
          {"tolerance", p.solver.tolerance},
          {"stabilized", p.solver.stabilized}}},
    };
    j["execution"] = {{"mode", c.mode == ExecMode::sync ? "sync" : "async"}, {"latency", c.latency}};
    j["seeds"] = c.seeds;
    j["deterministic_timing"] = c.deterministic_timing;
    return j;
}

std::string env_label(const EnvironmentConfig& e) {
    if (e.type == EnvType::maze)
        return e.velocity_level > 0 ? "maze_dynamic" : "maze_static";
    return e.dynamic ? "box_dynamic" : "box_static";
}

std::string mode_label(ExecMode m) { return m == ExecMode::sync ? "sync" : "async"; }

}  // namespace hipbot::bench
