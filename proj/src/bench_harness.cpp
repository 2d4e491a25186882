#include "hipbot/bench_harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <sstream>

namespace hipbot::bench {
namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double population_std(double sum, double sum_sq, int n) {
    if (n <= 0) return 0.0;
    const double mean = sum / n;
    return std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
}

}  // namespace

EpisodeRecord run_episode(const ScenarioConfig& config, std::uint64_t seed, bool keep_trajectory,
                          std::ostream* debug) {
    const auto& env = config.environment;
    world::WorldState w =
        env.type == EnvType::maze
            ? world::sample_maze(seed, env.obstacle_count, env.velocity_level, env.arena)
            : world::sample_box(seed, env.dynamic, env.velocity_level, env.arena);
    const experts::ExpertPool pool =
        experts::make_planar_pool(config.experts, static_cast<int>(w.obstacles.size()));
    const planner::RolloutDynamics dynamics{w.arena, 1.0};

    planner::PlannerConfig pc = config.planner;
    pc.latency = config.mode == ExecMode::async ? config.latency : 0;
    const bool use_planner = config.method == "hipbot";
    std::optional<planner::Planner> plan;
    if (use_planner) {
        plan.emplace(pool, pc, dynamics);
        plan->set_debug_stream(debug);
    }
    std::mt19937_64 noise_rng(seed ^ 0x9e3779b97f4a7c15ULL);

    EpisodeRecord rec;
    rec.seed = seed;
    double baseline_seconds = 0.0;
    int baseline_calls = 0;
    auto record_row = [&]() {
        if (!keep_trajectory) return;
        TrajectoryRow r;
        r.step = w.step;
        r.q = w.q;
        r.q_dot = w.q_dot;
        r.min_sdf = world::min_sdf(w.q, w.obstacles);
        r.collided = w.collided;
        r.reached = w.reached_goal;
        for (const auto& ob : w.obstacles) r.obstacle_centers.push_back(ob.center);
        rec.trajectory.push_back(std::move(r));
    };
    record_row();

    while (!w.reached_goal && w.step < w.arena.episode_cap) {
        State s;
        s.q = w.q;
        s.q_dot = w.q_dot;
        s.context = w.context();
        Vec2 action;
        if (use_planner) {
            action = plan->step(s, w.step);
        } else {
            const auto t0 = std::chrono::steady_clock::now();
            action = Vec2(experts::rmpflow_baseline(s, pool));
            baseline_seconds +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            baseline_calls += 1;
        }
        if (env.noise_std > 0) world::inject_acceleration_noise(w, env.noise_std, noise_rng);
        world::step_world(w, action, 1.0);
        record_row();
    }

    rec.safe = !w.collided;
    rec.reached = w.reached_goal;
    rec.success = w.reached_goal && !w.collided;
    rec.time_steps = w.reached_goal ? w.step : w.arena.episode_cap;
    rec.final_distance = (w.q - w.arena.goal).norm();
    const double plan_ms = use_planner
                               ? plan->mean_plan_seconds() * 1e3
                               : (baseline_calls ? baseline_seconds * 1e3 / baseline_calls : 0.0);
    rec.mean_plan_ms = config.deterministic_timing ? 0.0 : plan_ms;
    return rec;
}

MetricsRow aggregate(const ScenarioConfig& config, const std::vector<EpisodeRecord>& records) {
    MetricsRow row;
    row.method = config.method;
    row.horizon = config.method == "hipbot" ? config.planner.horizon : 0;
    row.mode = mode_label(config.mode);
    row.env = env_label(config.environment);
    row.velocity_level = config.environment.velocity_level;
    row.noise_std = config.environment.noise_std;
    row.seeds = static_cast<int>(records.size());
    if (records.empty()) return row;

    double d2g = 0, d2g_sq = 0, ts = 0, ts_sq = 0, plan_ms = 0;
    int suc = 0, safe = 0, any = 0;
    for (const auto& r : records) {
        suc += r.success ? 1 : 0;
        safe += r.safe ? 1 : 0;
        any += r.reached ? 1 : 0;
        d2g += r.final_distance;
        d2g_sq += r.final_distance * r.final_distance;
        ts += r.time_steps;
        ts_sq += static_cast<double>(r.time_steps) * r.time_steps;
        plan_ms += r.mean_plan_ms;
    }
    const int n = row.seeds;
    row.suc = static_cast<double>(suc) / n;
    row.safe = static_cast<double>(safe) / n;
    row.goal_any = static_cast<double>(any) / n;
    row.d2g_mean = d2g / n;
    row.d2g_std = population_std(d2g, d2g_sq, n);
    row.ts_mean = ts / n;
    row.ts_std = population_std(ts, ts_sq, n);
    row.plan_ms_mean = plan_ms / n;
    return row;
}

MetricsRow run_batch(const ScenarioConfig& config, bool parallel) {
    const int n = static_cast<int>(config.seeds.size());
    std::vector<EpisodeRecord> records(n);
    std::exception_ptr first_error = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (int i = 0; i < n; ++i) {
        try {
            records[i] = run_episode(config, config.seeds[i]);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!first_error) first_error = std::current_exception();
        }
    }
    (void)parallel;
    if (first_error) std::rethrow_exception(first_error);
    return aggregate(config, records);
}

std::vector<MetricsRow> stress_sweep(const ScenarioConfig& config,
                                     const std::vector<double>& velocities,
                                     const std::vector<double>& noises, bool parallel) {
    std::vector<MetricsRow> rows;
    for (double v : velocities) {
        for (double noise : noises) {
            ScenarioConfig c = config;
            c.environment.velocity_level = v;
            c.environment.noise_std = noise;
            if (c.environment.type == EnvType::box) c.environment.dynamic = v > 0;
            rows.push_back(run_batch(c, parallel));
        }
    }
    return rows;
}

std::string metrics_csv_header() {
    return "method,horizon,mode,env,seeds,SUC,SAFE,D2G_mean,D2G_std,TS_mean,TS_std,plan_ms_mean";
}

std::string metrics_csv_row(const MetricsRow& r) {
    std::ostringstream os;
    os << r.method << ',' << r.horizon << ',' << r.mode << ',' << r.env << ',' << r.seeds << ','
       << fmt(r.suc) << ',' << fmt(r.safe) << ',' << fmt(r.d2g_mean) << ',' << fmt(r.d2g_std)
       << ',' << fmt(r.ts_mean) << ',' << fmt(r.ts_std) << ',' << fmt(r.plan_ms_mean);
    return os.str();
}

std::string stress_csv_header() {
    return "method,horizon,mode,env,velocity,noise,seeds,SUC,SAFE,GOAL_ANY,D2G_mean,D2G_std,"
           "TS_mean,TS_std,plan_ms_mean";
}

std::string stress_csv_row(const MetricsRow& r) {
    std::ostringstream os;
    os << r.method << ',' << r.horizon << ',' << r.mode << ',' << r.env << ','
       << fmt(r.velocity_level) << ',' << fmt(r.noise_std) << ',' << r.seeds << ',' << fmt(r.suc)
       << ',' << fmt(r.safe) << ',' << fmt(r.goal_any) << ',' << fmt(r.d2g_mean) << ','
       << fmt(r.d2g_std) << ',' << fmt(r.ts_mean) << ',' << fmt(r.ts_std) << ','
       << fmt(r.plan_ms_mean);
    return os.str();
}

std::string trajectory_csv(const EpisodeRecord& record) {
    std::ostringstream os;
    os << "step,qx,qy,vx,vy,min_sdf,collided,reached";
    const size_t obstacles = record.trajectory.empty()
                                 ? 0
                                 : record.trajectory.front().obstacle_centers.size();
    for (size_t k = 0; k < obstacles; ++k) os << ",cx" << k << ",cy" << k;
    os << '\n';
    for (const auto& row : record.trajectory) {
        os << row.step << ',' << fmt(row.q.x()) << ',' << fmt(row.q.y()) << ','
           << fmt(row.q_dot.x()) << ',' << fmt(row.q_dot.y()) << ',' << fmt(row.min_sdf) << ','
           << (row.collided ? 1 : 0) << ',' << (row.reached ? 1 : 0);
        for (const auto& c : row.obstacle_centers)
            os << ',' << fmt(c.x()) << ',' << fmt(c.y());
        os << '\n';
    }
    return os.str();
}

}  // namespace hipbot::bench
