#include "hipbot/bench_harness.hpp"

#include <benchmark/benchmark.h>

namespace {

// A mid-episode maze state with the full expert pool: the shape of the work
// the planner does every control step.
hipbot::State maze_state(const hipbot::world::WorldState& w) {
    hipbot::State s;
    s.q = 0.5 * (w.arena.start + w.arena.goal);  // deep in the clutter
    s.q_dot = hipbot::Vec2(2.0, -1.0);
    s.context = w.context();
    return s;
}

void cost_matrix(benchmark::State& state) {
    const bool parallel = state.range(0) != 0;
    const hipbot::world::WorldState w = hipbot::world::sample_maze(7, 8, 1.0);
    const auto pool =
        hipbot::experts::make_planar_pool(hipbot::experts::ExpertParams{},
                                          static_cast<int>(w.obstacles.size()));
    const hipbot::planner::PlannerConfig config;
    const hipbot::planner::RolloutDynamics dynamics{w.arena, 1.0};
    const hipbot::State s = maze_state(w);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            hipbot::planner::build_cost_matrix(s, pool, config, dynamics, parallel));
    }
}

void episode_batch(benchmark::State& state) {
    const bool parallel = state.range(0) != 0;
    hipbot::bench::ScenarioConfig c;
    c.environment.type = hipbot::bench::EnvType::maze;
    c.method = "hipbot";
    c.deterministic_timing = true;
    c.seeds.clear();
    for (std::uint64_t seed = 0; seed < 16; ++seed) c.seeds.push_back(seed);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hipbot::bench::run_batch(c, parallel));
    }
}

}  // namespace

BENCHMARK(cost_matrix)->Arg(0)->Arg(1)->ArgNames({"threads"});
BENCHMARK(episode_batch)->Arg(0)->Arg(1)->ArgNames({"threads"})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
