// End-to-end acceptance gate.  Each numbered check prints one PASS/FAIL line
// with the measured values it judged; the process exit code is the number of
// failed checks.  Thresholds live next to each check on purpose: they are the
// contract, not tuning knobs.

#include "hipbot/bench_harness.hpp"

#include "../oracle/oracle.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using hipbot::State;
using hipbot::Vec2;
using hipbot::bench::EnvType;
using hipbot::bench::ExecMode;
using hipbot::bench::MetricsRow;
using hipbot::bench::ScenarioConfig;

namespace {

int failures = 0;

void report(int index, bool pass, const std::string& name, const std::string& details) {
    std::printf("[%2d] %s — %s (%s)\n", index, pass ? "PASS" : "FAIL", name.c_str(),
                details.c_str());
    if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
    char buf[256];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

ScenarioConfig scenario(EnvType type, const std::string& method, int horizon) {
    ScenarioConfig c;
    c.environment.type = type;
    c.method = method;
    c.planner.horizon = horizon;
    c.deterministic_timing = true;
    c.seeds.clear();
    for (std::uint64_t s = 0; s < 50; ++s) c.seeds.push_back(s);
    return c;
}

// 1. Entropic plans at small lambda land within a whisker of the exact
//    transportation-LP optimum, with tight marginals.
void check_balanced_against_lp() {
    const double cost_slack = 1.01;    // allowed multiple of the LP optimum
    const double marginal_tol = 1e-6;  // absolute marginal deviation
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    hipbot::ot::SolverConfig sc;
    sc.lambda_entropy = 1e-3;
    sc.max_iterations = 200000;
    sc.tolerance = 1e-7;

    double worst_ratio = 0.0, worst_marginal = 0.0;
    bool all_converged = true;
    const auto t0 = std::chrono::steady_clock::now();
    for (int k = 0; k < 20; ++k) {
        Eigen::MatrixXd cost(4, 4);
        for (int i = 0; i < 16; ++i) cost(i / 4, i % 4) = unit(rng);
        const Eigen::VectorXd a = Eigen::VectorXd::Constant(4, 0.25);
        const Eigen::VectorXd b = Eigen::VectorXd::Constant(4, 0.25);
        const auto plan = hipbot::ot::solve_balanced(cost, a, b, sc);
        all_converged = all_converged && plan.converged;
        const double lp = hipbot::oracle::transportation_lp_optimum(cost, a, b);
        const double got = (plan.entries.array() * cost.array()).sum();
        worst_ratio = std::max(worst_ratio, got / lp);
        worst_marginal = std::max(worst_marginal, plan.marginal_error);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = all_converged && worst_ratio <= cost_slack &&
                      worst_marginal <= marginal_tol && seconds < 1.0;
    report(1, pass, "balanced plans match the exact transportation optimum",
           fmt("worst cost ratio %.5f, worst marginal %.2e, %.2f s", worst_ratio, worst_marginal,
               seconds));
}

// 2. With a huge divergence penalty the unbalanced solver collapses onto the
//    balanced plan.
void check_unbalanced_limit() {
    const double entry_tol = 1e-3;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    hipbot::ot::SolverConfig balanced;
    balanced.lambda_entropy = 1e-2;
    balanced.max_iterations = 100000;
    balanced.tolerance = 1e-12;
    hipbot::ot::SolverConfig soft = balanced;
    soft.lambda_kl = 1e4;

    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        Eigen::MatrixXd cost(3, 3);
        for (int i = 0; i < 9; ++i) cost(i / 3, i % 3) = unit(rng);
        Eigen::VectorXd a(3), b(3);
        for (int i = 0; i < 3; ++i) a(i) = unit(rng) + 0.2;
        for (int i = 0; i < 3; ++i) b(i) = unit(rng) + 0.2;
        a /= a.sum();
        b /= b.sum();
        const auto exact = hipbot::ot::solve_balanced(cost, a, b, balanced);
        const auto relaxed = hipbot::ot::solve_unbalanced(cost, a, b, soft);
        worst = std::max(worst, (exact.entries - relaxed.entries).cwiseAbs().maxCoeff());
    }
    report(2, worst <= entry_tol, "a stiff unbalanced solve recovers the balanced plan",
           fmt("worst entry gap %.2e", worst));
}

// 3. The closed-form weighted blend solves the same quadratic the slow
//    gradient-descent oracle solves.
void check_blend_against_minimizer() {
    const double tol = 1e-4;
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> count(1, 5);

    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const int n = count(rng);
        std::vector<hipbot::rmp::PulledRmp> pulled(n);
        std::vector<Eigen::MatrixXd> metrics;
        std::vector<Eigen::VectorXd> forces;
        std::vector<double> weights;
        for (int i = 0; i < n; ++i) {
            Eigen::MatrixXd r(2, 2);
            r << unit(rng), unit(rng), unit(rng), unit(rng);
            Eigen::MatrixXd m = r.transpose() * r;
            if (unit(rng) < 0.3) {  // exercise the singular path too
                Eigen::Vector2d u(unit(rng), unit(rng));
                u.normalize();
                m = u * u.transpose();
            }
            Eigen::Vector2d f(unit(rng) - 0.5, unit(rng) - 0.5);
            if (m.determinant() < 1e-12) f = m * f;  // keep the target reachable
            pulled[i].M = m;
            pulled[i].f = f;
            metrics.push_back(m);
            forces.push_back(f);
            weights.push_back(unit(rng) + 0.05);
        }
        const Eigen::VectorXd fast = hipbot::rmp::blend(pulled, weights);
        const Eigen::VectorXd slow =
            hipbot::oracle::minimize_weighted_quadratics(metrics, forces, weights);
        worst = std::max(worst, (fast - slow).norm());
    }
    report(3, worst <= tol, "closed-form blending equals the numeric minimizer",
           fmt("worst action gap %.2e over 100 draws", worst));
}

// 4. Opposing equal-gain swirl experts cancel exactly inside the uniform
//    blend, leaving the swirl-free action.
void check_curl_cancellation() {
    const double tol = 1e-12;
    const hipbot::experts::ExpertParams params;
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> coord(-80.0, 80.0);
    std::uniform_real_distribution<double> vel(-6.0, 6.0);
    std::uniform_real_distribution<double> radius(4.0, 12.0);

    using hipbot::experts::ExpertKind;
    using hipbot::experts::ExpertSpec;
    std::vector<ExpertSpec> with_curls{{ExpertKind::goal_attractor, -1, "goal"},
                                       {ExpertKind::obstacle_avoid, 0, "avoid0"},
                                       {ExpertKind::obstacle_avoid, 1, "avoid1"},
                                       {ExpertKind::curl_ccw, -1, "curl+"},
                                       {ExpertKind::curl_cw, -1, "curl-"},
                                       {ExpertKind::damper, -1, "damp"}};
    std::vector<ExpertSpec> without{{ExpertKind::goal_attractor, -1, "goal"},
                                    {ExpertKind::obstacle_avoid, 0, "avoid0"},
                                    {ExpertKind::obstacle_avoid, 1, "avoid1"},
                                    {ExpertKind::damper, -1, "damp"}};
    const hipbot::experts::ExpertPool curled(with_curls, params);
    const hipbot::experts::ExpertPool plain(without, params);

    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        State s;
        s.q = Vec2(coord(rng), coord(rng));
        s.q_dot = Vec2(vel(rng), vel(rng));
        s.context.goal = Vec2(coord(rng), coord(rng));
        for (int o = 0; o < 2; ++o) {
            hipbot::Obstacle ob;
            ob.shape = hipbot::ObstacleShape::circle;
            ob.center = Vec2(coord(rng), coord(rng));
            ob.radius = radius(rng);
            s.context.obstacles.push_back(ob);
        }
        const auto a = hipbot::experts::rmpflow_baseline(s, curled);
        const auto b = hipbot::experts::rmpflow_baseline(s, plain);
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
        s.context.obstacles.clear();
    }
    report(4, worst <= tol, "opposing swirls cancel out of the uniform blend",
           fmt("worst action gap %.2e over 100 states", worst));
}

// 5. In an empty arena the fixed-weight flow settles onto the goal from
//    anywhere, with no residual velocity.
void check_empty_arena_settling() {
    const double position_tol = 1.0;
    const double speed_tol = 0.01;
    const int step_cap = 2000;
    std::mt19937_64 rng(45);
    std::uniform_real_distribution<double> coord(5.0, 195.0);

    const auto pool = hipbot::experts::make_planar_pool(hipbot::experts::ExpertParams{}, 0);
    int settled = 0;
    double worst_distance = 0.0, worst_speed = 0.0;
    for (int k = 0; k < 50; ++k) {
        hipbot::world::WorldState w;
        w.arena.start = Vec2(coord(rng), coord(rng));
        w.arena.goal = Vec2(coord(rng), coord(rng));
        w.arena.episode_cap = step_cap;
        w.q = w.arena.start;
        w.q_dot = Vec2::Zero();
        for (int t = 0; t < step_cap; ++t) {
            State s;
            s.q = w.q;
            s.q_dot = w.q_dot;
            s.context = w.context();
            hipbot::world::step_world(w, Vec2(hipbot::experts::rmpflow_baseline(s, pool)), 1.0);
        }
        const double d = (w.q - w.arena.goal).norm();
        const double v = w.q_dot.norm();
        worst_distance = std::max(worst_distance, d);
        worst_speed = std::max(worst_speed, v);
        if (d < position_tol && v < speed_tol) ++settled;
    }
    report(5, settled == 50, "the empty-arena flow settles on the goal",
           fmt("%d/50 settled, worst distance %.3f px, worst speed %.4f", settled, worst_distance,
               worst_speed));
}

// 6. The box hides the goal behind a flat face: the myopic baseline parks in
//    front of it while the look-ahead planner goes around.
void check_static_box(const MetricsRow& base, const MetricsRow& h10, double seconds) {
    const bool pass = base.suc == 0.0 && base.safe == 1.0 && h10.suc >= 0.80 && h10.safe == 1.0 &&
                      seconds < 300.0;
    report(6, pass, "the box separates look-ahead from myopic blending",
           fmt("baseline %.0f/%.0f, h=10 %.0f/%.0f, %.1f s", 100 * base.suc, 100 * base.safe,
               100 * h10.suc, 100 * h10.safe, seconds));
}

// 7. The cluttered maze: the planner must clear it reliably and beat the
//    fixed-weight baseline.
void check_static_maze(const MetricsRow& planner_row, const MetricsRow& base) {
    const bool pass = planner_row.suc >= 0.65 && planner_row.safe >= 0.95 &&
                      planner_row.suc >= base.suc;
    report(7, pass, "the maze favors adaptive temperatures",
           fmt("planner %.0f/%.0f vs baseline %.0f/%.0f", 100 * planner_row.suc,
               100 * planner_row.safe, 100 * base.suc, 100 * base.safe));
}

// 8. Halving the look-ahead starves the box escape.
void check_short_horizon(const MetricsRow& h5) {
    report(8, h5.suc <= 0.10, "a short horizon fails the box",
           fmt("h=5 success %.0f%%", 100 * h5.suc));
}

// 9. A fast-moving box is still cleared safely with the full horizon.
void check_dynamic_box(const MetricsRow& row) {
    report(9, row.suc >= 0.90 && row.safe == 1.0, "the sliding box is cleared at speed",
           fmt("success %.0f%%, safe %.0f%%", 100 * row.suc, 100 * row.safe));
}

// 10. Stale temperatures cannot help: async safety never beats sync, and a
//     ten-step delay visibly hurts.
void check_async_degradation(const MetricsRow& sync_row, const MetricsRow& l2, const MetricsRow& l10) {
    const bool pass = l2.safe <= sync_row.safe && l10.safe <= sync_row.safe &&
                      l10.safe < sync_row.safe;
    report(10, pass, "delayed temperatures degrade safety monotonically",
           fmt("sync %.0f, L=2 %.0f, L=10 %.0f", 100 * sync_row.safe, 100 * l2.safe,
               100 * l10.safe));
}

// 11. Cross-cutting invariants, re-checked here end to end: batch determinism,
//     metric ordering, the sampled-boundary distance oracle, strictly positive
//     temperatures, blend scale-invariance, and the threaded cost matrix.
void check_property_bundle() {
    std::string detail;
    bool pass = true;

    ScenarioConfig c = scenario(EnvType::maze, "hipbot", 10);
    c.seeds.resize(6);
    const std::string once = hipbot::bench::metrics_csv_row(hipbot::bench::run_batch(c, true));
    const std::string twice = hipbot::bench::metrics_csv_row(hipbot::bench::run_batch(c, false));
    if (once != twice) {
        pass = false;
        detail += "batch rows differ across runs; ";
    }
    const MetricsRow row = hipbot::bench::run_batch(c, true);
    if (!(row.suc <= row.safe && row.suc <= row.goal_any)) {
        pass = false;
        detail += "metric ordering violated; ";
    }

    std::mt19937_64 rng(46);
    std::uniform_real_distribution<double> coord(-20.0, 20.0);
    double worst_sdf = 0.0;
    for (int k = 0; k < 40; ++k) {
        const Eigen::Vector2d p(coord(rng), coord(rng));
        hipbot::Obstacle circle;
        circle.shape = hipbot::ObstacleShape::circle;
        circle.center = Vec2(coord(rng) * 0.2, coord(rng) * 0.2);
        circle.radius = 5.0;
        worst_sdf = std::max(
            worst_sdf, std::abs(hipbot::world::sdf(p, circle) -
                                hipbot::oracle::sampled_circle_sdf(p, circle.center, 5.0, 1 << 16)));
        hipbot::Obstacle box;
        box.shape = hipbot::ObstacleShape::box;
        box.center = Vec2::Zero();
        box.half_extents = Vec2(4.0, 2.0);
        worst_sdf = std::max(
            worst_sdf,
            std::abs(hipbot::world::sdf(p, box) -
                     hipbot::oracle::sampled_box_sdf(p, box.center, box.half_extents, 0.02)));
    }
    if (worst_sdf > 1.5e-2) {  // the sampled references quantize at half their spacing
        pass = false;
        detail += fmt("distance oracle gap %.2e; ", worst_sdf);
    }

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd cost(5, 1);
    for (int i = 0; i < 5; ++i) cost(i, 0) = unit(rng);
    hipbot::planner::PlannerConfig pc;
    const auto outcome = hipbot::planner::solve_temperatures(cost, pc, 0);
    if (!outcome.converged || outcome.temperatures.beta.minCoeff() <= 0.0) {
        pass = false;
        detail += "temperatures not strictly positive; ";
    }

    std::vector<hipbot::rmp::PulledRmp> pulled(3);
    std::vector<double> weights{0.3, 1.1, 0.6};
    for (auto& p : pulled) {
        Eigen::MatrixXd r(2, 2);
        r << unit(rng), unit(rng), unit(rng), unit(rng);
        p.M = r.transpose() * r + 0.05 * Eigen::MatrixXd::Identity(2, 2);
        p.f = Eigen::Vector2d(unit(rng), unit(rng));
    }
    const Eigen::VectorXd one = hipbot::rmp::blend(pulled, weights);
    std::vector<double> scaled{weights};
    for (auto& w : scaled) w *= 37.5;
    if ((one - hipbot::rmp::blend(pulled, scaled)).norm() > 1e-9) {
        pass = false;
        detail += "blend not scale-invariant; ";
    }

    State s;
    s.q = Vec2(20.0, 20.0);
    s.q_dot = Vec2(1.0, -1.0);
    s.context.goal = Vec2(150.0, 150.0);
    hipbot::Obstacle ob;
    ob.shape = hipbot::ObstacleShape::circle;
    ob.center = Vec2(80.0, 80.0);
    ob.radius = 10.0;
    s.context.obstacles.push_back(ob);
    const auto pool = hipbot::experts::make_planar_pool(hipbot::experts::ExpertParams{}, 1);
    const hipbot::planner::RolloutDynamics dyn{hipbot::world::Arena{}, 1.0};
    const Eigen::MatrixXd serial = hipbot::planner::build_cost_matrix(s, pool, pc, dyn, false);
    const Eigen::MatrixXd threaded = hipbot::planner::build_cost_matrix(s, pool, pc, dyn, true);
    if (serial != threaded) {
        pass = false;
        detail += "threaded cost matrix differs; ";
    }

    if (detail.empty()) detail = "determinism, ordering, distances, positivity, scaling, threading";
    report(11, pass, "cross-module invariants hold end to end", detail);
}

}  // namespace

int main() {
    check_balanced_against_lp();
    check_unbalanced_limit();
    check_blend_against_minimizer();
    check_curl_cancellation();
    check_empty_arena_settling();

    const auto t0 = std::chrono::steady_clock::now();
    const MetricsRow box_base = hipbot::bench::run_batch(scenario(EnvType::box, "rmpflow", 10));
    const MetricsRow box_h10 = hipbot::bench::run_batch(scenario(EnvType::box, "hipbot", 10));
    const double box_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    check_static_box(box_base, box_h10, box_seconds);

    check_static_maze(hipbot::bench::run_batch(scenario(EnvType::maze, "hipbot", 10)),
                      hipbot::bench::run_batch(scenario(EnvType::maze, "rmpflow", 10)));
    check_short_horizon(hipbot::bench::run_batch(scenario(EnvType::box, "hipbot", 5)));

    ScenarioConfig dyn_box = scenario(EnvType::box, "hipbot", 10);
    dyn_box.environment.dynamic = true;
    dyn_box.environment.velocity_level = 10.0;
    check_dynamic_box(hipbot::bench::run_batch(dyn_box));

    ScenarioConfig dyn_maze = scenario(EnvType::maze, "hipbot", 10);
    dyn_maze.environment.velocity_level = 1.0;
    const MetricsRow sync_row = hipbot::bench::run_batch(dyn_maze);
    dyn_maze.mode = ExecMode::async;
    dyn_maze.latency = 2;
    const MetricsRow l2 = hipbot::bench::run_batch(dyn_maze);
    dyn_maze.latency = 10;
    const MetricsRow l10 = hipbot::bench::run_batch(dyn_maze);
    check_async_degradation(sync_row, l2, l10);

    check_property_bundle();

    std::printf("%d of 11 checks failed\n", failures);
    return failures;
}
