#include "hipbot/bench_harness.hpp"

#include "../oracle/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace {

using hipbot::bench::ScenarioConfig;

struct CommonFlags {
    std::string config_path;
    std::string method;
    int horizon = -1;
    std::string mode;
    int latency = -1;
    int seed_count = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
    auto* cfg = cmd->add_option("--config", f.config_path, "scenario config (json)");
    if (config_required) cfg->required()->check(CLI::ExistingFile);
    cmd->add_option("--method", f.method, "override: hipbot | rmpflow");
    cmd->add_option("--horizon", f.horizon, "override: look-ahead steps");
    cmd->add_option("--mode", f.mode, "override: sync | async");
    cmd->add_option("--latency", f.latency, "override: async latency in steps");
    cmd->add_option("--seeds", f.seed_count, "override: run seeds 0..n-1");
}

// Loads the config and applies flag overrides.  When the file does not pin a
// seed list, `default_seeds` names how many to run (batches and sweeps use
// different customary sizes).
ScenarioConfig load_with_overrides(const CommonFlags& f, int default_seeds) {
    nlohmann::json j = nlohmann::json::object();
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw std::runtime_error("cannot open scenario config: " + f.config_path);
        in >> j;
    }
    const bool seeds_pinned = j.contains("seeds");
    ScenarioConfig c = hipbot::bench::parse_scenario(j);
    if (!seeds_pinned) {
        c.seeds.clear();
        for (int s = 0; s < default_seeds; ++s) c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (!f.method.empty()) c.method = f.method;
    if (f.horizon > 0) c.planner.horizon = f.horizon;
    if (!f.mode.empty()) {
        if (f.mode != "sync" && f.mode != "async")
            throw std::runtime_error("--mode must be sync or async");
        c.mode = f.mode == "sync" ? hipbot::bench::ExecMode::sync : hipbot::bench::ExecMode::async;
    }
    if (f.latency >= 0) c.latency = f.latency;
    if (f.seed_count >= 0) {
        c.seeds.clear();
        for (int s = 0; s < f.seed_count; ++s) c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (c.method != "hipbot" && c.method != "rmpflow")
        throw std::runtime_error("method must be hipbot or rmpflow");
    return c;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

void write_lines(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    auto out = open_out(path);
    out << text;
}

void print_oracle_references(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Eigen::MatrixXd cost(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) cost(i, j) = unit(rng);
    const Eigen::VectorXd a = Eigen::VectorXd::Constant(4, 0.25);
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(4, 0.25);
    std::cout << "transportation_lp[4x4, seed " << seed
              << "]: optimum = " << hipbot::oracle::transportation_lp_optimum(cost, a, b) << "\n";

    const double shift = 1.0 + 2.0 * unit(rng);
    const double x_star = hipbot::oracle::golden_section_minimize(
        [shift](double x) { return (x - shift) * (x - shift); }, -10.0, 10.0);
    std::cout << "golden_section[(x - " << shift << ")^2]: minimizer = " << x_star << "\n";

    std::vector<Eigen::MatrixXd> metrics;
    std::vector<Eigen::VectorXd> forces;
    std::vector<double> weights;
    for (int k = 0; k < 3; ++k) {
        Eigen::MatrixXd r(2, 2);
        r << unit(rng), unit(rng), unit(rng), unit(rng);
        metrics.push_back(r.transpose() * r + 0.1 * Eigen::MatrixXd::Identity(2, 2));
        forces.push_back(Eigen::Vector2d(unit(rng) - 0.5, unit(rng) - 0.5));
        weights.push_back(unit(rng) + 0.1);
    }
    const Eigen::VectorXd x =
        hipbot::oracle::minimize_weighted_quadratics(metrics, forces, weights);
    std::cout << "weighted_quadratics[3 experts, 2d]: minimizer = (" << x(0) << ", " << x(1)
              << ")\n";

    const Eigen::Vector2d p(3.0 + unit(rng), -1.0 + unit(rng));
    std::cout << "sampled_circle_sdf[p=(" << p.x() << ", " << p.y() << "), c=(0,0), r=2]: "
              << hipbot::oracle::sampled_circle_sdf(p, Eigen::Vector2d::Zero(), 2.0) << "\n";
    std::cout << "sampled_box_sdf[p=(" << p.x() << ", " << p.y() << "), c=(0,0), he=(2,1)]: "
              << hipbot::oracle::sampled_box_sdf(p, Eigen::Vector2d::Zero(),
                                                 Eigen::Vector2d(2.0, 1.0))
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reactive motion generation benchmark"};
    app.require_subcommand(1);

    int threads = 0;
    bool serial = false;
    app.add_option("--threads", threads, "OpenMP thread count (0 = library default)");
    app.add_flag("--serial", serial, "disable parallel episode execution");

    CommonFlags run_flags;
    std::uint64_t run_seed = 0;
    std::string dump_traj;
    auto* run = app.add_subcommand("run", "run one seeded episode");
    add_common(run, run_flags, false);
    run->add_option("--seed", run_seed, "episode seed")->required();
    run->add_option("--dump-traj", dump_traj, "write the trajectory csv here");

    CommonFlags bench_flags;
    std::string bench_out;
    auto* bench = app.add_subcommand("bench", "run a seeded batch and write a metrics row");
    add_common(bench, bench_flags, true);
    bench->add_option("--out", bench_out, "metrics csv path ('-' = stdout)")->required();

    CommonFlags stress_flags;
    std::string stress_out;
    std::vector<double> velocities;
    std::vector<double> noises;
    auto* stress = app.add_subcommand("stress", "sweep obstacle speed and noise levels");
    add_common(stress, stress_flags, true);
    stress->add_option("--velocities", velocities, "obstacle speed levels")
        ->required()
        ->delimiter(',');
    stress->add_option("--noises", noises, "acceleration noise levels")->required()->delimiter(',');
    stress->add_option("--out", stress_out, "stress csv path ('-' = stdout)")->required();

    std::uint64_t oracle_seed = 0;
    auto* oracle = app.add_subcommand("oracle", "print reference values from the slow oracles");
    oracle->add_option("--seed", oracle_seed, "instance seed");

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        if (run->parsed()) {
            const ScenarioConfig c = load_with_overrides(run_flags, 100);
            const auto rec = hipbot::bench::run_episode(c, run_seed, !dump_traj.empty());
            if (!dump_traj.empty()) write_lines(dump_traj, hipbot::bench::trajectory_csv(rec));
            std::cout << "seed=" << rec.seed << " env=" << env_label(c.environment)
                      << " method=" << c.method << " mode=" << mode_label(c.mode)
                      << " success=" << rec.success << " safe=" << rec.safe
                      << " reached=" << rec.reached << " time_steps=" << rec.time_steps
                      << " final_distance=" << rec.final_distance
                      << " plan_ms=" << rec.mean_plan_ms << "\n";
        } else if (bench->parsed()) {
            const ScenarioConfig c = load_with_overrides(bench_flags, 100);
            const auto row = hipbot::bench::run_batch(c, !serial);
            write_lines(bench_out, hipbot::bench::metrics_csv_header() + "\n" +
                                       hipbot::bench::metrics_csv_row(row) + "\n");
        } else if (stress->parsed()) {
            const ScenarioConfig c = load_with_overrides(stress_flags, 30);
            const auto rows = hipbot::bench::stress_sweep(c, velocities, noises, !serial);
            std::string text = hipbot::bench::stress_csv_header() + "\n";
            for (const auto& row : rows) text += hipbot::bench::stress_csv_row(row) + "\n";
            write_lines(stress_out, text);
        } else if (oracle->parsed()) {
            print_oracle_references(oracle_seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
