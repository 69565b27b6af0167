// Experiment harness: optimize, validate and sweep subcommands.
// Exit codes: 0 success, 1 bad input or configuration, 2 solver failure.

#include "cachenet/caching.hpp"
#include "cachenet/errors.hpp"
#include "cachenet/experiment.hpp"
#include "cachenet/mcsim.hpp"
#include "cachenet/stp.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace cachenet;

namespace {

constexpr int kBadInput = 1;
constexpr int kSolverFailure = 2;

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
};

int cmd_optimize(const Common& common, const std::string& algorithm, std::optional<std::size_t> max_iters,
                 std::optional<double> tol, const std::string& out_dir) {
    ExperimentConfig cfg = load_config(common.config);
    const Scheme scheme = parse_scheme(algorithm);
    if (common.seed) cfg.algorithm.seed = *common.seed;
    if (max_iters) cfg.algorithm.max_iters = *max_iters;
    if (tol) cfg.algorithm.tol = *tol;

    const RunOutcome run = run_scheme(cfg, scheme, cfg.algorithm.seed);
    validate(run.t, cfg.network.cache_sizes);

    fs::create_directories(out_dir);
    auto t_out = open_out(fs::path(out_dir) / "T.csv");
    write_caching_csv(t_out, run.t);
    auto h_out = open_out(fs::path(out_dir) / "history.csv");
    write_history_csv(h_out, run.history, cfg.algorithm.record_wall_time);

    std::cout << "algorithm " << scheme_name(scheme) << "\n"
              << "objective " << format_number(run.score) << "\n"
              << "iterations " << (run.history.empty() ? 0 : run.history.back().iter) << "\n"
              << "converged " << (run.converged ? "yes" : "no") << "\n";
    if (!run.converged) std::cerr << "warning: iteration limit reached before the stopping tolerance\n";
    return 0;
}

int cmd_validate(const Common& common, const std::string& caching_path, std::optional<std::size_t> trials) {
    ExperimentConfig cfg = load_config(common.config);
    if (common.seed) cfg.simulation.seed = *common.seed;
    if (trials) cfg.simulation.trials = *trials;

    std::ifstream in(caching_path);
    if (!in) throw ConfigError("cannot open " + caching_path);
    const CachingMatrix t = read_caching_csv(in);
    if (static_cast<std::size_t>(t.rows()) != cfg.network.tiers() ||
        static_cast<std::size_t>(t.cols()) != cfg.network.catalog_size) {
        throw ConfigError("caching matrix is " + std::to_string(t.rows()) + " x " + std::to_string(t.cols()) +
                          ", config expects " + std::to_string(cfg.network.tiers()) + " x " +
                          std::to_string(cfg.network.catalog_size));
    }
    validate(t, cfg.network.cache_sizes);

    const PopularityInputs pop = popularity_inputs(cfg, cfg.algorithm.seed);
    const double analytic = stp(pop.truth, t, compute_coefficients(cfg.network));
    const SimEstimate mc = estimate_stp(cfg.network, t, pop.truth, cfg.simulation);
    const double z = mc.std_error > 0.0 ? (mc.estimate - analytic) / mc.std_error
                                        : (mc.estimate == analytic ? 0.0 : INFINITY);
    std::cout << "analytic " << format_number(analytic) << "\n"
              << "monte_carlo " << format_number(mc.estimate) << "\n"
              << "std_error " << format_number(mc.std_error) << "\n"
              << "z " << format_number(z) << "\n"
              << "trials " << mc.trials << "\n";
    return 0;
}

int cmd_sweep(const Common& common, const std::string& sweep_path, const std::string& out_dir) {
    ExperimentConfig cfg = load_config(common.config);
    if (common.seed) cfg.algorithm.seed = *common.seed;
    const SweepSpec sweep = sweep_path.empty() ? (cfg.sweep ? *cfg.sweep : throw ConfigError("no sweep given"))
                                               : parse_sweep(read_file(sweep_path));
    const auto rows = run_sweep(cfg, sweep, cfg.algorithm.workers);
    if (out_dir.empty()) {
        write_sweep_csv(std::cout, rows);
    } else {
        fs::create_directories(out_dir);
        auto out = open_out(fs::path(out_dir) / "sweep.csv");
        write_sweep_csv(out, rows);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cache placement optimizer for multi-tier wireless networks"};
    app.require_subcommand(1);

    Common common;
    std::optional<std::uint64_t> seed;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "Experiment config JSON")->required();
        sub->add_option("--seed", seed, "Master seed");
    };

    std::string algorithm;
    std::optional<std::size_t> max_iters;
    std::optional<double> tol;
    std::string out_dir = ".";
    auto* optimize = app.add_subcommand("optimize", "Run one algorithm and write T.csv and history.csv");
    add_common(optimize);
    optimize->add_option("--algorithm", algorithm, "sca, robust, stochastic, baseline1 or baseline2")->required();
    optimize->add_option("--max-iters", max_iters, "Iteration (or slot) limit");
    optimize->add_option("--tol", tol, "Stopping tolerance");
    optimize->add_option("--out", out_dir, "Output directory");

    std::string caching_path;
    std::optional<std::size_t> trials;
    auto* validate_cmd = app.add_subcommand("validate", "Compare analytic STP with Monte Carlo for a caching CSV");
    add_common(validate_cmd);
    validate_cmd->add_option("caching", caching_path, "Caching matrix CSV")->required();
    validate_cmd->add_option("--trials", trials, "Monte Carlo trials");

    std::string sweep_path;
    std::string sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write sweep CSV");
    add_common(sweep);
    sweep->add_option("--sweep", sweep_path, "Sweep JSON; defaults to the config's sweep section");
    sweep->add_option("--out", sweep_out, "Output directory for sweep.csv; stdout when omitted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kBadInput;
    }
    common.seed = seed;

    try {
        if (*optimize) return cmd_optimize(common, algorithm, max_iters, tol, out_dir);
        if (*validate_cmd) return cmd_validate(common, caching_path, trials);
        return cmd_sweep(common, sweep_path, sweep_out);
    } catch (const UnsupportedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolverFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    }
}
