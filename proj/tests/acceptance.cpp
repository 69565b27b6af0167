// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Usage: acceptance [criterion numbers...]; no arguments runs all of them.

#include "cachenet/baselines.hpp"
#include "cachenet/caching.hpp"
#include "cachenet/mcsim.hpp"
#include "cachenet/netmodel.hpp"
#include "cachenet/popularity.hpp"
#include "cachenet/robust.hpp"
#include "cachenet/sca.hpp"
#include "cachenet/stochastic.hpp"
#include "cachenet/stp.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace cachenet;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::size_t hardware_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Network scaled 1:10 from the reference experiment.
NetworkConfig desk() { return testing::three_tier(50, 8, 6, 4); }

Outcome beta_identities() {
    double worst = 0.0;
    for (double alpha : {2.5, 3.0, 4.0, 6.0}) {
        const double x = 2.0 / alpha;
        worst = std::max(worst, std::abs(beta(x, 1.0 - x) - std::numbers::pi / std::sin(std::numbers::pi * x)));
    }
    return {worst <= 1e-10, "max |B - pi/sin| = " + fmt(worst)};
}

Outcome single_tier_coverage() {
    const auto cfg = testing::single_tier(1.0, 1, 1);
    const CachingMatrix t = CachingMatrix::Ones(1, 1);
    const PopularityVector a(Eigen::VectorXd::Ones(1));
    const double exact = 1.0 / (1.0 + std::numbers::pi / 4.0);
    const double analytic = stp(a, t, compute_coefficients(cfg));
    SimConfig sim;
    sim.trials = 100000;
    sim.seed = 2;
    sim.workers = hardware_workers();
    const SimEstimate mc = estimate_stp(cfg, t, a, sim);
    const double z = (mc.estimate - analytic) / mc.std_error;
    return {std::abs(analytic - exact) <= 1e-9 && std::abs(z) <= 3.5,
            "analytic err " + fmt(analytic - exact) + ", MC " + fmt(mc.estimate) + " z = " + fmt(z)};
}

Outcome analytic_vs_simulation() {
    std::mt19937_64 rng(2718);
    double worst_z = 0.0;
    for (int i = 0; i < 10; ++i) {
        const auto cfg = testing::random_network(rng, 2, 10);
        const CachingMatrix t = testing::random_caching(rng, cfg);
        const PopularityVector a(testing::random_simplex(rng, 10));
        SimConfig sim;
        sim.trials = 100000;
        sim.seed = 1000 + static_cast<std::uint64_t>(i);
        sim.workers = hardware_workers();
        const SimEstimate mc = estimate_stp(cfg, t, a, sim);
        worst_z = std::max(worst_z, std::abs(mc.estimate - stp(a, t, compute_coefficients(cfg))) / mc.std_error);
    }
    return {worst_z <= 3.5, "max |z| over 10 instances = " + fmt(worst_z)};
}

Outcome closed_form_tiers() {
    std::mt19937_64 rng(1618);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    double worst_det = 0.0;
    double worst_sto = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto cfg = testing::random_network(rng, 3, 10);
        const auto coef = compute_coefficients(cfg);
        const CachingMatrix t = testing::random_caching(rng, cfg);
        const Eigen::VectorXd a = testing::random_simplex(rng, 10);
        StochState state = initial_stoch_state(t);
        state.f = update_f(state.f, testing::random_simplex(rng, 10), t, 1.0, coef);
        state.f = update_f(state.f, testing::random_simplex(rng, 10), t, 0.5, coef);
        const double rho = u(rng);
        for (std::size_t m = 0; m < 3; ++m) {
            const double k = static_cast<double>(cfg.cache_sizes[m]);
            const Eigen::VectorXd start = Eigen::VectorXd::Constant(10, k / 10.0);

            const Eigen::VectorXd det = solve_tier_subproblem(m, a, t, coef, cfg.cache_sizes[m]);
            auto grad = [&](const Eigen::VectorXd& row) { return oracle::surrogate_gradient(m, a, row, t, coef); };
            const Eigen::VectorXd det_ref =
                oracle::projected_gradient_ascent(grad, start, k, oracle::surrogate_curvature(m, a, t, coef));
            worst_det = std::max(worst_det, (det - det_ref).cwiseAbs().maxCoeff());

            const Eigen::VectorXd sto = solve_tier_subproblem_stochastic(m, a, state, rho, coef, cfg.cache_sizes[m]);
            auto sgrad = [&](const Eigen::VectorXd& row) -> Eigen::VectorXd {
                return rho * oracle::surrogate_gradient(m, a, row, t, coef) +
                       (1.0 - rho) * state.f.row(static_cast<Eigen::Index>(m)).transpose();
            };
            const Eigen::VectorXd sto_ref =
                oracle::projected_gradient_ascent(sgrad, start, k, oracle::surrogate_curvature(m, a, t, coef, rho));
            worst_sto = std::max(worst_sto, (sto - sto_ref).cwiseAbs().maxCoeff());
        }
    }
    return {worst_det <= 1e-6 && worst_sto <= 1e-6,
            "max entry gap: deterministic " + fmt(worst_det) + ", stochastic " + fmt(worst_sto)};
}

Outcome inner_lp() {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 1 + rng() % 5;
        const PopularityVector est(testing::random_simplex(rng, n));
        Eigen::VectorXd eps(static_cast<Eigen::Index>(n));
        for (auto& e : eps) e = 0.4 * u(rng);
        const auto set = uncertainty_from_estimate(est, eps);
        Eigen::VectorXd g(static_cast<Eigen::Index>(n));
        for (auto& x : g) x = u(rng);
        if (i % 5 == 0 && n > 1) g(n - 1) = g(0);
        const double got = worst_case_linear(set, g).value;
        worst = std::max(worst, std::abs(got - oracle::lp_vertex_minimum(g, set.lower(), set.upper())));
    }
    return {worst <= 1e-9, "max value gap = " + fmt(worst)};
}

Outcome sca_convergence() {
    const auto cfg = desk();
    const auto coef = compute_coefficients(cfg);
    const PopularityVector a = zipf(50, 0.55);
    const ScaResult r = run_sca(a.values(), cfg, coef, StepSchedule::harmonic(), StopRule{2000, 1e-5});
    // First iteration after which every relative change stays below 1e-4.
    std::size_t settled = 0;
    for (std::size_t k = 1; k < r.history.size(); ++k) {
        const double rel = std::abs(r.history[k].objective - r.history[k - 1].objective) /
                           std::abs(r.history[k - 1].objective);
        if (rel >= 1e-4) settled = k;
    }
    const double b1 = stp(a, most_popular(a, cfg), coef);
    const double b2 = stp(a, iid_popularity(a, cfg, 10000, 1), coef);
    const bool pass = settled <= 30 && r.stationarity <= 1e-4 && r.objective > b1 && r.objective > b2;
    return {pass, "settled after iter " + std::to_string(settled) + ", stationarity " + fmt(r.stationarity) +
                      " at iter " + std::to_string(r.iterations) + ", STP " + fmt(r.objective) + " vs baselines " +
                      fmt(b1) + ", " + fmt(b2)};
}

Outcome robust_properties() {
    const auto cfg = desk();
    const auto coef = compute_coefficients(cfg);
    const PopularityVector est = zipf(50, 0.55);
    const ScaResult sca = run_sca(est.values(), cfg, coef, StepSchedule::harmonic(), StopRule{2000, 1e-5});

    auto monotone = [](const RobustResult& r) {
        for (std::size_t k = 1; k < r.history.size(); ++k) {
            if (r.history[k].y < r.history[k - 1].y) return false;
        }
        return true;
    };

    bool pass = true;
    std::ostringstream detail;
    const RobustResult zero = run_robust(relative_uncertainty(est, 0.0), cfg, coef);
    const double gap0 = std::abs(zero.worst_case - sca.objective);
    pass = pass && monotone(zero) && gap0 <= 1e-3;
    detail << "eps 0: |robust - sca| = " << fmt(gap0) << (monotone(zero) ? "" : " (y not monotone)");

    double prev = INFINITY;
    for (double eps : {0.05, 0.15, 0.25, 0.35, 0.45}) {
        const auto set = relative_uncertainty(est, eps);
        const RobustResult r = run_robust(set, cfg, coef);
        const double sca_wc = worst_case_stp(set, sca.t, coef).value;
        const bool ok = monotone(r) && r.worst_case <= prev && r.worst_case >= sca_wc;
        pass = pass && ok;
        detail << "; eps " << eps << ": " << fmt(r.worst_case) << " vs " << fmt(sca_wc) << (ok ? "" : " (violated)");
        prev = r.worst_case;
    }
    return {pass, detail.str()};
}

Outcome stochastic_convergence() {
    const auto cfg = desk();
    const auto coef = compute_coefficients(cfg);
    const PopularityVector a = zipf(50, 0.55);
    const double target = run_sca(a.values(), cfg, coef, StepSchedule::harmonic(), StopRule{2000, 1e-5}).objective;

    std::vector<double> gaps;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const StochResult r = run_stochastic({a, 200, 0.9, seed}, cfg, coef, StochasticSchedules::defaults(), {200});
        gaps.push_back(std::abs(r.history.back().objective - target));
    }

    constexpr std::size_t kCap = 2000;
    auto reach = [&](std::size_t users) {
        std::vector<double> slots;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const StochResult r =
                run_stochastic({a, users, 0.9, 100 + seed}, cfg, coef, StochasticSchedules::defaults(), {kCap});
            std::size_t hit = kCap + 1;
            for (const auto& rec : r.history) {
                if (std::abs(rec.objective - target) <= 0.01) {
                    hit = rec.slot;
                    break;
                }
            }
            slots.push_back(static_cast<double>(hit));
        }
        return median(slots);
    };
    const double fast = reach(2000);
    const double slow = reach(20);
    const double gap = median(gaps);
    return {gap <= 0.01 && fast < slow, "median gap at U=200, 200 slots: " + fmt(gap) +
                                            "; median slots to 0.01: U=2000 " + fmt(fast) + ", U=20 " + fmt(slow)};
}

Outcome monotone_trends() {
    const PopularityVector a = zipf(50, 0.55);
    std::ostringstream detail;
    bool pass = true;
    double prev = -INFINITY;
    detail << "K3 sweep:";
    for (std::size_t k3 : {4, 6, 8, 10}) {
        const auto cfg = testing::three_tier(50, k3 + 8, k3 + 4, k3);
        const double q = run_sca(a.values(), cfg, compute_coefficients(cfg), StepSchedule::harmonic(),
                                 StopRule{2000, 1e-5})
                             .objective;
        pass = pass && q >= prev;
        prev = q;
        detail << " " << fmt(q);
    }
    prev = -INFINITY;
    detail << "; gamma sweep:";
    const auto cfg = desk();
    const auto coef = compute_coefficients(cfg);
    for (double g : {0.15, 0.55, 0.95, 1.35}) {
        const double q = run_sca(zipf(50, g).values(), cfg, coef, StepSchedule::harmonic(), StopRule{2000, 1e-5})
                             .objective;
        pass = pass && q >= prev;
        prev = q;
        detail << " " << fmt(q);
    }
    return {pass, detail.str()};
}

Outcome combination_round_trip() {
    std::mt19937_64 rng(99);
    double worst = 0.0;
    bool support_ok = true;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 1 + rng() % 40;
        const std::size_t k = 1 + rng() % n;
        const Eigen::VectorXd row = testing::random_row(rng, n, k);
        const auto dist = to_combinations(row, k);
        worst = std::max(worst, (dist.marginals() - row).cwiseAbs().maxCoeff());
        support_ok = support_ok && dist.combinations.size() <= n;
    }
    return {worst <= 1e-9 && support_ok,
            "max marginal error " + fmt(worst) + (support_ok ? ", support <= N" : ", support exceeded N")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "Beta identities", 1, beta_identities},
        {2, "single-tier coverage oracle", 30, single_tier_coverage},
        {3, "analytic vs simulation", 600, analytic_vs_simulation},
        {4, "closed-form tier solutions", 60, closed_form_tiers},
        {5, "inner LP exactness", 10, inner_lp},
        {6, "Algorithm 1 convergence", 60, sca_convergence},
        {7, "Algorithm 2 properties", 600, robust_properties},
        {8, "Algorithm 3 convergence", 900, stochastic_convergence},
        {9, "monotone trends", 600, monotone_trends},
        {10, "combination round trip", 10, combination_round_trip},
    };
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::stoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.budget_s) {
            o.pass = false;
            o.detail += "; over the " + fmt(c.budget_s) + " s budget";
        }
        std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
