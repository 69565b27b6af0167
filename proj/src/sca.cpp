#include "cachenet/sca.hpp"

#include "cachenet/errors.hpp"
#include "cachenet/stp.hpp"

#include <chrono>
#include <cmath>
#include <thread>

namespace cachenet {

StepSchedule StepSchedule::harmonic() {
    return {[](std::size_t k) { return 2.0 / (static_cast<double>(k) + 2.0); }};
}

StepSchedule StepSchedule::power(double exponent) {
    return {[exponent](std::size_t k) { return std::pow(static_cast<double>(k), -exponent); }};
}

StepSchedule StepSchedule::constant(double value) {
    return {[value](std::size_t) { return value; }};
}

TierSurrogate sca_surrogate(std::size_t tier, const Eigen::VectorXd& a, const CachingMatrix& t_prev,
                            const CoefficientTable& coef) {
    const auto m = static_cast<Eigen::Index>(tier);
    const Eigen::MatrixXd d = stp_denominators(coef, t_prev);
    const auto files = t_prev.cols();

    TierSurrogate s;
    s.theta = coef.theta(m, m);
    s.gain = a;
    s.offset.resize(files);
    s.price.resize(files);
    for (Eigen::Index n = 0; n < files; ++n) {
        s.offset(n) = d(m, n) - coef.theta(m, m) * t_prev(m, n);
        double price = 0.0;
        for (Eigen::Index j = 0; j < t_prev.rows(); ++j) {
            if (j == m || d(j, n) <= 0.0) continue;
            price += a(n) * coef.theta(m, j) * t_prev(j, n) / (d(j, n) * d(j, n));
        }
        s.price(n) = price;
    }
    return s;
}

double sca_surrogate_objective(std::size_t tier, const Eigen::VectorXd& a, const Eigen::VectorXd& row,
                               const CachingMatrix& t_prev, const CoefficientTable& coef) {
    const auto m = static_cast<Eigen::Index>(tier);
    const Eigen::MatrixXd d = stp_denominators(coef, t_prev);
    const Eigen::VectorXd q_prev = stp_per_tier(a, t_prev, coef);
    double h = 0.0;
    for (Eigen::Index n = 0; n < row.size(); ++n) {
        const double own = coef.theta(m, m) * row(n) + d(m, n) - coef.theta(m, m) * t_prev(m, n);
        if (row(n) != 0.0) h += a(n) * row(n) / own;
    }
    for (Eigen::Index j = 0; j < t_prev.rows(); ++j) {
        if (j == m) continue;
        h += q_prev(j);
        for (Eigen::Index n = 0; n < row.size(); ++n) {
            if (d(j, n) <= 0.0) continue;
            h -= a(n) * coef.theta(m, j) * t_prev(j, n) * (row(n) - t_prev(m, n)) / (d(j, n) * d(j, n));
        }
    }
    return h;
}

Eigen::VectorXd solve_tier_subproblem(std::size_t tier, const Eigen::VectorXd& a, const CachingMatrix& t_prev,
                                      const CoefficientTable& coef, std::size_t cache_size) {
    return solve_surrogate(sca_surrogate(tier, a, t_prev, coef), static_cast<double>(cache_size)).row;
}

ScaState iterate(const ScaState& state, const Eigen::VectorXd& a, const StepSchedule& schedule,
                 const CoefficientTable& coef, const NetworkConfig& cfg, std::size_t workers) {
    const auto tiers = state.t.rows();
    CachingMatrix target(tiers, state.t.cols());
    auto solve = [&](Eigen::Index m) {
        target.row(m) = solve_tier_subproblem(static_cast<std::size_t>(m), a, state.t, coef,
                                              cfg.cache_sizes[static_cast<std::size_t>(m)])
                            .transpose();
    };
    if (workers > 1 && tiers > 1) {
        std::vector<std::jthread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tiers));
        for (Eigen::Index m = 0; m < tiers; ++m) {
            pool.emplace_back([&, m] {
                try {
                    solve(m);
                } catch (...) {
                    errors[static_cast<std::size_t>(m)] = std::current_exception();
                }
            });
        }
        pool.clear();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    } else {
        for (Eigen::Index m = 0; m < tiers; ++m) solve(m);
    }

    ScaState next;
    next.k = state.k + 1;
    const double gamma = schedule(next.k);
    next.t = (1.0 - gamma) * state.t + gamma * target;
    return next;
}

ScaResult run_sca(const Eigen::VectorXd& a, const NetworkConfig& cfg, const CoefficientTable& coef,
                  const StepSchedule& schedule, const StopRule& stop, const std::optional<CachingMatrix>& initial,
                  std::size_t workers) {
    const auto start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    };

    ScaState state;
    std::vector<IterationRecord> history;
    state.t = initial ? *initial : uniform_caching(cfg);
    validate(state.t, cfg.cache_sizes);

    ScaResult result;
    result.t = state.t;
    result.objective = stp(a, state.t, coef);
    result.stationarity = stationarity(a, state.t, coef, cfg.cache_sizes);
    state.stationarity = result.stationarity;
    history.push_back({0, result.objective, 0.0, result.stationarity, elapsed_ms()});
    result.converged = result.stationarity <= stop.tol;

    while (!result.converged && state.k < stop.max_iters) {
        state = iterate(state, a, schedule, coef, cfg, workers);
        const double q = stp(a, state.t, coef);
        state.stationarity = stationarity(a, state.t, coef, cfg.cache_sizes);
        history.push_back({state.k, q, schedule(state.k), state.stationarity, elapsed_ms()});
        if (q >= result.objective) {
            result.t = state.t;
            result.objective = q;
            result.stationarity = state.stationarity;
        }
        result.converged = state.stationarity <= stop.tol;
    }
    result.iterations = state.k;
    result.history = std::move(history);
    return result;
}

}  // namespace cachenet
