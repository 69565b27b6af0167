#include "cachenet/stochastic.hpp"

#include "cachenet/errors.hpp"
#include "cachenet/stp.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace cachenet {

StochasticSchedules StochasticSchedules::defaults() {
    return {StepSchedule::power(0.6), StepSchedule::power(0.9)};
}

StochState initial_stoch_state(const CachingMatrix& t0) {
    StochState s;
    s.t = t0;
    s.f = Eigen::MatrixXd::Zero(t0.rows(), t0.cols());
    return s;
}

Eigen::MatrixXd update_f(const Eigen::MatrixXd& f_prev, const Eigen::VectorXd& xi, const CachingMatrix& t,
                         double rho, const CoefficientTable& coef) {
    return (1.0 - rho) * f_prev + rho * stp_gradient(xi, t, coef);
}

TierSurrogate stochastic_surrogate(std::size_t tier, const Eigen::VectorXd& xi, const StochState& state,
                                   double rho, const CoefficientTable& coef) {
    TierSurrogate s = sca_surrogate(tier, xi, state.t, coef);
    const auto m = static_cast<Eigen::Index>(tier);
    s.gain = rho * s.gain;
    s.price = rho * s.price - (1.0 - rho) * state.f.row(m).transpose();
    return s;
}

Eigen::VectorXd solve_tier_subproblem_stochastic(std::size_t tier, const Eigen::VectorXd& xi,
                                                 const StochState& state, double rho, const CoefficientTable& coef,
                                                 std::size_t cache_size) {
    return solve_surrogate(stochastic_surrogate(tier, xi, state, rho, coef), static_cast<double>(cache_size)).row;
}

StochState step_with_shares(const StochState& state, const Eigen::VectorXd& xi,
                            const StochasticSchedules& schedules, const CoefficientTable& coef,
                            const NetworkConfig& cfg, std::size_t workers) {
    const std::size_t t_index = state.updates + 1;
    const double rho = schedules.rho(t_index);
    const double omega = schedules.omega(t_index);
    const auto tiers = state.t.rows();

    CachingMatrix target(tiers, state.t.cols());
    auto solve = [&](Eigen::Index m) {
        target.row(m) = solve_tier_subproblem_stochastic(static_cast<std::size_t>(m), xi, state, rho, coef,
                                                         cfg.cache_sizes[static_cast<std::size_t>(m)])
                            .transpose();
    };
    if (workers > 1 && tiers > 1) {
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tiers));
        {
            std::vector<std::jthread> pool;
            for (Eigen::Index m = 0; m < tiers; ++m) {
                pool.emplace_back([&, m] {
                    try {
                        solve(m);
                    } catch (...) {
                        errors[static_cast<std::size_t>(m)] = std::current_exception();
                    }
                });
            }
        }
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    } else {
        for (Eigen::Index m = 0; m < tiers; ++m) solve(m);
    }

    StochState next;
    next.slot = state.slot + 1;
    next.updates = t_index;
    next.t = (1.0 - omega) * state.t + omega * target;
    next.f = update_f(state.f, xi, next.t, rho, coef);
    return next;
}

StochState step(const StochState& state, const RequestBatch& batch, const StochasticSchedules& schedules,
                const CoefficientTable& coef, const NetworkConfig& cfg, std::size_t workers) {
    if (batch.active == 0) {
        StochState next = state;
        ++next.slot;
        return next;
    }
    return step_with_shares(state, batch.shares(), schedules, coef, cfg, workers);
}

StochResult run_stochastic(const RequestStreamConfig& stream, const NetworkConfig& cfg, const CoefficientTable& coef,
                           const StochasticSchedules& schedules, const StochStop& stop,
                           const std::optional<CachingMatrix>& initial, std::size_t workers) {
    stream.validate();
    if (stream.popularity.size() != cfg.catalog_size) throw ConfigError("stream popularity length differs from N");
    const auto start = std::chrono::steady_clock::now();
    const Eigen::VectorXd& truth = stream.popularity.values();

    StochState state = initial_stoch_state(initial ? *initial : uniform_caching(cfg));
    validate(state.t, cfg.cache_sizes);

    StochResult result;
    result.history.push_back({0, stp(truth, state.t, coef), 0.0, 0.0, 0.0,
                              stationarity(truth, state.t, coef, cfg.cache_sizes), 0.0, false});
    while (state.slot < stop.max_slots) {
        const RequestBatch batch = sample_requests(stream, state.slot + 1);
        state = step(state, batch, schedules, coef, cfg, workers);

        SlotRecord rec;
        rec.slot = state.slot;
        rec.updated = batch.active > 0;
        rec.objective = stp(truth, state.t, coef);
        rec.stationarity = stationarity(truth, state.t, coef, cfg.cache_sizes);
        if (rec.updated) {
            rec.rho = schedules.rho(state.updates);
            rec.omega = schedules.omega(state.updates);
            rec.xi_entropy = PopularityVector(batch.shares()).entropy();
        }
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        result.history.push_back(rec);

        if (stop.tol > 0.0 && result.history.size() > stop.window) {
            const auto tail = result.history.end() - static_cast<std::ptrdiff_t>(stop.window);
            const auto [lo, hi] = std::minmax_element(tail, result.history.end(), [](const auto& x, const auto& y) {
                return x.objective < y.objective;
            });
            if (hi->objective - lo->objective <= stop.tol) break;
        }
    }
    result.t = state.t;
    result.slots = state.slot;
    result.updates = state.updates;
    return result;
}

}  // namespace cachenet
