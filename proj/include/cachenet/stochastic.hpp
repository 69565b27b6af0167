#pragma once

#include "cachenet/caching.hpp"
#include "cachenet/netmodel.hpp"
#include "cachenet/popularity.hpp"
#include "cachenet/sca.hpp"
#include "cachenet/surrogate.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace cachenet {

/// rho drives the gradient-estimate averaging, omega the iterate update.
/// Both are indexed by the number of performed updates, starting at 1.
struct StochasticSchedules {
    StepSchedule rho;
    StepSchedule omega;

    /// rho(t) = t^-0.6, omega(t) = t^-0.9.
    static StochasticSchedules defaults();
};

struct StochState {
    CachingMatrix t;
    /// Running estimate of grad q; starts at zero.
    Eigen::MatrixXd f;
    /// Wall slot counter, advances on every observed slot.
    std::size_t slot = 0;
    /// Number of slots that carried at least one request.
    std::size_t updates = 0;
};

StochState initial_stoch_state(const CachingMatrix& t0);

struct SlotRecord {
    std::size_t slot = 0;
    double objective = 0.0;  // q(a, T) under the hidden popularity
    double omega = 0.0;
    double rho = 0.0;
    double xi_entropy = 0.0;
    double stationarity = 0.0;
    double wall_ms = 0.0;
    bool updated = false;
};

/// f <- (1 - rho) f + rho * grad q(xi, T), with T the freshly updated iterate.
Eigen::MatrixXd update_f(const Eigen::MatrixXd& f_prev, const Eigen::VectorXd& xi, const CachingMatrix& t,
                         double rho, const CoefficientTable& coef);

/// Tier surrogate built from the sample xi, the previous iterate and the
/// gradient estimate f(t-1).
TierSurrogate stochastic_surrogate(std::size_t tier, const Eigen::VectorXd& xi, const StochState& state,
                                   double rho, const CoefficientTable& coef);

Eigen::VectorXd solve_tier_subproblem_stochastic(std::size_t tier, const Eigen::VectorXd& xi,
                                                 const StochState& state, double rho, const CoefficientTable& coef,
                                                 std::size_t cache_size);

/// Consumes one slot. Empty slots only advance the slot counter.
StochState step(const StochState& state, const RequestBatch& batch, const StochasticSchedules& schedules,
                const CoefficientTable& coef, const NetworkConfig& cfg, std::size_t workers = 1);

/// Same update from an explicit share vector; used by step() and for
/// reduction checks against the deterministic algorithm.
StochState step_with_shares(const StochState& state, const Eigen::VectorXd& xi,
                            const StochasticSchedules& schedules, const CoefficientTable& coef,
                            const NetworkConfig& cfg, std::size_t workers = 1);

struct StochStop {
    std::size_t max_slots = 200;
    /// When positive, stop once the objective varies by at most `tol` over
    /// the trailing `window` slots.
    double tol = 0.0;
    std::size_t window = 20;
};

struct StochResult {
    CachingMatrix t;
    std::vector<SlotRecord> history;
    std::size_t slots = 0;
    std::size_t updates = 0;
};

StochResult run_stochastic(const RequestStreamConfig& stream, const NetworkConfig& cfg, const CoefficientTable& coef,
                           const StochasticSchedules& schedules = StochasticSchedules::defaults(),
                           const StochStop& stop = {}, const std::optional<CachingMatrix>& initial = std::nullopt,
                           std::size_t workers = 1);

}  // namespace cachenet
