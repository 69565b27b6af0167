#pragma once

#include "cachenet/caching.hpp"
#include "cachenet/netmodel.hpp"
#include "cachenet/surrogate.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace cachenet {

/// Diminishing step size k -> gamma(k), k = 1, 2, ...
struct StepSchedule {
    std::function<double(std::size_t)> rule;

    double operator()(std::size_t k) const { return rule(k); }

    /// gamma(k) = 2 / (k + 2).
    static StepSchedule harmonic();
    /// gamma(k) = k^(-exponent).
    static StepSchedule power(double exponent);
    static StepSchedule constant(double value);
};

struct IterationRecord {
    std::size_t iter = 0;
    double objective = 0.0;
    double step = 0.0;
    double stationarity = 0.0;
    double wall_ms = 0.0;
};

struct ScaState {
    CachingMatrix t;
    std::size_t k = 0;
    double stationarity = 0.0;
};

struct StopRule {
    std::size_t max_iters = 200;
    double tol = 1e-5;
};

struct ScaResult {
    CachingMatrix t;
    double objective = 0.0;
    double stationarity = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<IterationRecord> history;
};

/// Concave surrogate of q for tier m around `t_prev`: tier m's own term kept
/// exactly, every other tier's term linearized in T_m.
TierSurrogate sca_surrogate(std::size_t tier, const Eigen::VectorXd& a, const CachingMatrix& t_prev,
                            const CoefficientTable& coef);

/// Full surrogate h_m(a, T_m, T_prev), constants included, so that it
/// coincides with q(a, T_prev) at T_m = T_prev_m.
double sca_surrogate_objective(std::size_t tier, const Eigen::VectorXd& a, const Eigen::VectorXd& row,
                               const CachingMatrix& t_prev, const CoefficientTable& coef);

/// Exact maximizer of the tier surrogate over the tier's feasible row set.
Eigen::VectorXd solve_tier_subproblem(std::size_t tier, const Eigen::VectorXd& a, const CachingMatrix& t_prev,
                                      const CoefficientTable& coef, std::size_t cache_size);

/// One parallel SCA iteration: every tier solves its surrogate against the
/// previous iterate, then T_m <- (1 - gamma) T_m + gamma Tbar_m.
/// `workers` > 1 solves tiers on separate threads; the result is identical.
ScaState iterate(const ScaState& state, const Eigen::VectorXd& a, const StepSchedule& schedule,
                 const CoefficientTable& coef, const NetworkConfig& cfg, std::size_t workers = 1);

/// Runs SCA from `initial` (uniform caching when absent) until the
/// projected-gradient stationarity drops below stop.tol or max_iters is hit.
/// Returns the best iterate by objective.
ScaResult run_sca(const Eigen::VectorXd& a, const NetworkConfig& cfg, const CoefficientTable& coef,
                  const StepSchedule& schedule = StepSchedule::harmonic(), const StopRule& stop = {},
                  const std::optional<CachingMatrix>& initial = std::nullopt, std::size_t workers = 1);

}  // namespace cachenet
