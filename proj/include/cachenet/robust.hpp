#pragma once

#include "cachenet/caching.hpp"
#include "cachenet/gp.hpp"
#include "cachenet/netmodel.hpp"
#include "cachenet/popularity.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace cachenet {

/// Which half of sum_n T(m, n) = K_m a tier keeps in the GP. A GP cannot hold
/// the equality itself (its feasible set would have no interior), so each tier
/// keeps the side its budget multiplier pushes against: at_most for tiers that
/// would cache more if allowed, at_least for tiers whose extra caching hurts
/// the other tiers more than it helps. The at_least side is a ratio
/// K_m / sum_n T(m, n) <= 1 and is condensed like the other denominators.
enum class BudgetSide { at_most, at_least };

/// Point of the complementary GP obtained from the dual of the inner LP.
/// x(m, n) stands in for the STP denominator of tier m and file n, and
/// nu1 - nu2 is the multiplier of the simplex constraint.
struct DualGpPoint {
    CachingMatrix t;
    Eigen::MatrixXd x;
    Eigen::VectorXd lambda;
    Eigen::VectorXd mu;
    double nu1 = 1.0;
    double nu2 = 1.0;
    double y = 0.0;
    std::vector<BudgetSide> sides;
};

/// Shares of each posynomial denominator term at the previous point; they
/// set the exponents of the condensed monomials.
struct GpWeights {
    Eigen::VectorXd sigma;   // lambda_n * a_lower_n share
    Eigen::MatrixXd beta;    // T(m, n) / x(m, n) share, tiers x files
    double gamma1 = 0.0;     // nu2 share
    Eigen::VectorXd gamma2;  // mu_n share
    Eigen::VectorXd gamma3;  // nu1 share in file n's denominator
    Eigen::MatrixXd budget;  // T(m, n) share of row m; used by at_least tiers
};

GpWeights compute_weights(const DualGpPoint& prev, const UncertaintySet& set);

/// sum_n lambda_n a_lower_n + nu2.
double budget_denominator(const DualGpPoint& p, const UncertaintySet& set);
/// sum_m T(m, n) / x(m, n) + mu_n + nu1.
double file_denominator(const DualGpPoint& p, std::size_t file);
/// Condensed monomials of the two denominators, evaluated at `p`.
double budget_condensed(const DualGpPoint& p, const GpWeights& w, const UncertaintySet& set);
double file_condensed(const DualGpPoint& p, const GpWeights& w, std::size_t file);

/// Largest value of (constraint ratio - 1) over the exact complementary GP:
/// budget and file ratios, x bounds, T <= 1 and each tier's side of its cache
/// budget. Negative means strictly feasible with that margin.
double max_ratio_violation(const DualGpPoint& p, const UncertaintySet& set, const CoefficientTable& coef,
                           const NetworkConfig& cfg);

/// Budget sides from the sign of each tier's budget multiplier at the
/// deterministic optimum for popularity `a`. Tiers with K_m = N are at_most.
std::vector<BudgetSide> budget_sides(const Eigen::VectorXd& a, const NetworkConfig& cfg, const CoefficientTable& coef);

/// Strictly feasible start: uniform T moved 1e-6 into its budget side, x
/// just above the denominators, LP multipliers from the greedy worst case
/// shifted up by half the marginal level, and a small slack in every ratio
/// constraint. `sides` defaults to budget_sides on the set's estimate. Throws
/// ConfigError when some theta(l, m) is negative (the GP needs positive
/// coefficients).
DualGpPoint initial_point(const UncertaintySet& set, const CoefficientTable& coef, const NetworkConfig& cfg);
DualGpPoint initial_point(const UncertaintySet& set, const CoefficientTable& coef, const NetworkConfig& cfg,
                          std::vector<BudgetSide> sides);

struct GpStep {
    DualGpPoint point;
    double kkt_residual = 0.0;
    int newton_steps = 0;
    bool ok = false;
};

/// Solves the condensed GP around `prev`. On solver trouble returns prev with
/// ok = false. The returned y never falls below prev's.
GpStep solve_gp(const GpWeights& weights, const DualGpPoint& prev, const UncertaintySet& set,
                const CoefficientTable& coef, const NetworkConfig& cfg, const GpOptions& options = {});

struct RobustStop {
    std::size_t max_iters = 100;
    /// Stop when |y(k) - y(k-1)| <= tol * max(1, y(k)).
    double tol = 1e-6;
};

struct RobustRecord {
    std::size_t iter = 0;
    double y = 0.0;
    double kkt_residual = 0.0;
    double wall_ms = 0.0;
};

struct RobustResult {
    /// Recovered caching matrix, rows rescaled to sum exactly to K_m.
    CachingMatrix t;
    /// Final lower bound y on the worst-case STP.
    double y = 0.0;
    /// worst_case_stp(set, t) evaluated independently.
    double worst_case = 0.0;
    Eigen::VectorXd lambda;
    Eigen::VectorXd mu;
    double nu = 0.0;
    std::vector<BudgetSide> sides;
    /// max_m |sum_n T(m, n) / K_m - 1| before the rows were rescaled.
    double budget_gap = 0.0;
    std::vector<RobustRecord> history;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Each GP is warm-started from the previous point, which is already close
/// to optimal, so the barrier starts at a larger t.
inline GpOptions robust_gp_options() {
    GpOptions o;
    o.initial_t = 1e3;
    return o;
}

/// Iterates compute_weights -> solve_gp. Throws SolverError if a GP fails.
RobustResult run_robust(const UncertaintySet& set, const NetworkConfig& cfg, const CoefficientTable& coef,
                        const RobustStop& stop = {}, const GpOptions& options = robust_gp_options());

}  // namespace cachenet
