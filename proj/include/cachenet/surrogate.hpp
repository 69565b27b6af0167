#pragma once

#include <Eigen/Dense>

namespace cachenet {

/// Separable concave tier surrogate shared by the deterministic and the
/// stochastic SCA updates:
///
///   maximize  sum_n  gain_n T_n / (theta T_n + offset_n) - price_n T_n
///   s.t.      0 <= T_n <= 1,  sum_n T_n = K
///
/// Its KKT point is T_n(nu) = [(sqrt(gain_n offset_n / (nu + price_n)) - offset_n) / theta]_0^1
/// with nu chosen so the row sums to K.
struct TierSurrogate {
    double theta = 1.0;
    Eigen::VectorXd gain;
    Eigen::VectorXd offset;
    Eigen::VectorXd price;

    /// Objective value at `row` (no constant term).
    double value(const Eigen::VectorXd& row) const;

    /// Closed-form row for a given multiplier.
    Eigen::VectorXd row_at(double nu) const;
};

struct SurrogateSolution {
    Eigen::VectorXd row;
    double multiplier = 0.0;
};

/// Finds the multiplier by bisection so that the row sums to `k` within
/// 1e-9. Throws ConfigError if theta <= 0 and SolverError if no bracket is
/// found.
SurrogateSolution solve_surrogate(const TierSurrogate& s, double k);

}  // namespace cachenet
