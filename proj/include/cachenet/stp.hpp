#pragma once

#include "cachenet/caching.hpp"
#include "cachenet/netmodel.hpp"
#include "cachenet/popularity.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace cachenet {

/// Probability that a user requesting file n associates with tier m.
/// Throws InfeasibleError if no tier stores file n.
double association_prob(const CachingMatrix& t, std::size_t tier, std::size_t file, const NetworkConfig& cfg);

/// Denominators D(j, n) = sum_l theta(l, j) T(l, n) + eta(j).
Eigen::MatrixXd stp_denominators(const CoefficientTable& coef, const CachingMatrix& t);

/// Per-file success given a request, g_n = sum_m T(m, n) / D(m, n).
/// Files stored nowhere get zero.
Eigen::VectorXd file_success(const CoefficientTable& coef, const CachingMatrix& t);

/// Per-tier components q_j of the STP.
Eigen::VectorXd stp_per_tier(const Eigen::VectorXd& a, const CachingMatrix& t, const CoefficientTable& coef);

/// Successful transmission probability q(a, T).
double stp(const Eigen::VectorXd& a, const CachingMatrix& t, const CoefficientTable& coef);

inline double stp(const PopularityVector& a, const CachingMatrix& t, const CoefficientTable& coef) {
    return stp(a.values(), t, coef);
}

/// Exact gradient of q with respect to T.
Eigen::MatrixXd stp_gradient(const Eigen::VectorXd& a, const CachingMatrix& t, const CoefficientTable& coef);

/// ||T - Proj(T + grad q)||_inf: zero exactly at stationary points.
double stationarity(const Eigen::VectorXd& a, const CachingMatrix& t, const CoefficientTable& coef,
                    std::span<const std::size_t> cache_sizes);

struct WorstCase {
    double value = 0.0;
    Eigen::VectorXd popularity;
};

/// min over a in the set of sum_n a_n g_n for a fixed weight vector g.
/// Greedy: start from the lower bounds and pour the remaining mass into the
/// cheapest files first (ties by ascending id).
WorstCase worst_case_linear(const UncertaintySet& set, const Eigen::VectorXd& g);

/// Worst-case STP over the uncertainty set and its minimizing popularity.
WorstCase worst_case_stp(const UncertaintySet& set, const CachingMatrix& t, const CoefficientTable& coef);

}  // namespace cachenet
