#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace cachenet {

/// Physical model of an M-tier cache-enabled network.
///
/// Densities, powers, SIR thresholds and cache sizes are per tier. The
/// catalog holds `catalog_size` equal-size files. Powers are relative, only
/// their ratios enter the model.
struct NetworkConfig {
    std::vector<double> densities;
    std::vector<double> powers;
    std::vector<double> sir_thresholds;
    double pathloss_alpha = 4.0;
    std::vector<std::size_t> cache_sizes;
    std::size_t catalog_size = 0;

    std::size_t tiers() const { return densities.size(); }

    /// Throws ConfigError on the first violated invariant. Zero thresholds
    /// and K_m == N are admitted as boundary cases.
    void validate() const;
};

/// Interference coefficients theta (M x M, indexed [l][m]) and eta (M).
///
/// The STP of tier m for file n is T_mn / (sum_l theta(l, m) T_ln + eta(m)).
struct CoefficientTable {
    Eigen::MatrixXd theta;
    Eigen::VectorXd eta;

    std::size_t tiers() const { return static_cast<std::size_t>(eta.size()); }
};

/// B(x, y) for x, y in (0, 1).
double beta(double x, double y);

/// Complementary incomplete Beta function: integral of u^(x-1) (1-u)^(y-1)
/// over [z, 1], for x, y in (0, 1) and z in [0, 1].
double beta_complementary(double x, double y, double z);

CoefficientTable compute_coefficients(const NetworkConfig& cfg);

}  // namespace cachenet
