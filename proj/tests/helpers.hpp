#pragma once

#include "cachenet/caching.hpp"
#include "cachenet/netmodel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

namespace cachenet::testing {

/// Three-tier macro/pico/femto network with the reference densities and
/// powers; `n` files and cache sizes (k1, k2, k3).
inline NetworkConfig three_tier(std::size_t n, std::size_t k1, std::size_t k2, std::size_t k3) {
    NetworkConfig cfg;
    cfg.densities = {3.2e-7, 8e-6, 8e-4};
    cfg.powers = {1e3, std::pow(10.0, 1.4), 1.0};
    cfg.sir_thresholds = {1.0, std::pow(10.0, -0.6), std::pow(10.0, -1.4)};
    cfg.pathloss_alpha = 3.0;
    cfg.cache_sizes = {k1, k2, k3};
    cfg.catalog_size = n;
    return cfg;
}

/// Random network with m tiers, well-conditioned coefficients.
inline NetworkConfig random_network(std::mt19937_64& rng, std::size_t m, std::size_t n, double alpha = 4.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    NetworkConfig cfg;
    cfg.pathloss_alpha = alpha;
    cfg.catalog_size = n;
    for (std::size_t i = 0; i < m; ++i) {
        cfg.densities.push_back(std::pow(10.0, -3.0 + 2.0 * u(rng)));
        cfg.powers.push_back(std::pow(10.0, 2.0 * u(rng)));
        cfg.sir_thresholds.push_back(std::pow(10.0, -1.0 + 1.2 * u(rng)));
        cfg.cache_sizes.push_back(1 + static_cast<std::size_t>(u(rng) * static_cast<double>(n - 1)));
    }
    return cfg;
}

inline Eigen::VectorXd random_simplex(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> e(1.0);
    Eigen::VectorXd a(static_cast<Eigen::Index>(n));
    for (auto& v : a) v = e(rng);
    return a / a.sum();
}

/// Random feasible row in [0,1]^n summing to k.
inline Eigen::VectorXd random_row(std::mt19937_64& rng, std::size_t n, std::size_t k) {
    std::uniform_real_distribution<double> u(0.0, 1.5);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = u(rng);
    return project_row(v, static_cast<double>(k));
}

inline CachingMatrix random_caching(std::mt19937_64& rng, const NetworkConfig& cfg) {
    CachingMatrix t(static_cast<Eigen::Index>(cfg.tiers()), static_cast<Eigen::Index>(cfg.catalog_size));
    for (Eigen::Index m = 0; m < t.rows(); ++m) {
        t.row(m) = random_row(rng, cfg.catalog_size, cfg.cache_sizes[static_cast<std::size_t>(m)]).transpose();
    }
    return t;
}

inline NetworkConfig single_tier(double tau, std::size_t n = 1, std::size_t k = 1) {
    NetworkConfig cfg;
    cfg.densities = {1e-3};
    cfg.powers = {1.0};
    cfg.sir_thresholds = {tau};
    cfg.pathloss_alpha = 4.0;
    cfg.cache_sizes = {k};
    cfg.catalog_size = n;
    return cfg;
}

}  // namespace cachenet::testing
