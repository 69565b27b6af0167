#pragma once

#include "cachenet/caching.hpp"
#include "cachenet/netmodel.hpp"
#include "cachenet/popularity.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cachenet {

struct SimConfig {
    std::size_t trials = 100000;
    std::uint64_t seed = 1;
    /// Disk radius per tier around the typical user. Empty means
    /// window_radii() picks them.
    std::vector<double> window_radii;
    /// Radius rules used when window_radii is empty: at least this many
    /// expected BSs per tier ...
    double min_expected_count = 100.0;
    /// ... and mean interference from beyond the disk at most this fraction
    /// of the mean interference from beyond the typical nearest-BS distance,
    /// unless that needs more than max_expected_count BSs.
    double tail_fraction = 1e-3;
    double max_expected_count = 20000.0;
    std::size_t workers = 1;
};

/// Radius of each tier's disk. With r1 = 1 / sqrt(pi lambda) the tail rule
/// gives R = r1 * tail_fraction^(-1 / (alpha - 2)).
std::vector<double> window_radii(const NetworkConfig& cfg, const SimConfig& sim);

struct SimEstimate {
    double estimate = 0.0;
    /// Binomial standard error sqrt(p (1 - p) / trials).
    double std_error = 0.0;
    std::size_t successes = 0;
    std::size_t trials = 0;
};

/// Monte Carlo STP of the typical user at the origin. Per trial: draw the
/// requested file from `a`, drop a PPP of BSs in each tier's disk, draw each
/// BS's cache from its tier's combination distribution, associate with the
/// strongest average received power among BSs that store the file, draw unit
/// exponential fading for every BS, and count a success when the SIR meets
/// the serving tier's threshold with every other BS interfering. Trial i
/// uses CounterStream{seed, i}, so the result does not depend on `workers`.
SimEstimate estimate_stp(const NetworkConfig& cfg, const std::vector<CombinationDistribution>& caches,
                         const PopularityVector& a, const SimConfig& sim);

/// Same, with the combination distributions built from T.
SimEstimate estimate_stp(const NetworkConfig& cfg, const CachingMatrix& t, const PopularityVector& a,
                         const SimConfig& sim);

}  // namespace cachenet
