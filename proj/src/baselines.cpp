#include "cachenet/baselines.hpp"

#include "cachenet/errors.hpp"
#include "cachenet/rng.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace cachenet {

namespace {

void check_inputs(const PopularityVector& a, const NetworkConfig& cfg) {
    cfg.validate();
    if (a.size() != cfg.catalog_size) throw ConfigError("popularity length differs from catalog size");
}

}  // namespace

CachingMatrix most_popular(const PopularityVector& a, const NetworkConfig& cfg) {
    check_inputs(a, cfg);
    std::vector<std::size_t> order(a.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i] > a[j]; });
    CachingMatrix t = CachingMatrix::Zero(static_cast<Eigen::Index>(cfg.tiers()), static_cast<Eigen::Index>(a.size()));
    for (std::size_t m = 0; m < cfg.tiers(); ++m) {
        for (std::size_t i = 0; i < cfg.cache_sizes[m]; ++i) {
            t(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(order[i])) = 1.0;
        }
    }
    return t;
}

CachingMatrix iid_popularity(const PopularityVector& a, const NetworkConfig& cfg, std::size_t samples,
                             std::uint64_t seed) {
    check_inputs(a, cfg);
    if (samples < 10000) throw ConfigError("iid_popularity needs at least 1e4 samples");
    const std::size_t files = a.size();
    CachingMatrix t(static_cast<Eigen::Index>(cfg.tiers()), static_cast<Eigen::Index>(files));
    std::vector<double> weight(files);
    std::vector<char> taken(files);
    std::vector<std::size_t> counts(files);
    for (std::size_t m = 0; m < cfg.tiers(); ++m) {
        const std::size_t k = cfg.cache_sizes[m];
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t s = 0; s < samples; ++s) {
            CounterStream rng{seed, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(s)};
            std::fill(taken.begin(), taken.end(), 0);
            for (std::size_t n = 0; n < files; ++n) weight[n] = a[n];
            for (std::size_t slot = 0; slot < k; ++slot) {
                const double remaining = std::accumulate(weight.begin(), weight.end(), 0.0);
                std::size_t pick = files;
                if (remaining > 0.0) {
                    const double u = rng.uniform() * remaining;
                    double acc = 0.0;
                    for (std::size_t n = 0; n < files; ++n) {
                        if (weight[n] <= 0.0) continue;
                        acc += weight[n];
                        pick = n;
                        if (u < acc) break;
                    }
                }
                if (pick == files) {
                    // Only zero-popularity files are left.
                    std::size_t r = static_cast<std::size_t>(rng.uniform() * static_cast<double>(files - slot));
                    for (std::size_t n = 0; n < files; ++n) {
                        if (taken[n]) continue;
                        if (r-- == 0) {
                            pick = n;
                            break;
                        }
                    }
                }
                taken[pick] = 1;
                weight[pick] = 0.0;
                ++counts[pick];
            }
        }
        for (std::size_t n = 0; n < files; ++n) {
            t(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) =
                static_cast<double>(counts[n]) / static_cast<double>(samples);
        }
        const auto row = static_cast<Eigen::Index>(m);
        t.row(row) *= static_cast<double>(k) / t.row(row).sum();
    }
    return t;
}

}  // namespace cachenet
