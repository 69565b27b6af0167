#include "cachenet/mcsim.hpp"

#include "cachenet/errors.hpp"
#include "cachenet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

namespace cachenet {

namespace {

struct Tier {
    double density_area = 0.0;  // expected BS count in the disk
    double radius_sq = 0.0;
    double power = 0.0;
    double threshold = 0.0;
    const CombinationDistribution* caches = nullptr;
    // stores[i * files + n]: combination i holds file n
    std::vector<char> stores;
};

std::size_t draw_file(const Eigen::VectorXd& cumulative, CounterStream& rng) {
    const double u = rng.uniform() * cumulative(cumulative.size() - 1);
    const auto* begin = cumulative.data();
    const auto* it = std::upper_bound(begin, begin + cumulative.size(), u);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - begin, cumulative.size() - 1));
}

bool trial(const std::vector<Tier>& tiers, const Eigen::VectorXd& cumulative, std::size_t files, double half_alpha,
           CounterStream& rng) {
    const std::size_t file = draw_file(cumulative, rng);
    double total = 0.0;
    double best_average = -1.0;
    double signal = 0.0;
    double threshold = 0.0;
    for (const auto& tier : tiers) {
        std::poisson_distribution<long> count(tier.density_area);
        const long bs = count(rng);
        for (long b = 0; b < bs; ++b) {
            const double dist_sq = tier.radius_sq * (1.0 - rng.uniform());  // in (0, R^2]
            const double average = tier.power * std::pow(dist_sq, -half_alpha);
            const double received = average * -std::log1p(-rng.uniform());
            total += received;
            const std::size_t cache = sample_cache_index(*tier.caches, rng);
            if (tier.stores[cache * files + file] && average > best_average) {
                best_average = average;
                signal = received;
                threshold = tier.threshold;
            }
        }
    }
    if (best_average < 0.0) return false;
    const double interference = total - signal;
    return signal >= threshold * interference;
}

}  // namespace

std::vector<double> window_radii(const NetworkConfig& cfg, const SimConfig& sim) {
    if (!sim.window_radii.empty()) {
        if (sim.window_radii.size() != cfg.tiers()) throw ConfigError("need one window radius per tier");
        for (double r : sim.window_radii) {
            if (!(r > 0.0)) throw ConfigError("window radius must be positive");
        }
        return sim.window_radii;
    }
    const double tail_count = std::pow(sim.tail_fraction, -2.0 / (cfg.pathloss_alpha - 2.0));
    const double count = std::min(std::max(sim.min_expected_count, tail_count), sim.max_expected_count);
    std::vector<double> radii;
    for (double lambda : cfg.densities) radii.push_back(std::sqrt(count / (std::numbers::pi * lambda)));
    return radii;
}

SimEstimate estimate_stp(const NetworkConfig& cfg, const std::vector<CombinationDistribution>& caches,
                         const PopularityVector& a, const SimConfig& sim) {
    cfg.validate();
    if (caches.size() != cfg.tiers()) throw ConfigError("need one combination distribution per tier");
    if (a.size() != cfg.catalog_size) throw ConfigError("popularity length differs from catalog size");
    if (sim.trials == 0) throw ConfigError("trials must be positive");

    const std::size_t files = cfg.catalog_size;
    const auto radii = window_radii(cfg, sim);
    std::vector<Tier> tiers(cfg.tiers());
    for (std::size_t m = 0; m < tiers.size(); ++m) {
        auto& tier = tiers[m];
        tier.radius_sq = radii[m] * radii[m];
        tier.density_area = cfg.densities[m] * std::numbers::pi * tier.radius_sq;
        tier.power = cfg.powers[m];
        tier.threshold = cfg.sir_thresholds[m];
        tier.caches = &caches[m];
        if (caches[m].combinations.empty() || caches[m].catalog_size != files) {
            throw ConfigError("combination distribution does not match the catalog");
        }
        tier.stores.assign(caches[m].combinations.size() * files, 0);
        for (std::size_t i = 0; i < caches[m].combinations.size(); ++i) {
            for (std::size_t n : caches[m].combinations[i].files) tier.stores[i * files + n] = 1;
        }
    }
    Eigen::VectorXd cumulative(static_cast<Eigen::Index>(files));
    double acc = 0.0;
    for (std::size_t n = 0; n < files; ++n) cumulative(static_cast<Eigen::Index>(n)) = acc += a[n];
    const double half_alpha = cfg.pathloss_alpha / 2.0;

    const std::size_t workers = std::max<std::size_t>(1, std::min(sim.workers, sim.trials));
    std::vector<std::size_t> successes(workers, 0);
    auto run = [&](std::size_t w) {
        const std::size_t begin = sim.trials * w / workers;
        const std::size_t end = sim.trials * (w + 1) / workers;
        for (std::size_t i = begin; i < end; ++i) {
            CounterStream rng{sim.seed, static_cast<std::uint64_t>(i)};
            if (trial(tiers, cumulative, files, half_alpha, rng)) ++successes[w];
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& th : pool) th.join();
    }

    SimEstimate out;
    out.trials = sim.trials;
    for (std::size_t s : successes) out.successes += s;
    const double n = static_cast<double>(sim.trials);
    out.estimate = static_cast<double>(out.successes) / n;
    out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / n);
    return out;
}

SimEstimate estimate_stp(const NetworkConfig& cfg, const CachingMatrix& t, const PopularityVector& a,
                         const SimConfig& sim) {
    return estimate_stp(cfg, to_combinations(t, cfg.cache_sizes), a, sim);
}

}  // namespace cachenet
