#include "cachenet/popularity.hpp"

#include "cachenet/errors.hpp"
#include "cachenet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cachenet {

PopularityVector::PopularityVector(Eigen::VectorXd values) : values_(std::move(values)) {
    if (values_.size() == 0) throw ConfigError("popularity vector must be nonempty");
    for (Eigen::Index n = 0; n < values_.size(); ++n) {
        if (!(values_(n) >= 0.0 && values_(n) <= 1.0)) {
            throw ConfigError("popularity entry " + std::to_string(n + 1) + " outside [0, 1]");
        }
    }
    const double sum = values_.sum();
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("popularity must sum to one, got " + std::to_string(sum));
    }
    values_ /= sum;
}

double PopularityVector::entropy() const {
    double h = 0.0;
    for (double p : values_) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

bool UncertaintySet::contains(const Eigen::VectorXd& a, double tol) const {
    if (a.size() != lower_.size()) return false;
    if (std::abs(a.sum() - 1.0) > tol) return false;
    return ((a - lower_).array() >= -tol).all() && ((upper_ - a).array() >= -tol).all();
}

PopularityVector zipf(std::size_t n_files, double gamma) {
    if (n_files == 0) throw ConfigError("zipf: N must be positive");
    if (!(gamma >= 0.0)) throw ConfigError("zipf: exponent must be nonnegative");
    Eigen::VectorXd a(static_cast<Eigen::Index>(n_files));
    for (std::size_t n = 0; n < n_files; ++n) {
        a(static_cast<Eigen::Index>(n)) = std::pow(static_cast<double>(n + 1), -gamma);
    }
    return PopularityVector(a / a.sum());
}

UncertaintySet uncertainty_from_estimate(const PopularityVector& estimate, const Eigen::VectorXd& eps) {
    if (eps.size() != static_cast<Eigen::Index>(estimate.size())) {
        throw ConfigError("error bounds must have one entry per file");
    }
    if ((eps.array() < 0.0).any()) throw ConfigError("error bounds must be nonnegative");

    UncertaintySet set;
    set.estimate_ = estimate;
    set.lower_ = (estimate.values() - eps).cwiseMax(0.0);
    set.upper_ = (estimate.values() + eps).cwiseMin(1.0);
    // The estimate itself always lies in the box, so these only fire on
    // rounding pathologies.
    if (set.lower_.sum() > 1.0 + 1e-12 || set.upper_.sum() < 1.0 - 1e-12) {
        throw InfeasibleError("uncertainty set is empty");
    }
    return set;
}

UncertaintySet relative_uncertainty(const PopularityVector& estimate, double rel) {
    if (!(rel >= 0.0)) throw ConfigError("relative error bound must be nonnegative");
    return uncertainty_from_estimate(estimate, rel * estimate.values());
}

void RequestStreamConfig::validate() const {
    if (popularity.size() == 0) throw ConfigError("request stream needs a popularity vector");
    if (observers == 0) throw ConfigError("observer count must be positive");
    if (!(request_prob > 0.0 && request_prob <= 1.0)) {
        throw ConfigError("request probability must lie in (0, 1]");
    }
}

Eigen::VectorXd RequestBatch::shares() const {
    if (active == 0) throw NoObservationsError("slot " + std::to_string(slot) + " has no requests");
    Eigen::VectorXd xi(static_cast<Eigen::Index>(counts.size()));
    for (std::size_t n = 0; n < counts.size(); ++n) {
        xi(static_cast<Eigen::Index>(n)) = static_cast<double>(counts[n]) / static_cast<double>(active);
    }
    return xi;
}

RequestBatch sample_requests(const RequestStreamConfig& stream, std::size_t slot) {
    stream.validate();
    const auto& a = stream.popularity.values();
    std::vector<double> cdf(static_cast<std::size_t>(a.size()));
    double acc = 0.0;
    for (Eigen::Index n = 0; n < a.size(); ++n) {
        acc += a(n);
        cdf[static_cast<std::size_t>(n)] = acc;
    }
    // Pin the tail to exactly one from the last positive entry on, so
    // rounding never routes mass to a zero-probability file.
    Eigen::Index last = a.size() - 1;
    while (last > 0 && a(last) == 0.0) --last;
    for (auto k = static_cast<std::size_t>(last); k < cdf.size(); ++k) cdf[k] = 1.0;

    RequestBatch batch;
    batch.slot = slot;
    batch.counts.assign(cdf.size(), 0);
    for (std::size_t s = 0; s < stream.observers; ++s) {
        CounterStream rng{stream.seed, static_cast<std::uint64_t>(slot), static_cast<std::uint64_t>(s)};
        if (rng.uniform() >= stream.request_prob) continue;
        const double u = rng.uniform();
        // Strict upper_bound skips zero-probability files.
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const auto n = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
            it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
        ++batch.counts[n];
        ++batch.active;
    }
    return batch;
}

PopularityVector empirical_popularity(std::span<const RequestBatch> batches) {
    if (batches.empty()) throw NoObservationsError("no slots supplied");
    const std::size_t n_files = batches.front().counts.size();
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_files));
    std::size_t active = 0;
    for (const auto& b : batches) {
        if (b.counts.size() != n_files) throw ConfigError("request batches disagree on catalog size");
        for (std::size_t n = 0; n < n_files; ++n) counts(static_cast<Eigen::Index>(n)) += static_cast<double>(b.counts[n]);
        active += b.active;
    }
    if (active == 0) throw NoObservationsError("no requests observed in any slot");
    return PopularityVector(counts / static_cast<double>(active));
}

}  // namespace cachenet
