#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cachenet {

/// File popularity distribution: entries in [0, 1] summing to one.
class PopularityVector {
public:
    PopularityVector() = default;

    /// Validates and stores `values`. Sums within 1e-9 of one are
    /// renormalized to one; anything further off throws ConfigError.
    explicit PopularityVector(Eigen::VectorXd values);

    const Eigen::VectorXd& values() const { return values_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    double operator[](std::size_t n) const { return values_(static_cast<Eigen::Index>(n)); }

    /// Shannon entropy in nats.
    double entropy() const;

private:
    Eigen::VectorXd values_;
};

/// Box-constrained simplex of popularity vectors around an estimate.
class UncertaintySet {
public:
    const PopularityVector& estimate() const { return estimate_; }
    const Eigen::VectorXd& lower() const { return lower_; }
    const Eigen::VectorXd& upper() const { return upper_; }
    std::size_t size() const { return estimate_.size(); }

    bool contains(const Eigen::VectorXd& a, double tol = 1e-12) const;

private:
    friend UncertaintySet uncertainty_from_estimate(const PopularityVector&, const Eigen::VectorXd&);
    PopularityVector estimate_;
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
};

/// Zipf law a_n proportional to n^(-gamma), n = 1..N.
PopularityVector zipf(std::size_t n_files, double gamma);

/// Clip [a_hat - eps, a_hat + eps] to [0, 1]. Throws InfeasibleError if the
/// resulting set is empty.
UncertaintySet uncertainty_from_estimate(const PopularityVector& estimate, const Eigen::VectorXd& eps);

/// Relative error bounds eps_n = rel * a_hat_n.
UncertaintySet relative_uncertainty(const PopularityVector& estimate, double rel);

struct RequestStreamConfig {
    PopularityVector popularity;
    std::size_t observers = 1;
    double request_prob = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Requests observed in one slot from the observer set.
struct RequestBatch {
    std::size_t slot = 0;
    std::vector<std::size_t> counts;
    std::size_t active = 0;

    /// Empirical shares xi_n = c_n / active. Requires active > 0.
    Eigen::VectorXd shares() const;
};

/// Draw one slot's requests. Each observer independently stays silent with
/// probability 1 - request_prob, otherwise requests file n with probability
/// a_n. Pure function of (stream, slot).
RequestBatch sample_requests(const RequestStreamConfig& stream, std::size_t slot);

/// Pooled request shares over several slots. Throws NoObservationsError when
/// every slot is empty.
PopularityVector empirical_popularity(std::span<const RequestBatch> batches);

}  // namespace cachenet
