#pragma once

#include "cachenet/netmodel.hpp"
#include "cachenet/popularity.hpp"
#include "cachenet/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cachenet {

/// Caching probabilities T (tiers x files): T(m, n) is the probability that a
/// tier-m BS stores file n.
using CachingMatrix = Eigen::MatrixXd;

class CachingViolation : public std::runtime_error {
public:
    enum class Kind { Shape, Box, RowSum };

    CachingViolation(Kind kind, std::size_t tier, std::size_t file, const std::string& what)
        : std::runtime_error(what), kind_(kind), tier_(tier), file_(file) {}

    Kind kind() const { return kind_; }
    /// Zero-based tier of the first violation.
    std::size_t tier() const { return tier_; }
    /// Zero-based file of the first box violation (0 for row sums).
    std::size_t file() const { return file_; }

private:
    Kind kind_;
    std::size_t tier_;
    std::size_t file_;
};

/// Checks 0 <= T <= 1 entrywise and row m summing to K_m within `tol`.
/// Throws CachingViolation describing the first failure.
void validate(const CachingMatrix& t, std::span<const std::size_t> cache_sizes, double tol = 1e-9);

inline bool is_feasible(const CachingMatrix& t, std::span<const std::size_t> cache_sizes, double tol = 1e-9) {
    try {
        validate(t, cache_sizes, tol);
        return true;
    } catch (const CachingViolation&) {
        return false;
    }
}

/// Euclidean projection of `v` onto {x : 0 <= x <= 1, sum x = k}.
Eigen::VectorXd project_row(const Eigen::VectorXd& v, double k);

/// Row-wise projection onto the caching feasible set.
CachingMatrix project(const CachingMatrix& t, std::span<const std::size_t> cache_sizes);

/// T(m, n) = K_m / N.
CachingMatrix uniform_caching(const NetworkConfig& cfg);

/// Rows proportional to K_m * a, projected onto the feasible set.
CachingMatrix popularity_seeded_caching(const NetworkConfig& cfg, const PopularityVector& a);

struct Combination {
    std::vector<std::size_t> files;  // sorted, zero-based
    double probability = 0.0;
};

/// Distribution over K-subsets of the catalog realizing one tier's marginals.
struct CombinationDistribution {
    std::size_t cache_size = 0;
    std::size_t catalog_size = 0;
    std::vector<Combination> combinations;

    Eigen::VectorXd marginals() const;
};

/// Interval construction: lay the marginals end to end over K unit columns
/// and cut at every segment boundary. Each vertical slice is one combination
/// with probability equal to its width. Throws InfeasibleError unless the
/// row lies in [0, 1] and sums to K within 1e-9.
CombinationDistribution to_combinations(const Eigen::VectorXd& row, std::size_t k);

std::vector<CombinationDistribution> to_combinations(const CachingMatrix& t,
                                                     std::span<const std::size_t> cache_sizes);

/// Index of a combination drawn with its probability.
std::size_t sample_cache_index(const CombinationDistribution& dist, CounterStream& rng);

const std::vector<std::size_t>& sample_cache(const CombinationDistribution& dist, CounterStream& rng);

/// CSV with header file_1..file_N and one row per tier, 12 significant digits.
void write_caching_csv(std::ostream& out, const CachingMatrix& t);
CachingMatrix read_caching_csv(std::istream& in);

/// "%.12g" formatting shared by every CSV writer.
std::string format_number(double v);

}  // namespace cachenet
