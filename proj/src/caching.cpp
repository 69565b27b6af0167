#include "cachenet/caching.hpp"

#include "cachenet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace cachenet {

namespace {

double capped_sum(const Eigen::VectorXd& v, double shift) {
    return (v.array() - shift).max(0.0).min(1.0).sum();
}

}  // namespace

void validate(const CachingMatrix& t, std::span<const std::size_t> cache_sizes, double tol) {
    if (static_cast<std::size_t>(t.rows()) != cache_sizes.size()) {
        throw CachingViolation(CachingViolation::Kind::Shape, 0, 0,
                               "caching matrix has " + std::to_string(t.rows()) + " rows, expected " +
                                   std::to_string(cache_sizes.size()));
    }
    for (Eigen::Index m = 0; m < t.rows(); ++m) {
        for (Eigen::Index n = 0; n < t.cols(); ++n) {
            const double v = t(m, n);
            if (!(v >= -tol && v <= 1.0 + tol)) {
                throw CachingViolation(CachingViolation::Kind::Box, static_cast<std::size_t>(m),
                                       static_cast<std::size_t>(n),
                                       "T(" + std::to_string(m + 1) + "," + std::to_string(n + 1) +
                                           ") = " + std::to_string(v) + " outside [0, 1]");
            }
        }
        const double sum = t.row(m).sum();
        const auto k = static_cast<double>(cache_sizes[static_cast<std::size_t>(m)]);
        if (std::abs(sum - k) > tol) {
            throw CachingViolation(CachingViolation::Kind::RowSum, static_cast<std::size_t>(m), 0,
                                   "row " + std::to_string(m + 1) + " sums to " + format_number(sum) +
                                       ", expected " + format_number(k));
        }
    }
}

Eigen::VectorXd project_row(const Eigen::VectorXd& v, double k) {
    const auto n = v.size();
    if (!(k >= 0.0 && k <= static_cast<double>(n))) {
        throw InfeasibleError("projection target outside [0, N]");
    }
    if (k == 0.0) return Eigen::VectorXd::Zero(n);
    if (k == static_cast<double>(n)) return Eigen::VectorXd::Ones(n);

    // The capped sum is piecewise linear and nonincreasing in the shift, with
    // kinks at v_n - 1 and v_n. Locate the bracketing kinks, then interpolate.
    std::vector<double> kinks;
    kinks.reserve(static_cast<std::size_t>(2 * n));
    for (Eigen::Index i = 0; i < n; ++i) {
        kinks.push_back(v(i) - 1.0);
        kinks.push_back(v(i));
    }
    std::sort(kinks.begin(), kinks.end());
    std::size_t lo = 0;
    std::size_t hi = kinks.size() - 1;
    // capped_sum(kinks[lo]) = N >= k and capped_sum(kinks[hi]) = 0 <= k.
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (capped_sum(v, kinks[mid]) >= k) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double s_lo = capped_sum(v, kinks[lo]);
    const double s_hi = capped_sum(v, kinks[hi]);
    double shift = kinks[lo];
    if (s_lo > s_hi) shift = kinks[lo] + (s_lo - k) * (kinks[hi] - kinks[lo]) / (s_lo - s_hi);
    return (v.array() - shift).max(0.0).min(1.0).matrix();
}

CachingMatrix project(const CachingMatrix& t, std::span<const std::size_t> cache_sizes) {
    CachingMatrix out(t.rows(), t.cols());
    for (Eigen::Index m = 0; m < t.rows(); ++m) {
        out.row(m) = project_row(t.row(m).transpose(), static_cast<double>(cache_sizes[static_cast<std::size_t>(m)]))
                         .transpose();
    }
    return out;
}

CachingMatrix uniform_caching(const NetworkConfig& cfg) {
    const auto m = static_cast<Eigen::Index>(cfg.tiers());
    const auto n = static_cast<Eigen::Index>(cfg.catalog_size);
    CachingMatrix t(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        t.row(i).setConstant(static_cast<double>(cfg.cache_sizes[static_cast<std::size_t>(i)]) /
                             static_cast<double>(n));
    }
    return t;
}

CachingMatrix popularity_seeded_caching(const NetworkConfig& cfg, const PopularityVector& a) {
    if (a.size() != cfg.catalog_size) throw ConfigError("popularity length differs from catalog size");
    CachingMatrix raw(static_cast<Eigen::Index>(cfg.tiers()), static_cast<Eigen::Index>(cfg.catalog_size));
    for (Eigen::Index m = 0; m < raw.rows(); ++m) {
        raw.row(m) = static_cast<double>(cfg.cache_sizes[static_cast<std::size_t>(m)]) * a.values().transpose();
    }
    return project(raw, cfg.cache_sizes);
}

Eigen::VectorXd CombinationDistribution::marginals() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(catalog_size));
    for (const auto& c : combinations) {
        for (auto f : c.files) out(static_cast<Eigen::Index>(f)) += c.probability;
    }
    return out;
}

CombinationDistribution to_combinations(const Eigen::VectorXd& row, std::size_t k) {
    const auto n = static_cast<std::size_t>(row.size());
    if (k == 0 || k > n) throw InfeasibleError("cache size must lie in [1, N]");
    if ((row.array() < -1e-9).any() || (row.array() > 1.0 + 1e-9).any()) {
        throw InfeasibleError("marginals must lie in [0, 1]");
    }
    const double total = row.sum();
    if (std::abs(total - static_cast<double>(k)) > 1e-9) {
        throw InfeasibleError("marginals sum to " + format_number(total) + ", expected " + std::to_string(k));
    }

    // Segment n covers [ends[n-1], ends[n]) on the line [0, K).
    Eigen::VectorXd clean = row.cwiseMax(0.0).cwiseMin(1.0);
    clean *= static_cast<double>(k) / clean.sum();
    std::vector<double> ends(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += clean(static_cast<Eigen::Index>(i));
        ends[i] = acc;
    }
    ends.back() = static_cast<double>(k);

    std::vector<double> cuts{0.0, 1.0};
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double frac = ends[i] - std::floor(ends[i]);
        cuts.push_back(frac);
    }
    std::sort(cuts.begin(), cuts.end());

    constexpr double kMinWidth = 1e-14;
    CombinationDistribution dist;
    dist.cache_size = k;
    dist.catalog_size = n;
    double kept = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double width = cuts[c + 1] - cuts[c];
        if (width <= kMinWidth) continue;
        const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
        Combination combo;
        combo.probability = width;
        for (std::size_t col = 0; col < k; ++col) {
            const double x = mid + static_cast<double>(col);
            const auto it = std::upper_bound(ends.begin(), ends.end(), x);
            combo.files.push_back(static_cast<std::size_t>(it - ends.begin()));
        }
        std::sort(combo.files.begin(), combo.files.end());
        kept += width;
        dist.combinations.push_back(std::move(combo));
    }
    for (auto& c : dist.combinations) c.probability /= kept;
    return dist;
}

std::vector<CombinationDistribution> to_combinations(const CachingMatrix& t,
                                                     std::span<const std::size_t> cache_sizes) {
    validate(t, cache_sizes);
    std::vector<CombinationDistribution> out;
    out.reserve(cache_sizes.size());
    for (Eigen::Index m = 0; m < t.rows(); ++m) {
        out.push_back(to_combinations(t.row(m).transpose(), cache_sizes[static_cast<std::size_t>(m)]));
    }
    return out;
}

std::size_t sample_cache_index(const CombinationDistribution& dist, CounterStream& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.combinations.size(); ++i) {
        acc += dist.combinations[i].probability;
        if (u < acc) return i;
    }
    return dist.combinations.size() - 1;
}

const std::vector<std::size_t>& sample_cache(const CombinationDistribution& dist, CounterStream& rng) {
    return dist.combinations[sample_cache_index(dist, rng)].files;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_caching_csv(std::ostream& out, const CachingMatrix& t) {
    for (Eigen::Index n = 0; n < t.cols(); ++n) {
        out << (n ? "," : "") << "file_" << (n + 1);
    }
    out << '\n';
    for (Eigen::Index m = 0; m < t.rows(); ++m) {
        for (Eigen::Index n = 0; n < t.cols(); ++n) {
            out << (n ? "," : "") << format_number(t(m, n));
        }
        out << '\n';
    }
}

CachingMatrix read_caching_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("caching CSV is empty");
    const auto cols = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') + 1);
    if (line.rfind("file_1", 0) != 0) throw ConfigError("caching CSV header must start with file_1");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("caching CSV: bad number '" + cell + "'");
            }
        }
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw ConfigError("caching CSV: row " + std::to_string(rows.size() + 1) + " has " +
                              std::to_string(row.size()) + " fields, header has " + std::to_string(cols));
        }
        rows.push_back(std::move(row));
    }
    CachingMatrix t(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t m = 0; m < rows.size(); ++m) {
        for (Eigen::Index n = 0; n < cols; ++n) t(static_cast<Eigen::Index>(m), n) = rows[m][static_cast<std::size_t>(n)];
    }
    return t;
}

}  // namespace cachenet
