#include "cachenet/stp.hpp"

#include "cachenet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cachenet {

namespace {

void check_dims(const Eigen::VectorXd& a, const CachingMatrix& t, const CoefficientTable& coef) {
    if (t.rows() != coef.eta.size()) throw ConfigError("caching matrix rows differ from tier count");
    if (a.size() != t.cols()) throw ConfigError("popularity length differs from caching matrix columns");
}

// T / D with the convention 0 / 0 = 0 (zero threshold, file not cached).
double ratio(double num, double den) { return num == 0.0 ? 0.0 : num / den; }

}  // namespace

double association_prob(const CachingMatrix& t, std::size_t tier, std::size_t file, const NetworkConfig& cfg) {
    const auto m = static_cast<Eigen::Index>(tier);
    const auto n = static_cast<Eigen::Index>(file);
    if (m >= t.rows() || n >= t.cols()) throw ConfigError("association_prob: index out of range");
    const double delta = 2.0 / cfg.pathloss_alpha;
    double den = 0.0;
    for (Eigen::Index l = 0; l < t.rows(); ++l) {
        den += cfg.densities[static_cast<std::size_t>(l)] * t(l, n) *
               std::pow(cfg.powers[static_cast<std::size_t>(l)] / cfg.powers[tier], delta);
    }
    if (!(den > 0.0)) {
        throw InfeasibleError("file " + std::to_string(file + 1) + " is not stored in any tier");
    }
    return cfg.densities[tier] * t(m, n) / den;
}

Eigen::MatrixXd stp_denominators(const CoefficientTable& coef, const CachingMatrix& t) {
    Eigen::MatrixXd d = coef.theta.transpose() * t;
    d.colwise() += coef.eta;
    return d;
}

Eigen::VectorXd file_success(const CoefficientTable& coef, const CachingMatrix& t) {
    const Eigen::MatrixXd d = stp_denominators(coef, t);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(t.cols());
    for (Eigen::Index n = 0; n < t.cols(); ++n) {
        for (Eigen::Index m = 0; m < t.rows(); ++m) g(n) += ratio(t(m, n), d(m, n));
    }
    return g;
}

Eigen::VectorXd stp_per_tier(const Eigen::VectorXd& a, const CachingMatrix& t, const CoefficientTable& coef) {
    check_dims(a, t, coef);
    const Eigen::MatrixXd d = stp_denominators(coef, t);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(t.rows());
    for (Eigen::Index m = 0; m < t.rows(); ++m) {
        for (Eigen::Index n = 0; n < t.cols(); ++n) q(m) += a(n) * ratio(t(m, n), d(m, n));
    }
    return q;
}

double stp(const Eigen::VectorXd& a, const CachingMatrix& t, const CoefficientTable& coef) {
    return stp_per_tier(a, t, coef).sum();
}

Eigen::MatrixXd stp_gradient(const Eigen::VectorXd& a, const CachingMatrix& t, const CoefficientTable& coef) {
    check_dims(a, t, coef);
    const Eigen::MatrixXd d = stp_denominators(coef, t);
    const auto tiers = t.rows();
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(tiers, t.cols());
    for (Eigen::Index n = 0; n < t.cols(); ++n) {
        if (a(n) == 0.0) continue;
        for (Eigen::Index m = 0; m < tiers; ++m) {
            double g = d(m, n) > 0.0 ? a(n) / d(m, n) : 0.0;
            for (Eigen::Index j = 0; j < tiers; ++j) {
                if (d(j, n) > 0.0) g -= a(n) * coef.theta(m, j) * t(j, n) / (d(j, n) * d(j, n));
            }
            grad(m, n) = g;
        }
    }
    return grad;
}

double stationarity(const Eigen::VectorXd& a, const CachingMatrix& t, const CoefficientTable& coef,
                    std::span<const std::size_t> cache_sizes) {
    const CachingMatrix moved = t + stp_gradient(a, t, coef);
    return (t - project(moved, cache_sizes)).cwiseAbs().maxCoeff();
}

WorstCase worst_case_linear(const UncertaintySet& set, const Eigen::VectorXd& g) {
    const auto n = g.size();
    if (static_cast<std::size_t>(n) != set.size()) throw ConfigError("weights differ in length from the uncertainty set");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return g(i) < g(j); });

    WorstCase out;
    out.popularity = set.lower();
    double remaining = 1.0 - set.lower().sum();
    for (auto i : order) {
        if (remaining <= 0.0) break;
        const double add = std::min(set.upper()(i) - set.lower()(i), remaining);
        out.popularity(i) += add;
        remaining -= add;
    }
    if (remaining > 1e-12) throw InfeasibleError("uncertainty set is empty");
    out.value = out.popularity.dot(g);
    return out;
}

WorstCase worst_case_stp(const UncertaintySet& set, const CachingMatrix& t, const CoefficientTable& coef) {
    if (t.rows() != coef.eta.size()) throw ConfigError("caching matrix rows differ from tier count");
    return worst_case_linear(set, file_success(coef, t));
}

}  // namespace cachenet
