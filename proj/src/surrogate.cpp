#include "cachenet/surrogate.hpp"

#include "cachenet/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cachenet {

double TierSurrogate::value(const Eigen::VectorXd& row) const {
    double v = 0.0;
    for (Eigen::Index n = 0; n < row.size(); ++n) {
        const double den = theta * row(n) + offset(n);
        if (gain(n) != 0.0 && row(n) != 0.0) v += gain(n) * row(n) / den;
        v -= price(n) * row(n);
    }
    return v;
}

Eigen::VectorXd TierSurrogate::row_at(double nu) const {
    Eigen::VectorXd row(gain.size());
    for (Eigen::Index n = 0; n < gain.size(); ++n) {
        const double denom = nu + price(n);
        if (denom <= 0.0) {
            // Marginal value never drops below the multiplier: the root diverges.
            row(n) = 1.0;
            continue;
        }
        const double t = (std::sqrt(gain(n) * offset(n) / denom) - offset(n)) / theta;
        row(n) = std::clamp(t, 0.0, 1.0);
    }
    return row;
}

SurrogateSolution solve_surrogate(const TierSurrogate& s, double k) {
    if (!(s.theta > 0.0)) throw ConfigError("tier surrogate requires theta_mm > 0");
    const auto n = s.gain.size();
    if (!(k >= 0.0 && k <= static_cast<double>(n))) throw InfeasibleError("cache size outside [0, N]");

    // Below lo every entry saturates at one.
    double lo = -s.price.maxCoeff() - 1.0;
    double hi = std::max(1.0, lo + 1.0);
    int expansions = 0;
    while (s.row_at(hi).sum() > k) {
        const double width = hi - lo;
        hi = lo + 2.0 * width;
        if (++expansions > 200 || !std::isfinite(hi)) {
            throw SolverError("multiplier bracket not found");
        }
    }

    Eigen::VectorXd row_lo = s.row_at(lo);
    Eigen::VectorXd row_hi = s.row_at(hi);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        Eigen::VectorXd row_mid = s.row_at(mid);
        const double sum = row_mid.sum();
        if (sum == k) {
            return {row_mid, mid};
        }
        if (sum > k) {
            lo = mid;
            row_lo = std::move(row_mid);
        } else {
            hi = mid;
            row_hi = std::move(row_mid);
        }
    }
    // Sum is continuous in nu: blend the two bracketing rows to hit k exactly.
    const double s_lo = row_lo.sum();
    const double s_hi = row_hi.sum();
    const double w = s_lo > s_hi ? (k - s_hi) / (s_lo - s_hi) : 1.0;
    Eigen::VectorXd row = w * row_lo + (1.0 - w) * row_hi;
    if (std::abs(row.sum() - k) > 1e-9) throw SolverError("multiplier bisection did not meet the budget");
    return {row, 0.5 * (lo + hi)};
}

}  // namespace cachenet
