#include "cachenet/netmodel.hpp"

#include "cachenet/errors.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <string>

namespace cachenet {

namespace {

constexpr double kQuadTol = 1e-13;

// The substituted integrands below are bounded but keep a fractional-power
// kink at one endpoint; double-exponential quadrature absorbs it.
template <class F>
double integrate(F f, double a, double b) {
    if (b <= a) return 0.0;
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    return rule.integrate(f, a, b, kQuadTol);
}

// Integral of u^(x-1) (1-u)^(y-1) over [a, b] subset of [0, 1/2].
// With v = u^x the left singularity disappears: (1/x) (1 - v^(1/x))^(y-1) dv.
double left_piece(double x, double y, double a, double b) {
    auto f = [x, y](double v) { return std::pow(1.0 - std::pow(v, 1.0 / x), y - 1.0); };
    return integrate(f, std::pow(a, x), std::pow(b, x)) / x;
}

// Same integrand over [a, b] subset of [1/2, 1], via w = 1 - u and s = w^y.
double right_piece(double x, double y, double a, double b) {
    auto f = [x, y](double s) { return std::pow(1.0 - std::pow(s, 1.0 / y), x - 1.0); };
    return integrate(f, std::pow(1.0 - b, y), std::pow(1.0 - a, y)) / y;
}

void check_shape(double x, double y) {
    if (!(x > 0.0 && x < 1.0) || !(y > 0.0 && y < 1.0)) {
        throw DomainError("beta: arguments must lie in (0, 1), got x=" + std::to_string(x) +
                          " y=" + std::to_string(y));
    }
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("NetworkConfig: " + what);
}

}  // namespace

void NetworkConfig::validate() const {
    const std::size_t m = tiers();
    require(m >= 1, "at least one tier required");
    require(powers.size() == m && sir_thresholds.size() == m && cache_sizes.size() == m,
            "per-tier vectors must all have length " + std::to_string(m));
    require(pathloss_alpha > 2.0, "path-loss exponent must exceed 2");
    require(catalog_size >= 1, "catalog must hold at least one file");
    for (std::size_t i = 0; i < m; ++i) {
        const auto tier = " (tier " + std::to_string(i + 1) + ")";
        require(densities[i] > 0.0 && std::isfinite(densities[i]), "density must be positive" + tier);
        require(powers[i] > 0.0 && std::isfinite(powers[i]), "power must be positive" + tier);
        require(sir_thresholds[i] >= 0.0 && std::isfinite(sir_thresholds[i]),
                "SIR threshold must be nonnegative" + tier);
        require(cache_sizes[i] >= 1 && cache_sizes[i] <= catalog_size,
                "cache size must lie in [1, N]" + tier);
    }
}

double beta(double x, double y) {
    check_shape(x, y);
    return left_piece(x, y, 0.0, 0.5) + right_piece(x, y, 0.5, 1.0);
}

double beta_complementary(double x, double y, double z) {
    check_shape(x, y);
    if (!(z >= 0.0 && z <= 1.0)) {
        throw DomainError("beta_complementary: z must lie in [0, 1], got " + std::to_string(z));
    }
    if (z >= 0.5) return right_piece(x, y, z, 1.0);
    return left_piece(x, y, z, 0.5) + right_piece(x, y, 0.5, 1.0);
}

CoefficientTable compute_coefficients(const NetworkConfig& cfg) {
    cfg.validate();
    const auto m = static_cast<Eigen::Index>(cfg.tiers());
    const double delta = 2.0 / cfg.pathloss_alpha;
    const double b_full = beta(delta, 1.0 - delta);

    CoefficientTable table;
    table.theta.resize(m, m);
    table.eta.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double tau = cfg.sir_thresholds[j];
        // theta(l, j) = r(l, j) * (1 + delta tau^delta (B' - B)); eta sums r(l, j) delta tau^delta B.
        double b_gap = 0.0;
        if (tau > 0.0) {
            b_gap = beta_complementary(delta, 1.0 - delta, 1.0 / (1.0 + tau)) - b_full;
        }
        double eta = 0.0;
        for (Eigen::Index l = 0; l < m; ++l) {
            const double density_ratio = cfg.densities[l] / cfg.densities[j];
            const double power_ratio = std::pow(cfg.powers[l] / cfg.powers[j], delta);
            const double r = density_ratio * power_ratio;
            const double interference = delta * density_ratio * std::pow(cfg.powers[l] / cfg.powers[j] * tau, delta);
            table.theta(l, j) = interference * b_gap + r;
            eta += interference * b_full;
        }
        table.eta(j) = eta;
    }
    return table;
}

}  // namespace cachenet
