#include "cachenet/robust.hpp"

#include "cachenet/errors.hpp"
#include "cachenet/sca.hpp"
#include "cachenet/stp.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <limits>
#include <numeric>

namespace cachenet {

namespace {

constexpr double kWeightFloor = 1e-12;
constexpr double kLogFloor = -27.631021115928547;  // log(1e-12)
constexpr double kLogCeil = 13.815510557964274;    // log(1e6)

// Positions of each variable in the log vector.
struct Layout {
    Eigen::Index tiers;
    Eigen::Index files;

    int t(Eigen::Index m, Eigen::Index n) const { return static_cast<int>(m * files + n); }
    int x(Eigen::Index m, Eigen::Index n) const { return static_cast<int>(tiers * files + m * files + n); }
    int lambda(Eigen::Index n) const { return static_cast<int>(2 * tiers * files + n); }
    int mu(Eigen::Index n) const { return static_cast<int>(2 * tiers * files + files + n); }
    int nu1() const { return static_cast<int>(2 * tiers * files + 2 * files); }
    int nu2() const { return nu1() + 1; }
    int y() const { return nu1() + 2; }
    int size() const { return nu1() + 3; }
};

Layout layout_of(const DualGpPoint& p) { return {p.t.rows(), p.t.cols()}; }

Eigen::VectorXd to_log(const DualGpPoint& p) {
    const Layout l = layout_of(p);
    Eigen::VectorXd z(l.size());
    for (Eigen::Index m = 0; m < l.tiers; ++m) {
        for (Eigen::Index n = 0; n < l.files; ++n) {
            z(l.t(m, n)) = std::log(p.t(m, n));
            z(l.x(m, n)) = std::log(p.x(m, n));
        }
    }
    for (Eigen::Index n = 0; n < l.files; ++n) {
        z(l.lambda(n)) = std::log(p.lambda(n));
        z(l.mu(n)) = std::log(p.mu(n));
    }
    z(l.nu1()) = std::log(p.nu1);
    z(l.nu2()) = std::log(p.nu2);
    z(l.y()) = std::log(p.y);
    return z;
}

DualGpPoint from_log(const Eigen::VectorXd& z, const Layout& l, std::vector<BudgetSide> sides) {
    DualGpPoint p;
    p.sides = std::move(sides);
    p.t.resize(l.tiers, l.files);
    p.x.resize(l.tiers, l.files);
    p.lambda.resize(l.files);
    p.mu.resize(l.files);
    for (Eigen::Index m = 0; m < l.tiers; ++m) {
        for (Eigen::Index n = 0; n < l.files; ++n) {
            p.t(m, n) = std::exp(z(l.t(m, n)));
            p.x(m, n) = std::exp(z(l.x(m, n)));
        }
    }
    for (Eigen::Index n = 0; n < l.files; ++n) {
        p.lambda(n) = std::exp(z(l.lambda(n)));
        p.mu(n) = std::exp(z(l.mu(n)));
    }
    p.nu1 = std::exp(z(l.nu1()));
    p.nu2 = std::exp(z(l.nu2()));
    p.y = std::exp(z(l.y()));
    return p;
}

void require_positive_theta(const CoefficientTable& coef) {
    if ((coef.theta.array() < 0.0).any()) {
        throw ConfigError("robust caching needs theta(l, m) >= 0 for every tier pair");
    }
}

// Monomial (u / w)^w summed in logs, skipping zero-weight terms.
double log_condensed_term(double u, double w) { return w > 0.0 ? w * (std::log(u) - std::log(w)) : 0.0; }

double floored(double w) { return std::max(w, kWeightFloor); }

}  // namespace

double budget_denominator(const DualGpPoint& p, const UncertaintySet& set) {
    return p.lambda.dot(set.lower()) + p.nu2;
}

double file_denominator(const DualGpPoint& p, std::size_t file) {
    const auto n = static_cast<Eigen::Index>(file);
    return (p.t.col(n).array() / p.x.col(n).array()).sum() + p.mu(n) + p.nu1;
}

GpWeights compute_weights(const DualGpPoint& prev, const UncertaintySet& set) {
    const Eigen::Index tiers = prev.t.rows();
    const Eigen::Index files = prev.t.cols();
    GpWeights w;
    const double budget = budget_denominator(prev, set);
    w.sigma = prev.lambda.cwiseProduct(set.lower()) / budget;
    w.gamma1 = prev.nu2 / budget;
    w.beta.resize(tiers, files);
    w.gamma2.resize(files);
    w.gamma3.resize(files);
    for (Eigen::Index n = 0; n < files; ++n) {
        const double den = file_denominator(prev, static_cast<std::size_t>(n));
        for (Eigen::Index m = 0; m < tiers; ++m) w.beta(m, n) = prev.t(m, n) / prev.x(m, n) / den;
        w.gamma2(n) = prev.mu(n) / den;
        w.gamma3(n) = prev.nu1 / den;
    }
    w.budget = prev.t.array().colwise() / prev.t.rowwise().sum().array();
    return w;
}

double budget_condensed(const DualGpPoint& p, const GpWeights& w, const UncertaintySet& set) {
    double log_value = log_condensed_term(p.nu2, w.gamma1);
    for (Eigen::Index n = 0; n < p.lambda.size(); ++n) {
        if (set.lower()(n) > 0.0) log_value += log_condensed_term(p.lambda(n) * set.lower()(n), w.sigma(n));
    }
    return std::exp(log_value);
}

double file_condensed(const DualGpPoint& p, const GpWeights& w, std::size_t file) {
    const auto n = static_cast<Eigen::Index>(file);
    double log_value = log_condensed_term(p.mu(n), w.gamma2(n)) + log_condensed_term(p.nu1, w.gamma3(n));
    for (Eigen::Index m = 0; m < p.t.rows(); ++m) {
        log_value += log_condensed_term(p.t(m, n) / p.x(m, n), w.beta(m, n));
    }
    return std::exp(log_value);
}

double max_ratio_violation(const DualGpPoint& p, const UncertaintySet& set, const CoefficientTable& coef,
                           const NetworkConfig& cfg) {
    double worst = (p.y + p.mu.dot(set.upper()) + p.nu1) / budget_denominator(p, set) - 1.0;
    const Eigen::MatrixXd d = stp_denominators(coef, p.t);
    for (Eigen::Index n = 0; n < p.t.cols(); ++n) {
        worst = std::max(worst, (p.lambda(n) + p.nu2) / file_denominator(p, static_cast<std::size_t>(n)) - 1.0);
        for (Eigen::Index m = 0; m < p.t.rows(); ++m) {
            worst = std::max(worst, d(m, n) / p.x(m, n) - 1.0);
            worst = std::max(worst, p.t(m, n) - 1.0);
        }
    }
    for (Eigen::Index m = 0; m < p.t.rows(); ++m) {
        const double ratio = p.t.row(m).sum() / static_cast<double>(cfg.cache_sizes[static_cast<std::size_t>(m)]);
        worst = std::max(worst, p.sides[static_cast<std::size_t>(m)] == BudgetSide::at_most ? ratio - 1.0 : 1.0 / ratio - 1.0);
    }
    return worst;
}

std::vector<BudgetSide> budget_sides(const Eigen::VectorXd& a, const NetworkConfig& cfg, const CoefficientTable& coef) {
    const ScaResult sca = run_sca(a, cfg, coef);
    const Eigen::MatrixXd grad = stp_gradient(a, sca.t, coef);
    std::vector<BudgetSide> sides(cfg.tiers(), BudgetSide::at_most);
    for (Eigen::Index m = 0; m < grad.rows(); ++m) {
        const std::size_t k = cfg.cache_sizes[static_cast<std::size_t>(m)];
        if (k >= cfg.catalog_size) continue;
        // At a stationary point the budget multiplier separates the K largest
        // gradients of the row from the rest.
        std::vector<double> g;
        g.reserve(static_cast<std::size_t>(grad.cols()));
        for (Eigen::Index n = 0; n < grad.cols(); ++n) g.push_back(grad(m, n));
        std::sort(g.begin(), g.end(), std::greater<>());
        const double multiplier = 0.5 * (g[k - 1] + g[k]);
        if (multiplier < 0.0) sides[static_cast<std::size_t>(m)] = BudgetSide::at_least;
    }
    return sides;
}

DualGpPoint initial_point(const UncertaintySet& set, const CoefficientTable& coef, const NetworkConfig& cfg) {
    require_positive_theta(coef);
    if (set.size() != cfg.catalog_size) throw ConfigError("uncertainty set length differs from catalog size");
    return initial_point(set, coef, cfg, budget_sides(set.estimate().values(), cfg, coef));
}

DualGpPoint initial_point(const UncertaintySet& set, const CoefficientTable& coef, const NetworkConfig& cfg,
                          std::vector<BudgetSide> sides) {
    require_positive_theta(coef);
    if (set.size() != cfg.catalog_size) throw ConfigError("uncertainty set length differs from catalog size");
    if (sides.size() != cfg.tiers()) throw ConfigError("need one budget side per tier");
    constexpr double kShrink = 1e-6;
    DualGpPoint p;
    p.t = uniform_caching(cfg);
    for (std::size_t m = 0; m < sides.size(); ++m) {
        const bool grow = sides[m] == BudgetSide::at_least;
        if (grow && cfg.cache_sizes[m] >= cfg.catalog_size) throw ConfigError("a full-catalog tier cannot sit below its budget");
        p.t.row(static_cast<Eigen::Index>(m)) *= grow ? 1.0 + kShrink : 1.0 - kShrink;
    }
    p.sides = std::move(sides);
    p.x = stp_denominators(coef, p.t) * (1.0 + kShrink);
    const Eigen::VectorXd g = (p.t.array() / p.x.array()).colwise().sum().transpose();

    // Greedy worst case; g_star is the level of the file that takes the last unit of mass.
    const auto files = g.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(files));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return g(i) < g(j); });
    double remaining = 1.0 - set.lower().sum();
    double g_star = g(order.front());
    for (auto i : order) {
        if (remaining <= 0.0) break;
        const double add = std::min(set.upper()(i) - set.lower()(i), remaining);
        if (add > 0.0) g_star = g(i);
        remaining -= add;
    }
    const double worst = worst_case_linear(set, g).value;

    const double slack = kShrink;
    // Multipliers well away from zero give the condensed monomials useful
    // exponents; the price is a lower starting y when the set is wide.
    const double spread = 0.5 * g_star;
    p.lambda = ((g.array() - g_star).max(0.0) + spread).matrix();
    p.mu = ((g_star - g.array()).max(0.0) + spread).matrix();
    p.nu1 = 1.0;
    p.nu2 = 1.0 + g_star - slack;
    p.y = (worst - spread * (set.upper() - set.lower()).sum() - slack) * (1.0 - kShrink);
    if (!(p.y > 0.0)) throw InfeasibleError("worst-case STP of the uniform start is not positive");
    return p;
}

GpStep solve_gp(const GpWeights& weights, const DualGpPoint& prev, const UncertaintySet& set,
                const CoefficientTable& coef, const NetworkConfig& cfg, const GpOptions& options) {
    require_positive_theta(coef);
    const Layout l = layout_of(prev);
    GpProblem gp;
    gp.num_vars = l.size();
    gp.objective = Eigen::VectorXd::Zero(l.size());
    gp.objective(l.y()) = -1.0;
    gp.lower = Eigen::VectorXd::Constant(l.size(), kLogFloor);
    gp.upper = Eigen::VectorXd::Constant(l.size(), kLogCeil);
    for (Eigen::Index m = 0; m < l.tiers; ++m) {
        for (Eigen::Index n = 0; n < l.files; ++n) gp.upper(l.t(m, n)) = 0.0;  // T <= 1
    }

    // Budget ratio: (y + sum mu a_upper + nu1) / condensed(sum lambda a_lower + nu2) <= 1.
    {
        double log_den = 0.0;
        std::vector<std::pair<int, double>> den;
        const double g1 = floored(weights.gamma1);
        log_den += g1 * -std::log(g1);
        den.emplace_back(l.nu2(), -g1);
        for (Eigen::Index n = 0; n < l.files; ++n) {
            const double lo = set.lower()(n);
            if (lo <= 0.0) continue;
            const double s = floored(weights.sigma(n));
            log_den += s * (std::log(lo) - std::log(s));
            den.emplace_back(l.lambda(n), -s);
        }
        GpConstraint c;
        auto add = [&](double log_coef, int var) {
            GpTerm term{log_coef - log_den, den};
            term.exponents.emplace_back(var, 1.0);
            c.terms.push_back(std::move(term));
        };
        add(0.0, l.y());
        add(0.0, l.nu1());
        for (Eigen::Index n = 0; n < l.files; ++n) {
            if (set.upper()(n) > 0.0) add(std::log(set.upper()(n)), l.mu(n));
        }
        gp.constraints.push_back(std::move(c));
    }

    // File ratios: (lambda_n + nu2) / condensed(sum_m T/x + mu_n + nu1) <= 1.
    for (Eigen::Index n = 0; n < l.files; ++n) {
        double log_den = 0.0;
        std::vector<std::pair<int, double>> den;
        for (Eigen::Index m = 0; m < l.tiers; ++m) {
            const double b = floored(weights.beta(m, n));
            log_den -= b * std::log(b);
            den.emplace_back(l.t(m, n), -b);
            den.emplace_back(l.x(m, n), b);
        }
        const double g2 = floored(weights.gamma2(n));
        const double g3 = floored(weights.gamma3(n));
        log_den -= g2 * std::log(g2) + g3 * std::log(g3);
        den.emplace_back(l.mu(n), -g2);
        den.emplace_back(l.nu1(), -g3);
        GpConstraint c;
        for (int var : {l.lambda(n), l.nu2()}) {
            GpTerm term{-log_den, den};
            term.exponents.emplace_back(var, 1.0);
            c.terms.push_back(std::move(term));
        }
        gp.constraints.push_back(std::move(c));
    }

    // Denominator bounds: (sum_l theta(l, m) T(l, n) + eta_m) / x(m, n) <= 1.
    for (Eigen::Index m = 0; m < l.tiers; ++m) {
        for (Eigen::Index n = 0; n < l.files; ++n) {
            GpConstraint c;
            for (Eigen::Index j = 0; j < l.tiers; ++j) {
                if (coef.theta(j, m) <= 0.0) continue;
                c.terms.push_back({std::log(coef.theta(j, m)), {{l.t(j, n), 1.0}, {l.x(m, n), -1.0}}});
            }
            c.terms.push_back({std::log(coef.eta(m)), {{l.x(m, n), -1.0}}});
            gp.constraints.push_back(std::move(c));
        }
    }

    // Cache budgets: sum_n T(m, n) / K_m <= 1, or K_m / condensed(sum_n T(m, n)) <= 1.
    for (Eigen::Index m = 0; m < l.tiers; ++m) {
        GpConstraint c;
        const double log_k = std::log(static_cast<double>(cfg.cache_sizes[static_cast<std::size_t>(m)]));
        if (prev.sides[static_cast<std::size_t>(m)] == BudgetSide::at_most) {
            for (Eigen::Index n = 0; n < l.files; ++n) c.terms.push_back({-log_k, {{l.t(m, n), 1.0}}});
        } else {
            GpTerm term{log_k, {}};
            for (Eigen::Index n = 0; n < l.files; ++n) {
                const double w = floored(weights.budget(m, n));
                term.log_coef += w * std::log(w);
                term.exponents.emplace_back(l.t(m, n), -w);
            }
            c.terms.push_back(std::move(term));
        }
        gp.constraints.push_back(std::move(c));
    }

    Eigen::VectorXd z0 = to_log(prev);
    z0 = z0.cwiseMax(gp.lower).cwiseMin(gp.upper);
    const GpSolution sol = solve_log_gp(gp, z0, options);

    GpStep step;
    step.kkt_residual = sol.kkt_residual;
    step.newton_steps = sol.newton_steps;
    step.ok = sol.ok;
    step.point = sol.ok ? from_log(sol.z, l, prev.sides) : prev;
    if (step.point.y < prev.y) step.point = prev;
    return step;
}

RobustResult run_robust(const UncertaintySet& set, const NetworkConfig& cfg, const CoefficientTable& coef,
                        const RobustStop& stop, const GpOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    };

    DualGpPoint point = initial_point(set, coef, cfg);
    RobustResult result;
    result.history.push_back({0, point.y, 0.0, elapsed_ms()});
    while (result.iterations < stop.max_iters) {
        const GpStep step = solve_gp(compute_weights(point, set), point, set, coef, cfg, options);
        if (!step.ok) {
            throw SolverError("GP solve failed at outer iteration " + std::to_string(result.iterations + 1));
        }
        const double change = std::abs(step.point.y - point.y);
        point = step.point;
        ++result.iterations;
        result.history.push_back({result.iterations, point.y, step.kkt_residual, elapsed_ms()});
        if (change <= stop.tol * std::max(1.0, point.y)) {
            result.converged = true;
            break;
        }
    }

    result.t = point.t;
    for (Eigen::Index m = 0; m < result.t.rows(); ++m) {
        const double k = static_cast<double>(cfg.cache_sizes[static_cast<std::size_t>(m)]);
        const double sum = result.t.row(m).sum();
        result.budget_gap = std::max(result.budget_gap, std::abs(sum / k - 1.0));
        result.t.row(m) *= k / sum;
    }
    if (result.t.maxCoeff() > 1.0) result.t = project(result.t, cfg.cache_sizes);
    result.y = point.y;
    result.lambda = point.lambda;
    result.mu = point.mu;
    result.nu = point.nu1 - point.nu2;
    result.sides = point.sides;
    result.worst_case = worst_case_stp(set, result.t, coef).value;
    return result;
}

}  // namespace cachenet
