#include "cachenet/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace cachenet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Constraint restricted to the variables it touches.
struct Local {
    std::vector<int> vars;
    Eigen::MatrixXd a;  // terms x local vars
    Eigen::VectorXd b;
};

Local compile(const GpConstraint& c) {
    std::map<int, int> index;
    for (const auto& term : c.terms) {
        for (const auto& [j, e] : term.exponents) index.emplace(j, 0);
    }
    Local out;
    for (auto& [j, pos] : index) {
        pos = static_cast<int>(out.vars.size());
        out.vars.push_back(j);
    }
    out.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c.terms.size()), static_cast<Eigen::Index>(out.vars.size()));
    out.b.resize(static_cast<Eigen::Index>(c.terms.size()));
    for (std::size_t k = 0; k < c.terms.size(); ++k) {
        out.b(static_cast<Eigen::Index>(k)) = c.terms[k].log_coef;
        for (const auto& [j, e] : c.terms[k].exponents) out.a(static_cast<Eigen::Index>(k), index.at(j)) += e;
    }
    return out;
}

struct Eval {
    double value = 0.0;
    Eigen::VectorXd grad;  // local
    Eigen::MatrixXd hess;  // local
};

Eigen::VectorXd gather(const Local& c, const Eigen::VectorXd& z) {
    Eigen::VectorXd zl(static_cast<Eigen::Index>(c.vars.size()));
    for (std::size_t i = 0; i < c.vars.size(); ++i) zl(static_cast<Eigen::Index>(i)) = z(c.vars[i]);
    return zl;
}

double value_of(const Local& c, const Eigen::VectorXd& z) {
    const Eigen::VectorXd e = c.a * gather(c, z) + c.b;
    const double top = e.maxCoeff();
    return top + std::log((e.array() - top).exp().sum());
}

Eval evaluate(const Local& c, const Eigen::VectorXd& z, bool with_hessian) {
    const Eigen::VectorXd e = c.a * gather(c, z) + c.b;
    const double top = e.maxCoeff();
    Eigen::VectorXd w = (e.array() - top).exp();
    const double total = w.sum();
    w /= total;
    Eval out;
    out.value = top + std::log(total);
    out.grad = c.a.transpose() * w;
    if (with_hessian) {
        out.hess = c.a.transpose() * w.asDiagonal() * c.a - out.grad * out.grad.transpose();
    }
    return out;
}

class Barrier {
public:
    Barrier(const GpProblem& p) : p_(p) {
        for (const auto& c : p.constraints) locals_.push_back(compile(c));
    }

    std::size_t inequality_count() const {
        std::size_t m = locals_.size();
        for (Eigen::Index j = 0; j < p_.num_vars; ++j) {
            if (std::isfinite(p_.lower(j))) ++m;
            if (std::isfinite(p_.upper(j))) ++m;
        }
        return m;
    }

    double max_constraint(const Eigen::VectorXd& z) const {
        double worst = -kInf;
        for (const auto& c : locals_) worst = std::max(worst, value_of(c, z));
        return worst;
    }

    bool strictly_inside(const Eigen::VectorXd& z) const {
        for (Eigen::Index j = 0; j < p_.num_vars; ++j) {
            if (!(z(j) > p_.lower(j) && z(j) < p_.upper(j))) return false;
        }
        for (const auto& c : locals_) {
            if (!(value_of(c, z) < 0.0)) return false;
        }
        return true;
    }

    // Barrier value; +inf outside the domain.
    double value(const Eigen::VectorXd& z, double t) const {
        double phi = t * p_.objective.dot(z);
        for (Eigen::Index j = 0; j < p_.num_vars; ++j) {
            if (std::isfinite(p_.lower(j))) {
                const double s = z(j) - p_.lower(j);
                if (!(s > 0.0)) return kInf;
                phi -= std::log(s);
            }
            if (std::isfinite(p_.upper(j))) {
                const double s = p_.upper(j) - z(j);
                if (!(s > 0.0)) return kInf;
                phi -= std::log(s);
            }
        }
        for (const auto& c : locals_) {
            const double f = value_of(c, z);
            if (!(f < 0.0)) return kInf;
            phi -= std::log(-f);
        }
        return phi;
    }

    Eigen::VectorXd lagrangian_gradient(const Eigen::VectorXd& z, double t) const {
        Eigen::VectorXd g = p_.objective;
        for (const auto& c : locals_) {
            const Eval ev = evaluate(c, z, false);
            const double multiplier = -1.0 / (t * ev.value);
            for (std::size_t i = 0; i < c.vars.size(); ++i) {
                g(c.vars[i]) += multiplier * ev.grad(static_cast<Eigen::Index>(i));
            }
        }
        return g;
    }

    void derivatives(const Eigen::VectorXd& z, double t, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
        const auto n = p_.num_vars;
        grad = t * p_.objective;
        hess = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::isfinite(p_.lower(j))) {
                const double s = z(j) - p_.lower(j);
                grad(j) -= 1.0 / s;
                hess(j, j) += 1.0 / (s * s);
            }
            if (std::isfinite(p_.upper(j))) {
                const double s = p_.upper(j) - z(j);
                grad(j) += 1.0 / s;
                hess(j, j) += 1.0 / (s * s);
            }
        }
        for (const auto& c : locals_) {
            const Eval ev = evaluate(c, z, true);
            const double inv = -1.0 / ev.value;
            const auto k = static_cast<Eigen::Index>(c.vars.size());
            for (Eigen::Index i = 0; i < k; ++i) {
                const int gi = c.vars[static_cast<std::size_t>(i)];
                grad(gi) += inv * ev.grad(i);
                for (Eigen::Index j = 0; j < k; ++j) {
                    const int gj = c.vars[static_cast<std::size_t>(j)];
                    hess(gi, gj) += inv * ev.hess(i, j) + inv * inv * ev.grad(i) * ev.grad(j);
                }
            }
        }
    }

private:
    const GpProblem& p_;
    std::vector<Local> locals_;
};

struct Centering {
    bool ok = true;
    // Line search found no decrease at all.
    bool stalled = false;
    int steps = 0;
};

// Damped Newton on the barrier at fixed t. `stop` may end the loop early.
template <class Stop>
Centering center(const Barrier& barrier, Eigen::VectorXd& z, double t, int max_steps, Stop stop) {
    Centering out;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    double phi = barrier.value(z, t);
    for (int it = 0; it < max_steps; ++it) {
        barrier.derivatives(z, t, grad, hess);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        Eigen::VectorXd dz = ldlt.solve(-grad);
        if (ldlt.info() != Eigen::Success || !dz.allFinite() || grad.dot(dz) >= 0.0) {
            const double reg = 1e-10 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
            hess.diagonal().array() += reg;
            ldlt.compute(hess);
            dz = ldlt.solve(-grad);
            if (!dz.allFinite() || grad.dot(dz) >= 0.0) {
                out.ok = false;
                return out;
            }
        }
        const double decrement = -grad.dot(dz);
        // Centered, or as centered as the roundoff of phi can tell.
        if (decrement / 2.0 <= std::max(1e-12, 1e-14 * std::abs(phi))) return out;

        double step = 1.0;
        double next_phi = kInf;
        Eigen::VectorXd next;
        int halvings = 0;
        for (; halvings < 80; ++halvings) {
            next = z + step * dz;
            next_phi = barrier.value(next, t);
            if (next_phi <= phi - 0.25 * step * decrement) break;
            step *= 0.5;
        }
        if (halvings == 80) {
            out.stalled = true;
            return out;
        }
        z = next;
        phi = next_phi;
        ++out.steps;
        if (stop(z)) return out;
    }
    out.ok = false;
    return out;
}

// Stationarity of the Lagrangian with constraint multipliers -1 / (t F_i).
// Box multipliers are taken as whatever nonnegative value cancels the
// residual best, which is only allowed for coordinates sitting on the bound.
double kkt_residual(const Barrier& barrier, const GpProblem& p, const Eigen::VectorXd& z, double t) {
    constexpr double kOnBound = 1e-6;
    const Eigen::VectorXd r = barrier.lagrangian_gradient(z, t);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < p.num_vars; ++j) {
        double rj = r(j);
        if (rj > 0.0 && z(j) - p.lower(j) <= kOnBound) rj = 0.0;
        if (rj < 0.0 && p.upper(j) - z(j) <= kOnBound) rj = 0.0;
        worst = std::max(worst, std::abs(rj));
    }
    return worst;
}

// Runs the barrier method from a strictly feasible z. When centering runs out
// of floating-point precision at some t, the previous stage's point is kept:
// its residual is still meaningful while the stalled one is not.
template <class Stop>
GpSolution barrier_method(const GpProblem& p, Eigen::VectorXd z, const GpOptions& o, Stop stop) {
    const Barrier barrier(p);
    const double m = static_cast<double>(barrier.inequality_count());
    GpSolution sol;
    sol.ok = false;
    Eigen::VectorXd centered;
    double t = o.initial_t;
    for (int stage = 0; stage < o.max_stages; ++stage) {
        const Eigen::VectorXd before = z;
        const Centering c = center(barrier, z, t, o.max_newton, stop);
        sol.newton_steps += c.steps;
        if (!c.ok || c.stalled) {
            if (stage > 0) {
                z = before;
                sol.ok = true;
            }
            break;
        }
        sol.kkt_residual = kkt_residual(barrier, p, z, t);
        sol.ok = true;
        if (stop(z) || m / t <= o.gap_tol) break;
        t *= o.barrier_growth;
    }
    sol.z = std::move(z);
    sol.max_violation = barrier.max_constraint(sol.z);
    return sol;
}

}  // namespace

double evaluate_constraint(const GpConstraint& c, const Eigen::VectorXd& z) { return value_of(compile(c), z); }

GpSolution solve_log_gp(const GpProblem& problem, const Eigen::VectorXd& z0, const GpOptions& options) {
    const auto n = problem.num_vars;
    Eigen::VectorXd z = z0;
    // Pull the start strictly inside the box.
    for (Eigen::Index j = 0; j < n; ++j) {
        const double lo = problem.lower(j);
        const double hi = problem.upper(j);
        const double pad = std::isfinite(lo) && std::isfinite(hi) ? std::min(1e-6, 0.25 * (hi - lo)) : 1e-6;
        if (std::isfinite(lo)) z(j) = std::max(z(j), lo + pad);
        if (std::isfinite(hi)) z(j) = std::min(z(j), hi - pad);
    }

    const Barrier check(problem);
    if (!check.strictly_inside(z)) {
        // Phase I: minimize s subject to F_i(z) <= s.
        GpProblem phase1;
        phase1.num_vars = static_cast<int>(n) + 1;
        phase1.objective = Eigen::VectorXd::Zero(n + 1);
        phase1.objective(n) = 1.0;
        phase1.lower.resize(n + 1);
        phase1.upper.resize(n + 1);
        phase1.lower.head(n) = problem.lower;
        phase1.upper.head(n) = problem.upper;
        phase1.lower(n) = -10.0 * options.phase1_margin;
        phase1.upper(n) = kInf;
        for (const auto& c : problem.constraints) {
            GpConstraint shifted = c;
            for (auto& term : shifted.terms) term.exponents.emplace_back(static_cast<int>(n), -1.0);
            phase1.constraints.push_back(std::move(shifted));
        }
        Eigen::VectorXd w(n + 1);
        w.head(n) = z;
        w(n) = std::max(0.0, check.max_constraint(z)) + 1.0;
        const double margin = options.phase1_margin;
        auto done = [&](const Eigen::VectorXd& v) { return v(n) <= -margin; };
        GpOptions o1 = options;
        o1.gap_tol = 1e-9;
        const GpSolution s1 = barrier_method(phase1, w, o1, done);
        z = s1.z.head(n);
        if (!(check.max_constraint(z) < 0.0) || !check.strictly_inside(z)) {
            GpSolution fail;
            fail.z = z0;
            fail.ok = false;
            fail.newton_steps = s1.newton_steps;
            fail.max_violation = check.max_constraint(z0);
            return fail;
        }
    }
    GpSolution sol = barrier_method(problem, z, options, [](const Eigen::VectorXd&) { return false; });
    return sol;
}

}  // namespace cachenet
