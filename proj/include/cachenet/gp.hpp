#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace cachenet {

/// One term exp(log_coef + sum_j e_j z_j) of a posynomial in log variables z.
struct GpTerm {
    double log_coef = 0.0;
    std::vector<std::pair<int, double>> exponents;
};

/// log(sum of terms) <= 0, i.e. the posynomial is at most one.
struct GpConstraint {
    std::vector<GpTerm> terms;
};

/// Geometric program in log variables:
///
///   minimize  objective . z
///   s.t.      log sum_k exp(b_k + a_k . z) <= 0   for every constraint
///             lower <= z <= upper
///
/// Maximizing a monomial y is objective = -e_y.
struct GpProblem {
    int num_vars = 0;
    Eigen::VectorXd objective;
    std::vector<GpConstraint> constraints;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

struct GpOptions {
    /// Stop once (number of inequalities) / t falls below this.
    double gap_tol = 1e-8;
    double barrier_growth = 10.0;
    double initial_t = 1.0;
    int max_newton = 400;  // per barrier stage
    int max_stages = 60;
    /// Phase I stops once every constraint has at least this much log slack.
    double phase1_margin = 1e-3;
};

struct GpSolution {
    Eigen::VectorXd z;
    /// max |objective + sum_i lambda_i grad F_i + bound multipliers| with
    /// lambda_i = -1 / (t F_i) at the last centering point.
    double kkt_residual = 0.0;
    /// Largest constraint value at z (<= 0 when feasible).
    double max_violation = 0.0;
    int newton_steps = 0;
    bool ok = false;
};

/// Value of one log-sum-exp constraint at z.
double evaluate_constraint(const GpConstraint& c, const Eigen::VectorXd& z);

/// Barrier method with damped Newton centering. A phase I problem is solved
/// first when `z0` is not strictly feasible. Never throws on convergence
/// trouble: `ok` is false and `z` is the best strictly feasible point found
/// (or z0 if none).
GpSolution solve_log_gp(const GpProblem& problem, const Eigen::VectorXd& z0, const GpOptions& options = {});

}  // namespace cachenet
