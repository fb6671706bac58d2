#pragma once

#include <Eigen/Dense>

namespace infopool {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpOptions {
    /// Largest phase-one residual (sum of artificial variables) still called feasible.
    double feasibility_tolerance = 1e-9;
    double optimality_tolerance = 1e-11;
    double pivot_tolerance = 1e-11;
    int max_iterations = 200000;
};

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
    /// Phase-one optimum. Zero (up to roundoff) for feasible problems.
    double infeasibility = 0.0;
    /// Farkas certificate for infeasible problems: y' A <= 0 columnwise and y' b > 0.
    Eigen::VectorXd farkas;
    int iterations = 0;
};

/// Dense two-phase tableau simplex for
///   minimize c' x  subject to  A x = b,  x >= 0.
/// Dantzig pricing, falling back to Bland's rule after a run of degenerate
/// pivots. Sized for a few hundred rows and a few thousand columns.
LpSolution solve_standard_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& c, const LpOptions& options = {});

}  // namespace infopool
