#pragma once

#include <optional>
#include <span>

#include <Eigen/Dense>

#include "infopool/core.hpp"
#include "infopool/structures.hpp"

namespace infopool {

struct MleConfig {
    int grid = 60;
    double delta_min = 1e-4;
    double delta_max = 1.0 - 1e-4;
    double lambda_max = 1.0 - 1e-6;
    /// Stop when the simplex spans less than ftol in log-likelihood and xtol in parameters.
    double ftol = 1e-8;
    double xtol = 1e-7;
    int max_iterations = 500;
};

struct BoundaryFlags {
    bool delta_lower = false;
    bool delta_upper = false;
    bool lambda_lower = false;
    bool lambda_upper = false;

    bool any() const { return delta_lower || delta_upper || lambda_lower || lambda_upper; }
};

struct MleTrace {
    int grid_evaluations = 0;
    int iterations = 0;
    int evaluations = 0;
    double grid_best = 0.0;
    bool converged = false;
};

struct MleResult {
    double delta_hat = 0.0;
    /// Absent when a single forecast leaves the overlap unidentified.
    std::optional<double> lambda_hat;
    double log_likelihood = 0.0;
    BoundaryFlags at_boundary;
    MleTrace trace;

    CompoundSymmetry compound(int n) const { return {n, delta_hat, lambda_hat.value_or(0.0)}; }
};

/// Log-density of the observed forecasts under compound symmetry, including the
/// Jacobian of p -> x = sqrt(1 - delta) probit(p). Uses the closed-form inverse
/// and determinant of delta (1 - lambda) I + delta lambda J. Forecasts must be
/// censored; returns a non-finite value on the boundary of the parameter space.
double log_likelihood(const ForecastSet& f, const CompoundSymmetry& cs);

/// (d/d delta, d/d lambda) of log_likelihood.
Eigen::Vector2d log_likelihood_gradient(const ForecastSet& f, const CompoundSymmetry& cs);

/// Sum of per-event log-likelihoods with shared (delta, lambda).
double log_likelihood_pooled(std::span<const ForecastSet> events, double delta, double lambda);

/// Grid search over the feasible (delta, lambda) region followed by projected
/// Nelder-Mead. Deterministic and invariant to the order of the forecasts.
MleResult fit_mle(const ForecastSet& f, const MleConfig& config = {});

/// Same estimator with parameters shared across events.
MleResult fit_mle_pooled(std::span<const ForecastSet> events, const MleConfig& config = {});

}  // namespace infopool
