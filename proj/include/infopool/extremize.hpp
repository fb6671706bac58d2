#pragma once

#include <optional>
#include <vector>

#include "infopool/structures.hpp"

namespace infopool {

/// Cauchy(x0, gamma_scale). A zero scale stands for the point mass at x0.
struct CauchyLaw {
    double x0 = 1.0;
    double gamma_scale = 0.0;

    bool degenerate() const { return gamma_scale == 0.0; }
    double quantile(double u) const;
};

struct ExtremizationReport {
    double alpha = 1.0;
    CauchyLaw law;
    double prob_alpha_gt_1 = 0.5;
};

/// probit(q) / probit(p). Throws DomainError for p = 1/2.
double alpha_ratio(double q, double p);

/// Deterministic ratio between the compound-symmetric revealed aggregate and
/// the probit pool: g sqrt(1 - delta) / sqrt(1 - delta g), g = N / ((N-1) lambda + 1).
double cs_ratio(const CompoundSymmetry& cs);

/// Law of alpha = probit(oracle) / mean_i probit(p_i), a ratio of two centered,
/// jointly Gaussian scores. Needs delta' with max delta_i <= delta' < 1.
CauchyLaw ratio_law(const InfoStructure& s);

/// P(alpha > 1). Step function when the law is degenerate.
double prob_extremize(const CauchyLaw& law);

ExtremizationReport extremization_report(double oracle_forecast, double probit_pool,
                                         const InfoStructure& s);

struct SweepRow {
    int n = 2;
    double delta = 0.0;
    double lambda = 0.0;
    bool feasible = false;
    /// Union mass used for the law; the largest attainable one for n > 2.
    double delta_prime = 0.0;
    CauchyLaw law;
    double p_extremize = 0.0;
    /// True when delta' = 1: x0 and gamma diverge and p_extremize is the limit.
    bool boundary = false;
};

/// Evaluates the law over every (delta, lambda) pair in the grid. Infeasible
/// cells are emitted with feasible = false.
std::vector<SweepRow> sweep_compound(int n, const std::vector<double>& deltas,
                                     const std::vector<double>& lambdas);

/// Midpoint grid: count points (i + 1/2) / count, i = 0..count-1.
std::vector<double> midpoint_grid(int count);

}  // namespace infopool
