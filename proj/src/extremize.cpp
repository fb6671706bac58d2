#include "infopool/extremize.hpp"

#include <cmath>
#include <numbers>

#include "infopool/core.hpp"
#include "infopool/errors.hpp"

namespace infopool {

namespace {

struct RatioMoments {
    double var_u;
    double cov;
    double var_v;
};

// U = X_union / sqrt(1 - delta'), V = (1/N) sum_i X_i / sqrt(1 - delta_i), with
// Cov(X_union, X_i) = delta_i and Cov(X_i, X_j) = rho_ij.
RatioMoments ratio_moments(const InfoStructure& s, double one_minus_dp) {
    const int n = s.n();
    const Eigen::VectorXd scale = (1.0 - s.deltas().array()).sqrt();
    RatioMoments m{};
    m.var_u = *s.delta_prime() / one_minus_dp;
    const double sq = std::sqrt(one_minus_dp);
    for (int i = 0; i < n; ++i) {
        m.cov += s.delta(i) / (sq * scale[i]);
        for (int j = 0; j < n; ++j) m.var_v += s.rho(i, j) / (scale[i] * scale[j]);
    }
    m.cov /= n;
    m.var_v /= static_cast<double>(n) * n;
    return m;
}

void require_union(const InfoStructure& s) {
    const auto& dp = s.delta_prime();
    if (!dp) throw DomainError("ratio_law: delta' is required");
    const double max_delta = s.deltas().maxCoeff();
    if (*dp < max_delta - 1e-12 || *dp > std::min(1.0, s.deltas().sum()) + 1e-12)
        throw DomainError("ratio_law: delta' is inconsistent with the information sets");
    if (!(max_delta < 1.0)) throw DomainError("ratio_law: every delta_i must be < 1");
}

}  // namespace

double CauchyLaw::quantile(double u) const {
    return x0 + gamma_scale * std::tan(std::numbers::pi * (u - 0.5));
}

double alpha_ratio(double q, double p) {
    const double denom = probit(p);
    if (denom == 0.0) throw DomainError("alpha_ratio: undefined for p = 1/2");
    return probit(q) / denom;
}

double cs_ratio(const CompoundSymmetry& cs) {
    if (!compound_feasible(cs)) throw InfeasibleError("cs_ratio: parameters are not coherent");
    const double g = cs.gamma();
    if (!(cs.delta * g < 1.0)) throw InfeasibleError("cs_ratio: delta * gamma >= 1");
    return g * std::sqrt(1.0 - cs.delta) / std::sqrt(1.0 - cs.delta * g);
}

CauchyLaw ratio_law(const InfoStructure& s) {
    require_union(s);
    const double one_minus_dp = 1.0 - *s.delta_prime();
    if (!(one_minus_dp > 0.0)) throw InfeasibleError("ratio_law: delta' = 1, the law diverges");
    const RatioMoments m = ratio_moments(s, one_minus_dp);
    if (!(m.var_v > 0.0)) throw DomainError("ratio_law: forecasters carry no information");
    CauchyLaw law;
    law.x0 = m.cov / m.var_v;
    // Perfectly correlated scores make alpha deterministic; clear the roundoff.
    const double disc = m.var_u * m.var_v - m.cov * m.cov;
    law.gamma_scale = disc > 1e-12 * m.var_u * m.var_v ? std::sqrt(disc) / m.var_v : 0.0;
    return law;
}

double prob_extremize(const CauchyLaw& law) {
    if (law.degenerate()) return law.x0 > 1.0 ? 1.0 : 0.0;
    return 0.5 + std::atan((law.x0 - 1.0) / law.gamma_scale) / std::numbers::pi;
}

ExtremizationReport extremization_report(double oracle_forecast, double probit_pool,
                                         const InfoStructure& s) {
    ExtremizationReport r;
    r.alpha = alpha_ratio(oracle_forecast, probit_pool);
    r.law = ratio_law(s);
    r.prob_alpha_gt_1 = prob_extremize(r.law);
    return r;
}

std::vector<double> midpoint_grid(int count) {
    if (count < 1) throw DomainError("midpoint_grid: count must be positive");
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = (i + 0.5) / count;
    return g;
}

std::vector<SweepRow> sweep_compound(int n, const std::vector<double>& deltas,
                                     const std::vector<double>& lambdas) {
    if (n < 1) throw DomainError("sweep_compound: n must be >= 1");
    std::vector<SweepRow> rows;
    rows.reserve(deltas.size() * lambdas.size());
    for (double delta : deltas) {
        for (double lambda : lambdas) {
            SweepRow row;
            row.n = n;
            row.delta = delta;
            row.lambda = lambda;
            const CompoundSymmetry cs{n, delta, lambda};
            row.feasible = delta > 0.0 && delta < 1.0 && compound_feasible(cs);
            if (!row.feasible) {
                rows.push_back(row);
                continue;
            }
            row.delta_prime = compound_max_delta_prime(cs);
            if (row.delta_prime >= 1.0) {
                // delta' -> 1: location and scale diverge while their ratio stays
                // finite, so P(alpha > 1) tends to 1/2 + asin(corr(U, V)) / pi.
                row.boundary = true;
                row.law.x0 = INFINITY;
                row.law.gamma_scale = INFINITY;
                const InfoStructure s = cs.structure(1.0);
                const RatioMoments m = ratio_moments(s, 1.0);
                // With one_minus_dp = 1 the moments are those of X_union itself.
                const double corr = m.cov / std::sqrt(m.var_u * m.var_v);
                row.p_extremize = 0.5 + std::asin(std::min(1.0, corr)) / std::numbers::pi;
            } else {
                row.law = ratio_law(cs.structure(row.delta_prime));
                row.p_extremize = prob_extremize(row.law);
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace infopool
