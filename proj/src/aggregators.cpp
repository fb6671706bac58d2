#include "infopool/aggregators.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "infopool/errors.hpp"
#include "infopool/extremize.hpp"

namespace infopool {

namespace {

constexpr double kSameSetTolerance = 1e-12;

void require_nonempty(const ForecastSet& f) { f.validate(); }

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void add_extremization(AggregateResult& r, double probit_score, const ForecastSet& f) {
    double probit_sum = 0.0;
    for (double p : f.forecasts) probit_sum += probit(p);
    const double pooled = probit_sum / static_cast<double>(f.size());
    r.diagnostics["probit_pool_score"] = pooled;
    if (pooled != 0.0) r.diagnostics["alpha_vs_probit"] = probit_score / pooled;
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::mean: return "mean";
        case Method::log_odds: return "log_odds";
        case Method::probit: return "probit";
        case Method::revealed_general: return "revealed_general";
        case Method::revealed_cs: return "revealed_cs";
        case Method::oracular: return "oracular";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    for (Method m : {Method::mean, Method::log_odds, Method::probit, Method::revealed_general,
                     Method::revealed_cs, Method::oracular})
        if (to_string(m) == name) return m;
    if (name == "log") return Method::log_odds;
    throw DomainError("unknown aggregation method '" + name + "'");
}

AggregateResult pool_mean(const ForecastSet& f) {
    require_nonempty(f);
    AggregateResult r;
    r.method = Method::mean;
    r.value = mean_of(f.forecasts);
    return r;
}

AggregateResult pool_log_odds(const ForecastSet& f) {
    require_nonempty(f);
    std::vector<double> scores;
    scores.reserve(f.size());
    for (double p : f.forecasts) scores.push_back(logit(p));
    AggregateResult r;
    r.method = Method::log_odds;
    r.diagnostics["mean_log_odds"] = mean_of(scores);
    r.value = inv_logit(r.diagnostics["mean_log_odds"]);
    return r;
}

AggregateResult pool_probit(const ForecastSet& f) {
    require_nonempty(f);
    std::vector<double> scores;
    scores.reserve(f.size());
    for (double p : f.forecasts) scores.push_back(probit(p));
    AggregateResult r;
    r.method = Method::probit;
    r.diagnostics["numerator"] = mean_of(scores);
    r.diagnostics["denominator"] = 1.0;
    r.value = normal_cdf(r.diagnostics["numerator"]);
    return r;
}

AggregateResult revealed_general(const ForecastSet& f, const InfoStructure& s) {
    require_nonempty(f);
    const int n = s.n();
    if (static_cast<int>(f.size()) != n)
        throw DomainError("revealed_general: structure size does not match the forecast count");
    const Eigen::VectorXd delta = s.deltas();
    for (int i = 0; i < n; ++i)
        if (!(delta[i] < 1.0))
            throw InfeasibleError("revealed_general: a forecaster with delta = 1 knows the outcome");
    const std::vector<double> x = signal_vector(f.forecasts, {delta.data(), static_cast<std::size_t>(delta.size())});

    // Forecasters with identical information sets (rho_ij = delta_i = delta_j)
    // carry one signal between them; keep one representative per group.
    std::vector<int> group(n, -1);
    std::vector<int> reps;
    std::vector<double> reduced_x;
    for (int i = 0; i < n; ++i) {
        if (group[i] >= 0) continue;
        group[i] = static_cast<int>(reps.size());
        double sum = x[i];
        int count = 1;
        for (int j = i + 1; j < n; ++j) {
            if (group[j] < 0 && std::fabs(s.rho(i, j) - delta[i]) <= kSameSetTolerance &&
                std::fabs(s.rho(i, j) - delta[j]) <= kSameSetTolerance) {
                group[j] = group[i];
                sum += x[j];
                ++count;
            }
        }
        reps.push_back(i);
        reduced_x.push_back(sum / count);
    }

    const auto m = static_cast<Eigen::Index>(reps.size());
    Eigen::MatrixXd sigma(m, m);
    Eigen::VectorXd sigma12(m);
    Eigen::VectorXd xv(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        sigma12[a] = delta[reps[a]];
        xv[a] = reduced_x[a];
        for (Eigen::Index b = 0; b < m; ++b) sigma(a, b) = s.rho(reps[a], reps[b]);
    }

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sigma);
    if (!(lu.rcond() > 1e-12))
        throw InfeasibleError("revealed_general: information structure is singular");
    const Eigen::VectorXd weights = lu.solve(sigma12);  // Sigma22^-1 Sigma21
    const double explained = sigma12.dot(weights);
    if (!(explained < 1.0))
        throw InfeasibleError(
            "revealed_general: the forecasts would determine the outcome (variance term >= 1)");

    AggregateResult r;
    r.method = Method::revealed_general;
    r.diagnostics["numerator"] = weights.dot(xv);
    r.diagnostics["denominator"] = std::sqrt(1.0 - explained);
    r.diagnostics["explained_variance"] = explained;
    r.diagnostics["distinct_sets"] = static_cast<double>(m);
    r.value = normal_cdf(r.diagnostics["numerator"] / r.diagnostics["denominator"]);
    add_extremization(r, r.diagnostics["numerator"] / r.diagnostics["denominator"], f);
    return r;
}

AggregateResult revealed_cs(const ForecastSet& f, const CompoundSymmetry& cs) {
    require_nonempty(f);
    if (!compound_feasible(cs))
        throw InfeasibleError("revealed_cs: compound-symmetric parameters are not coherent");
    if (cs.n != static_cast<int>(f.size()))
        throw DomainError("revealed_cs: n does not match the forecast count");
    const double shrink = (cs.n - 1) * cs.lambda + 1.0;
    const double explained = cs.n * cs.delta / shrink;
    if (!(explained < 1.0))
        throw InfeasibleError("revealed_cs: degenerate denominator (n delta / ((n-1) lambda + 1) >= 1)");

    const double scale = std::sqrt(1.0 - cs.delta);
    double sum = 0.0;
    for (double p : f.forecasts) sum += probit(p) * scale;

    AggregateResult r;
    r.method = Method::revealed_cs;
    r.diagnostics["numerator"] = sum / shrink;
    r.diagnostics["denominator"] = std::sqrt(1.0 - explained);
    r.diagnostics["gamma_cs"] = cs.n / shrink;
    r.diagnostics["cs_ratio"] = cs_ratio(cs);
    r.value = normal_cdf(r.diagnostics["numerator"] / r.diagnostics["denominator"]);
    add_extremization(r, r.diagnostics["numerator"] / r.diagnostics["denominator"], f);
    return r;
}

AggregateResult oracular(double union_signal, double delta_prime) {
    if (!(delta_prime >= 0.0 && delta_prime <= 1.0))
        throw DomainError("oracular: delta' must lie in [0, 1]");
    AggregateResult r;
    r.method = Method::oracular;
    r.diagnostics["union_signal"] = union_signal;
    r.diagnostics["delta_prime"] = delta_prime;
    if (delta_prime >= 1.0) {
        r.value = union_signal > 0.0 ? 1.0 : 0.0;
        return r;
    }
    r.diagnostics["numerator"] = union_signal;
    r.diagnostics["denominator"] = std::sqrt(1.0 - delta_prime);
    r.value = normal_cdf(union_signal / r.diagnostics["denominator"]);
    return r;
}

AggregateResult oracular(const CellMassPartition& partition,
                         const std::map<Subset, double>& cell_signals) {
    double sum = 0.0;
    for (const auto& [subset, mass] : partition.cells()) {
        if (mass <= 0.0) continue;
        const auto it = cell_signals.find(subset);
        if (it == cell_signals.end())
            throw DomainError("oracular: missing signal for a partition cell");
        sum += it->second;
    }
    return oracular(sum, std::min(1.0, partition.union_mass()));
}

}  // namespace infopool
