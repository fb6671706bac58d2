#pragma once

#include <map>
#include <optional>
#include <string>

#include "infopool/core.hpp"
#include "infopool/structures.hpp"

namespace infopool {

enum class Method { mean, log_odds, probit, revealed_general, revealed_cs, oracular };

std::string to_string(Method m);
/// Parses the names produced by to_string. Throws DomainError on anything else.
Method parse_method(const std::string& name);

struct AggregateResult {
    double value = 0.5;
    Method method = Method::mean;
    /// Intermediate quantities. For the Gaussian aggregators value equals
    /// normal_cdf(numerator / denominator) exactly.
    std::map<std::string, double> diagnostics;
};

AggregateResult pool_mean(const ForecastSet& f);
/// Inputs must already be censored away from 0 and 1.
AggregateResult pool_log_odds(const ForecastSet& f);
AggregateResult pool_probit(const ForecastSet& f);

/// Probability of the event given the reported forecasts under a general
/// Gaussian information structure:
///   Phi( Sigma12 Sigma22^-1 x / sqrt(1 - Sigma12 Sigma22^-1 Sigma21) ).
/// Forecasters whose information sets coincide are merged before inversion.
/// Throws InfeasibleError when Sigma22 is singular or the variance term reaches 1.
AggregateResult revealed_general(const ForecastSet& f, const InfoStructure& s);

/// Closed form of revealed_general for compound symmetry.
AggregateResult revealed_cs(const ForecastSet& f, const CompoundSymmetry& cs);

/// Forecast of an oracle that sees the union of all information sets:
/// Phi(X_union / sqrt(1 - delta')). For delta' = 1 the outcome is known and the
/// result is exactly 0 or 1.
AggregateResult oracular(double union_signal, double delta_prime);

/// Same, summing the realized signals of every cell of the partition.
AggregateResult oracular(const CellMassPartition& partition,
                         const std::map<Subset, double>& cell_signals);

}  // namespace infopool
