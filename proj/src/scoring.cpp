#include "infopool/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "infopool/errors.hpp"

namespace infopool {

double brier(double forecast, int outcome) {
    if (!(forecast >= 0.0 && forecast <= 1.0)) throw DomainError("brier: forecast outside [0, 1]");
    if (outcome != 0 && outcome != 1) throw DomainError("brier: outcome must be 0 or 1");
    const double d = forecast - outcome;
    return d * d;
}

ScoreReport score_collection(std::span<const ScoredForecast> scored, int bins) {
    if (scored.empty()) throw DomainError("score_collection: empty collection");
    if (bins < 1) throw DomainError("score_collection: need at least one bin");

    struct Acc {
        double forecast_sum = 0.0;
        double outcome_sum = 0.0;
        int count = 0;
    };
    std::vector<Acc> acc(bins);
    std::vector<int> bin_of(scored.size());
    ScoreReport r;
    r.k = static_cast<int>(scored.size());
    double raw = 0.0;
    double outcomes = 0.0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        const auto& s = scored[i];
        if (!(s.forecast >= 0.0 && s.forecast <= 1.0))
            throw DomainError("score_collection: forecast outside [0, 1]");
        if (s.outcome != 0 && s.outcome != 1)
            throw DomainError("score_collection: outcome must be 0 or 1");
        const int j = std::min(bins - 1, static_cast<int>(std::floor(s.forecast * bins)));
        bin_of[i] = j;
        acc[j].forecast_sum += s.forecast;
        acc[j].outcome_sum += s.outcome;
        ++acc[j].count;
        raw += brier(s.forecast, s.outcome);
        outcomes += s.outcome;
    }
    const double k = r.k;
    r.raw_bs = raw / k;
    r.o_bar = outcomes / k;
    r.unc = r.o_bar * (1.0 - r.o_bar);

    std::vector<double> representative(bins, 0.0);
    for (int j = 0; j < bins; ++j) {
        if (acc[j].count == 0) continue;
        ScoreBin b;
        b.lower = static_cast<double>(j) / bins;
        b.upper = static_cast<double>(j + 1) / bins;
        b.count = acc[j].count;
        b.mean_forecast = acc[j].forecast_sum / b.count;
        b.frequency = acc[j].outcome_sum / b.count;
        representative[j] = b.mean_forecast;
        r.rel += b.count * (b.mean_forecast - b.frequency) * (b.mean_forecast - b.frequency);
        r.res += b.count * (b.frequency - r.o_bar) * (b.frequency - r.o_bar);
        r.bins.push_back(b);
    }
    r.rel /= k;
    r.res /= k;

    double binned = 0.0;
    for (std::size_t i = 0; i < scored.size(); ++i)
        binned += brier(representative[bin_of[i]], scored[i].outcome);
    r.bs = binned / k;
    return r;
}

void write_score_table(std::ostream& os,
                       const std::vector<std::pair<std::string, ScoreReport>>& rows) {
    const auto flags = os.flags();
    const auto precision = os.precision();
    os << "method,bs,rel,res,unc,raw_bs,k\n" << std::setprecision(10);
    for (const auto& [method, r] : rows)
        os << method << ',' << r.bs << ',' << r.rel << ',' << r.res << ',' << r.unc << ','
           << r.raw_bs << ',' << r.k << '\n';
    os.flags(flags);
    os.precision(precision);
}

}  // namespace infopool
