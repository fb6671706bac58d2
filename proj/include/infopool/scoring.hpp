#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace infopool {

struct ScoredForecast {
    double forecast = 0.5;
    int outcome = 0;
};

struct ScoreBin {
    double lower = 0.0;
    double upper = 0.0;
    double mean_forecast = 0.0;  // f_j
    int count = 0;               // n_j
    double frequency = 0.0;      // o_j
};

/// Brier score with its reliability / resolution / uncertainty decomposition.
/// bs is computed on the binned forecasts (each replaced by its bin mean), so
/// bs = rel - res + unc holds to rounding; raw_bs is the plain mean Brier score.
struct ScoreReport {
    double bs = 0.0;
    double raw_bs = 0.0;
    double rel = 0.0;
    double res = 0.0;
    double unc = 0.0;
    double o_bar = 0.0;
    int k = 0;
    std::vector<ScoreBin> bins;  // only non-empty bins
};

double brier(double forecast, int outcome);

/// J equal-width bins on [0, 1]; the last bin is closed on the right.
ScoreReport score_collection(std::span<const ScoredForecast> scored, int bins = 10);

/// One row per aggregator: method,bs,rel,res,unc,raw_bs,k.
void write_score_table(std::ostream& os,
                       const std::vector<std::pair<std::string, ScoreReport>>& rows);

}  // namespace infopool
