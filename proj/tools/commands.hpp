#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "infopool/aggregators.hpp"
#include "infopool/estimation.hpp"

namespace infopool::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kInfeasible = 2 };

struct GlobalOptions {
    double censor_eps = kDefaultCensorEps;
    int bins = 10;
    std::uint64_t seed = 1;
    std::uint64_t trials = 10000;
    int workers = 1;
    std::string output = "json";  // json | csv
};

struct AggregateOptions {
    std::string method = "probit";
    std::optional<double> delta;
    std::optional<double> lambda;
    /// JSON text of an information structure, for revealed_general.
    std::optional<std::string> structure_json;
    MleConfig mle;
};

struct EventAggregate {
    std::string event_id;
    std::optional<int> outcome;
    AggregateResult result;
    std::optional<MleResult> fit;
    bool fallback = false;
};

/// Aggregates each event independently. With revealed_cs and no (delta, lambda)
/// the parameters are fitted per event; fits that cannot be used fall back to
/// the probit pool with a warning on `warnings`. Output order is input order.
std::vector<EventAggregate> aggregate_events(const std::vector<ForecastSet>& events,
                                             const AggregateOptions& options,
                                             const GlobalOptions& global, std::ostream& warnings);

int cmd_aggregate(std::istream& in, std::ostream& out, std::ostream& err,
                  const AggregateOptions& options, const GlobalOptions& global);

struct EstimateOptions {
    bool pooled = false;
    MleConfig mle;
};
int cmd_estimate(std::istream& in, std::ostream& out, std::ostream& err,
                 const EstimateOptions& options, const GlobalOptions& global);

struct SimulateOptions {
    /// Partition or structure JSON; alternatively the compound parameters below.
    std::optional<std::string> model_json;
    int n = 2;
    double delta = 0.3;
    double lambda = 0.5;
    std::optional<double> delta_prime;
    std::string emit = "table";  // table | draws
};
int cmd_simulate(std::ostream& out, std::ostream& err, const SimulateOptions& options,
                 const GlobalOptions& global);

struct SweepOptions {
    int n = 2;
    int delta_steps = 20;
    int lambda_steps = 20;
};
int cmd_sweep(std::ostream& out, std::ostream& err, const SweepOptions& options);

int cmd_coherence(const std::string& structure_json, std::ostream& out, std::ostream& err);

struct ScoreOptions {
    std::vector<std::string> methods{"mean", "log_odds", "probit", "revealed_cs"};
    AggregateOptions aggregate;
};
int cmd_score(std::istream& in, std::ostream& out, std::ostream& err, const ScoreOptions& options,
              const GlobalOptions& global);

}  // namespace infopool::cli
