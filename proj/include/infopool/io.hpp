#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "infopool/aggregators.hpp"
#include "infopool/core.hpp"
#include "infopool/errors.hpp"
#include "infopool/estimation.hpp"
#include "infopool/extremize.hpp"
#include "infopool/scoring.hpp"
#include "infopool/structures.hpp"

namespace infopool {

/// Malformed input file; the message carries the offending line number.
class ParseError : public DomainError {
public:
    using DomainError::DomainError;
};

struct ForecastRow {
    std::string event_id;
    std::string forecaster_id;
    double probability = 0.5;
    std::optional<int> outcome;

    bool operator==(const ForecastRow&) const = default;
};

using ForecastTable = std::vector<ForecastRow>;

/// CSV with header `event_id,forecaster_id,probability,outcome`; outcome may be blank.
ForecastTable read_forecast_table(std::istream& is);
void write_forecast_table(std::ostream& os, const ForecastTable& table);

/// Groups rows by event in order of first appearance. Throws DomainError when an
/// event's rows disagree on the outcome.
std::vector<ForecastSet> group_events(const ForecastTable& table);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// JSON schemas. Forecaster indices are zero-based; subsets are sorted index lists.
//   structure: {"delta": [...], "rho": [[...], ...], "delta_prime": x?}
//              or {"compound": {"n": N, "delta": d, "lambda": l}, "delta_prime": x?}
//   partition: {"n": N, "cells": [{"subset": [0, 2], "mass": m}, ...], "outside": u}
nlohmann::json to_json(const InfoStructure& s);
InfoStructure structure_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CellMassPartition& p);
CellMassPartition partition_from_json(const nlohmann::json& j);
bool is_partition_json(const nlohmann::json& j);

nlohmann::json to_json(const CoherenceVerdict& v);
nlohmann::json to_json(const NecessaryVerdict& v);
nlohmann::json to_json(const AggregateResult& r);
nlohmann::json to_json(const MleResult& r);
nlohmann::json to_json(const ScoreReport& r);
nlohmann::json to_json(const CauchyLaw& law);

}  // namespace infopool
