#include "commands.hpp"

#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "infopool/io.hpp"
#include "infopool/simulator.hpp"

namespace infopool::cli {

using nlohmann::json;

namespace {

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const InfeasibleError& e) {
        err << "error: " << e.what() << '\n';
        return kInfeasible;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

template <class F>
void parallel_for(std::size_t count, int workers, F&& body) {
    workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) body(i);
        });
    }
    for (auto& t : threads) t.join();
}

void require_output(const GlobalOptions& g) {
    if (g.output != "json" && g.output != "csv")
        throw DomainError("--output must be json or csv");
}

EventAggregate aggregate_one(const ForecastSet& raw, Method method, const AggregateOptions& options,
                             const std::optional<InfoStructure>& structure,
                             const GlobalOptions& global, std::string& warning) {
    const ForecastSet f = censored(raw, global.censor_eps);
    EventAggregate out;
    out.event_id = f.event_id;
    out.outcome = f.outcome;
    const int n = static_cast<int>(f.size());
    switch (method) {
        case Method::mean: out.result = pool_mean(f); break;
        case Method::log_odds: out.result = pool_log_odds(f); break;
        case Method::probit: out.result = pool_probit(f); break;
        case Method::revealed_general:
            if (!structure) throw DomainError("revealed_general needs --structure");
            out.result = revealed_general(f, *structure);
            break;
        case Method::revealed_cs: {
            if (options.delta || options.lambda) {
                if (!options.delta || !options.lambda)
                    throw DomainError("revealed_cs needs both --delta and --lambda, or neither");
                out.result = revealed_cs(f, CompoundSymmetry{n, *options.delta, *options.lambda});
                break;
            }
            out.fit = fit_mle(f, options.mle);
            std::string reason;
            if (out.fit->at_boundary.delta_lower || out.fit->at_boundary.delta_upper) {
                reason = "information estimate at its clamp";
            } else {
                try {
                    out.result = revealed_cs(f, out.fit->compound(n));
                } catch (const InfeasibleError& e) {
                    reason = e.what();
                }
            }
            if (!reason.empty()) {
                warning = "warning: event '" + f.event_id + "': " + reason +
                          "; falling back to the probit pool";
                out.result = pool_probit(f);
                out.fallback = true;
            }
            break;
        }
        case Method::oracular:
            throw DomainError("the oracular aggregator needs the pooled signal, not forecasts");
    }
    return out;
}

std::vector<ForecastSet> read_events(std::istream& in) {
    return group_events(read_forecast_table(in));
}

}  // namespace

std::vector<EventAggregate> aggregate_events(const std::vector<ForecastSet>& events,
                                             const AggregateOptions& options,
                                             const GlobalOptions& global, std::ostream& warnings) {
    const Method method = parse_method(options.method);
    std::optional<InfoStructure> structure;
    if (options.structure_json) structure = structure_from_json(json::parse(*options.structure_json));
    for (const auto& e : events) e.validate();

    std::vector<EventAggregate> out(events.size());
    std::vector<std::string> notes(events.size());
    std::vector<std::exception_ptr> errors(events.size());
    parallel_for(events.size(), global.workers, [&](std::size_t i) {
        try {
            out[i] = aggregate_one(events[i], method, options, structure, global, notes[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        if (!notes[i].empty()) warnings << notes[i] << '\n';
    }
    return out;
}

int cmd_aggregate(std::istream& in, std::ostream& out, std::ostream& err,
                  const AggregateOptions& options, const GlobalOptions& global) {
    return guarded(err, [&] {
        require_output(global);
        const auto results = aggregate_events(read_events(in), options, global, err);
        if (global.output == "csv") {
            out << "event_id,method,value,fallback,delta_hat,lambda_hat\n";
            for (const auto& r : results) {
                out << r.event_id << ',' << to_string(r.result.method) << ','
                    << format_double(r.result.value) << ',' << (r.fallback ? 1 : 0) << ',';
                if (r.fit) {
                    out << format_double(r.fit->delta_hat) << ',';
                    if (r.fit->lambda_hat) out << format_double(*r.fit->lambda_hat);
                } else {
                    out << ',';
                }
                out << '\n';
            }
        } else {
            json arr = json::array();
            for (const auto& r : results) {
                json j = to_json(r.result);
                j["event_id"] = r.event_id;
                j["fallback"] = r.fallback;
                if (r.outcome) j["outcome"] = *r.outcome;
                if (r.fit) j["fit"] = to_json(*r.fit);
                arr.push_back(std::move(j));
            }
            out << arr.dump(2) << '\n';
        }
        return static_cast<int>(kOk);
    });
}

int cmd_estimate(std::istream& in, std::ostream& out, std::ostream& err,
                 const EstimateOptions& options, const GlobalOptions& global) {
    return guarded(err, [&] {
        require_output(global);
        std::vector<ForecastSet> events = read_events(in);
        for (auto& e : events) {
            e.validate();
            e = censored(e, global.censor_eps);
        }
        std::vector<std::pair<std::string, MleResult>> fits;
        if (options.pooled) {
            fits.emplace_back("pooled", fit_mle_pooled(events, options.mle));
        } else {
            fits.resize(events.size());
            parallel_for(events.size(), global.workers, [&](std::size_t i) {
                fits[i] = {events[i].event_id, fit_mle(events[i], options.mle)};
            });
        }
        if (global.output == "csv") {
            out << "event_id,delta_hat,lambda_hat,log_likelihood,at_boundary\n";
            for (const auto& [id, fit] : fits) {
                out << id << ',' << format_double(fit.delta_hat) << ','
                    << (fit.lambda_hat ? format_double(*fit.lambda_hat) : std::string{}) << ','
                    << format_double(fit.log_likelihood) << ',' << (fit.at_boundary.any() ? 1 : 0)
                    << '\n';
            }
        } else {
            json arr = json::array();
            for (const auto& [id, fit] : fits) {
                json j = to_json(fit);
                j["event_id"] = id;
                arr.push_back(std::move(j));
            }
            out << arr.dump(2) << '\n';
        }
        return static_cast<int>(kOk);
    });
}

int cmd_simulate(std::ostream& out, std::ostream& err, const SimulateOptions& options,
                 const GlobalOptions& global) {
    return guarded(err, [&] {
        SimConfig config{CellMassPartition(1, {}, 1.0), global.trials, global.seed, global.workers};
        if (options.model_json) {
            const json j = json::parse(*options.model_json);
            if (is_partition_json(j)) {
                config.model = partition_from_json(j);
            } else {
                InfoStructure s = structure_from_json(j);
                if (!s.delta_prime()) throw DomainError("simulate: structure JSON needs delta_prime");
                config.model = s;
            }
        } else {
            const CompoundSymmetry cs{options.n, options.delta, options.lambda};
            if (!compound_feasible(cs)) throw InfeasibleError("simulate: compound parameters are not coherent");
            const double dp = options.delta_prime.value_or(compound_delta_prime_range(cs).first);
            config.model = cs.structure(dp);
        }
        const Simulator sim(config);
        if (options.emit == "draws") {
            write_draws_csv(out, sim);
            return static_cast<int>(kOk);
        }
        if (options.emit != "table") throw DomainError("simulate: --emit must be table or draws");
        ForecastTable table;
        SimDraw d;
        for (std::uint64_t t = 0; t < config.trials; ++t) {
            sim.draw(t, d);
            for (int i = 0; i < sim.n(); ++i)
                table.push_back({"sim" + std::to_string(t), "f" + std::to_string(i), d.forecasts[i], d.outcome});
        }
        write_forecast_table(out, table);
        return static_cast<int>(kOk);
    });
}

int cmd_sweep(std::ostream& out, std::ostream& err, const SweepOptions& options) {
    return guarded(err, [&] {
        if (options.delta_steps < 1 || options.lambda_steps < 1)
            throw DomainError("sweep: grid steps must be >= 1");
        const auto rows = sweep_compound(options.n, midpoint_grid(options.delta_steps),
                                         midpoint_grid(options.lambda_steps));
        out << "N,delta,lambda,delta_prime,x0,gamma,p_extremize,feasible,boundary\n";
        for (const auto& r : rows) {
            out << r.n << ',' << format_double(r.delta) << ',' << format_double(r.lambda) << ',';
            if (r.feasible && r.boundary) {
                // x0 and gamma diverge at delta' = 1; only the limit of p_extremize exists.
                out << format_double(r.delta_prime) << ",,," << format_double(r.p_extremize);
            } else if (r.feasible) {
                out << format_double(r.delta_prime) << ',' << format_double(r.law.x0) << ','
                    << format_double(r.law.gamma_scale) << ',' << format_double(r.p_extremize);
            } else {
                out << ",,,";
            }
            out << ',' << (r.feasible ? 1 : 0) << ',' << (r.boundary ? 1 : 0) << '\n';
        }
        return static_cast<int>(kOk);
    });
}

int cmd_coherence(const std::string& structure_json, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const json input = json::parse(structure_json);
        const InfoStructure s = is_partition_json(input) ? partition_from_json(input).structure()
                                                         : structure_from_json(input);
        json report;
        report["n"] = s.n();
        const NecessaryVerdict relaxed = check_coherence_relaxed(s);
        report["relaxed"] = to_json(relaxed);
        Verdict verdict = relaxed.verdict;
        if (s.n() <= CoherenceOptions{}.max_n) {
            const CoherenceVerdict exact = check_coherence_exact(s);
            report["exact"] = to_json(exact);
            verdict = exact.verdict;
            if (exact.verdict != Verdict::incoherent) {
                const auto [lo, hi] = delta_prime_range(s);
                report["delta_prime_range"] = {lo, hi};
            }
        } else {
            report["exact"] = nullptr;
        }
        out << report.dump(2) << '\n';
        return verdict == Verdict::incoherent ? static_cast<int>(kInfeasible) : static_cast<int>(kOk);
    });
}

int cmd_score(std::istream& in, std::ostream& out, std::ostream& err, const ScoreOptions& options,
              const GlobalOptions& global) {
    return guarded(err, [&] {
        require_output(global);
        const std::vector<ForecastSet> events = read_events(in);
        for (const auto& e : events)
            if (!e.outcome) throw DomainError("score: event '" + e.event_id + "' has no outcome");
        std::vector<std::pair<std::string, ScoreReport>> rows;
        for (const auto& method : options.methods) {
            AggregateOptions agg = options.aggregate;
            agg.method = method;
            const auto results = aggregate_events(events, agg, global, err);
            std::vector<ScoredForecast> scored;
            scored.reserve(results.size());
            for (const auto& r : results) scored.push_back({r.result.value, *r.outcome});
            rows.emplace_back(method, score_collection(scored, global.bins));
        }
        if (global.output == "csv") {
            write_score_table(out, rows);
        } else {
            json j = json::object();
            for (const auto& [method, report] : rows) j[method] = to_json(report);
            out << j.dump(2) << '\n';
        }
        return static_cast<int>(kOk);
    });
}

}  // namespace infopool::cli
