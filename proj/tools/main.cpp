// infopool: aggregate, estimate, simulate, sweep, check coherence and score
// probability forecasts under the Gaussian partial-information model.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw CLI::ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// "-" reads standard input.
int with_input(const std::string& path, const std::function<int(std::istream&)>& body) {
    if (path == "-") return body(std::cin);
    std::ifstream f(path);
    if (!f) {
        std::cerr << "error: cannot open " << path << '\n';
        return infopool::cli::kInputError;
    }
    return body(f);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace infopool::cli;

    CLI::App app{"Gaussian partial-information aggregation of probability forecasts"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions global;
    app.add_option("--censor-eps", global.censor_eps, "Censor forecasts to [eps, 1-eps]")
        ->check(CLI::Range(1e-12, 0.499));
    app.add_option("--bins", global.bins, "Equal-width bins for the Brier decomposition")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", global.seed, "Simulation seed");
    app.add_option("--trials", global.trials, "Simulated draws")->check(CLI::PositiveNumber);
    app.add_option("--workers", global.workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--output", global.output, "Output format")->check(CLI::IsMember({"json", "csv"}));

    auto add_mle = [](CLI::App* sub, infopool::MleConfig& mle) {
        sub->add_option("--grid", mle.grid, "MLE grid resolution per axis");
        sub->add_option("--delta-min", mle.delta_min, "Lower clamp on delta");
        sub->add_option("--delta-max", mle.delta_max, "Upper clamp on delta");
        sub->add_option("--lambda-max", mle.lambda_max, "Upper clamp on lambda");
        sub->add_option("--ftol", mle.ftol, "Refinement tolerance in log-likelihood");
        sub->add_option("--max-iter", mle.max_iterations, "Refinement iteration cap");
    };

    std::string input = "-";
    std::string structure_path;

    AggregateOptions agg;
    auto* aggregate = app.add_subcommand("aggregate", "Aggregate each event's forecasts");
    aggregate->add_option("-i,--input", input, "Forecast CSV (- for stdin)");
    aggregate->add_option("-m,--method", agg.method,
                          "mean | log_odds | probit | revealed_cs | revealed_general");
    aggregate->add_option("--delta", agg.delta, "Compound-symmetric information mass");
    aggregate->add_option("--lambda", agg.lambda, "Compound-symmetric overlap proportion");
    aggregate->add_option("--structure", structure_path, "Structure JSON for revealed_general");
    add_mle(aggregate, agg.mle);

    EstimateOptions est;
    auto* estimate = app.add_subcommand("estimate", "Maximum-likelihood (delta, lambda) per event");
    estimate->add_option("-i,--input", input, "Forecast CSV (- for stdin)");
    estimate->add_flag("--pooled", est.pooled, "Share parameters across all events");
    add_mle(estimate, est.mle);

    SimulateOptions sim;
    std::string model_path;
    auto* simulate = app.add_subcommand("simulate", "Draw events from the information-pool model");
    simulate->add_option("--model", model_path, "Partition or structure JSON");
    simulate->add_option("--n", sim.n, "Forecasters (compound model)");
    simulate->add_option("--delta", sim.delta, "Information mass (compound model)");
    simulate->add_option("--lambda", sim.lambda, "Overlap proportion (compound model)");
    simulate->add_option("--delta-prime", sim.delta_prime, "Union mass (compound model)");
    simulate->add_option("--emit", sim.emit, "table | draws")->check(CLI::IsMember({"table", "draws"}));

    SweepOptions sw;
    auto* sweep = app.add_subcommand("sweep", "Extremization law over a (delta, lambda) grid");
    sweep->add_option("--n", sw.n, "Forecasters");
    sweep->add_option("--delta-steps", sw.delta_steps, "Grid points in delta");
    sweep->add_option("--lambda-steps", sw.lambda_steps, "Grid points in lambda");

    auto* coherence = app.add_subcommand("coherence", "Check an information structure");
    coherence->add_option("--structure", structure_path, "Structure or partition JSON")->required();

    ScoreOptions score;
    auto* scoring = app.add_subcommand("score", "Brier score table per aggregator");
    scoring->add_option("-i,--input", input, "Forecast CSV with outcomes (- for stdin)");
    scoring->add_option("--methods", score.methods, "Aggregators to score")->delimiter(',');
    scoring->add_option("--delta", score.aggregate.delta, "Fixed delta for revealed_cs");
    scoring->add_option("--lambda", score.aggregate.lambda, "Fixed lambda for revealed_cs");
    scoring->add_option("--structure", structure_path, "Structure JSON for revealed_general");
    add_mle(scoring, score.aggregate.mle);

    try {
        app.parse(argc, argv);
        if (!structure_path.empty()) {
            agg.structure_json = slurp(structure_path);
            score.aggregate.structure_json = agg.structure_json;
        }
        if (!model_path.empty()) sim.model_json = slurp(model_path);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInputError;
    }

    if (*aggregate)
        return with_input(input, [&](std::istream& in) { return cmd_aggregate(in, std::cout, std::cerr, agg, global); });
    if (*estimate)
        return with_input(input, [&](std::istream& in) { return cmd_estimate(in, std::cout, std::cerr, est, global); });
    if (*simulate) return cmd_simulate(std::cout, std::cerr, sim, global);
    if (*sweep) return cmd_sweep(std::cout, std::cerr, sw);
    if (*coherence) return cmd_coherence(*agg.structure_json, std::cout, std::cerr);
    if (*scoring)
        return with_input(input, [&](std::istream& in) { return cmd_score(in, std::cout, std::cerr, score, global); });
    return kInputError;
}
