// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "infopool/aggregators.hpp"
#include "infopool/estimation.hpp"
#include "infopool/extremize.hpp"
#include "infopool/scoring.hpp"
#include "infopool/simulator.hpp"
#include "oracles.hpp"

using namespace infopool;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

CellMassPartition to_partition(const oracle::RandomPartition& p) {
    return CellMassPartition(p.n, {p.cells.begin(), p.cells.end()}, p.outside);
}

// Mean and standard error of a sample.
std::pair<double, double> mean_se(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / (v.size() - 1) / v.size())};
}

Outcome unc_reproduction() {
    std::vector<ScoredForecast> s;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 123; ++k) s.push_back({u(rng), k < 23 ? 1 : 0});
    const double unc = score_collection(s).unc;
    return {std::fabs(unc - 0.15203) <= 0.0005, fmt("UNC=%.6f (target 0.15203 +- 0.0005)", unc)};
}

Outcome table_ordering() {
    const CompoundSymmetry cs{24, 0.3, 0.5};
    const SimConfig config{cs.structure(compound_delta_prime_range(cs).first), 10000, 2024};
    const Simulator sim(config);
    std::vector<ForecastSet> events;
    for (std::uint64_t t = 0; t < config.trials; ++t) {
        const SimDraw d = sim.draw(t);
        events.push_back({"e" + std::to_string(t), d.forecasts, d.outcome});
    }

    const std::vector<std::string> methods{"revealed_cs", "probit", "log_odds", "mean"};
    std::vector<std::vector<double>> briers;
    std::vector<double> bs;
    int fallbacks = 0;
    for (const auto& m : methods) {
        cli::AggregateOptions options;
        options.method = m;
        std::ostringstream warnings;
        const auto results = cli::aggregate_events(events, options, cli::GlobalOptions{}, warnings);
        std::vector<double> b;
        std::vector<ScoredForecast> scored;
        for (const auto& r : results) {
            b.push_back(brier(r.result.value, *r.outcome));
            scored.push_back({r.result.value, *r.outcome});
            fallbacks += r.fallback ? 1 : 0;
        }
        briers.push_back(std::move(b));
        bs.push_back(score_collection(scored).bs);
    }
    // Paired differences of per-event Brier scores.
    auto gap = [&](int a, int b) {
        std::vector<double> d(events.size());
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = briers[b][k] - briers[a][k];
        return mean_se(d);
    };
    const auto [g1, s1] = gap(0, 1);  // probit - revealed
    const auto [g2, s2] = gap(0, 2);  // log - revealed
    const auto [g3, s3] = gap(1, 3);  // mean - probit
    const auto [g4, s4] = gap(2, 3);  // mean - log
    // Reference point: the same aggregator with the true parameters.
    std::vector<ScoredForecast> known;
    for (const auto& e : events) known.push_back({revealed_cs(censored(e), cs).value, *e.outcome});
    const double bs_known = score_collection(known).bs;

    const bool order = bs[0] < std::min(bs[1], bs[2]) && std::max(bs[1], bs[2]) < bs[3];
    const bool gaps = g1 > 3 * s1 && g2 > 3 * s2 && g3 > 3 * s3 && g4 > 3 * s4;
    const bool close = std::fabs(bs[1] - bs[2]) < 0.001;
    return {order && gaps && close,
            fmt("BS revealed_cs=%.4f probit=%.4f log=%.4f mean=%.4f; gaps/SE %.1f %.1f %.1f %.1f; "
                "|probit-log|=%.4f; fallbacks=%d; revealed_cs with true (delta, lambda) BS=%.4f",
                bs[0], bs[1], bs[2], bs[3], g1 / s1, g2 / s2, g3 / s3, g4 / s4, std::fabs(bs[1] - bs[2]),
                fallbacks, bs_known)};
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(31);
    const int sizes[] = {1, 2, 3, 2, 3};
    bool pass = true;
    std::string detail;
    for (int k = 0; k < 5; ++k) {
        const CellMassPartition p = to_partition(oracle::random_partition(rng, sizes[k], 0.0));
        const InfoStructure s = p.structure();
        SimConfig config{p, 10000000, 100 + static_cast<std::uint64_t>(k)};
        // Half of a typical draw: a point of reasonable density.
        const SimDraw typical = Simulator(SimConfig{p, 1, 7 + static_cast<std::uint64_t>(k)}).draw(0);
        ConditioningBox box;
        ForecastSet f{"box", {}, {}};
        for (int i = 0; i < p.n(); ++i) {
            const double x = 0.5 * typical.signals[i];
            box.center.push_back(x);
            f.forecasts.push_back(normal_cdf(x / std::sqrt(1.0 - s.delta(i))));
        }
        const double model = revealed_general(f, s).value;
        const auto est = estimate_conditional(config, box);
        // Binomial SE at the model value: the plug-in SE vanishes when every
        // accepted draw has the same outcome.
        const double se = std::sqrt(model * (1.0 - model) / static_cast<double>(est.accepted));
        const double z = std::fabs(est.probability - model) / se;
        pass = pass && z <= 3.0;
        detail += fmt("%sN=%d %.4f vs %.4f (%.1f SE, %llu accepted)", k ? "; " : "", p.n(), model,
                      est.probability, z, static_cast<unsigned long long>(est.accepted));
    }
    return {pass, detail};
}

Outcome ratio_exactness() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int tested = 0, resampled = 0;
    double worst = 0.0;
    while (tested < 1000) {
        const int n = 1 + static_cast<int>(u(rng) * 30);
        const CompoundSymmetry cs{n, 0.01 + 0.9 * u(rng), u(rng)};
        if (!compound_feasible(cs) || n * cs.delta / ((n - 1) * cs.lambda + 1) >= 1.0) continue;
        ForecastSet f{"r", {}, {}};
        for (int i = 0; i < n; ++i) f.forecasts.push_back(0.02 + 0.96 * u(rng));
        const double pool = pool_probit(f).value;
        if (pool == 0.5) continue;
        const double q = revealed_cs(f, cs).value;
        // Beyond |probit| ~ 5 the aggregate probability no longer carries ten
        // significant digits of its probit score in double precision.
        if (std::fabs(probit(std::clamp(q, 1e-300, 1.0 - 1e-16))) > 5.0 || q >= 1.0 || q <= 0.0) {
            ++resampled;
            continue;
        }
        const double err = std::fabs(alpha_ratio(q, pool) / cs_ratio(cs) - 1.0);
        worst = std::max(worst, err);
        ++tested;
    }
    const double worked = alpha_ratio(revealed_cs(ForecastSet{"w", {0.7, 0.7}, {}}, {2, 0.25, 0.0}).value, 0.7);
    const bool pass = worst <= 1e-10 && std::fabs(worked - 2.44949) < 5e-6;
    return {pass, fmt("max relative error %.2e over %d cases (%d saturated draws resampled); worked case %.6f",
                      worst, tested, resampled, worked)};
}

Outcome convex_hull_witness() {
    const double v = revealed_cs(ForecastSet{"w", {0.7, 0.7}, {}}, {2, 0.25, 0.0}).value;
    return {std::fabs(v - 0.9005) < 1e-4 && v > 0.7, fmt("aggregate %.6f, hull [0.7, 0.7]", v)};
}

Outcome cauchy_law() {
    const CompoundSymmetry cs{2, 0.4, 0.5};
    const CellMassPartition p = realize(cs, 0.6);
    const CauchyLaw law = ratio_law(p.structure());
    const SimConfig config{p, 1000000, 6};
    const Simulator sim(config);
    std::vector<double> alpha;
    alpha.reserve(config.trials);
    SimDraw d;
    for (std::uint64_t t = 0; t < config.trials; ++t) {
        sim.draw(t, d);
        alpha.push_back(alpha_ratio(d.oracle_forecast, pool_probit(ForecastSet{"", d.forecasts, {}}).value));
    }
    auto quantile = [&](double q) {
        auto it = alpha.begin() + static_cast<std::ptrdiff_t>(q * (alpha.size() - 1));
        std::nth_element(alpha.begin(), it, alpha.end());
        return *it;
    };
    const double median = quantile(0.5);
    const double half_iqr = 0.5 * (quantile(0.75) - quantile(0.25));
    const bool matches = std::fabs(median - law.x0) <= 0.01 && std::fabs(half_iqr - law.gamma_scale) <= 0.01 &&
                         std::fabs(law.x0 - 1.633) < 0.001 && std::fabs(law.gamma_scale - 0.577) < 0.001;

    // Unequal information: delta = (0.2, 0.4).
    const CellMassPartition unequal(2, {{0b01, 0.1}, {0b10, 0.3}, {0b11, 0.1}}, 0.5);
    const CauchyLaw ul = ratio_law(unequal.structure());
    const Simulator usim(SimConfig{unequal, 1000000, 8});
    std::uint64_t above = 0;
    for (std::uint64_t t = 0; t < 1000000; ++t) {
        usim.draw(t, d);
        if (alpha_ratio(d.oracle_forecast, pool_probit(ForecastSet{"", d.forecasts, {}}).value) > 1.0) ++above;
    }
    const double frac = above / 1e6;
    const double se = std::sqrt(0.25 / 1e6);
    const bool unequal_ok = ul.x0 > 1.0 && (frac - 0.5) >= 3 * se;
    return {matches && unequal_ok,
            fmt("median %.4f vs x0 %.5f, half-IQR %.4f vs gamma %.5f; unequal delta: x0 %.4f, P(alpha>1) MC %.4f "
                "(%.0f SE above 1/2, law %.4f)",
                median, law.x0, half_iqr, law.gamma_scale, ul.x0, frac, (frac - 0.5) / se, prob_extremize(ul))};
}

Outcome coherence() {
    std::mt19937_64 rng(7);
    int accepted = 0;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const CellMassPartition p = to_partition(oracle::random_partition(rng, 1 + k % 8));
        const auto v = check_coherence_exact(p.structure());
        if (v.verdict != Verdict::coherent || !v.realization) continue;
        ++accepted;
        worst = std::max(worst, (v.realization->sigma22() - p.sigma22()).cwiseAbs().maxCoeff());
    }
    Eigen::MatrixXd frechet(2, 2);
    frechet << 0.6, 0.1, 0.1, 0.6;
    const InfoStructure bad{frechet};
    const bool rejected = check_coherence_exact(bad).verdict == Verdict::incoherent &&
                          check_coherence_relaxed(bad).verdict == Verdict::incoherent;
    return {accepted == 1000 && worst <= 1e-9 && rejected,
            fmt("%d/1000 accepted, max realization error %.1e, Frechet example %s", accepted, worst,
                rejected ? "rejected by both checks" : "NOT rejected")};
}

Outcome mle_recovery() {
    const CompoundSymmetry cs{30, 0.3, 0.5};
    const Simulator sim(SimConfig{cs.structure(compound_delta_prime_range(cs).first), 200, 88});
    std::vector<ForecastSet> events;
    for (std::uint64_t t = 0; t < 200; ++t) events.push_back(censored(ForecastSet{"e", sim.draw(t).forecasts, {}}));
    const MleResult fit = fit_mle_pooled(events);
    const double lambda_hat = fit.lambda_hat.value_or(-1.0);
    const double z = probit(0.7);
    const double stationary = z * z / (1.0 + z * z);
    const double single = fit_mle(ForecastSet{"one", {0.7}, {}}).delta_hat;
    const bool pass = std::fabs(fit.delta_hat - 0.3) <= 0.05 && std::fabs(lambda_hat - 0.5) <= 0.05 &&
                      std::fabs(single - stationary) <= 1e-4;
    return {pass, fmt("pooled delta %.4f lambda %.4f; N=1 optimizer %.6f vs stationary point %.6f", fit.delta_hat,
                      lambda_hat, single, stationary)};
}

Outcome calibration() {
    const CompoundSymmetry cs{5, 0.2, 0.5};
    const SimConfig config{realize(cs), 1000000, 9};
    auto check = [](const std::vector<CalibrationBin>& bins, int& tested, double& worst) {
        bool ok = true;
        for (const auto& b : bins) {
            if (b.count < 30) continue;
            ++tested;
            const double z = std::fabs(b.frequency - b.mean_forecast) / b.standard_error;
            worst = std::max(worst, z);
            ok = ok && z <= 3.0;
        }
        return ok;
    };
    int tested = 0;
    double worst = 0.0;
    const bool individual =
        check(verify_calibration(config, 10, [](const SimDraw& d) { return d.forecasts[0]; }), tested, worst);
    const bool revealed = check(verify_calibration(config, 10,
                                                   [&](const SimDraw& d) {
                                                       return revealed_cs(ForecastSet{"", d.forecasts, {}}, cs).value;
                                                   }),
                                tested, worst);

    // Three forecasters with disjoint information: averaging under-extremizes.
    const CellMassPartition diverse(3, {{0b001, 0.25}, {0b010, 0.25}, {0b100, 0.25}}, 0.25);
    const auto mean_bins = verify_calibration(SimConfig{diverse, 1000000, 10}, 10, [](const SimDraw& d) {
        return pool_mean(ForecastSet{"", d.forecasts, {}}).value;
    });
    const CalibrationBin* low = nullptr;
    const CalibrationBin* high = nullptr;
    for (const auto& b : mean_bins) {
        if (b.count < 30) continue;
        if (!low) low = &b;
        high = &b;
    }
    const double z_low = (low->mean_forecast - low->frequency) / low->standard_error;
    const double z_high = (high->frequency - high->mean_forecast) / high->standard_error;
    const bool under = z_low > 3.0 && z_high > 3.0;
    return {individual && revealed && under,
            fmt("%d bins, worst |freq - forecast| %.2f SE; mean pool on disjoint sets: top bin %.3f vs %.3f "
                "(%.0f SE), bottom bin %.3f vs %.3f (%.0f SE)",
                tested, worst, high->frequency, high->mean_forecast, z_high, low->frequency, low->mean_forecast,
                z_low)};
}

Outcome decomposition() {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int bins : {5, 10, 20}) {
        for (int k = 0; k < 100; ++k) {
            std::vector<ScoredForecast> s(1 + static_cast<int>(u(rng) * 500));
            for (auto& x : s) x = {u(rng), u(rng) < 0.4 ? 1 : 0};
            const auto r = score_collection(s, bins);
            worst = std::max(worst, std::fabs(r.bs - (r.rel - r.res + r.unc)));
        }
    }
    return {worst <= 1e-12, fmt("max |BS - (REL - RES + UNC)| = %.1e over 300 collections", worst)};
}

Outcome sweep_shape() {
    cli::SweepOptions options;
    options.n = 2;
    std::ostringstream out, err;
    if (cli::cmd_sweep(out, err, options) != cli::kOk) return {false, "cmd_sweep failed: " + err.str()};

    struct Cell {
        double delta, lambda, x0, p;
        bool feasible, has_law;
    };
    std::vector<Cell> cells;
    std::istringstream lines(out.str());
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
        f.resize(9);
        Cell c{std::stod(f[1]), std::stod(f[2]), 0.0, 0.0, f[7] == "1", !f[4].empty()};
        if (c.has_law) {
            c.x0 = std::stod(f[4]);
            c.p = std::stod(f[6]);
        }
        cells.push_back(c);
    }
    const std::size_t side = options.lambda_steps;
    int region_mismatch = 0, violations = 0, feasible = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& c = cells[i];
        if (c.feasible != !(c.lambda < 2.0 - 1.0 / c.delta)) ++region_mismatch;
        if (!c.feasible || !c.has_law) continue;
        ++feasible;
        const std::size_t row = i / side, col = i % side;
        if (col + 1 < side && cells[i + 1].has_law && !(cells[i + 1].x0 < c.x0 && cells[i + 1].p < c.p))
            ++violations;
        if (row + 1 < cells.size() / side) {
            const Cell& next = cells[i + side];
            if (next.has_law && !(next.x0 > c.x0 && next.p > c.p)) ++violations;
        }
    }
    return {region_mismatch == 0 && violations == 0 && feasible > 0,
            fmt("%zu cells, %d feasible, %d region mismatches, %d monotonicity violations", cells.size(), feasible,
                region_mismatch, violations)};
}

struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "UNC reproduction", 1, unc_reproduction},
        {2, "Brier ordering on simulated events", 300, table_ordering},
        {3, "revealed aggregate matches conditional frequency", 600, oracle_equivalence},
        {4, "compound-symmetric extremization ratio", 1, ratio_exactness},
        {5, "aggregate outside the convex hull", 1, convex_hull_witness},
        {6, "Cauchy law of the extremization ratio", 120, cauchy_law},
        {7, "exact coherence on random partitions", 60, coherence},
        {8, "MLE recovery", 120, mle_recovery},
        {9, "calibration", 120, calibration},
        {10, "Brier decomposition identity", 1, decomposition},
        {11, "two-forecaster sweep shape", 10, sweep_shape},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.limit_seconds;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s %2d %s: %s [%.2fs, limit %.0fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    secs, c.limit_seconds, in_time ? "" : ", exceeded");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
