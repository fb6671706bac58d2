#include <doctest.h>

#include <cmath>
#include <sstream>

#include "infopool/core.hpp"
#include "infopool/errors.hpp"
#include "infopool/simulator.hpp"

using namespace infopool;
using Eigen::MatrixXd;

namespace {

CellMassPartition three_way() {
    return CellMassPartition(3, {{0b001, 0.1}, {0b011, 0.15}, {0b110, 0.05}, {0b111, 0.1}, {0b100, 0.2}},
                             0.4);
}

struct Moments {
    std::uint64_t count = 0;
    MatrixXd cross;  // second moments of (x_1..x_n, x_union, x_s)
    std::uint64_t agree = 0;  // outcome == [x_s > 0]

    void merge(const Moments& o) {
        count += o.count;
        cross += o.cross;
        agree += o.agree;
    }
};

Moments moments(const Simulator& sim) {
    const int n = sim.n();
    Moments init;
    init.cross = MatrixXd::Zero(n + 2, n + 2);
    return sim.reduce(init, [n](Moments& m, const SimDraw& d) {
        Eigen::VectorXd v(n + 2);
        for (int i = 0; i < n; ++i) v[i] = d.signals[i];
        v[n] = d.x_union;
        v[n + 1] = d.x_s;
        m.cross += v * v.transpose();
        ++m.count;
        if (d.outcome == (d.x_s > 0.0 ? 1 : 0)) ++m.agree;
    });
}

// Expected covariance of (x_1..x_n, x_union, x_s).
MatrixXd expected_cov(const InfoStructure& s) {
    const int n = s.n();
    MatrixXd c(n + 2, n + 2);
    c.topLeftCorner(n, n) = s.sigma22();
    for (int i = 0; i < n; ++i) {
        c(i, n) = c(n, i) = s.delta(i);
        c(i, n + 1) = c(n + 1, i) = s.delta(i);
    }
    c(n, n) = c(n, n + 1) = c(n + 1, n) = *s.delta_prime();
    c(n + 1, n + 1) = 1.0;
    return c;
}

}  // namespace

TEST_CASE("counter generator") {
    CounterRng a(5, 7), b(5, 7), c(5, 8);
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() != c.next_u64());
    CounterRng r(1, 0);
    double sum = 0.0, sq = 0.0, lo = 1.0, hi = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        const double z = r.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(std::fabs(sum / n) < 4.0 / std::sqrt(n));
    CHECK(std::fabs(sq / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("partition model reproduces the joint covariance") {
    const CellMassPartition p = three_way();
    const std::uint64_t trials = 200000;
    const Simulator sim(SimConfig{p, trials, 3});
    const Moments m = moments(sim);
    CHECK(m.agree == trials);
    const MatrixXd diff = m.cross / static_cast<double>(trials) - expected_cov(p.structure());
    CHECK(diff.cwiseAbs().maxCoeff() < 4.0 / std::sqrt(static_cast<double>(trials)));
    CHECK(sim.delta_prime() == doctest::Approx(0.6));
}

TEST_CASE("gaussian model reproduces the joint covariance") {
    const InfoStructure s = CompoundSymmetry{5, 0.3, 0.5}.structure(0.8);
    const std::uint64_t trials = 200000;
    const Simulator sim(SimConfig{s, trials, 4});
    const Moments m = moments(sim);
    const MatrixXd diff = m.cross / static_cast<double>(trials) - expected_cov(s);
    CHECK(diff.cwiseAbs().maxCoeff() < 4.0 / std::sqrt(static_cast<double>(trials)));
    CHECK(sim.draw(0).cell_signals.empty());
}

TEST_CASE("forecasts are the calibrated transforms of the signals") {
    const CellMassPartition p = three_way();
    const Simulator sim(SimConfig{p, 10, 1});
    for (std::uint64_t t = 0; t < 10; ++t) {
        const SimDraw d = sim.draw(t);
        REQUIRE(d.cell_signals.size() == sim.cell_subsets().size());
        double sum = 0.0;
        for (double c : d.cell_signals) sum += c;
        CHECK(d.x_union == doctest::Approx(sum).epsilon(1e-14));
        for (int i = 0; i < 3; ++i)
            CHECK(d.forecasts[i] == doctest::Approx(normal_cdf(d.signals[i] / std::sqrt(1 - p.deltas()[i]))));
        CHECK(d.oracle_forecast == doctest::Approx(normal_cdf(d.x_union / std::sqrt(0.4))));
    }
}

TEST_CASE("draws do not depend on the worker count") {
    struct Trace {
        std::vector<double> xs;
        void merge(const Trace& o) { xs.insert(xs.end(), o.xs.begin(), o.xs.end()); }
    };
    auto collect = [](int workers) {
        SimConfig config{three_way(), 1001, 42, workers};
        return Simulator(config).reduce(Trace{}, [](Trace& t, const SimDraw& d) { t.xs.push_back(d.x_s); }).xs;
    };
    const auto one = collect(1);
    CHECK(collect(3) == one);
    CHECK(collect(8) == one);
    CHECK(one[17] == Simulator(SimConfig{three_way(), 1, 42}).draw(17).x_s);
}

TEST_CASE("forecasts do not depend on the scale of the pool") {
    SimConfig unit{three_way(), 50, 9};
    SimConfig scaled = unit;
    scaled.scale = 7.5;
    const Simulator a(unit), b(scaled);
    for (std::uint64_t t = 0; t < 50; ++t) {
        const SimDraw da = a.draw(t), db = b.draw(t);
        CHECK(da.outcome == db.outcome);
        CHECK(db.x_s == doctest::Approx(da.x_s * std::sqrt(7.5)).epsilon(1e-12));
        for (int i = 0; i < 3; ++i) CHECK(db.forecasts[i] == doctest::Approx(da.forecasts[i]).epsilon(1e-12));
        CHECK(db.oracle_forecast == doctest::Approx(da.oracle_forecast).epsilon(1e-12));
    }
}

TEST_CASE("conditional frequency matches the calibrated forecast") {
    const CellMassPartition single(1, {{0b1, 0.4}}, 0.6);
    SimConfig config{single, 400000, 5};
    const double x = 0.3;
    ConditioningBox box{ConditioningBox::Target::signals, {x}, 0.05};
    const auto est = estimate_conditional(config, box);
    CHECK(est.accepted > 1000);
    CHECK(est.trials == config.trials);
    CHECK(std::fabs(est.probability - normal_cdf(x / std::sqrt(0.6))) < 4.0 * est.standard_error);

    ConditioningBox on_union{ConditioningBox::Target::union_signal, {-0.2}, 0.05};
    const auto u = estimate_conditional(config, on_union);
    CHECK(std::fabs(u.probability - normal_cdf(-0.2 / std::sqrt(0.6))) < 4.0 * u.standard_error);

    CHECK_THROWS_AS(estimate_conditional(config, ConditioningBox{ConditioningBox::Target::signals, {0.1, 0.2}}),
                    DomainError);
    CHECK_THROWS_AS(estimate_conditional(config, ConditioningBox{ConditioningBox::Target::signals, {50.0}}),
                    InfeasibleError);
}

TEST_CASE("individual forecasts are calibrated") {
    SimConfig config{three_way(), 200000, 6};
    const auto bins = verify_calibration(config, 10, [](const SimDraw& d) { return d.forecasts[1]; });
    REQUIRE(bins.size() == 10);
    std::uint64_t total = 0;
    for (const auto& b : bins) {
        total += b.count;
        if (b.count < 100) continue;
        CHECK(std::fabs(b.frequency - b.mean_forecast) < 4.0 * b.standard_error);
    }
    CHECK(total == config.trials);
}

TEST_CASE("configuration checks") {
    CHECK_THROWS_AS(Simulator(SimConfig{three_way(), 0, 1}), DomainError);
    SimConfig bad{three_way(), 10, 1};
    bad.scale = 0.0;
    CHECK_THROWS_AS(Simulator{bad}, DomainError);
    CHECK_THROWS_AS(Simulator(SimConfig{CompoundSymmetry{3, 0.3, 0.5}.structure(), 10, 1}), DomainError);
    CHECK_THROWS_AS(Simulator(SimConfig{CompoundSymmetry{3, 0.5, 0.0}.structure(0.9), 10, 1}), InfeasibleError);
}

TEST_CASE("draw table") {
    std::ostringstream os;
    write_draws_csv(os, Simulator(SimConfig{three_way(), 3, 1}));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "index,x_s,outcome,oracle_forecast,signal_0,signal_1,signal_2,forecast_0,forecast_1,forecast_2");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 3);
}
