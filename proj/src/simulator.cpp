#include "infopool/simulator.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "infopool/core.hpp"
#include "infopool/errors.hpp"

namespace infopool {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

double calibrated(double signal, double remaining_variance) {
    if (remaining_variance <= 0.0) return signal > 0.0 ? 1.0 : 0.0;
    return normal_cdf(signal / std::sqrt(remaining_variance));
}

struct CountAcc {
    std::uint64_t accepted = 0;
    std::uint64_t hits = 0;
    void merge(const CountAcc& o) {
        accepted += o.accepted;
        hits += o.hits;
    }
};

struct BinAcc {
    std::vector<std::uint64_t> count;
    std::vector<std::uint64_t> hits;
    std::vector<double> forecast_sum;
    void merge(const BinAcc& o) {
        for (std::size_t j = 0; j < count.size(); ++j) {
            count[j] += o.count[j];
            hits[j] += o.hits[j];
            forecast_sum[j] += o.forecast_sum[j];
        }
    }
};

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed + kGolden) ^ mix64(stream * kGolden + 0x632be59bd9b4e019ULL)) {}

std::uint64_t CounterRng::next_u64() { return mix64(key_ + (++counter_) * kGolden); }

double CounterRng::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() { return probit(uniform()); }

Simulator::Simulator(const SimConfig& config) : config_(config) {
    if (config_.trials < 1) throw DomainError("simulator: trials must be >= 1");
    if (!(config_.scale > 0.0)) throw DomainError("simulator: scale must be positive");
    const double scale = config_.scale;

    if (const auto* partition = std::get_if<CellMassPartition>(&config_.model)) {
        partition_model_ = true;
        n_ = partition->n();
        delta_ = partition->deltas();
        delta_prime_ = std::min(1.0, partition->union_mass());
        cells_of_.assign(n_, {});
        for (const auto& [subset, mass] : partition->cells()) {
            if (mass <= 0.0) continue;
            const int index = static_cast<int>(subsets_.size());
            subsets_.push_back(subset);
            cell_sd_.push_back(std::sqrt(scale * mass));
            for (int i : subset_members(subset)) cells_of_[i].push_back(index);
        }
        outside_sd_ = std::sqrt(scale * partition->outside());
        return;
    }

    partition_model_ = false;
    const auto& s = std::get<InfoStructure>(config_.model);
    if (!s.delta_prime())
        throw DomainError("simulator: a Gaussian structure needs delta'");
    n_ = s.n();
    delta_ = s.deltas();
    delta_prime_ = *s.delta_prime();
    Eigen::MatrixXd cov(n_ + 1, n_ + 1);
    cov.topLeftCorner(n_, n_) = s.sigma22();
    cov.block(0, n_, n_, 1) = delta_;
    cov.block(n_, 0, 1, n_) = delta_.transpose();
    cov(n_, n_) = delta_prime_;
    cov *= scale;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.eigenvalues().minCoeff() < -1e-9 * scale)
        throw InfeasibleError("simulator: structure and delta' do not form a valid covariance");
    factor_ = eig.eigenvectors() *
              eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    residual_sd_ = std::sqrt(std::max(0.0, scale * (1.0 - delta_prime_)));
}

void Simulator::draw(std::uint64_t index, SimDraw& out) const {
    CounterRng rng(config_.seed, index);
    const double scale = config_.scale;
    out.signals.assign(n_, 0.0);
    out.forecasts.resize(n_);

    if (partition_model_) {
        out.cell_signals.resize(subsets_.size());
        out.x_union = 0.0;
        for (std::size_t c = 0; c < subsets_.size(); ++c) {
            out.cell_signals[c] = cell_sd_[c] * rng.normal();
            out.x_union += out.cell_signals[c];
        }
        for (int i = 0; i < n_; ++i)
            for (int c : cells_of_[i]) out.signals[i] += out.cell_signals[c];
        out.x_s = out.x_union + outside_sd_ * rng.normal();
    } else {
        out.cell_signals.clear();
        Eigen::VectorXd z(n_ + 1);
        for (int k = 0; k <= n_; ++k) z[k] = rng.normal();
        const Eigen::VectorXd y = factor_ * z;
        for (int i = 0; i < n_; ++i) out.signals[i] = y[i];
        out.x_union = y[n_];
        out.x_s = out.x_union + residual_sd_ * rng.normal();
    }

    for (int i = 0; i < n_; ++i)
        out.forecasts[i] = calibrated(out.signals[i], scale * (1.0 - delta_[i]));
    out.oracle_forecast = calibrated(out.x_union, scale * (1.0 - delta_prime_));
    out.outcome = out.x_s > 0.0 ? 1 : 0;
}

SimDraw Simulator::draw(std::uint64_t index) const {
    SimDraw d;
    draw(index, d);
    return d;
}

ConditionalEstimate estimate_conditional(const SimConfig& config, const ConditioningBox& box) {
    const Simulator sim(config);
    const bool on_union = box.target == ConditioningBox::Target::union_signal;
    const std::size_t dims = on_union ? 1 : static_cast<std::size_t>(sim.n());
    if (box.center.size() != dims)
        throw DomainError("estimate_conditional: box center has the wrong dimension");
    if (!(box.width > 0.0)) throw DomainError("estimate_conditional: box width must be positive");
    const double half = 0.5 * box.width;

    const CountAcc acc = sim.reduce(CountAcc{}, [&](CountAcc& a, const SimDraw& d) {
        if (on_union) {
            if (std::fabs(d.x_union - box.center[0]) > half) return;
        } else {
            for (std::size_t i = 0; i < dims; ++i)
                if (std::fabs(d.signals[i] - box.center[i]) > half) return;
        }
        ++a.accepted;
        a.hits += static_cast<std::uint64_t>(d.outcome);
    });
    if (acc.accepted == 0) throw InfeasibleError("estimate_conditional: no draw fell in the box");

    ConditionalEstimate out;
    out.accepted = acc.accepted;
    out.trials = config.trials;
    out.probability = static_cast<double>(acc.hits) / static_cast<double>(acc.accepted);
    out.standard_error =
        std::sqrt(out.probability * (1.0 - out.probability) / static_cast<double>(acc.accepted));
    return out;
}

std::vector<CalibrationBin> verify_calibration(const SimConfig& config, int bins,
                                               const DrawForecast& forecast) {
    if (bins < 1) throw DomainError("verify_calibration: need at least one bin");
    const Simulator sim(config);
    BinAcc init{std::vector<std::uint64_t>(bins, 0), std::vector<std::uint64_t>(bins, 0),
                std::vector<double>(bins, 0.0)};
    const BinAcc acc = sim.reduce(init, [&](BinAcc& a, const SimDraw& d) {
        const double p = forecast(d);
        const int j = std::clamp(static_cast<int>(std::floor(p * bins)), 0, bins - 1);
        ++a.count[j];
        a.hits[j] += static_cast<std::uint64_t>(d.outcome);
        a.forecast_sum[j] += p;
    });

    std::vector<CalibrationBin> out(bins);
    for (int j = 0; j < bins; ++j) {
        CalibrationBin& b = out[j];
        b.lower = static_cast<double>(j) / bins;
        b.upper = static_cast<double>(j + 1) / bins;
        b.count = acc.count[j];
        if (b.count == 0) continue;
        const double n = static_cast<double>(b.count);
        b.mean_forecast = acc.forecast_sum[j] / n;
        b.frequency = static_cast<double>(acc.hits[j]) / n;
        // Standard error under the calibration hypothesis (frequency = forecast).
        b.standard_error = std::sqrt(b.mean_forecast * (1.0 - b.mean_forecast) / n);
    }
    return out;
}

void write_draws_csv(std::ostream& os, const Simulator& sim) {
    const auto precision = os.precision();
    os << "index,x_s,outcome,oracle_forecast";
    for (int i = 0; i < sim.n(); ++i) os << ",signal_" << i;
    for (int i = 0; i < sim.n(); ++i) os << ",forecast_" << i;
    os << '\n' << std::setprecision(17);
    SimDraw d;
    for (std::uint64_t t = 0; t < sim.config().trials; ++t) {
        sim.draw(t, d);
        os << t << ',' << d.x_s << ',' << d.outcome << ',' << d.oracle_forecast;
        for (double v : d.signals) os << ',' << v;
        for (double v : d.forecasts) os << ',' << v;
        os << '\n';
    }
    os.precision(precision);
}

}  // namespace infopool
