#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <thread>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "infopool/structures.hpp"

namespace infopool {

/// Counter-based generator: the stream for draw `index` depends only on
/// (seed, index), so the set of draws does not depend on how trials are split
/// across workers. Normals come from the inverse CDF.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct SimConfig {
    /// Either an explicit pool partition or a Gaussian structure carrying delta'.
    std::variant<CellMassPartition, InfoStructure> model;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    int workers = 1;
    /// Common multiplier on every mass, total included (forecasts are invariant to it).
    double scale = 1.0;
};

struct SimDraw {
    /// Realized cell signals, aligned with Simulator::cell_subsets(); empty for
    /// the Gaussian-structure model.
    std::vector<double> cell_signals;
    std::vector<double> signals;  // X_{B_i}
    std::vector<double> forecasts;
    double x_union = 0.0;
    double x_s = 0.0;
    int outcome = 0;
    double oracle_forecast = 0.5;
};

class Simulator {
public:
    explicit Simulator(const SimConfig& config);

    int n() const { return n_; }
    double delta_prime() const { return delta_prime_; }
    const Eigen::VectorXd& deltas() const { return delta_; }
    const std::vector<Subset>& cell_subsets() const { return subsets_; }
    const SimConfig& config() const { return config_; }

    void draw(std::uint64_t index, SimDraw& out) const;
    SimDraw draw(std::uint64_t index) const;

    /// Map-reduce over all trials. Each worker folds a contiguous block of draw
    /// indices into its own copy of `init`; the copies are then merged in worker
    /// order with Acc::merge.
    template <class Acc, class Fold>
    Acc reduce(const Acc& init, Fold fold) const;

private:
    SimConfig config_;
    int n_ = 0;
    Eigen::VectorXd delta_;
    double delta_prime_ = 0.0;
    // Partition model.
    std::vector<Subset> subsets_;
    std::vector<double> cell_sd_;
    std::vector<std::vector<int>> cells_of_;
    double outside_sd_ = 0.0;
    // Gaussian model: (X_B1..X_BN, X_union) = factor * z.
    Eigen::MatrixXd factor_;
    double residual_sd_ = 0.0;
    bool partition_model_ = true;
};

template <class Acc, class Fold>
Acc Simulator::reduce(const Acc& init, Fold fold) const {
    const std::uint64_t trials = config_.trials;
    const int workers = std::max(1, config_.workers);
    std::vector<Acc> parts(workers, init);
    auto run_block = [&](int w) {
        const std::uint64_t begin = trials * w / workers;
        const std::uint64_t end = trials * (w + 1) / workers;
        SimDraw d;
        for (std::uint64_t i = begin; i < end; ++i) {
            draw(i, d);
            fold(parts[w], d);
        }
    };
    if (workers == 1) {
        run_block(0);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) threads.emplace_back(run_block, w);
        for (auto& t : threads) t.join();
    }
    Acc out = parts[0];
    for (int w = 1; w < workers; ++w) out.merge(parts[w]);
    return out;
}

struct ConditioningBox {
    enum class Target { signals, union_signal };
    Target target = Target::signals;
    /// One coordinate per forecaster, or a single value for union_signal.
    std::vector<double> center;
    /// Full side length of the box in signal units.
    double width = 0.05;
};

struct ConditionalEstimate {
    double probability = 0.5;
    double standard_error = 0.0;
    std::uint64_t accepted = 0;
    std::uint64_t trials = 0;
};

/// Frequency of the event among draws whose signals fall in the box. Throws
/// InfeasibleError if no draw is accepted.
ConditionalEstimate estimate_conditional(const SimConfig& config, const ConditioningBox& box);

struct CalibrationBin {
    double lower = 0.0;
    double upper = 0.0;
    std::uint64_t count = 0;
    double mean_forecast = 0.0;
    double frequency = 0.0;
    double standard_error = 0.0;
};

using DrawForecast = std::function<double(const SimDraw&)>;

/// Bins the forecast produced by `forecast` for every draw and reports the
/// empirical event frequency per bin, with binomial standard errors.
std::vector<CalibrationBin> verify_calibration(const SimConfig& config, int bins,
                                               const DrawForecast& forecast);

/// One row per draw: index,x_s,outcome,oracle_forecast,signal_i...,forecast_i...
void write_draws_csv(std::ostream& os, const Simulator& sim);

}  // namespace infopool
