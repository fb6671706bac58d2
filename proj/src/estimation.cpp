#include "infopool/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "infopool/errors.hpp"

namespace infopool {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kFlagTolerance = 1e-7;

// The likelihood depends on the forecasts only through n, sum z^2 and sum z.
struct EventStats {
    int n = 0;
    double sum_sq = 0.0;
    double sum = 0.0;
};

EventStats event_stats(const ForecastSet& f) {
    f.validate();
    std::vector<double> z;
    z.reserve(f.size());
    for (double p : f.forecasts) z.push_back(probit(p));
    // Fixed summation order keeps the estimate bitwise invariant to permutations.
    std::sort(z.begin(), z.end());
    EventStats s;
    s.n = static_cast<int>(z.size());
    for (double v : z) {
        s.sum_sq += v * v;
        s.sum += v;
    }
    return s;
}

double stats_log_likelihood(const EventStats& s, double delta, double lambda) {
    const int n = s.n;
    if (n == 1) lambda = 0.0;
    const double a = delta * (1.0 - lambda);
    const double b = delta * lambda;
    const double c = a + n * b;
    const double one_minus = 1.0 - delta;
    const double x_sq = one_minus * s.sum_sq;
    const double x_sum_sq = one_minus * s.sum * s.sum;
    const double quad = (x_sq - b * x_sum_sq / c) / a;
    const double log_det = (n > 1 ? (n - 1) * std::log(a) : 0.0) + std::log(c);
    // -sum log phi(z_i) contributes sum z^2 / 2 + (n/2) log 2 pi; the 2 pi part
    // cancels against the Gaussian normalizing constant.
    return -0.5 * quad - 0.5 * log_det + 0.5 * n * std::log(one_minus) + 0.5 * s.sum_sq;
}

Eigen::Vector2d stats_gradient(const EventStats& s, double delta, double lambda) {
    const int n = s.n;
    if (n == 1) lambda = 0.0;
    // In terms of c = 1 + (n-1) lambda the likelihood reads
    //   -g(delta) h(lambda) / 2 - (n/2) log delta - ((n-1)/2) log(1 - lambda)
    //   - (1/2) log c + (n/2) log(1 - delta) + S1 / 2,
    // with g = (1 - delta) / delta and h = (S1 - lambda S2 / c) / (1 - lambda).
    const double s1 = s.sum_sq;
    const double s2 = s.sum * s.sum;
    const double c = 1.0 + (n - 1) * lambda;
    const double g = (1.0 - delta) / delta;
    const double h_num = s1 - lambda * s2 / c;
    const double h = h_num / (1.0 - lambda);
    Eigen::Vector2d grad;
    grad[0] = 0.5 * h / (delta * delta) - 0.5 * n / delta - 0.5 * n / (1.0 - delta);
    if (n == 1) {
        grad[1] = 0.0;
        return grad;
    }
    const double dh = (-s2 / (c * c) * (1.0 - lambda) + h_num) / ((1.0 - lambda) * (1.0 - lambda));
    grad[1] = -0.5 * g * dh + 0.5 * (n - 1) / (1.0 - lambda) - 0.5 * (n - 1) / c;
    return grad;
}

class Problem {
public:
    Problem(std::vector<EventStats> events, const MleConfig& config)
        : events_(std::move(events)), config_(config) {
        if (events_.empty()) throw DomainError("fit_mle: no events");
        for (const auto& e : events_) max_n_ = std::max(max_n_, e.n);
        if (config_.grid < 2) throw DomainError("fit_mle: grid must have at least 2 points");
        if (!(config_.delta_min > 0.0 && config_.delta_min < config_.delta_max &&
              config_.delta_max < 1.0))
            throw DomainError("fit_mle: need 0 < delta_min < delta_max < 1");
        if (!(config_.lambda_max > 0.0 && config_.lambda_max < 1.0))
            throw DomainError("fit_mle: lambda_max must lie in (0, 1)");
    }

    bool identifies_lambda() const { return max_n_ > 1; }

    double lambda_floor(double delta) const { return lambda_lower_bound(max_n_, delta); }

    double value(double delta, double lambda) {
        ++evaluations_;
        double total = 0.0;
        for (const auto& e : events_) total += stats_log_likelihood(e, delta, lambda);
        return std::isfinite(total) ? total : kNegInf;
    }

    std::array<double, 2> project(std::array<double, 2> p) const {
        p[0] = std::clamp(p[0], config_.delta_min, config_.delta_max);
        if (identifies_lambda()) {
            const double lo = std::min(lambda_floor(p[0]), config_.lambda_max);
            p[1] = std::clamp(p[1], lo, config_.lambda_max);
        } else {
            p[1] = 0.0;
        }
        return p;
    }

    int evaluations() const { return evaluations_; }
    const MleConfig& config() const { return config_; }

private:
    std::vector<EventStats> events_;
    MleConfig config_;
    int max_n_ = 0;
    int evaluations_ = 0;
};

struct Vertex {
    std::array<double, 2> x;
    double f;
};

MleResult run(Problem& problem) {
    const MleConfig& cfg = problem.config();
    const int dim = problem.identifies_lambda() ? 2 : 1;
    const int g = cfg.grid;
    const double d_step = (cfg.delta_max - cfg.delta_min) / (g - 1);

    Vertex best{{cfg.delta_min, 0.0}, kNegInf};
    for (int i = 0; i < g; ++i) {
        const double delta = cfg.delta_min + d_step * i;
        if (dim == 1) {
            const double f = problem.value(delta, 0.0);
            if (f > best.f) best = {{delta, 0.0}, f};
            continue;
        }
        const double lo = problem.lambda_floor(delta);
        if (lo > cfg.lambda_max) continue;
        for (int j = 0; j < g; ++j) {
            const double lambda = lo + (cfg.lambda_max - lo) * j / (g - 1);
            const double f = problem.value(delta, lambda);
            if (f > best.f) best = {{delta, lambda}, f};
        }
    }

    MleResult out;
    out.trace.grid_evaluations = problem.evaluations();
    out.trace.grid_best = best.f;
    if (best.f == kNegInf) throw InfeasibleError("fit_mle: likelihood is not finite anywhere on the grid");

    // Nelder-Mead (maximizing) with every trial point projected onto the region.
    const double l_step = std::max(1e-3, (cfg.lambda_max - problem.lambda_floor(best.x[0])) / (g - 1));
    std::vector<Vertex> simplex{best};
    for (int d = 0; d < dim; ++d) {
        auto x = best.x;
        const double step = d == 0 ? d_step : l_step;
        x[d] += step;
        auto px = problem.project(x);
        if (px == best.x) {
            x[d] = best.x[d] - step;
            px = problem.project(x);
        }
        simplex.push_back({px, problem.value(px[0], px[1])});
    }

    auto evaluate = [&](std::array<double, 2> x) {
        const auto px = problem.project(x);
        return Vertex{px, problem.value(px[0], px[1])};
    };
    auto by_value = [](const Vertex& a, const Vertex& b) { return a.f > b.f; };

    int iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        std::sort(simplex.begin(), simplex.end(), by_value);
        double diameter = 0.0;
        for (int v = 1; v <= dim; ++v)
            for (int d = 0; d < dim; ++d)
                diameter = std::max(diameter, std::fabs(simplex[v].x[d] - simplex[0].x[d]));
        if (std::isfinite(simplex[dim].f) && simplex[0].f - simplex[dim].f <= cfg.ftol &&
            diameter <= cfg.xtol) {
            out.trace.converged = true;
            break;
        }

        std::array<double, 2> centroid{0.0, 0.0};
        for (int v = 0; v < dim; ++v)
            for (int d = 0; d < dim; ++d) centroid[d] += simplex[v].x[d] / dim;
        auto along = [&](double t) {
            std::array<double, 2> x = centroid;
            for (int d = 0; d < dim; ++d) x[d] = centroid[d] + t * (simplex[dim].x[d] - centroid[d]);
            return x;
        };

        const Vertex reflected = evaluate(along(-1.0));
        if (reflected.f > simplex[0].f) {
            const Vertex expanded = evaluate(along(-2.0));
            simplex[dim] = expanded.f > reflected.f ? expanded : reflected;
            continue;
        }
        if (reflected.f > simplex[dim - 1].f) {
            simplex[dim] = reflected;
            continue;
        }
        const bool outside = reflected.f > simplex[dim].f;
        const Vertex contracted = evaluate(along(outside ? -0.5 : 0.5));
        if (contracted.f > std::max(simplex[dim].f, outside ? reflected.f : kNegInf)) {
            simplex[dim] = contracted;
            continue;
        }
        for (int v = 1; v <= dim; ++v) {
            std::array<double, 2> x = simplex[0].x;
            for (int d = 0; d < dim; ++d) x[d] = 0.5 * (simplex[0].x[d] + simplex[v].x[d]);
            simplex[v] = evaluate(x);
        }
    }
    std::sort(simplex.begin(), simplex.end(), by_value);
    const Vertex& top = simplex[0].f >= best.f ? simplex[0] : best;

    out.delta_hat = top.x[0];
    out.log_likelihood = top.f;
    out.trace.iterations = iter;
    out.trace.evaluations = problem.evaluations();
    out.at_boundary.delta_lower = top.x[0] <= cfg.delta_min + kFlagTolerance;
    out.at_boundary.delta_upper = top.x[0] >= cfg.delta_max - kFlagTolerance;
    if (dim == 2) {
        out.lambda_hat = top.x[1];
        out.at_boundary.lambda_lower = top.x[1] <= problem.lambda_floor(top.x[0]) + kFlagTolerance;
        out.at_boundary.lambda_upper = top.x[1] >= cfg.lambda_max - kFlagTolerance;
    }
    return out;
}

}  // namespace

double log_likelihood(const ForecastSet& f, const CompoundSymmetry& cs) {
    if (cs.n != static_cast<int>(f.size()))
        throw DomainError("log_likelihood: n does not match the forecast count");
    return stats_log_likelihood(event_stats(f), cs.delta, cs.lambda);
}

Eigen::Vector2d log_likelihood_gradient(const ForecastSet& f, const CompoundSymmetry& cs) {
    if (cs.n != static_cast<int>(f.size()))
        throw DomainError("log_likelihood_gradient: n does not match the forecast count");
    return stats_gradient(event_stats(f), cs.delta, cs.lambda);
}

double log_likelihood_pooled(std::span<const ForecastSet> events, double delta, double lambda) {
    double total = 0.0;
    for (const auto& e : events) total += stats_log_likelihood(event_stats(e), delta, lambda);
    return total;
}

MleResult fit_mle(const ForecastSet& f, const MleConfig& config) {
    Problem problem({event_stats(f)}, config);
    return run(problem);
}

MleResult fit_mle_pooled(std::span<const ForecastSet> events, const MleConfig& config) {
    std::vector<EventStats> stats;
    stats.reserve(events.size());
    for (const auto& e : events) stats.push_back(event_stats(e));
    Problem problem(std::move(stats), config);
    return run(problem);
}

}  // namespace infopool
