#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace infopool {

inline constexpr double kDefaultCensorEps = 1e-3;

/// Standard normal CDF.
double normal_cdf(double z);
/// Standard normal density.
double normal_pdf(double z);

/// Inverse of the standard normal CDF. Throws DomainError unless 0 < p < 1;
/// forecasts of exactly 0 or 1 have to be censored first.
double probit(double p);

double logit(double p);
double inv_logit(double x);

/// Clamps p into [eps, 1 - eps]. Requires 0 < eps < 0.5.
double censor(double p, double eps = kDefaultCensorEps);

/// Density of a single calibrated forecast whose signal carries information
/// mass delta:
///   m(p | delta) = sqrt((1 - delta) / delta) * exp(probit(p)^2 * (1 - 1 / (2 delta)))
/// Uniform for delta = 1/2; peaked at 1/2 below that, U-shaped above.
double marginal_density(double p, double delta);

/// Probability forecasts reported by N forecasters for one binary event.
struct ForecastSet {
    std::string event_id;
    std::vector<double> forecasts;
    std::optional<int> outcome;

    std::size_t size() const { return forecasts.size(); }

    /// Throws DomainError when empty, when a forecast leaves [0, 1], or when
    /// the outcome is not 0/1.
    void validate() const;
};

/// Returns a copy with every forecast censored to [eps, 1 - eps].
ForecastSet censored(const ForecastSet& f, double eps = kDefaultCensorEps);

/// Information-weighted probit scores x_i = probit(p_i) * sqrt(1 - delta_i).
/// Both spans must have the same length; each delta_i must be < 1.
std::vector<double> signal_vector(std::span<const double> forecasts,
                                  std::span<const double> delta);

}  // namespace infopool
