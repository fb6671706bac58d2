#include "infopool/core.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "infopool/errors.hpp"

namespace infopool {

namespace {

template <std::size_t N>
double horner(const std::array<double, N>& c, double x) {
    double acc = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) acc = acc * x + c[i];
    return acc;
}

// Wichura's AS241 (PPND16) rational approximations, lowest-order first.
constexpr std::array<double, 8> kA = {
    3.3871328727963666080e0,  1.3314166789178437745e+2, 1.9715909503065514427e+3,
    1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
    3.3430575583588128105e+4, 2.5090809287301226727e+3};
constexpr std::array<double, 8> kB = {
    1.0,                      4.2313330701600911252e+1, 6.8718700749205790830e+2,
    5.3941960214247511077e+3, 2.1213794301586595867e+4, 3.9307895800092710610e+4,
    2.8729085735721942674e+4, 5.2264952788528545610e+3};
constexpr std::array<double, 8> kC = {
    1.42343711074968357734e0,  4.63033784615654529590e0,  5.76949722146069140550e0,
    3.64784832476320460504e0,  1.27045825245236838258e0,  2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr std::array<double, 8> kD = {
    1.0,                       2.05319162663775882187e0,  1.67638483018380384940e0,
    6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
    5.47593808499534494600e-4, 1.05075007164441684324e-9};
constexpr std::array<double, 8> kE = {
    6.65790464350110377720e0,  5.46378491116411436990e0,  1.78482653991729133580e0,
    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr std::array<double, 8> kF = {
    1.0,                       5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15};

// Lower half only (p <= 0.5), so 1 - p never loses precision in the caller.
double probit_lower(double p) {
    const double q = p - 0.5;
    double x;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        x = q * horner(kA, r) / horner(kB, r);
    } else {
        double r = std::sqrt(-std::log(p));
        if (r <= 5.0) {
            r -= 1.6;
            x = -horner(kC, r) / horner(kD, r);
        } else {
            r -= 5.0;
            x = -horner(kE, r) / horner(kF, r);
        }
    }
    // One Halley step against the erfc-based CDF.
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double probit(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream msg;
        msg << "probit: probability " << p << " is not strictly inside (0, 1); censor first";
        throw DomainError(msg.str());
    }
    if (p == 0.5) return 0.0;
    return p < 0.5 ? probit_lower(p) : -probit_lower(1.0 - p);
}

double logit(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream msg;
        msg << "logit: probability " << p << " is not strictly inside (0, 1); censor first";
        throw DomainError(msg.str());
    }
    return std::log(p) - std::log1p(-p);
}

double inv_logit(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double censor(double p, double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw DomainError("censor: eps must lie in (0, 0.5)");
    return std::min(std::max(p, eps), 1.0 - eps);
}

double marginal_density(double p, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw DomainError("marginal_density: delta must lie in (0, 1)");
    const double z = probit(p);
    return std::sqrt((1.0 - delta) / delta) * std::exp(z * z * (1.0 - 0.5 / delta));
}

void ForecastSet::validate() const {
    if (forecasts.empty())
        throw DomainError("forecast set '" + event_id + "' is empty");
    for (double p : forecasts) {
        if (!(p >= 0.0 && p <= 1.0)) {
            std::ostringstream msg;
            msg << "forecast set '" << event_id << "': probability " << p << " outside [0, 1]";
            throw DomainError(msg.str());
        }
    }
    if (outcome && *outcome != 0 && *outcome != 1)
        throw DomainError("forecast set '" + event_id + "': outcome must be 0 or 1");
}

ForecastSet censored(const ForecastSet& f, double eps) {
    ForecastSet out = f;
    for (double& p : out.forecasts) p = censor(p, eps);
    return out;
}

std::vector<double> signal_vector(std::span<const double> forecasts,
                                  std::span<const double> delta) {
    if (forecasts.size() != delta.size())
        throw DomainError("signal_vector: forecasts and delta differ in length");
    std::vector<double> x(forecasts.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(delta[i] >= 0.0 && delta[i] < 1.0))
            throw DomainError("signal_vector: delta must lie in [0, 1)");
        x[i] = probit(forecasts[i]) * std::sqrt(1.0 - delta[i]);
    }
    return x;
}

}  // namespace infopool
