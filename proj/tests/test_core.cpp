#include <doctest.h>

#include <cmath>

#include "infopool/core.hpp"
#include "infopool/errors.hpp"
#include "oracles.hpp"

using namespace infopool;

TEST_CASE("probit reference values") {
    CHECK(probit(0.5) == 0.0);
    // Frozen from a 30-digit erfinv evaluation and cross-checked by bisection.
    CHECK(probit(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(probit(0.7) == doctest::Approx(0.5244005127080408).epsilon(1e-14));
    CHECK(std::fabs(probit(0.975) - oracle::probit(0.975)) < 1e-12);
    CHECK(std::fabs(probit(0.7) - oracle::probit(0.7)) < 1e-12);
}

TEST_CASE("probit rejects uncensored extremes") {
    CHECK_THROWS_AS(probit(0.0), DomainError);
    CHECK_THROWS_AS(probit(1.0), DomainError);
    CHECK_THROWS_AS(probit(-0.1), DomainError);
    CHECK_THROWS_AS(probit(std::nan("")), DomainError);
    CHECK_THROWS_WITH_AS(probit(1.0), doctest::Contains("censor first"), DomainError);
}

TEST_CASE("probit inverts the normal CDF") {
    // The lower tail is resolved to full relative precision, so the round trip
    // holds to 1e-12 across [-6, 0]. For z > 0 the upper tail is obtained by
    // symmetry; the same bound holds wherever Phi(z) itself is representable
    // to that accuracy (z <= 4).
    for (double z = -6.0; z <= 0.0; z += 0.001)
        REQUIRE(std::fabs(probit(normal_cdf(z)) - z) < 1e-12);
    for (double z = 0.0; z <= 4.0; z += 0.001)
        REQUIRE(std::fabs(probit(normal_cdf(z)) - z) < 1e-12);
    for (double z = 0.0; z <= 6.0; z += 0.001) {
        const double q = normal_cdf(-z);
        REQUIRE(probit(1.0 - q) == doctest::Approx(-probit(q)).epsilon(1e-15 / q + 1e-12));
    }
    for (double p = 1e-300; p < 0.5; p *= 1.7)
        REQUIRE(normal_cdf(probit(p)) == doctest::Approx(p).epsilon(1e-13));
}

TEST_CASE("censor") {
    CHECK(censor(0.0, 0.001) == 0.001);
    CHECK(censor(1.0, 0.001) == 0.999);
    CHECK(censor(0.4, 0.001) == 0.4);
    CHECK(censor(censor(1.0)) == censor(1.0));
    CHECK_THROWS_AS(censor(0.3, 0.0), DomainError);
    CHECK_THROWS_AS(censor(0.3, 0.5), DomainError);
}

TEST_CASE("log-odds transform") {
    CHECK(logit(0.5) == 0.0);
    CHECK(inv_logit(logit(0.3)) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(inv_logit(-800.0) >= 0.0);
    CHECK_THROWS_AS(logit(1.0), DomainError);
}

TEST_CASE("marginal density reference values") {
    for (double p : {0.01, 0.2, 0.5, 0.77, 0.999}) CHECK(marginal_density(p, 0.5) == doctest::Approx(1.0));
    CHECK(marginal_density(0.5, 0.3) == doctest::Approx(std::sqrt(0.7 / 0.3)).epsilon(1e-14));
    CHECK(marginal_density(0.5, 0.7) == doctest::Approx(std::sqrt(0.3 / 0.7)).epsilon(1e-14));
    CHECK(marginal_density(0.5, 0.3) == doctest::Approx(1.52753).epsilon(1e-5));
    CHECK(marginal_density(0.5, 0.7) == doctest::Approx(0.65465).epsilon(1e-5));
    CHECK_THROWS_AS(marginal_density(0.5, 0.0), DomainError);
    CHECK_THROWS_AS(marginal_density(0.5, 1.0), DomainError);
}

TEST_CASE("marginal density integrates to one") {
    for (double delta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        // Substitute p = Phi(z); the integrand m(Phi(z)) phi(z) is even in z, and
        // the lower half avoids Phi rounding to 1.
        const double mass = 2.0 * oracle::integrate(
            [&](double z) { return marginal_density(normal_cdf(z), delta) * normal_pdf(z); },
            -30.0, 0.0, 1e-11);
        CAPTURE(delta);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("marginal density is peaked or U-shaped around one half") {
    for (double delta : {0.1, 0.3, 0.45}) {
        const double mid = marginal_density(0.5, delta);
        for (double p = 0.01; p < 0.995; p += 0.01)
            if (std::fabs(p - 0.5) > 1e-9) CHECK(marginal_density(p, delta) < mid);
    }
    for (double delta : {0.55, 0.7, 0.9}) {
        const double mid = marginal_density(0.5, delta);
        for (double p = 0.01; p < 0.995; p += 0.01)
            if (std::fabs(p - 0.5) > 1e-9) CHECK(marginal_density(p, delta) > mid);
    }
}

TEST_CASE("forecast sets and signal vectors") {
    ForecastSet f{"e", {0.2, 0.8}, 1};
    CHECK_NOTHROW(f.validate());
    CHECK_THROWS_AS((ForecastSet{"e", {}, {}}.validate()), DomainError);
    CHECK_THROWS_AS((ForecastSet{"e", {1.2}, {}}.validate()), DomainError);
    CHECK_THROWS_AS((ForecastSet{"e", {0.2}, 2}.validate()), DomainError);

    const auto c = censored(ForecastSet{"e", {0.0, 1.0, 0.3}, {}});
    CHECK(c.forecasts == std::vector<double>{0.001, 0.999, 0.3});

    const std::vector<double> p{0.7, 0.7};
    const std::vector<double> d{0.25, 0.25};
    const auto x = signal_vector(p, d);
    CHECK(x[0] == doctest::Approx(0.4541441657627477).epsilon(1e-14));
    CHECK_THROWS_AS(signal_vector(p, std::vector<double>{0.25, 1.0}), DomainError);
    CHECK_THROWS_AS(signal_vector(p, std::vector<double>{0.25}), DomainError);
}
