#pragma once

// Test-only reference implementations. Nothing here calls into the library's
// numerical paths, so agreement with them is an independent check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double cdf(double z) { return 0.5 * (1.0 + std::erf(z / std::numbers::sqrt2)); }

/// Bisection on the erf-based CDF; only accurate away from the far tails.
inline double probit(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int depth = 22) {
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double l, double r, double fl, double fm, double fr, double whole, int d) {
            const double m = 0.5 * (l + r);
            const double lm = 0.5 * (l + m), rm = 0.5 * (m + r);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - l) / 6.0 * (fl + 4.0 * flm + fm);
            const double right = (r - m) / 6.0 * (fm + 4.0 * frm + fr);
            if (d <= 0 || std::fabs(left + right - whole) <= 15.0 * tol * std::ldexp(1.0, d - depth))
                return left + right + (left + right - whole) / 15.0;
            return rec(l, m, fl, flm, fm, left, d - 1) + rec(m, r, fm, frm, fr, right, d - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), depth);
}

/// Generic dense log-density of N(0, cov) at x.
inline double gaussian_log_density(const Eigen::VectorXd& x, const Eigen::MatrixXd& cov) {
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const Eigen::VectorXd y = llt.matrixL().solve(x);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * y.squaredNorm() - 0.5 * log_det - 0.5 * x.size() * std::log(2.0 * std::numbers::pi);
}

/// Random pool partition over n forecasters: masses of all 2^n - 1 cells plus the
/// outside mass, Dirichlet(1) distributed, with a fraction of cells zeroed.
struct RandomPartition {
    int n;
    std::map<std::uint64_t, double> cells;
    double outside;
};

inline RandomPartition random_partition(std::mt19937_64& rng, int n, double zero_fraction = 0.3) {
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<double> w(count);
    double total = 0.0;
    for (std::uint64_t s = 0; s < count; ++s) {
        w[s] = (s != 0 && unif(rng) < zero_fraction) ? 0.0 : expo(rng);
        total += w[s];
    }
    RandomPartition p{n, {}, w[0] / total};
    for (std::uint64_t s = 1; s < count; ++s)
        if (w[s] > 0.0) p.cells[s] = w[s] / total;
    return p;
}

inline Eigen::MatrixXd induced_sigma(const RandomPartition& p) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p.n, p.n);
    for (const auto& [s, mass] : p.cells)
        for (int i = 0; i < p.n; ++i)
            for (int j = 0; j < p.n; ++j)
                if (((s >> i) & 1U) && ((s >> j) & 1U)) m(i, j) += mass;
    return m;
}

}  // namespace oracle
