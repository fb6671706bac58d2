#include "infopool/structures.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "infopool/errors.hpp"
#include "infopool/lp.hpp"

namespace infopool {

namespace {

constexpr double kEntryTolerance = 1e-12;
constexpr std::size_t kMaxExpandedCells = std::size_t{1} << 16;

bool in_unit(double v) { return v >= -kEntryTolerance && v <= 1.0 + kEntryTolerance; }

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Next subset with the same popcount (Gosper's hack).
Subset next_combination(Subset s) {
    const Subset c = s & (~s + 1);
    const Subset r = s + c;
    return (((r ^ s) >> 2) / c) | r;
}

struct CorrelationLp {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::Index union_row = -1;
};

// Columns are the 2^n vertices x; rows are sum w = 1, one row per entry (i <= j)
// of Sigma22, and optionally the union mass sum_{x != 0} w = delta'.
CorrelationLp correlation_lp(const InfoStructure& s, bool with_union) {
    const int n = s.n();
    const Eigen::Index cols = Eigen::Index{1} << n;
    const Eigen::Index entry_rows = n * (n + 1) / 2;
    CorrelationLp lp;
    lp.a = Eigen::MatrixXd::Zero(1 + entry_rows + (with_union ? 1 : 0), cols);
    lp.b = Eigen::VectorXd::Zero(lp.a.rows());
    lp.a.row(0).setOnes();
    lp.b[0] = 1.0;
    Eigen::Index row = 1;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j, ++row) {
            const Subset pair = (Subset{1} << i) | (Subset{1} << j);
            for (Eigen::Index x = 0; x < cols; ++x)
                if ((static_cast<Subset>(x) & pair) == pair) lp.a(row, x) = 1.0;
            lp.b[row] = s.rho(i, j);
        }
    }
    if (with_union) {
        lp.union_row = row;
        lp.a.row(row).setOnes();
        lp.a(row, 0) = 0.0;
        lp.b[row] = *s.delta_prime();
    }
    return lp;
}

void require_exact_size(int n, const CoherenceOptions& options) {
    if (n > options.max_n || n > 30) {
        std::ostringstream msg;
        msg << "exact coherence check limited to n <= " << options.max_n << " (got " << n
            << "); use check_coherence_relaxed";
        throw DimensionError(msg.str());
    }
}

CellMassPartition partition_from_weights(int n, const Eigen::VectorXd& w) {
    std::map<Subset, double> cells;
    for (Eigen::Index x = 1; x < w.size(); ++x)
        if (w[x] > 0.0) cells.emplace(static_cast<Subset>(x), w[x]);
    return CellMassPartition(n, std::move(cells), std::max(0.0, w[0]));
}

struct LevelLp {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
};

// Variables: level masses M_1..M_n (measure covered by exactly k forecasters) and
// the unused mass. Rows: first moment, second factorial moment, total, [union].
LevelLp level_lp(const CompoundSymmetry& cs, std::optional<double> delta_prime) {
    const int n = cs.n;
    LevelLp lp;
    lp.a = Eigen::MatrixXd::Zero(delta_prime ? 4 : 3, n + 1);
    lp.b = Eigen::VectorXd::Zero(lp.a.rows());
    for (int k = 1; k <= n; ++k) {
        lp.a(0, k - 1) = k;
        lp.a(1, k - 1) = static_cast<double>(k) * (k - 1);
        lp.a(2, k - 1) = 1.0;
        if (delta_prime) lp.a(3, k - 1) = 1.0;
    }
    lp.a(2, n) = 1.0;
    lp.b[0] = n * cs.delta;
    lp.b[1] = static_cast<double>(n) * (n - 1) * cs.lambda * cs.delta;
    lp.b[2] = 1.0;
    if (delta_prime) lp.b[3] = *delta_prime;
    return lp;
}

void require_feasible(const CompoundSymmetry& cs) {
    if (!compound_feasible(cs)) {
        std::ostringstream msg;
        msg << "compound symmetry (n=" << cs.n << ", delta=" << cs.delta
            << ", lambda=" << cs.lambda << ") is not coherent";
        throw InfeasibleError(msg.str());
    }
}

}  // namespace

std::vector<int> subset_members(Subset s) {
    std::vector<int> out;
    for (int i = 0; s != 0; ++i, s >>= 1)
        if (s & 1U) out.push_back(i);
    return out;
}

Subset subset_from_members(std::span<const int> members) {
    Subset s = 0;
    for (int i : members) {
        if (i < 0 || i >= 64) throw DomainError("subset member index out of range");
        s |= Subset{1} << i;
    }
    return s;
}

InfoStructure::InfoStructure(Eigen::MatrixXd sigma22, std::optional<double> delta_prime)
    : sigma22_(std::move(sigma22)), delta_prime_(delta_prime) {
    if (sigma22_.rows() == 0 || sigma22_.rows() != sigma22_.cols())
        throw DimensionError("information structure must be a non-empty square matrix");
    const Eigen::Index n = sigma22_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!in_unit(sigma22_(i, j)))
                throw DomainError("information structure entries must lie in [0, 1]");
            if (std::fabs(sigma22_(i, j) - sigma22_(j, i)) > kEntryTolerance)
                throw DomainError("information structure must be symmetric");
        }
    }
    if (delta_prime_ && !in_unit(*delta_prime_))
        throw DomainError("delta' must lie in [0, 1]");
}

Eigen::MatrixXd CompoundSymmetry::sigma22() const {
    if (n < 1) throw DomainError("compound symmetry needs n >= 1");
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, lambda * delta);
    m.diagonal().setConstant(delta);
    return m;
}

InfoStructure CompoundSymmetry::structure(std::optional<double> delta_prime) const {
    return InfoStructure(sigma22(), delta_prime);
}

double CompoundSymmetry::gamma() const { return n / ((n - 1) * lambda + 1.0); }

CellMassPartition::CellMassPartition(int n, std::map<Subset, double> cells, double outside)
    : n_(n), cells_(std::move(cells)), outside_(outside) {
    if (n_ < 1 || n_ > 64) throw DomainError("partition needs 1 <= n <= 64 forecasters");
    if (!(outside_ >= 0.0)) throw DomainError("partition: outside mass must be nonnegative");
    const Subset universe = n_ == 64 ? ~Subset{0} : (Subset{1} << n_) - 1;
    for (const auto& [subset, mass] : cells_) {
        if (subset == 0 || (subset & ~universe) != 0)
            throw DomainError("partition: cell subsets must be nonempty subsets of the forecasters");
        if (!(mass >= 0.0)) throw DomainError("partition: cell masses must be nonnegative");
    }
    if (std::fabs(total() - 1.0) > 1e-9)
        throw DomainError("partition: cell masses plus outside mass must sum to 1");
}

double CellMassPartition::total() const { return union_mass() + outside_; }

double CellMassPartition::union_mass() const {
    double sum = 0.0;
    for (const auto& [subset, mass] : cells_) sum += mass;
    return sum;
}

Eigen::VectorXd CellMassPartition::deltas() const { return sigma22().diagonal(); }

Eigen::MatrixXd CellMassPartition::sigma22() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& [subset, mass] : cells_) {
        const auto members = subset_members(subset);
        for (int i : members)
            for (int j : members) m(i, j) += mass;
    }
    return m;
}

InfoStructure CellMassPartition::structure() const {
    return InfoStructure(sigma22(), std::min(1.0, union_mass()));
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::coherent: return "coherent";
        case Verdict::boundary: return "boundary";
        case Verdict::incoherent: return "incoherent";
    }
    return "unknown";
}

double CoherenceCertificate::evaluate(const Eigen::MatrixXd& sigma22, double union_mass) const {
    double v = constant + union_weight * union_mass;
    for (Eigen::Index i = 0; i < sigma22.rows(); ++i)
        for (Eigen::Index j = i; j < sigma22.cols(); ++j) v += weights(i, j) * sigma22(i, j);
    return v;
}

CoherenceVerdict check_coherence_exact(const InfoStructure& s, const CoherenceOptions& options) {
    const int n = s.n();
    require_exact_size(n, options);
    const CorrelationLp lp = correlation_lp(s, s.delta_prime().has_value());

    LpOptions lp_options;
    lp_options.feasibility_tolerance = options.tolerance;
    const LpSolution sol =
        solve_standard_form(lp.a, lp.b, Eigen::VectorXd::Zero(lp.a.cols()), lp_options);

    if (sol.status == LpStatus::iteration_limit)
        throw Error("check_coherence_exact: simplex iteration limit reached");
    CoherenceVerdict out;
    out.residual = sol.infeasibility;
    if (sol.status == LpStatus::infeasible) {
        out.verdict = Verdict::incoherent;
        CoherenceCertificate cert;
        cert.constant = sol.farkas[0];
        cert.weights = Eigen::MatrixXd::Zero(n, n);
        Eigen::Index row = 1;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j, ++row) cert.weights(i, j) = sol.farkas[row];
        if (lp.union_row >= 0) cert.union_weight = sol.farkas[lp.union_row];
        out.certificate = std::move(cert);
        return out;
    }
    out.verdict = sol.infeasibility <= options.exact_tolerance ? Verdict::coherent : Verdict::boundary;
    // The LP solution may carry roundoff; rescale so the masses sum to exactly one.
    Eigen::VectorXd w = sol.x;
    w /= w.sum();
    out.realization = partition_from_weights(n, w);
    return out;
}

std::pair<double, double> delta_prime_range(const InfoStructure& s, const CoherenceOptions& options) {
    require_exact_size(s.n(), options);
    const CorrelationLp lp = correlation_lp(s.with_delta_prime(std::nullopt), false);
    LpOptions lp_options;
    lp_options.feasibility_tolerance = options.tolerance;
    Eigen::VectorXd c = Eigen::VectorXd::Ones(lp.a.cols());
    c[0] = 0.0;
    const LpSolution lo = solve_standard_form(lp.a, lp.b, c, lp_options);
    if (lo.status == LpStatus::infeasible)
        throw InfeasibleError("delta_prime_range: structure is not coherent");
    const LpSolution hi = solve_standard_form(lp.a, lp.b, -c, lp_options);
    if (lo.status != LpStatus::optimal || hi.status != LpStatus::optimal)
        throw Error("delta_prime_range: simplex did not converge");
    return {lo.objective, -hi.objective};
}

NecessaryVerdict check_coherence_relaxed(const InfoStructure& s, const CoherenceOptions& options) {
    const int n = s.n();
    NecessaryVerdict out;
    auto record = [&](double violation, const std::string& reason) {
        if (violation > out.violation) {
            out.violation = violation;
            out.reason = reason;
        }
    };

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double r = s.rho(i, j);
            std::ostringstream pair;
            pair << "(" << i << "," << j << ")";
            record(r - std::min(s.delta(i), s.delta(j)), "overlap exceeds a set size at " + pair.str());
            record(s.delta(i) + s.delta(j) - 1.0 - r, "Frechet lower bound violated at " + pair.str());
        }
    }

    Eigen::MatrixXd moment(n + 1, n + 1);
    moment(0, 0) = 1.0;
    moment.block(0, 1, 1, n) = s.deltas().transpose();
    moment.block(1, 0, n, 1) = s.deltas();
    moment.block(1, 1, n, n) = s.sigma22();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(moment, Eigen::EigenvaluesOnly);
    record(-eig.eigenvalues().minCoeff(), "moment matrix is not positive semidefinite");

    if (const auto& dp = s.delta_prime()) {
        const double sum_delta = s.deltas().sum();
        double sum_rho = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) sum_rho += s.rho(i, j);
        record(s.deltas().maxCoeff() - *dp, "delta' is smaller than a single information set");
        record(*dp - std::min(1.0, sum_delta), "delta' exceeds the sum of the information sets");
        record(sum_delta - sum_rho - *dp, "delta' violates the Bonferroni lower bound");
    }

    if (out.violation <= options.exact_tolerance) {
        out.verdict = Verdict::coherent;
        out.reason.clear();
    } else {
        out.verdict = out.violation <= options.tolerance ? Verdict::boundary : Verdict::incoherent;
    }
    out.violation = std::max(0.0, out.violation);
    return out;
}

double lambda_lower_bound(int n, double delta) {
    if (n <= 1 || delta <= 0.0) return 0.0;
    // Spread the n*delta units of coverage as evenly as the pool allows: points
    // covered floor(n delta) or floor(n delta) + 1 times.
    const double coverage = n * delta;
    if (coverage <= 1.0) return 0.0;
    const double m = std::floor(coverage);
    const double frac = coverage - m;
    return m * (m - 1.0 + 2.0 * frac) / (static_cast<double>(n) * (n - 1) * delta);
}

bool compound_feasible(const CompoundSymmetry& cs) {
    if (cs.n < 1) return false;
    if (!(cs.delta >= 0.0 && cs.delta <= 1.0)) return false;
    if (!(cs.lambda <= 1.0 && cs.lambda >= 0.0)) return false;
    return cs.lambda >= lambda_lower_bound(cs.n, cs.delta) - kEntryTolerance;
}

double compound_max_delta_prime(const CompoundSymmetry& cs) {
    require_feasible(cs);
    const double spread = cs.lambda * cs.delta + cs.n * cs.delta * (1.0 - cs.lambda);
    return std::min(1.0, cs.n == 1 ? cs.delta : spread);
}

std::pair<double, double> compound_delta_prime_range(const CompoundSymmetry& cs) {
    require_feasible(cs);
    const LevelLp lp = level_lp(cs, std::nullopt);
    Eigen::VectorXd c = Eigen::VectorXd::Ones(cs.n + 1);
    c[cs.n] = 0.0;
    const LpSolution lo = solve_standard_form(lp.a, lp.b, c);
    if (lo.status != LpStatus::optimal)
        throw InfeasibleError("compound_delta_prime_range: no exchangeable realization");
    return {lo.objective, compound_max_delta_prime(cs)};
}

std::vector<double> compound_levels(const CompoundSymmetry& cs, std::optional<double> delta_prime) {
    require_feasible(cs);
    const LevelLp lp = level_lp(cs, delta_prime);
    Eigen::VectorXd c = Eigen::VectorXd::Ones(cs.n + 1);
    c[cs.n] = 0.0;
    if (delta_prime) c.setZero();
    const LpSolution sol = solve_standard_form(lp.a, lp.b, c);
    if (sol.status != LpStatus::optimal) {
        std::ostringstream msg;
        msg << "no partition realizes (n=" << cs.n << ", delta=" << cs.delta
            << ", lambda=" << cs.lambda << ")";
        if (delta_prime) msg << " with delta'=" << *delta_prime;
        throw InfeasibleError(msg.str());
    }
    return {sol.x.data(), sol.x.data() + cs.n};
}

CellMassPartition realize(const CompoundSymmetry& cs, std::optional<double> delta_prime) {
    require_feasible(cs);
    const int n = cs.n;
    if (n > 63) throw DimensionError("realize: at most 63 forecasters");
    const Subset everyone = (Subset{1} << n) - 1;

    const double shared = cs.lambda * cs.delta;
    const double priv = n == 1 ? 0.0 : cs.delta - shared;
    const double spread = n == 1 ? cs.delta : shared + n * priv;
    const bool symmetric =
        spread <= 1.0 + kEntryTolerance &&
        (!delta_prime || std::fabs(*delta_prime - spread) <= kEntryTolerance);
    if (symmetric) {
        std::map<Subset, double> cells;
        if (n == 1) {
            if (cs.delta > 0.0) cells[1] = cs.delta;
        } else {
            if (shared > 0.0) cells[everyone] = shared;
            if (priv > 0.0)
                for (int i = 0; i < n; ++i) cells[Subset{1} << i] = priv;
        }
        return CellMassPartition(n, std::move(cells), std::max(0.0, 1.0 - spread));
    }

    const std::vector<double> levels = compound_levels(cs, delta_prime);
    double cell_count = 0.0;
    for (int k = 1; k <= n; ++k)
        if (levels[k - 1] > 0.0) cell_count += binomial(n, k);
    if (cell_count > static_cast<double>(kMaxExpandedCells))
        throw DimensionError("realize: exchangeable realization has too many cells to expand");

    std::map<Subset, double> cells;
    double used = 0.0;
    for (int k = 1; k <= n; ++k) {
        if (levels[k - 1] <= 0.0) continue;
        const double per_cell = levels[k - 1] / binomial(n, k);
        for (Subset s = (Subset{1} << k) - 1; s <= everyone; s = next_combination(s)) {
            cells[s] = per_cell;
            if (s == everyone) break;
        }
        used += levels[k - 1];
    }
    return CellMassPartition(n, std::move(cells), std::max(0.0, 1.0 - used));
}

}  // namespace infopool
