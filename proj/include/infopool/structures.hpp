#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace infopool {

/// A set of forecasters encoded as a bitmask; bit i set means forecaster i
/// (zero-based) belongs to the set.
using Subset = std::uint64_t;

std::vector<int> subset_members(Subset s);
Subset subset_from_members(std::span<const int> members);

/// Covariance structure of the forecasters' signals: delta_i on the diagonal,
/// pairwise overlaps rho_ij off it, plus the optional mass delta' of the union
/// of all information sets (not determined by the matrix once n >= 3).
///
/// The constructor only checks shape, symmetry and that every entry lies in
/// [0, 1]. Coherence is a separate question, answered by the check_* functions.
class InfoStructure {
public:
    explicit InfoStructure(Eigen::MatrixXd sigma22,
                           std::optional<double> delta_prime = std::nullopt);

    int n() const { return static_cast<int>(sigma22_.rows()); }
    double delta(int i) const { return sigma22_(i, i); }
    double rho(int i, int j) const { return sigma22_(i, j); }
    Eigen::VectorXd deltas() const { return sigma22_.diagonal(); }
    const Eigen::MatrixXd& sigma22() const { return sigma22_; }
    const std::optional<double>& delta_prime() const { return delta_prime_; }

    InfoStructure with_delta_prime(std::optional<double> delta_prime) const {
        return InfoStructure(sigma22_, delta_prime);
    }

private:
    Eigen::MatrixXd sigma22_;
    std::optional<double> delta_prime_;
};

/// Exchangeable structure: every forecaster holds mass delta and every pair
/// shares the proportion lambda of it, so Sigma22 = delta (1 - lambda) I + delta lambda J.
struct CompoundSymmetry {
    int n = 1;
    double delta = 0.0;
    double lambda = 0.0;

    Eigen::MatrixXd sigma22() const;
    InfoStructure structure(std::optional<double> delta_prime = std::nullopt) const;
    /// N / ((N - 1) lambda + 1).
    double gamma() const;
};

/// Explicit information pool: masses of the cells used by exactly the
/// forecasters in each subset, plus the mass nobody uses.
class CellMassPartition {
public:
    CellMassPartition(int n, std::map<Subset, double> cells, double outside);

    int n() const { return n_; }
    const std::map<Subset, double>& cells() const { return cells_; }
    double outside() const { return outside_; }

    double total() const;
    /// delta' = sum of all cell masses.
    double union_mass() const;
    Eigen::VectorXd deltas() const;
    Eigen::MatrixXd sigma22() const;
    /// Induced structure, delta' included.
    InfoStructure structure() const;

private:
    int n_;
    std::map<Subset, double> cells_;
    double outside_;
};

enum class Verdict { coherent, boundary, incoherent };
std::string to_string(Verdict v);

struct CoherenceOptions {
    int max_n = 12;
    /// Residuals at or below this are coherent.
    double exact_tolerance = 1e-12;
    /// Residuals up to this are reported as boundary instead of incoherent.
    double tolerance = 1e-9;
};

/// Separating inequality proving incoherence:
///   constant + sum_{i<=j} weights(i,j) x_i x_j + union_weight [x != 0] <= 0
/// for every vertex x in {0,1}^n, yet strictly positive at the checked structure.
struct CoherenceCertificate {
    double constant = 0.0;
    Eigen::MatrixXd weights;  // upper triangle used
    double union_weight = 0.0;

    double evaluate(const Eigen::MatrixXd& sigma22, double union_mass) const;
};

struct CoherenceVerdict {
    Verdict verdict = Verdict::incoherent;
    double residual = 0.0;
    std::optional<CellMassPartition> realization;
    std::optional<CoherenceCertificate> certificate;
};

/// Exact test of membership in the correlation polytope by LP feasibility over
/// all 2^n vertex matrices. When delta' is present it is imposed as well.
/// Throws DimensionError above options.max_n.
CoherenceVerdict check_coherence_exact(const InfoStructure& s, const CoherenceOptions& options = {});

/// Smallest and largest union mass delta' over all realizations of s.
std::pair<double, double> delta_prime_range(const InfoStructure& s,
                                            const CoherenceOptions& options = {});

struct NecessaryVerdict {
    Verdict verdict = Verdict::coherent;  // coherent here means "pass"
    std::string reason;
    double violation = 0.0;
};

/// Necessary conditions only (pairwise bounds, moment-matrix PSD, and union
/// bounds when delta' is present). A failure proves incoherence; a pass does not
/// prove coherence.
NecessaryVerdict check_coherence_relaxed(const InfoStructure& s, const CoherenceOptions& options = {});

/// Smallest coherent overlap proportion for n exchangeable forecasters of mass delta.
double lambda_lower_bound(int n, double delta);

/// True iff (n, delta, lambda) describes a coherent exchangeable structure.
bool compound_feasible(const CompoundSymmetry& cs);

/// Range of delta' attainable by realizations of cs. Throws InfeasibleError
/// when cs itself is not feasible.
std::pair<double, double> compound_delta_prime_range(const CompoundSymmetry& cs);

/// Largest attainable delta', the default used where delta' is needed but not given.
double compound_max_delta_prime(const CompoundSymmetry& cs);

/// Exchangeable realization summarized by level: entry k - 1 is the total mass of
/// points covered by exactly k forecasters. Without delta' the realization with
/// the smallest union is returned.
std::vector<double> compound_levels(const CompoundSymmetry& cs,
                                    std::optional<double> delta_prime = std::nullopt);

/// Builds a partition with the requested (delta, lambda). Without delta' uses
/// one common cell of mass lambda*delta plus n private cells when that fits in
/// the pool, and the smallest-union exchangeable realization otherwise.
CellMassPartition realize(const CompoundSymmetry& cs,
                          std::optional<double> delta_prime = std::nullopt);

}  // namespace infopool
