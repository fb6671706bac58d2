#include "infopool/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "infopool/errors.hpp"

namespace infopool {

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Simplex {
public:
    Simplex(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const LpOptions& options)
        : m_(a.rows()), n_(a.cols()), options_(options), sign_(m_), basis_(m_) {
        // Columns: n original, m artificial, then the right-hand side.
        t_ = Tableau::Zero(m_ + 1, n_ + m_ + 1);
        for (Eigen::Index i = 0; i < m_; ++i) {
            sign_[i] = b[i] < 0.0 ? -1.0 : 1.0;
            t_.row(i).head(n_) = sign_[i] * a.row(i);
            t_(i, n_ + i) = 1.0;
            t_(i, rhs()) = sign_[i] * b[i];
            basis_[i] = n_ + i;
        }
    }

    // Returns the iteration status; the residual is left in infeasibility().
    LpStatus phase_one() {
        t_.row(m_).setZero();
        for (Eigen::Index i = 0; i < m_; ++i) {
            t_.row(m_).head(n_) -= t_.row(i).head(n_);
            t_(m_, rhs()) -= t_(i, rhs());
        }
        return iterate(n_ + m_);
    }

    double infeasibility() const { return -t_(m_, rhs()); }

    Eigen::VectorXd farkas() const {
        Eigen::VectorXd y(m_);
        for (Eigen::Index i = 0; i < m_; ++i) y[i] = sign_[i] * (1.0 - t_(m_, n_ + i));
        return y;
    }

    void evict_artificials() {
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            Eigen::Index best = -1;
            double best_abs = options_.pivot_tolerance;
            for (Eigen::Index j = 0; j < n_; ++j) {
                if (std::fabs(t_(i, j)) > best_abs) {
                    best_abs = std::fabs(t_(i, j));
                    best = j;
                }
            }
            // A row with no usable original column is redundant; its artificial
            // stays basic at zero and is never priced again.
            if (best >= 0) pivot(i, best);
        }
    }

    LpStatus phase_two(const Eigen::VectorXd& c) {
        t_.row(m_).setZero();
        t_.row(m_).head(n_) = c.transpose();
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double cb = basis_[i] < n_ ? c[basis_[i]] : 0.0;
            if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
        }
        return iterate(n_);
    }

    Eigen::VectorXd primal() const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
        for (Eigen::Index i = 0; i < m_; ++i)
            if (basis_[i] < n_) x[basis_[i]] = std::max(0.0, t_(i, rhs()));
        return x;
    }

    int iterations() const { return iterations_; }

private:
    Eigen::Index rhs() const { return n_ + m_; }

    void pivot(Eigen::Index row, Eigen::Index col) {
        t_.row(row) /= t_(row, col);
        for (Eigen::Index i = 0; i <= m_; ++i) {
            if (i == row) continue;
            const double factor = t_(i, col);
            if (factor != 0.0) t_.row(i) -= factor * t_.row(row);
        }
        basis_[row] = col;
        ++iterations_;
    }

    // Prices columns [0, priced) only.
    LpStatus iterate(Eigen::Index priced) {
        int degenerate_run = 0;
        while (true) {
            if (iterations_ >= options_.max_iterations) return LpStatus::iteration_limit;
            const bool bland = degenerate_run > 50;
            Eigen::Index enter = -1;
            double most_negative = -options_.optimality_tolerance;
            for (Eigen::Index j = 0; j < priced; ++j) {
                const double r = t_(m_, j);
                if (r < most_negative) {
                    enter = j;
                    if (bland) break;
                    most_negative = r;
                }
            }
            if (enter < 0) return LpStatus::optimal;

            Eigen::Index leave = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double coef = t_(i, enter);
                if (coef <= options_.pivot_tolerance) continue;
                const double ratio = t_(i, rhs()) / coef;
                if (ratio < best_ratio - 1e-15 ||
                    (ratio <= best_ratio + 1e-15 && leave >= 0 && basis_[i] < basis_[leave])) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
            if (leave < 0) return LpStatus::unbounded;
            degenerate_run = best_ratio <= 1e-14 ? degenerate_run + 1 : 0;
            pivot(leave, enter);
        }
    }

    Eigen::Index m_;
    Eigen::Index n_;
    LpOptions options_;
    Eigen::VectorXd sign_;
    std::vector<Eigen::Index> basis_;
    Tableau t_;
    int iterations_ = 0;
};

}  // namespace

LpSolution solve_standard_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& c, const LpOptions& options) {
    if (a.rows() != b.size() || a.cols() != c.size())
        throw DomainError("solve_standard_form: inconsistent dimensions");

    Simplex simplex(a, b, options);
    LpSolution out;
    const LpStatus phase_one = simplex.phase_one();
    out.infeasibility = simplex.infeasibility();
    if (phase_one == LpStatus::iteration_limit) {
        out.status = phase_one;
        out.iterations = simplex.iterations();
        return out;
    }
    if (out.infeasibility > options.feasibility_tolerance) {
        out.status = LpStatus::infeasible;
        out.farkas = simplex.farkas();
        out.iterations = simplex.iterations();
        return out;
    }
    simplex.evict_artificials();
    out.status = simplex.phase_two(c);
    out.x = simplex.primal();
    out.objective = c.dot(out.x);
    out.iterations = simplex.iterations();
    return out;
}

}  // namespace infopool
