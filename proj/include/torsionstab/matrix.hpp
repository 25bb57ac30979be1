#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <utility>
#include <vector>

#include "torsionstab/errors.hpp"

namespace torsionstab {

using Vector = Eigen::VectorXd;

/// Dense real n x n system matrix of dot r = A r.
class RealMatrix {
public:
    explicit RealMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
        if (m_.rows() < 1 || m_.rows() != m_.cols())
            throw PreconditionError("system matrix must be square with n >= 1");
        if (!m_.allFinite())
            throw PreconditionError("system matrix entries must be finite");
    }

    RealMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : RealMatrix(from_rows(rows)) {}

    static RealMatrix identity(int n) { return RealMatrix(Eigen::MatrixXd::Identity(n, n)); }
    static RealMatrix zero(int n) { return RealMatrix(Eigen::MatrixXd::Zero(n, n)); }
    static RealMatrix diagonal(const std::vector<double>& d) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<int>(d.size()),
                                                  static_cast<int>(d.size()));
        for (int i = 0; i < m.rows(); ++i) m(i, i) = d[static_cast<std::size_t>(i)];
        return RealMatrix(std::move(m));
    }

    int n() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& mat() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

    /// Frobenius norm, the scale all snapping tolerances refer to.
    double norm() const { return m_.norm(); }

    double determinant() const { return m_.partialPivLu().determinant(); }

private:
    static Eigen::MatrixXd from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const int n = static_cast<int>(rows.size());
        Eigen::MatrixXd m(n, n ? static_cast<int>(rows.begin()->size()) : 0);
        int i = 0;
        for (const auto& row : rows) {
            int j = 0;
            for (double v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    Eigen::MatrixXd m_;
};

/// e^{tA}. Identity exactly at t = 0; throws OverflowError if any entry of the
/// result leaves the representable range.
inline RealMatrix mat_exp(const RealMatrix& a, double t) {
    if (!std::isfinite(t)) throw PreconditionError("mat_exp: t must be finite");
    if (t == 0.0) return RealMatrix::identity(a.n());
    Eigen::MatrixXd e = (t * a.mat()).exp();
    if (!e.allFinite()) throw OverflowError(t);
    return RealMatrix(std::move(e));
}

namespace detail {

/// |im| below this counts as a real eigenvalue; downstream case analysis
/// needs a hard real-vs-complex decision.
inline bool snap_real(std::complex<double>& z) {
    if (std::abs(z.imag()) < 1e-9 * (1.0 + std::abs(z))) {
        z = {z.real(), 0.0};
        return true;
    }
    return false;
}

}  // namespace detail

/// Eigenvalues with algebraic multiplicity: complex ones in exact conjugate
/// pairs (enforced by averaging), sorted by (Re desc, |Im| asc, Im desc).
inline std::vector<std::complex<double>> eigenvalues(const RealMatrix& a) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(a.mat(), /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw ConvergenceError(40 * a.n());

    std::vector<std::complex<double>> reals, upper, lower;
    for (int i = 0; i < a.n(); ++i) {
        std::complex<double> z = es.eigenvalues()(i);
        if (detail::snap_real(z))
            reals.push_back(z);
        else if (z.imag() > 0)
            upper.push_back(z);
        else
            lower.push_back(z);
    }

    auto by_value = [](const std::complex<double>& x, const std::complex<double>& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return std::abs(x.imag()) < std::abs(y.imag());
    };
    std::sort(upper.begin(), upper.end(), by_value);
    std::sort(lower.begin(), lower.end(), by_value);

    std::vector<std::complex<double>> out = reals;
    for (std::size_t i = 0; i < upper.size() && i < lower.size(); ++i) {
        double re = 0.5 * (upper[i].real() + lower[i].real());
        double im = 0.5 * (upper[i].imag() - lower[i].imag());
        out.emplace_back(re, im);
        out.emplace_back(re, -im);
    }
    // A real matrix cannot have unpaired complex eigenvalues; keep any solver
    // stragglers rather than silently dropping them.
    for (std::size_t i = lower.size(); i < upper.size(); ++i) out.push_back(upper[i]);
    for (std::size_t i = upper.size(); i < lower.size(); ++i) out.push_back(lower[i]);

    std::sort(out.begin(), out.end(),
              [](const std::complex<double>& x, const std::complex<double>& y) {
                  if (x.real() != y.real()) return x.real() > y.real();
                  if (std::abs(x.imag()) != std::abs(y.imag()))
                      return std::abs(x.imag()) < std::abs(y.imag());
                  return x.imag() > y.imag();
              });
    return out;
}

/// Number of singular values exceeding tol * (largest singular value).
inline int numerical_rank(const Eigen::MatrixXd& m, double tol) {
    if (tol <= 0) throw PreconditionError("numerical_rank: tol must be positive");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    double cutoff = tol * sv(0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return rank;
}

inline int numerical_rank(const RealMatrix& a, double tol) {
    return numerical_rank(a.mat(), tol);
}

}  // namespace torsionstab
