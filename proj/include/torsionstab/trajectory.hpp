#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <vector>

#include "torsionstab/canonical.hpp"
#include "torsionstab/errors.hpp"
#include "torsionstab/matrix.hpp"
#include "torsionstab/precision.hpp"

namespace torsionstab {

/// Scaled derivative stack at one time: r^{(j)}(t) = e^{log_scale} vectors[j-1],
/// r(t) = e^{log_scale} state. Unless every vector vanishes, the largest entry
/// magnitude across vectors lies in [1/2, 2].
struct DerivativeStack {
    double t = 0.0;
    int order = 0;
    std::vector<Vector> vectors;
    double log_scale = 0.0;
    Vector state;
    Vector r0;
};

namespace detail {

/// Internal stack carried in scalar S; same scaling contract as the public type.
template <class S>
struct StackS {
    double t = 0.0;
    int n = 0;
    int order = 0;
    std::vector<std::vector<S>> vectors;
    double log_scale = 0.0;
    std::vector<S> state;
};

template <class S>
StackS<S> stack_from_public(const DerivativeStack& st) {
    StackS<S> out;
    out.t = st.t;
    out.n = static_cast<int>(st.state.size());
    out.order = st.order;
    out.log_scale = st.log_scale;
    out.state.resize(st.state.size());
    for (int i = 0; i < st.state.size(); ++i) out.state[static_cast<std::size_t>(i)] = S(st.state(i));
    for (const auto& v : st.vectors) {
        std::vector<S> w(v.size());
        for (int i = 0; i < v.size(); ++i) w[static_cast<std::size_t>(i)] = S(v(i));
        out.vectors.push_back(std::move(w));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Small dense helpers over an arbitrary scalar.
// ---------------------------------------------------------------------------

template <class S>
struct CMat {
    int n = 0;
    std::vector<Cplx<S>> a;
    CMat() = default;
    explicit CMat(int n) : n(n), a(static_cast<std::size_t>(n) * n) {}
    Cplx<S>& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    const Cplx<S>& operator()(int i, int j) const {
        return a[static_cast<std::size_t>(i) * n + j];
    }
};

/// In-place partial-pivot LU. Zero pivots are nudged to keep inverse iteration
/// usable when the shift sits on an eigenvalue.
template <class S>
void lu_factor(CMat<S>& m, std::vector<int>& piv, const S& nudge) {
    const int n = m.n;
    piv.resize(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        int best = c;
        S best_mag = m(c, c).abs2();
        for (int r = c + 1; r < n; ++r) {
            S mag = m(r, c).abs2();
            if (mag > best_mag) {
                best_mag = mag;
                best = r;
            }
        }
        piv[static_cast<std::size_t>(c)] = best;
        if (best != c)
            for (int j = 0; j < n; ++j) std::swap(m(c, j), m(best, j));
        if (m(c, c).abs2() == S(0)) m(c, c) = Cplx<S>(nudge, S(0));
        for (int r = c + 1; r < n; ++r) {
            Cplx<S> f = m(r, c) / m(c, c);
            m(r, c) = f;
            for (int j = c + 1; j < n; ++j) m(r, j) = m(r, j) - f * m(c, j);
        }
    }
}

template <class S>
void lu_solve(const CMat<S>& lu, const std::vector<int>& piv, std::vector<Cplx<S>>& x) {
    const int n = lu.n;
    for (int c = 0; c < n; ++c) {
        int p = piv[static_cast<std::size_t>(c)];
        if (p != c) std::swap(x[static_cast<std::size_t>(c)], x[static_cast<std::size_t>(p)]);
    }
    for (int r = 1; r < n; ++r)
        for (int c = 0; c < r; ++c)
            x[static_cast<std::size_t>(r)] =
                x[static_cast<std::size_t>(r)] - lu(r, c) * x[static_cast<std::size_t>(c)];
    for (int r = n - 1; r >= 0; --r) {
        for (int c = r + 1; c < n; ++c)
            x[static_cast<std::size_t>(r)] =
                x[static_cast<std::size_t>(r)] - lu(r, c) * x[static_cast<std::size_t>(c)];
        x[static_cast<std::size_t>(r)] = x[static_cast<std::size_t>(r)] / lu(r, r);
    }
}

/// Real dense matrix in S, row-major.
template <class S>
struct RMat {
    int n = 0;
    std::vector<S> a;
    RMat() = default;
    explicit RMat(int n) : n(n), a(static_cast<std::size_t>(n) * n, S(0)) {}
    S& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    const S& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

template <class S>
RMat<S> rmat_mul(const RMat<S>& x, const RMat<S>& y) {
    const int n = x.n;
    RMat<S> z(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const S& f = x(i, k);
            if (f == S(0)) continue;
            for (int j = 0; j < n; ++j) z(i, j) += f * y(k, j);
        }
    return z;
}

/// e^{M} by scaling and squaring with a Taylor series run to the scalar's
/// precision. Used only on the shifted matrix A - maxRe(A) I, whose
/// exponential stays moderate.
template <class S>
RMat<S> rmat_exp(const RMat<S>& m) {
    using std::ceil;
    using std::log2;
    const int n = m.n;
    S norm1(0);
    for (int j = 0; j < n; ++j) {
        S col(0);
        for (int i = 0; i < n; ++i) col += abs_val(m(i, j));
        if (col > norm1) norm1 = col;
    }
    int squarings = 0;
    if (norm1 > S(0.5)) squarings = static_cast<int>(std::ceil(std::log2(to_double(norm1) / 0.5)));
    S scale = S(1);
    for (int i = 0; i < squarings; ++i) scale *= S(0.5);

    RMat<S> x(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) x(i, j) = m(i, j) * scale;

    RMat<S> result(n), term(n);
    for (int i = 0; i < n; ++i) {
        result(i, i) = S(1);
        term(i, i) = S(1);
    }
    const S tiny = std::numeric_limits<S>::epsilon() / S(4);
    for (int k = 1; k < 4096; ++k) {
        term = rmat_mul(term, x);
        S inv_k = S(1) / S(k);
        S max_entry(0);
        for (auto& e : term.a) {
            e *= inv_k;
            S a = abs_val(e);
            if (a > max_entry) max_entry = a;
        }
        for (std::size_t i = 0; i < term.a.size(); ++i) result.a[i] += term.a[i];
        if (max_entry < tiny) break;
    }
    for (int i = 0; i < squarings; ++i) result = rmat_mul(result, result);
    return result;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trajectory engine: per-matrix structure analysis reused across evaluations.
// ---------------------------------------------------------------------------

/// Evaluates r(t) = e^{tA} r0 and the stack r^{(1..k)}(t) at any time in a
/// caller-chosen scalar. The evaluation route is picked once per matrix:
///   - Diagonal: componentwise exponentials (exact structure).
///   - Canonical: closed-form block formulas for a matrix literally in real
///     Jordan canonical form (polynomial x exponential x rotation).
///   - Modes: eigendecomposition, refined per tier by Rayleigh-quotient
///     iteration so that small modes survive at extended precision.
///   - MatExp: scaling-and-squaring fallback for everything else.
class TrajectoryEngine {
public:
    enum class Route { Diagonal, Canonical, Modes, MatExp };

    explicit TrajectoryEngine(RealMatrix a) : a_(std::move(a)), n_(a_.n()) {
        const Eigen::MatrixXd& m = a_.mat();
        bool diag = true;
        for (int i = 0; i < n_ && diag; ++i)
            for (int j = 0; j < n_; ++j)
                if (i != j && m(i, j) != 0.0) {
                    diag = false;
                    break;
                }
        if (diag) {
            route_ = Route::Diagonal;
            diag_.resize(static_cast<std::size_t>(n_));
            max_re_ = -std::numeric_limits<double>::infinity();
            double min_re = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n_; ++i) {
                diag_[static_cast<std::size_t>(i)] = m(i, i);
                max_re_ = std::max(max_re_, m(i, i));
                min_re = std::min(min_re, m(i, i));
            }
            spread_ = max_re_ - min_re;
            poly_degree_ = 0;
            return;
        }

        if (auto layout = parse_canonical(a_)) {
            route_ = Route::Canonical;
            layout_ = std::move(*layout);
            max_re_ = -std::numeric_limits<double>::infinity();
            double min_re = std::numeric_limits<double>::infinity();
            poly_degree_ = 0;
            for (const auto& blk : layout_.blocks) {
                max_re_ = std::max(max_re_, blk.re());
                min_re = std::min(min_re, blk.re());
                poly_degree_ = std::max(poly_degree_, blk.size - 1);
            }
            spread_ = max_re_ - min_re;
            return;
        }

        Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/true);
        if (es.info() == Eigen::Success) {
            eig_values_ = es.eigenvalues();
            eig_vectors_ = es.eigenvectors();
            max_re_ = eig_values_.real().maxCoeff();
            spread_ = max_re_ - eig_values_.real().minCoeff();

            double scale = std::max(1.0, a_.norm());
            double min_sep = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n_; ++i)
                for (int j = i + 1; j < n_; ++j)
                    min_sep = std::min(min_sep, std::abs(eig_values_(i) - eig_values_(j)));
            min_sep_ = min_sep;
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(eig_vectors_);
            double cond = svd.singularValues()(0) /
                          std::max(svd.singularValues()(n_ - 1), 1e-300);
            if (min_sep > 1e-6 * scale && cond < 1e8) {
                route_ = Route::Modes;
                poly_degree_ = 0;
                return;
            }
        } else {
            // Gershgorin bounds as a conservative stand-in.
            double hi = -std::numeric_limits<double>::infinity();
            double lo = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n_; ++i) {
                double radius = 0;
                for (int j = 0; j < n_; ++j)
                    if (j != i) radius += std::abs(m(i, j));
                hi = std::max(hi, m(i, i) + radius);
                lo = std::min(lo, m(i, i) - radius);
            }
            max_re_ = hi;
            spread_ = hi - lo;
        }
        route_ = Route::MatExp;
        poly_degree_ = n_ - 1;
    }

    int n() const { return n_; }
    const RealMatrix& system() const { return a_; }
    Route route() const { return route_; }
    double max_re() const { return max_re_; }
    double spectral_spread() const { return spread_; }

    /// Natural-log dynamic range a stack evaluation at time t must resolve.
    double log_range(double t) const {
        return spread_ * t + 2.0 * poly_degree_ * std::log1p(std::abs(t));
    }

    /// Mantissa bits required at time t (see precision.hpp for the tiers).
    double bits_needed(double t) const { return bits_required(log_range(t)); }

    /// Shifted state u(t) = e^{-max_re t} r(t), evaluated in S.
    template <class S>
    std::vector<S> shifted_state(const Vector& r0, double t) const {
        switch (route_) {
            case Route::Diagonal: return shifted_state_diagonal<S>(r0, t);
            case Route::Canonical: return shifted_state_canonical<S>(r0, t);
            case Route::Modes: {
                const auto& tier = modes_tier<S>();
                if (tier.ok) return shifted_state_modes<S>(tier, r0, t);
                return shifted_state_matexp<S>(r0, t);
            }
            case Route::MatExp: return shifted_state_matexp<S>(r0, t);
        }
        return {};
    }

private:
    template <class S>
    std::vector<S> shifted_state_diagonal(const Vector& r0, double t) const {
        using std::exp;
        std::vector<S> u(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i)
            u[static_cast<std::size_t>(i)] =
                exp(S(diag_[static_cast<std::size_t>(i)] - max_re_) * S(t)) * S(r0(i));
        return u;
    }

    template <class S>
    std::vector<S> shifted_state_canonical(const Vector& r0, double t) const {
        using std::cos;
        using std::exp;
        using std::sin;
        std::vector<S> u(static_cast<std::size_t>(n_), S(0));
        const S st(t);
        for (const auto& blk : layout_.blocks) {
            const int o = blk.offset;
            S gain = exp(S(blk.re() - max_re_) * st);
            if (!blk.is_complex) {
                // r_{o+k}(t) = e^{lambda t} sum_l r0_{o+k+l} t^l / l!
                for (int k = 0; k < blk.size; ++k) {
                    S acc(0), power(1);
                    for (int l = 0; k + l < blk.size; ++l) {
                        acc += power * S(r0(o + k + l));
                        power = power * st / S(l + 1);
                    }
                    u[static_cast<std::size_t>(o + k)] = gain * acc;
                }
            } else {
                S c = cos(S(blk.b) * st);
                S s = sin(S(blk.b) * st);
                for (int i = 0; i < blk.size; ++i) {
                    S acc1(0), acc2(0), power(1);
                    for (int l = 0; i + l < blk.size; ++l) {
                        S p = S(r0(o + 2 * (i + l)));
                        S q = S(r0(o + 2 * (i + l) + 1));
                        acc1 += power * (p * c + q * s);
                        acc2 += power * (q * c - p * s);
                        power = power * st / S(l + 1);
                    }
                    u[static_cast<std::size_t>(o + 2 * i)] = gain * acc1;
                    u[static_cast<std::size_t>(o + 2 * i + 1)] = gain * acc2;
                }
            }
        }
        return u;
    }

    // Refined eigenmodes at a tier. `col` is the mode's column index in the
    // eigenvector basis, so coefficients from the basis solve line up.
    template <class S>
    struct TierModes {
        struct RealMode {
            int col;
            S lambda;
            std::vector<S> x;
        };
        struct PairMode {
            int col;
            Cplx<S> lambda;
            std::vector<Cplx<S>> x;
        };
        bool ok = false;
        std::vector<RealMode> rmodes;
        std::vector<PairMode> pmodes;
        detail::CMat<S> basis_lu;  // LU of [x ...]
        std::vector<int> basis_piv;
        std::once_flag once;
    };

    template <class S>
    const TierModes<S>& modes_tier() const {
        auto& tier = std::get<TierModes<S>>(tiers_);
        std::call_once(tier.once, [&] { refine_tier<S>(tier); });
        return tier;
    }

    /// Rayleigh-quotient iteration in S starting from the double eigenpair.
    template <class S>
    bool refine_pair(Cplx<S>& lambda, std::vector<Cplx<S>>& x) const {
        const double scale = std::max(1.0, a_.norm());
        const S eps = std::numeric_limits<S>::epsilon();
        const S nudge = eps * S(scale);
        const Cplx<S> lambda0 = lambda;
        for (int iter = 0; iter < 24; ++iter) {
            detail::CMat<S> m(n_);
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j)
                    m(i, j) = Cplx<S>(S(a_.mat()(i, j)), S(0)) -
                              (i == j ? lambda : Cplx<S>(S(0), S(0)));
            std::vector<int> piv;
            detail::lu_factor(m, piv, nudge);
            std::vector<Cplx<S>> y = x;
            detail::lu_solve(m, piv, y);

            using std::sqrt;
            S nrm2(0);
            for (const auto& e : y) nrm2 += e.abs2();
            if (nrm2 == S(0)) return false;
            S inv = S(1) / sqrt(nrm2);
            for (auto& e : y) e = inv * e;

            // Rayleigh quotient y* A y.
            Cplx<S> rq(S(0), S(0));
            for (int i = 0; i < n_; ++i) {
                Cplx<S> row(S(0), S(0));
                for (int j = 0; j < n_; ++j) {
                    double aij = a_.mat()(i, j);
                    if (aij != 0.0) row = row + S(aij) * y[static_cast<std::size_t>(j)];
                }
                rq = rq + y[static_cast<std::size_t>(i)].conj() * row;
            }
            Cplx<S> delta = rq - lambda;
            x = std::move(y);
            lambda = rq;
            S drift2 = (lambda - lambda0).abs2();
            if (drift2 > S(0.16) * S(min_sep_) * S(min_sep_)) return false;
            if (delta.abs2() <= (S(64) * eps * S(scale)) * (S(64) * eps * S(scale))) {
                return true;
            }
        }
        return false;
    }

    template <class S>
    void refine_tier(TierModes<S>& tier) const {
        tier.ok = false;
        std::vector<std::pair<Cplx<S>, std::vector<Cplx<S>>>> columns;
        std::vector<int> col_kind;  // 0 real, 1 pair head, 2 pair tail
        for (int i = 0; i < n_; ++i) {
            std::complex<double> lam = eig_values_(i);
            bool is_real = std::abs(lam.imag()) < 1e-9 * (1.0 + std::abs(lam));
            if (!is_real && lam.imag() < 0) continue;  // handled with the +Im partner
            Cplx<S> lambda(S(lam.real()), S(is_real ? 0.0 : lam.imag()));
            std::vector<Cplx<S>> x(static_cast<std::size_t>(n_));
            for (int r = 0; r < n_; ++r) {
                std::complex<double> e = eig_vectors_(r, i);
                x[static_cast<std::size_t>(r)] = Cplx<S>(S(e.real()), S(e.imag()));
            }
            if (!refine_pair<S>(lambda, x)) return;
            if (is_real) {
                // Rotate the phase out and drop the imaginary dust.
                int imax = 0;
                S best(-1);
                for (int r = 0; r < n_; ++r) {
                    S mag = x[static_cast<std::size_t>(r)].abs2();
                    if (mag > best) {
                        best = mag;
                        imax = r;
                    }
                }
                Cplx<S> ref = x[static_cast<std::size_t>(imax)];
                for (auto& e : x) e = e / ref;
                for (auto& e : x) e.im = S(0);
                lambda.im = S(0);
                columns.emplace_back(lambda, x);
                col_kind.push_back(0);
            } else {
                columns.emplace_back(lambda, x);
                col_kind.push_back(1);
                std::vector<Cplx<S>> xc(x.size());
                for (std::size_t r = 0; r < x.size(); ++r) xc[r] = x[r].conj();
                columns.emplace_back(lambda.conj(), std::move(xc));
                col_kind.push_back(2);
            }
        }
        if (static_cast<int>(columns.size()) != n_) return;

        detail::CMat<S> basis(n_);
        for (int c = 0; c < n_; ++c)
            for (int r = 0; r < n_; ++r) basis(r, c) = columns[static_cast<std::size_t>(c)].second[static_cast<std::size_t>(r)];
        std::vector<int> piv;
        detail::lu_factor(basis, piv, std::numeric_limits<S>::epsilon() * S(std::max(1.0, a_.norm())));

        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (col_kind[c] == 0) {
                std::vector<S> xr(columns[c].second.size());
                for (std::size_t r = 0; r < xr.size(); ++r) xr[r] = columns[c].second[r].re;
                tier.rmodes.push_back({static_cast<int>(c), columns[c].first.re, std::move(xr)});
            } else if (col_kind[c] == 1) {
                tier.pmodes.push_back({static_cast<int>(c), columns[c].first, columns[c].second});
            }
        }
        tier.basis_lu = std::move(basis);
        tier.basis_piv = std::move(piv);
        tier.ok = true;
    }

    template <class S>
    std::vector<S> shifted_state_modes(const TierModes<S>& tier, const Vector& r0,
                                        double t) const {
        using std::cos;
        using std::exp;
        using std::sin;
        // Coefficients: solve X c = r0 in the refined basis.
        std::vector<Cplx<S>> c(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) c[static_cast<std::size_t>(i)] = Cplx<S>(S(r0(i)), S(0));
        detail::lu_solve(tier.basis_lu, tier.basis_piv, c);

        std::vector<S> u(static_cast<std::size_t>(n_), S(0));
        const S st(t);
        for (const auto& mode : tier.rmodes) {
            S w = c[static_cast<std::size_t>(mode.col)].re * exp((mode.lambda - S(max_re_)) * st);
            for (int r = 0; r < n_; ++r)
                u[static_cast<std::size_t>(r)] += w * mode.x[static_cast<std::size_t>(r)];
        }
        for (const auto& mode : tier.pmodes) {
            Cplx<S> coef = c[static_cast<std::size_t>(mode.col)];
            S gain = exp((mode.lambda.re - S(max_re_)) * st);
            S cs = cos(mode.lambda.im * st);
            S sn = sin(mode.lambda.im * st);
            Cplx<S> w = coef * Cplx<S>(gain * cs, gain * sn);
            for (int r = 0; r < n_; ++r) {
                const Cplx<S>& xr = mode.x[static_cast<std::size_t>(r)];
                u[static_cast<std::size_t>(r)] += S(2) * (w.re * xr.re - w.im * xr.im);
            }
        }
        return u;
    }

    template <class S>
    std::vector<S> shifted_state_matexp(const Vector& r0, double t) const {
        detail::RMat<S> shifted(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                shifted(i, j) = S(a_.mat()(i, j) * t) - (i == j ? S(max_re_ * t) : S(0));
        detail::RMat<S> e = detail::rmat_exp(shifted);
        std::vector<S> u(static_cast<std::size_t>(n_), S(0));
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) u[static_cast<std::size_t>(i)] += e(i, j) * S(r0(j));
        return u;
    }

    RealMatrix a_;
    int n_;
    Route route_ = Route::MatExp;
    double max_re_ = 0.0;
    double spread_ = 0.0;
    double min_sep_ = 0.0;
    int poly_degree_ = 0;
    std::vector<double> diag_;
    CanonicalLayout layout_;
    Eigen::VectorXcd eig_values_;
    Eigen::MatrixXcd eig_vectors_;
    mutable std::tuple<TierModes<double>, TierModes<Prec40>, TierModes<Prec80>,
                       TierModes<Prec160>, TierModes<Prec320>>
        tiers_;
};

// ---------------------------------------------------------------------------
// Per-(A, r0) trajectory handle.
// ---------------------------------------------------------------------------

class Trajectory {
public:
    Trajectory(std::shared_ptr<const TrajectoryEngine> engine, Vector r0)
        : engine_(std::move(engine)), r0_(std::move(r0)) {
        if (r0_.size() != engine_->n())
            throw PreconditionError("initial condition dimension mismatch");
        if (r0_.norm() == 0.0) throw DegenerateInitialConditionError();
    }

    const TrajectoryEngine& engine() const { return *engine_; }
    const Vector& r0() const { return r0_; }

    /// Derivative stack at time t with k derivative vectors, in scalar S.
    template <class S>
    detail::StackS<S> stack(double t, int k) const {
        using std::floor;
        using std::ldexp;
        using std::log;
        const int n = engine_->n();
        detail::StackS<S> st;
        st.t = t;
        st.n = n;
        st.order = k;
        st.state = engine_->template shifted_state<S>(r0_, t);

        const Eigen::MatrixXd& a = engine_->system().mat();
        st.vectors.reserve(static_cast<std::size_t>(k));
        const std::vector<S>* prev = &st.state;
        for (int j = 0; j < k; ++j) {
            std::vector<S> w(static_cast<std::size_t>(n), S(0));
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < n; ++c) {
                    double aic = a(i, c);
                    if (aic != 0.0)
                        w[static_cast<std::size_t>(i)] += S(aic) * (*prev)[static_cast<std::size_t>(c)];
                }
            st.vectors.push_back(std::move(w));
            prev = &st.vectors.back();
        }

        S max_entry(0);
        for (const auto& w : st.vectors)
            for (const auto& e : w) {
                S mag = abs_val(e);
                if (mag > max_entry) max_entry = mag;
            }
        double shift_log = engine_->max_re() * t;
        if (max_entry == S(0)) {
            st.log_scale = shift_log;
            return st;
        }
        int p = static_cast<int>(std::floor(to_double(log(max_entry)) * 1.4426950408889634));
        while (ldexp(max_entry, -p) >= S(2)) ++p;
        while (ldexp(max_entry, -p) < S(1)) --p;
        for (auto& w : st.vectors)
            for (auto& e : w) e = ldexp(e, -p);
        for (auto& e : st.state) e = ldexp(e, -p);
        st.log_scale = shift_log + p * 0.6931471805599453;
        return st;
    }

    /// Invoke fn with the stack evaluated at the cheapest adequate tier.
    template <class Fn>
    auto with_stack(double t, int k, Fn&& fn) const {
        double bits = std::min(engine_->bits_needed(t), kMaxSupportedBits);
        return dispatch_precision(bits, [&](auto tag) {
            using S = decltype(tag);
            return fn(stack<S>(t, k));
        });
    }

    DerivativeStack public_stack(double t, int k) const {
        return with_stack(t, k, [&](const auto& st) { return to_public(st); });
    }

    template <class S>
    DerivativeStack to_public(const detail::StackS<S>& st) const {
        DerivativeStack out;
        out.t = st.t;
        out.order = st.order;
        out.log_scale = st.log_scale;
        out.r0 = r0_;
        out.state = Vector(st.n);
        for (int i = 0; i < st.n; ++i) out.state(i) = to_double(st.state[static_cast<std::size_t>(i)]);
        for (const auto& w : st.vectors) {
            Vector v(st.n);
            for (int i = 0; i < st.n; ++i) v(i) = to_double(w[static_cast<std::size_t>(i)]);
            out.vectors.push_back(std::move(v));
        }
        return out;
    }

private:
    std::shared_ptr<const TrajectoryEngine> engine_;
    Vector r0_;
};

/// Exact trajectory-derivative stack r^{(1..k)}(t) for dot r = A r, r(0) = r0.
inline DerivativeStack derivative_stack(const RealMatrix& a, const Vector& r0, double t,
                                        int k) {
    if (k < 1 || k > a.n() + 1)
        throw PreconditionError("derivative_stack: order must satisfy 1 <= k <= n + 1");
    if (!(t >= 0.0)) throw PreconditionError("derivative_stack: t must be nonnegative");
    Trajectory traj(std::make_shared<TrajectoryEngine>(a), r0);
    return traj.public_stack(t, k);
}

}  // namespace torsionstab
