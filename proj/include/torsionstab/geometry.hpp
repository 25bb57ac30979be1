#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "torsionstab/errors.hpp"
#include "torsionstab/precision.hpp"
#include "torsionstab/trajectory.hpp"

namespace torsionstab {

/// Natural log of a k-dimensional parallelotope volume. V_0 = 1 by convention.
struct LogVolume {
    int k = 0;
    bool is_zero = false;
    double log_value = 0.0;  // meaningful only when !is_zero
};

/// A nonnegative scalar tracked in the log domain: defined (log of a positive
/// value), exactly zero, or undefined at this point.
struct LogQuantity {
    enum class State { Defined, Zero, Undefined };
    State state = State::Undefined;
    double log_value = 0.0;

    static LogQuantity defined(double lv) { return {State::Defined, lv}; }
    static LogQuantity zero() { return {State::Zero, 0.0}; }
    static LogQuantity undefined() { return {State::Undefined, 0.0}; }

    bool is_defined() const { return state == State::Defined; }
    bool is_zero() const { return state == State::Zero; }
    bool is_undefined() const { return state == State::Undefined; }

    /// Linear-domain value; NaN when undefined.
    double linear() const {
        switch (state) {
            case State::Defined: return std::exp(log_value);
            case State::Zero: return 0.0;
            default: return std::numeric_limits<double>::quiet_NaN();
        }
    }
};

/// Volumes, curvatures and torsion of one trajectory point.
struct CurvatureSample {
    double t = 0.0;
    int n = 0;
    std::vector<LogVolume> log_v;        // k = 0 .. k_max
    std::vector<LogQuantity> log_kappa;  // index i-1 holds kappa_i, i = 1 .. k_max-1
    LogQuantity log_tau = LogQuantity::undefined();
    int m_detected = 0;  // largest k with V_k numerically nonzero
};

namespace detail {

/// Householder QR of the given columns (destroyed in place); returns |R_jj|.
template <class S>
std::vector<S> householder_diagonals(std::vector<std::vector<S>>& cols, int n) {
    using std::sqrt;
    const int k = static_cast<int>(cols.size());
    std::vector<S> diag(static_cast<std::size_t>(k), S(0));
    for (int j = 0; j < k; ++j) {
        auto& cj = cols[static_cast<std::size_t>(j)];
        S s2(0);
        for (int r = j; r < n; ++r) s2 += cj[static_cast<std::size_t>(r)] * cj[static_cast<std::size_t>(r)];
        if (s2 == S(0)) continue;  // diag stays 0: exactly dependent
        S alpha = sqrt(s2);
        if (cj[static_cast<std::size_t>(j)] > S(0)) alpha = -alpha;
        diag[static_cast<std::size_t>(j)] = alpha;
        cj[static_cast<std::size_t>(j)] -= alpha;
        S vtv(0);
        for (int r = j; r < n; ++r) vtv += cj[static_cast<std::size_t>(r)] * cj[static_cast<std::size_t>(r)];
        if (vtv == S(0)) continue;
        for (int c = j + 1; c < k; ++c) {
            auto& cc = cols[static_cast<std::size_t>(c)];
            S dot(0);
            for (int r = j; r < n; ++r) dot += cj[static_cast<std::size_t>(r)] * cc[static_cast<std::size_t>(r)];
            S f = S(2) * dot / vtv;
            for (int r = j; r < n; ++r) cc[static_cast<std::size_t>(r)] -= f * cj[static_cast<std::size_t>(r)];
        }
    }
    return diag;
}

/// All volumes V_1 .. V_kmax of a stack from one orthogonal factorization.
/// Columns are normalized first so that scale disparity between derivative
/// orders is not mistaken for linear dependence; dependence is decided on the
/// equilibrated diagonals against dependence_threshold<S>().
struct VolumeLadder {
    std::vector<double> log_v;  // index k, k = 0 .. kmax; log_v[0] = 0
    std::vector<bool> zero;     // index k; zero[0] = false
    int m_detected = 0;
};

template <class S>
VolumeLadder volume_ladder(const StackS<S>& st, int kmax) {
    using std::log;
    const int n = st.n;
    VolumeLadder ladder;
    ladder.log_v.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
    ladder.zero.assign(static_cast<std::size_t>(kmax) + 1, false);

    const int kq = std::min(kmax, n);
    std::vector<std::vector<S>> cols;
    std::vector<double> log_norms;
    bool dead_column = false;
    int alive = 0;
    for (int j = 0; j < kq && !dead_column; ++j) {
        using std::sqrt;
        const auto& w = st.vectors[static_cast<std::size_t>(j)];
        S s2(0);
        for (const auto& e : w) s2 += e * e;
        if (s2 == S(0)) {
            dead_column = true;
            break;
        }
        S nrm = sqrt(s2);
        std::vector<S> c(w);
        S inv = S(1) / nrm;
        for (auto& e : c) e *= inv;
        cols.push_back(std::move(c));
        log_norms.push_back(to_double(log(nrm)));
        ++alive;
    }

    std::vector<S> diag;
    if (alive > 0) diag = householder_diagonals(cols, n);

    const double threshold = dependence_threshold<S>();
    double acc = 0.0;
    double max_diag = 0.0;
    double min_diag = std::numeric_limits<double>::infinity();
    bool degenerate = false;
    for (int k = 1; k <= kmax; ++k) {
        if (k > alive) {
            ladder.zero[static_cast<std::size_t>(k)] = true;
            continue;
        }
        double d = std::abs(to_double(diag[static_cast<std::size_t>(k - 1)]));
        double log_d;
        if (d == 0.0) {
            degenerate = true;
            log_d = 0.0;
        } else {
            using std::log;
            log_d = to_double(log(abs_val(diag[static_cast<std::size_t>(k - 1)])));
            max_diag = std::max(max_diag, d);
            min_diag = std::min(min_diag, d);
            if (min_diag < threshold * max_diag) degenerate = true;
        }
        if (degenerate) {
            ladder.zero[static_cast<std::size_t>(k)] = true;
            continue;
        }
        acc += log_norms[static_cast<std::size_t>(k - 1)] + log_d;
        ladder.log_v[static_cast<std::size_t>(k)] = k * st.log_scale + acc;
        ladder.m_detected = k;
    }
    return ladder;
}

template <class S>
LogVolume log_volume_impl(const StackS<S>& st, int k) {
    if (k < 0 || k > st.order)
        throw PreconditionError("log_volume: require 0 <= k <= stack order");
    if (k == 0) return {0, false, 0.0};
    VolumeLadder ladder = volume_ladder(st, k);
    LogVolume v;
    v.k = k;
    v.is_zero = ladder.zero[static_cast<std::size_t>(k)];
    v.log_value = v.is_zero ? 0.0 : ladder.log_v[static_cast<std::size_t>(k)];
    return v;
}

/// Sum-of-squared-minors reference (Cauchy-Binet route). Independent of the
/// orthogonal factorization path; exists as an oracle for it.
template <class S>
LogVolume volume_minor_sum_impl(const StackS<S>& st, int k) {
    using std::log;
    using std::sqrt;
    if (k < 0 || k > st.order)
        throw PreconditionError("volume_minor_sum: require 0 <= k <= stack order");
    if (k > 3 || st.n > 8) throw UnsupportedSizeError(k, st.n);
    if (k == 0) return {0, false, 0.0};

    const int n = st.n;
    const auto& w = st.vectors;
    S sum(0);
    S hadamard(1);
    for (int j = 0; j < k; ++j) {
        S s2(0);
        for (int r = 0; r < n; ++r)
            s2 += w[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)] *
                  w[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
        hadamard *= s2;
    }
    auto at = [&](int j, int r) -> const S& {
        return w[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
    };
    if (k == 1) {
        for (int r = 0; r < n; ++r) sum += at(0, r) * at(0, r);
    } else if (k == 2) {
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                S d = at(0, p) * at(1, q) - at(0, q) * at(1, p);
                sum += d * d;
            }
    } else {
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q)
                for (int s = q + 1; s < n; ++s) {
                    S d = at(0, p) * (at(1, q) * at(2, s) - at(1, s) * at(2, q)) -
                          at(1, p) * (at(0, q) * at(2, s) - at(0, s) * at(2, q)) +
                          at(2, p) * (at(0, q) * at(1, s) - at(0, s) * at(1, q));
                    sum += d * d;
                }
    }

    LogVolume v;
    v.k = k;
    const double thr = dependence_threshold<S>();
    if (sum == S(0) || sum <= S(thr * thr) * hadamard) {
        v.is_zero = true;
        return v;
    }
    v.log_value = k * st.log_scale + 0.5 * to_double(log(sum));
    return v;
}

template <class S>
CurvatureSample curvature_profile_impl(const StackS<S>& st) {
    if (st.order < 2) throw PreconditionError("curvature_profile: stack order must be >= 2");
    const int kmax = st.order;
    VolumeLadder ladder = volume_ladder(st, kmax);
    if (ladder.zero[1]) throw EquilibriumError(st.t);

    CurvatureSample sample;
    sample.t = st.t;
    sample.n = st.n;
    sample.m_detected = ladder.m_detected;
    sample.log_v.resize(static_cast<std::size_t>(kmax) + 1);
    for (int k = 0; k <= kmax; ++k) {
        sample.log_v[static_cast<std::size_t>(k)] = {
            k, ladder.zero[static_cast<std::size_t>(k)],
            ladder.zero[static_cast<std::size_t>(k)] ? 0.0
                                                     : ladder.log_v[static_cast<std::size_t>(k)]};
    }

    auto lv = [&](int k) { return ladder.log_v[static_cast<std::size_t>(k)]; };
    auto vz = [&](int k) -> bool { return ladder.zero[static_cast<std::size_t>(k)]; };

    sample.log_kappa.resize(static_cast<std::size_t>(kmax - 1));
    for (int i = 1; i <= kmax - 1; ++i) {
        LogQuantity q;
        if (vz(i)) {
            q = LogQuantity::undefined();  // division by a degenerate volume
        } else if (vz(i + 1)) {
            q = LogQuantity::zero();
        } else {
            q = LogQuantity::defined(lv(i - 1) + lv(i + 1) - lv(1) - 2.0 * lv(i));
        }
        sample.log_kappa[static_cast<std::size_t>(i - 1)] = q;
    }

    if (st.n < 3) {
        sample.log_tau = LogQuantity::zero();  // planar curve convention
    } else if (kmax < 3) {
        sample.log_tau = LogQuantity::undefined();
    } else if (vz(2)) {
        sample.log_tau = LogQuantity::undefined();  // torsion() may resolve structurally
    } else if (vz(3)) {
        sample.log_tau = LogQuantity::zero();
    } else {
        sample.log_tau = LogQuantity::defined(lv(3) - 2.0 * lv(2));
    }
    return sample;
}

}  // namespace detail

inline LogVolume log_volume(const DerivativeStack& st, int k) {
    return detail::log_volume_impl(detail::stack_from_public<double>(st), k);
}

inline LogVolume volume_minor_sum(const DerivativeStack& st, int k) {
    return detail::volume_minor_sum_impl(detail::stack_from_public<double>(st), k);
}

inline CurvatureSample curvature_profile(const DerivativeStack& st) {
    return detail::curvature_profile_impl(detail::stack_from_public<double>(st));
}

/// Torsion tau = V_3 / V_2^2, exactly 0 by convention for planar systems
/// (n < 3) and for the structurally degenerate V_2 families; undefined when
/// V_2 vanishes only at this point.
inline LogQuantity torsion(const CurvatureSample& sample, bool structural_zero) {
    if (sample.n < 3) return LogQuantity::zero();
    if (sample.log_v.size() < 4) return structural_zero ? LogQuantity::zero()
                                                        : LogQuantity::undefined();
    const LogVolume& v2 = sample.log_v[2];
    if (v2.is_zero) return structural_zero ? LogQuantity::zero() : LogQuantity::undefined();
    return sample.log_tau;
}

}  // namespace torsionstab
