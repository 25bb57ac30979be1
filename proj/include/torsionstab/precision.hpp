#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <limits>
#include <utility>

namespace torsionstab {

namespace mp = boost::multiprecision;

/// Extended-precision tiers for trajectory and volume evaluation.
///
/// The k-volume of a derivative stack resolves directions that close up like
/// e^{-gap t}; in IEEE double the geometric information is gone once
/// spread(A) * t exceeds roughly 36 log-units. Volumes are therefore computed
/// by kernels templated on the scalar, instantiated at these tiers, and the
/// caller picks the cheapest tier whose mantissa covers the dynamic range of
/// the point being evaluated. Expression templates are off: plain value
/// semantics, no surprises in generic code.
template <unsigned Digits10>
using BinFloat = mp::number<mp::cpp_bin_float<Digits10>, mp::et_off>;

using Prec40 = BinFloat<40>;    // ~133 bits
using Prec80 = BinFloat<80>;    // ~266 bits
using Prec160 = BinFloat<160>;  // ~532 bits
using Prec320 = BinFloat<320>;  // ~1063 bits

template <class S>
inline double to_double(const S& x) {
    return static_cast<double>(x);
}
inline double to_double(double x) { return x; }

template <class S>
inline int mantissa_bits() {
    return std::numeric_limits<S>::digits;
}

/// Relative threshold on equilibrated orthogonalization diagonals below which
/// a stack is declared numerically dependent. 1e-12 in double (the documented
/// constant); at wider tiers the same contract sits a fixed guard above the
/// tier's own epsilon.
template <class S>
inline double dependence_threshold() {
    if constexpr (std::is_same_v<S, double>) {
        return 1e-12;
    } else {
        return to_double(std::numeric_limits<S>::epsilon()) * 1e4;
    }
}

/// Mantissa bits required to resolve a dynamic range of `log_range` natural
/// log units, with guard digits for the orthogonalization and for coefficient
/// swings in the volume expansions.
inline double bits_required(double log_range) {
    return 60.0 + 1.5 * std::max(0.0, log_range);
}

constexpr double kMaxSupportedBits = 1000.0;

/// Invoke `fn` with a value of the cheapest scalar tier that carries at least
/// `bits` mantissa bits. Returns fn's result. Caller must check
/// bits <= kMaxSupportedBits first (Prec320 is the widest tier).
template <class Fn>
auto dispatch_precision(double bits, Fn&& fn) {
    if (bits <= 53.0) return fn(double{});
    if (bits <= 133.0) return fn(Prec40{});
    if (bits <= 266.0) return fn(Prec80{});
    if (bits <= 532.0) return fn(Prec160{});
    return fn(Prec320{});
}

/// Minimal complex arithmetic over an arbitrary real scalar. std::complex is
/// only specified for built-in floating types, so the multiprecision paths
/// use this instead.
template <class S>
struct Cplx {
    S re{};
    S im{};

    Cplx() = default;
    Cplx(S r, S i) : re(std::move(r)), im(std::move(i)) {}
    explicit Cplx(S r) : re(std::move(r)), im(S(0)) {}

    friend Cplx operator+(const Cplx& a, const Cplx& b) { return {a.re + b.re, a.im + b.im}; }
    friend Cplx operator-(const Cplx& a, const Cplx& b) { return {a.re - b.re, a.im - b.im}; }
    friend Cplx operator*(const Cplx& a, const Cplx& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Cplx operator*(const S& s, const Cplx& a) { return {s * a.re, s * a.im}; }
    friend Cplx operator/(const Cplx& a, const Cplx& b) {
        S d = b.re * b.re + b.im * b.im;
        return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
    }
    Cplx conj() const { return {re, S(-im)}; }
    S abs2() const { return re * re + im * im; }
};

template <class S>
inline S abs_val(const S& x) {
    using std::abs;
    return abs(x);
}

}  // namespace torsionstab
