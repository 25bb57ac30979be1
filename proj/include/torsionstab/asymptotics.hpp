#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "torsionstab/errors.hpp"
#include "torsionstab/geometry.hpp"
#include "torsionstab/rng.hpp"
#include "torsionstab/spectral.hpp"
#include "torsionstab/trajectory.hpp"

namespace torsionstab {

/// Sampling grid and decision thresholds for limit classification.
struct TraceConfig {
    double t_start = 1.0;
    double t_end = 60.0;
    int num_points = 256;
    enum class Grid { Geometric, Linear } grid = Grid::Geometric;
    double fit_window_fraction = 0.5;
    double slope_tol = 0.01;       // per unit t, log domain
    double oscillation_tol = 0.05; // detrended max-min, log domain

    void validate() const {
        if (!(t_start > 0.0) || !(t_start < t_end))
            throw PreconditionError("trace config: require 0 < t_start < t_end");
        if (num_points < 16) throw PreconditionError("trace config: need at least 16 points");
        if (!(fit_window_fraction > 0.0) || fit_window_fraction > 1.0)
            throw PreconditionError("trace config: fit window fraction must be in (0, 1]");
    }

    std::vector<double> times() const {
        validate();
        std::vector<double> t(static_cast<std::size_t>(num_points));
        if (grid == Grid::Geometric) {
            double ratio = std::pow(t_end / t_start, 1.0 / (num_points - 1));
            double cur = t_start;
            for (int j = 0; j < num_points; ++j) {
                t[static_cast<std::size_t>(j)] = cur;
                cur *= ratio;
            }
            t.back() = t_end;
        } else {
            double step = (t_end - t_start) / (num_points - 1);
            for (int j = 0; j < num_points; ++j)
                t[static_cast<std::size_t>(j)] = t_start + step * j;
        }
        return t;
    }
};

/// Which scalar of the curvature profile a trace follows.
struct Quantity {
    enum class Kind { Kappa, Tau } kind = Kind::Tau;
    int index = 0;  // kappa_i

    static Quantity kappa(int i) { return {Kind::Kappa, i}; }
    static Quantity tau() { return {Kind::Tau, 0}; }

    std::string name() const {
        return kind == Kind::Tau ? "tau" : "kappa_" + std::to_string(index);
    }
};

/// Stand-in for log 0 in a trace: a defined value far below any genuine log.
constexpr double kLogZeroSurrogate = -746.0;
constexpr double kLogZeroCutoff = -700.0;

/// One scalar sampled along the grid. Values are natural logs; exact zeros are
/// carried as the log-0 surrogate; degenerate points are unset.
struct Trace {
    std::vector<double> times;
    std::vector<std::optional<double>> values;
};

/// Classifier outcome with the audit evidence behind it.
struct LimitClass {
    enum class Label {
        TendsToZero,
        TendsToInfinity,
        TendsToPositiveConst,
        NoLimitBounded,
        Inconclusive
    };
    Label label = Label::Inconclusive;
    double slope = 0.0;
    double oscillation = 0.0;
    double tail_mean = 0.0;
    std::string note;
};

inline const char* to_string(LimitClass::Label l) {
    switch (l) {
        case LimitClass::Label::TendsToZero: return "tends-to-zero";
        case LimitClass::Label::TendsToInfinity: return "tends-to-infinity";
        case LimitClass::Label::TendsToPositiveConst: return "tends-to-positive-const";
        case LimitClass::Label::NoLimitBounded: return "no-limit-bounded";
        default: return "inconclusive";
    }
}

/// Whether a label matches a prediction class (for reconciliation counts).
inline bool matches(LimitClass::Label l, LimitPrediction::Class c) {
    using L = LimitClass::Label;
    using C = LimitPrediction::Class;
    switch (c) {
        case C::TendsToZero: return l == L::TendsToZero;
        case C::TendsToInfinity: return l == L::TendsToInfinity;
        case C::TendsToPositiveConst: return l == L::TendsToPositiveConst;
        case C::NoLimitBounded: return l == L::NoLimitBounded;
        default: return false;
    }
}

/// Full curvature profile along a grid; the shared computation behind every
/// per-quantity trace of one (A, r0).
struct ProfileTrace {
    std::vector<double> times;
    std::vector<CurvatureSample> samples;  // may be shorter than times() if truncated
    bool structural_v2_zero = false;
    int order = 0;
};

namespace detail {

inline bool structural_v2_flag(const RealMatrix& a, const SpectralSummary& s) {
    try {
        return v2_degenerate(jordan_structure(a, s));
    } catch (const Error&) {
        return false;  // best effort: pointwise degeneracy stays undefined
    }
}

}  // namespace detail

/// Sample the whole curvature profile along the grid. Truncates at the first
/// equilibrium point if at least 16 samples survive, else throws
/// InsufficientTraceError.
inline ProfileTrace sample_profile_trace(const Trajectory& traj, const TraceConfig& cfg,
                                         int order, bool structural_v2_zero) {
    ProfileTrace out;
    out.structural_v2_zero = structural_v2_zero;
    out.order = order;
    std::vector<double> grid = cfg.times();
    for (double t : grid) {
        try {
            CurvatureSample sample = traj.with_stack(
                t, order, [&](const auto& st) { return detail::curvature_profile_impl(st); });
            out.times.push_back(t);
            out.samples.push_back(std::move(sample));
        } catch (const EquilibriumError&) {
            break;  // trajectory numerically reached the origin: truncate
        }
    }
    if (static_cast<int>(out.samples.size()) < 16)
        throw InsufficientTraceError(static_cast<int>(out.samples.size()));
    return out;
}

/// Pull one scalar out of a profile trace.
inline Trace extract_trace(const ProfileTrace& profile, Quantity q, int n) {
    Trace tr;
    tr.times = profile.times;
    tr.values.reserve(profile.samples.size());
    for (const auto& sample : profile.samples) {
        LogQuantity v;
        if (q.kind == Quantity::Kind::Tau) {
            v = torsion(sample, profile.structural_v2_zero);
        } else {
            int i = q.index;
            if (i < 1 || i > static_cast<int>(sample.log_kappa.size()))
                throw PreconditionError("kappa index out of range for this profile");
            v = sample.log_kappa[static_cast<std::size_t>(i - 1)];
        }
        if (v.is_defined())
            tr.values.emplace_back(v.log_value);
        else if (v.is_zero())
            tr.values.emplace_back(kLogZeroSurrogate);
        else
            tr.values.emplace_back(std::nullopt);
    }
    (void)n;
    return tr;
}

/// Sample one scalar quantity of the trajectory of (A, r0) along the grid.
inline Trace sample_trace(const RealMatrix& a, const Vector& r0, Quantity q,
                          const TraceConfig& cfg) {
    cfg.validate();
    const int n = a.n();
    if (q.kind == Quantity::Kind::Kappa && (q.index < 1 || q.index > n - 1))
        throw PreconditionError("kappa index must satisfy 1 <= i <= n-1");
    if (r0.norm() == 0.0) throw DegenerateInitialConditionError();

    if (q.kind == Quantity::Kind::Tau && n < 3) {
        // Planar convention: tau is identically zero.
        Trace tr;
        tr.times = cfg.times();
        tr.values.assign(tr.times.size(), kLogZeroSurrogate);
        return tr;
    }

    auto engine = std::make_shared<TrajectoryEngine>(a);
    Trajectory traj(engine, r0);
    SpectralSummary s = summarize(a);
    bool structural = detail::structural_v2_flag(a, s);
    int order = q.kind == Quantity::Kind::Tau ? 3 : std::min(n, q.index + 1);
    order = std::max(order, 2);
    ProfileTrace profile = sample_profile_trace(traj, cfg, order, structural);
    return extract_trace(profile, q, n);
}

/// Deterministic trend classification of a trace tail: affine fit of the log
/// values against t over the last fit window, oscillation measured on the
/// detrended residuals.
inline LimitClass classify_limit(const Trace& trace, const TraceConfig& cfg) {
    const std::size_t total = trace.times.size();
    if (total == 0) throw InsufficientTraceError(0);
    std::size_t start =
        static_cast<std::size_t>(std::floor(static_cast<double>(total) *
                                            (1.0 - cfg.fit_window_fraction)));
    if (start >= total) start = total - 1;

    std::size_t tail_count = total - start;
    std::size_t undefined = 0, zeros = 0;
    std::vector<double> ts, vs;
    for (std::size_t j = start; j < total; ++j) {
        const auto& v = trace.values[j];
        if (!v.has_value()) {
            ++undefined;
        } else if (*v <= kLogZeroCutoff) {
            ++zeros;
        } else {
            ts.push_back(trace.times[j]);
            vs.push_back(*v);
        }
    }

    LimitClass out;
    if (static_cast<double>(undefined) > 0.10 * static_cast<double>(tail_count)) {
        out.label = LimitClass::Label::Inconclusive;
        out.note = "degenerate-point density above 10% in the fit window";
        return out;
    }
    if (static_cast<double>(zeros) > 0.5 * static_cast<double>(tail_count)) {
        out.label = LimitClass::Label::TendsToZero;
        out.tail_mean = 0.0;
        out.note = "quantity is exactly zero on the tail";
        return out;
    }
    if (ts.size() < 16) throw InsufficientTraceError(static_cast<int>(ts.size()));

    double mt = 0, mv = 0;
    for (std::size_t j = 0; j < ts.size(); ++j) {
        mt += ts[j];
        mv += vs[j];
    }
    mt /= static_cast<double>(ts.size());
    mv /= static_cast<double>(ts.size());
    double sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < ts.size(); ++j) {
        sxx += (ts[j] - mt) * (ts[j] - mt);
        sxy += (ts[j] - mt) * (vs[j] - mv);
    }
    double slope = sxy / sxx;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t j = 0; j < ts.size(); ++j) {
        double resid = vs[j] - (mv + slope * (ts[j] - mt));
        lo = std::min(lo, resid);
        hi = std::max(hi, resid);
    }
    out.slope = slope;
    out.oscillation = hi - lo;
    out.tail_mean = std::exp(mv);

    if (slope < -cfg.slope_tol) {
        out.label = LimitClass::Label::TendsToZero;
    } else if (slope > cfg.slope_tol) {
        out.label = LimitClass::Label::TendsToInfinity;
    } else if (out.oscillation <= cfg.oscillation_tol) {
        if (mv < -345.0) {
            out.label = LimitClass::Label::TendsToZero;
        } else {
            out.label = LimitClass::Label::TendsToPositiveConst;
        }
    } else {
        out.label = LimitClass::Label::NoLimitBounded;
    }
    return out;
}

namespace detail {

template <class Fn>
void parallel_for(int count, Fn&& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    int workers = static_cast<int>(std::min<unsigned>(hw ? hw : 1, 8));
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> futures;
    futures.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&, w] {
            for (int i = w; i < count; i += workers) fn(i);
        }));
    }
    for (auto& f : futures) f.get();
}

}  // namespace detail

/// Classify several quantities over seeded random initial conditions; one
/// profile evaluation per sample feeds every quantity. result[q][sample].
/// Sample j draws from a generator derived from (seed, j), so labels are
/// independent of evaluation order and thread count.
inline std::vector<std::vector<LimitClass>> classify_quantities_over_samples(
    const RealMatrix& a, const std::vector<Quantity>& quantities, const TraceConfig& cfg,
    int num_samples, std::uint64_t seed) {
    cfg.validate();
    if (num_samples < 1) throw PreconditionError("need at least one sample");
    const int n = a.n();
    for (const auto& q : quantities)
        if (q.kind == Quantity::Kind::Kappa && (q.index < 1 || q.index > n - 1))
            throw PreconditionError("kappa index must satisfy 1 <= i <= n-1");

    auto engine = std::make_shared<TrajectoryEngine>(a);
    SpectralSummary s = summarize(a);
    bool structural = detail::structural_v2_flag(a, s);
    int order = 2;
    for (const auto& q : quantities)
        order = std::max(order, q.kind == Quantity::Kind::Tau ? std::min(n, 3)
                                                              : std::min(n, q.index + 1));

    std::vector<std::vector<LimitClass>> result(
        quantities.size(), std::vector<LimitClass>(static_cast<std::size_t>(num_samples)));

    detail::parallel_for(num_samples, [&](int j) {
        Rng rng = Rng::for_sample(seed, static_cast<std::uint64_t>(j));
        std::vector<double> coords = rng.initial_condition(n);
        Vector r0(n);
        for (int i = 0; i < n; ++i) r0(i) = coords[static_cast<std::size_t>(i)];
        try {
            Trajectory traj(engine, r0);
            ProfileTrace profile = sample_profile_trace(traj, cfg, order, structural);
            for (std::size_t qi = 0; qi < quantities.size(); ++qi) {
                LimitClass lc;
                if (quantities[qi].kind == Quantity::Kind::Tau && n < 3) {
                    lc.label = LimitClass::Label::TendsToZero;
                    lc.note = "planar convention: tau is identically zero";
                } else {
                    try {
                        Trace tr = extract_trace(profile, quantities[qi], n);
                        lc = classify_limit(tr, cfg);
                    } catch (const Error& e) {
                        lc.label = LimitClass::Label::Inconclusive;
                        lc.note = e.what();
                    }
                }
                result[qi][static_cast<std::size_t>(j)] = lc;
            }
        } catch (const Error& e) {
            for (std::size_t qi = 0; qi < quantities.size(); ++qi) {
                LimitClass lc;
                lc.label = LimitClass::Label::Inconclusive;
                lc.note = e.what();
                result[qi][static_cast<std::size_t>(j)] = lc;
            }
        }
    });
    return result;
}

/// One label per sampled initial condition for a single quantity.
inline std::vector<LimitClass> classify_over_samples(const RealMatrix& a, Quantity q,
                                                     const TraceConfig& cfg, int num_samples,
                                                     std::uint64_t seed) {
    return classify_quantities_over_samples(a, {q}, cfg, num_samples, seed)[0];
}

}  // namespace torsionstab
