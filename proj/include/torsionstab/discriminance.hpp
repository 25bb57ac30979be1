#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "torsionstab/asymptotics.hpp"
#include "torsionstab/spectral.hpp"
#include "torsionstab/verdict.hpp"

namespace torsionstab {

namespace detail {

struct LabelCounts {
    int zero = 0, infinity = 0, constant = 0, no_limit = 0, inconclusive = 0, total = 0;

    explicit LabelCounts(const std::vector<LimitClass>& labels) {
        for (const auto& l : labels) {
            switch (l.label) {
                case LimitClass::Label::TendsToZero: ++zero; break;
                case LimitClass::Label::TendsToInfinity: ++infinity; break;
                case LimitClass::Label::TendsToPositiveConst: ++constant; break;
                case LimitClass::Label::NoLimitBounded: ++no_limit; break;
                default: ++inconclusive; break;
            }
            ++total;
        }
    }

    bool consensus(int count) const { return count >= 0.8 * total; }
    int nonzero_limit() const { return constant + no_limit + infinity; }
};

}  // namespace detail

/// Apply the torsion discriminance to classified tau labels: a consensus of
/// nonzero-or-nonexistent limits certifies stability, a consensus of limits at
/// +infinity certifies asymptotic stability. Requires invertibility; tau -> 0
/// certifies nothing.
inline StabilityVerdict torsion_verdict(const RealMatrix& a,
                                        const std::vector<LimitClass>& labels,
                                        const SpectralSummary& s) {
    (void)a;
    if (labels.empty()) throw PreconditionError("torsion_verdict: no labels");
    StabilityVerdict v;
    v.provenance = StabilityVerdict::Provenance::TorsionTheorem;
    if (!s.invertible) {
        v.verdict = StabilityVerdict::Verdict::Inconclusive;
        v.notes.push_back("det A = 0: the invertibility hypothesis of the torsion "
                          "discriminance cannot be removed");
        return v;
    }
    detail::LabelCounts c(labels);
    if (c.consensus(c.infinity)) {
        v.verdict = StabilityVerdict::Verdict::AsymptoticallyStable;
    } else if (c.consensus(c.nonzero_limit())) {
        v.verdict = StabilityVerdict::Verdict::Stable;
    } else if (c.consensus(c.zero)) {
        v.verdict = StabilityVerdict::Verdict::Inconclusive;
        v.notes.push_back("tau -> 0: the theorem gives sufficient conditions only");
    } else {
        v.verdict = StabilityVerdict::Verdict::Inconclusive;
        v.notes.push_back("no 80% consensus across sampled initial conditions");
    }
    return v;
}

/// Apply the curvature discriminance for one curvature index to classified
/// labels. Hypothesis gate: A similar to a real diagonal matrix.
inline StabilityVerdict curvature_verdict(const RealMatrix& a, int i,
                                          const std::vector<LimitClass>& labels,
                                          const SpectralSummary& s, bool diagonalizable_real) {
    (void)a;
    (void)i;
    if (labels.empty()) throw PreconditionError("curvature_verdict: no labels");
    StabilityVerdict v;
    v.provenance = StabilityVerdict::Provenance::CurvatureTheorem;
    if (!diagonalizable_real) {
        v.verdict = StabilityVerdict::Verdict::Inconclusive;
        v.notes.push_back("hypothesis not met: matrix is not similar to a real diagonal matrix");
        return v;
    }
    detail::LabelCounts c(labels);
    if (c.consensus(c.nonzero_limit())) {
        if (s.invertible) {
            v.verdict = StabilityVerdict::Verdict::AsymptoticallyStable;
            v.notes.push_back("nonzero curvature limit with invertible A");
        } else {
            v.verdict = StabilityVerdict::Verdict::Stable;
            v.notes.push_back("nonzero curvature limit; det A = 0 blocks the upgrade");
        }
    } else if (c.consensus(c.zero)) {
        v.verdict = StabilityVerdict::Verdict::Inconclusive;
        v.notes.push_back("kappa -> 0: the theorem gives sufficient conditions only");
    } else {
        v.verdict = StabilityVerdict::Verdict::Inconclusive;
        v.notes.push_back("no 80% consensus across sampled initial conditions");
    }
    return v;
}

/// Per-quantity slice of a reconciliation run.
struct QuantityReport {
    Quantity quantity;
    std::vector<LimitClass> labels;
    StabilityVerdict verdict;
    std::optional<LimitPrediction> prediction;  // analytic, when applicable
    int prediction_agree = 0;                   // samples matching the prediction
    int prediction_comparable = 0;              // samples with a conclusive label
};

/// Geometric pipeline vs eigenvalue oracle.
struct ReconciliationReport {
    SpectralSummary summary;
    std::optional<JordanStructure> jordan;
    std::string jordan_error;
    bool diagonalizable_real = false;
    StabilityVerdict oracle;
    std::vector<QuantityReport> quantities;  // tau first, then kappa_1 ..
    StabilityVerdict geometric;
    bool consistent = false;
    int samples = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> notes;
};

namespace detail {

inline int verdict_strength(StabilityVerdict::Verdict v) {
    switch (v) {
        case StabilityVerdict::Verdict::AsymptoticallyStable: return 2;
        case StabilityVerdict::Verdict::Stable: return 1;
        default: return 0;
    }
}

}  // namespace detail

/// Run the full geometric pipeline against the eigenvalue oracle.
inline ReconciliationReport reconcile(const RealMatrix& a, const TraceConfig& cfg = {},
                                      int samples = 32, std::uint64_t seed = 42) {
    ReconciliationReport report;
    report.samples = samples;
    report.seed = seed;
    report.summary = summarize(a);
    report.oracle = classify_eigen_stability(report.summary);
    const int n = a.n();

    try {
        report.jordan = jordan_structure(a, report.summary);
    } catch (const Error& e) {
        report.jordan_error = e.what();
    }
    report.diagonalizable_real = report.summary.lambda_order.has_value();

    std::vector<Quantity> quantities;
    quantities.push_back(Quantity::tau());
    for (int i = 1; i <= n - 1; ++i) quantities.push_back(Quantity::kappa(i));

    auto labels = classify_quantities_over_samples(a, quantities, cfg, samples, seed);

    report.geometric.verdict = StabilityVerdict::Verdict::Inconclusive;
    report.geometric.provenance = StabilityVerdict::Provenance::TorsionTheorem;
    for (std::size_t qi = 0; qi < quantities.size(); ++qi) {
        QuantityReport qr;
        qr.quantity = quantities[qi];
        qr.labels = std::move(labels[qi]);
        if (quantities[qi].kind == Quantity::Kind::Tau) {
            qr.verdict = torsion_verdict(a, qr.labels, report.summary);
            if (n < 3)
                qr.verdict.notes.push_back("tau is identically zero for n < 3 (planar convention)");
            if (report.jordan) {
                // Class prediction is r(0)-independent; the constant is not, so
                // report the prediction for the first sampled r(0).
                Rng rng = Rng::for_sample(seed, 0);
                std::vector<double> coords = rng.initial_condition(n);
                Vector r0(n);
                for (int i = 0; i < n; ++i) r0(i) = coords[static_cast<std::size_t>(i)];
                try {
                    qr.prediction = predict_tau_limit(report.summary, *report.jordan, r0);
                } catch (const Error&) {
                }
            }
        } else {
            qr.verdict = curvature_verdict(a, quantities[qi].index, qr.labels, report.summary,
                                           report.diagonalizable_real);
            qr.prediction = predict_kappa_limit_diagonal(report.summary, quantities[qi].index);
        }
        if (qr.prediction && qr.prediction->applicable) {
            for (const auto& l : qr.labels) {
                if (l.label == LimitClass::Label::Inconclusive) continue;
                ++qr.prediction_comparable;
                if (matches(l.label, qr.prediction->cls)) ++qr.prediction_agree;
            }
        }
        if (detail::verdict_strength(qr.verdict.verdict) >
            detail::verdict_strength(report.geometric.verdict)) {
            report.geometric = qr.verdict;
            report.notes.push_back("geometric verdict carried by " + qr.quantity.name());
        }
        report.quantities.push_back(std::move(qr));
    }
    if (report.geometric.verdict == StabilityVerdict::Verdict::Inconclusive &&
        !report.quantities.empty()) {
        // keep the torsion-path notes visible when nothing is conclusive
        report.geometric = report.quantities.front().verdict;
    }

    using V = StabilityVerdict::Verdict;
    V geo = report.geometric.verdict;
    V oracle = report.oracle.verdict;
    if (geo == V::Inconclusive) {
        report.consistent = true;
    } else if (geo == V::AsymptoticallyStable) {
        report.consistent = oracle == V::AsymptoticallyStable;
    } else if (geo == V::Stable) {
        report.consistent = oracle == V::AsymptoticallyStable || oracle == V::Stable;
    } else {
        report.consistent = false;  // the pipeline never asserts Unstable
    }
    return report;
}

}  // namespace torsionstab
