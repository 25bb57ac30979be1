#pragma once

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "torsionstab/asymptotics.hpp"
#include "torsionstab/discriminance.hpp"
#include "torsionstab/io.hpp"

namespace torsionstab {

/// A named system shipped with the tool, with its reference initial value.
struct BuiltinSystem {
    std::string name;
    std::string summary;
    RealMatrix matrix;
    Vector r0;
};

inline std::vector<std::string> builtin_names() {
    return {"paper1", "paper2", "remark1", "remark2", "lemma46"};
}

inline std::optional<BuiltinSystem> builtin_system(const std::string& name) {
    auto vec = [](std::initializer_list<double> v) {
        Vector r(static_cast<int>(v.size()));
        int i = 0;
        for (double x : v) r(i++) = x;
        return r;
    };
    if (name == "paper1") {
        return BuiltinSystem{
            "paper1",
            "4x4 asymptotically stable system whose third curvature diverges",
            RealMatrix{{-25, -8, -39, 19}, {-14, -10, -26, 14}, {9, 0, 7, -9}, {-5, -8, -21, -1}},
            vec({1, 1, 1, 1})};
    }
    if (name == "paper2") {
        return BuiltinSystem{"paper2",
                             "coupled oscillators (k/m = 1, k'/m = 2): stable, periodic torsion",
                             RealMatrix{{0, 0, 1, 0}, {0, 0, 0, 1}, {-3, 2, 0, 0}, {2, -3, 0, 0}},
                             vec({1, 2, 1, 2})};
    }
    if (name == "remark1") {
        return BuiltinSystem{
            "remark1",
            "singular counterexample: tau -> 1/|r2(0)| > 0 yet the zero solution is unstable",
            RealMatrix{{0, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, -1, 1}, {0, 0, -1, -1}},
            vec({1, 1, 1, 1})};
    }
    if (name == "remark2") {
        return BuiltinSystem{
            "remark2",
            "singular counterexample: tau -> +inf yet not asymptotically stable",
            RealMatrix{{-1, 1, 0, 0}, {0, -1, 1, 0}, {0, 0, -1, 0}, {0, 0, 0, 0}},
            vec({1, 1, 1, 1})};
    }
    if (name == "lemma46") {
        return BuiltinSystem{
            "lemma46",
            "two critical rotation blocks C1(0,1) + C1(0,2): tau converges to sqrt(36/425)",
            RealMatrix{{0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, 2}, {0, 0, -2, 0}},
            vec({1, 0, 1, 0})};
    }
    return std::nullopt;
}

/// Closed-form tau^2(t) of the paper2 oscillator with r(0) = (1,2,1,2).
inline double oscillator_tau_squared(double t) {
    double w = 2.0 * std::sqrt(5.0) * t;
    double osc = std::sqrt(5.0) * std::sin(w) + 2.0 * std::cos(w);
    double denom = osc - 11.0;
    return (osc + 17.0) / (2.0 * denom * denom);
}

/// Expected-vs-observed comparison for one built-in check.
struct ExampleCheck {
    std::string name;
    bool pass = false;
    std::string expected;
    std::string observed;
};

namespace detail {

inline LogQuantity tau_at(const BuiltinSystem& sys, double t) {
    auto engine = std::make_shared<TrajectoryEngine>(sys.matrix);
    Trajectory traj(engine, sys.r0);
    SpectralSummary s = summarize(sys.matrix);
    bool structural = structural_v2_flag(sys.matrix, s);
    return traj.with_stack(t, std::min(sys.matrix.n(), 3), [&](const auto& st) {
        return torsion(curvature_profile_impl(st), structural);
    });
}

inline ExampleCheck check_label(const std::string& name, const BuiltinSystem& sys, Quantity q,
                                LimitClass::Label want, const TraceConfig& cfg) {
    Trace tr = sample_trace(sys.matrix, sys.r0, q, cfg);
    LimitClass lc = classify_limit(tr, cfg);
    return {name, lc.label == want, to_string(want), to_string(lc.label)};
}

inline ExampleCheck check_rel(const std::string& name, double expected, double observed,
                              double rel_tol) {
    bool pass = std::abs(observed - expected) <= rel_tol * std::abs(expected);
    return {name, pass, format_full(expected), format_full(observed)};
}

}  // namespace detail

/// Run the reference checks for one built-in system at the acceptance
/// tolerances. `elapsed_seconds`, when given, receives the wall time.
inline std::vector<ExampleCheck> run_example_checks(const std::string& name,
                                                    double* elapsed_seconds = nullptr) {
    auto sys_opt = builtin_system(name);
    if (!sys_opt) throw PreconditionError("unknown example name: " + name);
    const BuiltinSystem& sys = *sys_opt;
    std::vector<ExampleCheck> checks;
    TraceConfig cfg;
    auto t0 = std::chrono::steady_clock::now();

    if (name == "paper1") {
        SpectralSummary s = summarize(sys.matrix);
        std::complex<double> prod(1.0, 0.0);
        for (const auto& z : s.eigs) prod *= z;
        checks.push_back(detail::check_rel("eigenvalue product equals det A = 1320", 1320.0,
                                           prod.real(), 1e-6));
        checks.push_back(detail::check_label("kappa_1 tends to zero", sys, Quantity::kappa(1),
                                             LimitClass::Label::TendsToZero, cfg));
        checks.push_back(detail::check_label("tau tends to zero", sys, Quantity::tau(),
                                             LimitClass::Label::TendsToZero, cfg));
        checks.push_back(detail::check_label("kappa_3 tends to infinity", sys, Quantity::kappa(3),
                                             LimitClass::Label::TendsToInfinity, cfg));
        Trace tr = sample_trace(sys.matrix, sys.r0, Quantity::kappa(3), cfg);
        LimitClass lc = classify_limit(tr, cfg);
        StabilityVerdict v =
            curvature_verdict(sys.matrix, 3, {lc}, s, s.lambda_order.has_value());
        StabilityVerdict oracle = classify_eigen_stability(s);
        bool pass = v.verdict == StabilityVerdict::Verdict::AsymptoticallyStable &&
                    oracle.verdict == StabilityVerdict::Verdict::AsymptoticallyStable;
        checks.push_back({"curvature verdict asymptotically stable, matching the oracle", pass,
                          "asymptotically-stable / asymptotically-stable",
                          std::string(to_string(v.verdict)) + " / " + to_string(oracle.verdict)});
    } else if (name == "paper2") {
        LogQuantity tau0 = detail::tau_at(sys, 0.0);
        checks.push_back(detail::check_rel("tau^2(0) = 19/162", 19.0 / 162.0,
                                           std::pow(tau0.linear(), 2.0), 1e-8));
        double max_rel = 0.0;
        auto engine = std::make_shared<TrajectoryEngine>(sys.matrix);
        Trajectory traj(engine, sys.r0);
        for (int j = 0; j <= 100; ++j) {
            double t = 0.1 * j;
            LogQuantity tau = traj.with_stack(t, 3, [&](const auto& st) {
                return torsion(detail::curvature_profile_impl(st), false);
            });
            double want = oscillator_tau_squared(t);
            double got = std::pow(tau.linear(), 2.0);
            max_rel = std::max(max_rel, std::abs(got - want) / std::abs(want));
        }
        checks.push_back({"tau^2 matches the closed form at 101 points on [0,10] to 1e-8",
                          max_rel <= 1e-8, "max relative error <= 1e-8",
                          "max relative error = " + format_full(max_rel)});
        checks.push_back(detail::check_label("tau trace has no limit (bounded oscillation)", sys,
                                             Quantity::tau(), LimitClass::Label::NoLimitBounded,
                                             cfg));
        SpectralSummary s = summarize(sys.matrix);
        Trace tr = sample_trace(sys.matrix, sys.r0, Quantity::tau(), cfg);
        LimitClass lc = classify_limit(tr, cfg);
        StabilityVerdict v = torsion_verdict(sys.matrix, {lc}, s);
        StabilityVerdict oracle = classify_eigen_stability(s);
        bool pass = v.verdict == StabilityVerdict::Verdict::Stable &&
                    oracle.verdict == StabilityVerdict::Verdict::Stable;
        checks.push_back({"torsion verdict stable, matching the oracle", pass,
                          "stable / stable",
                          std::string(to_string(v.verdict)) + " / " + to_string(oracle.verdict)});
    } else if (name == "remark1") {
        LogQuantity tau50 = detail::tau_at(sys, 50.0);
        checks.push_back(
            detail::check_rel("tau(50) = 1/|r2(0)| = 1", 1.0, tau50.linear(), 1e-6));
        SpectralSummary s = summarize(sys.matrix);
        Trace tr = sample_trace(sys.matrix, sys.r0, Quantity::tau(), cfg);
        LimitClass lc = classify_limit(tr, cfg);
        StabilityVerdict v = torsion_verdict(sys.matrix, {lc}, s);
        bool note_ok = false;
        for (const auto& note : v.notes) note_ok = note_ok || note.find("det A = 0") != std::string::npos;
        checks.push_back({"verdict inconclusive with the det-zero note",
                          v.verdict == StabilityVerdict::Verdict::Inconclusive && note_ok,
                          "inconclusive + det-zero note", to_string(v.verdict)});
        StabilityVerdict oracle = classify_eigen_stability(s);
        checks.push_back({"oracle says unstable",
                          oracle.verdict == StabilityVerdict::Verdict::Unstable, "unstable",
                          to_string(oracle.verdict)});
        JordanStructure js = jordan_structure(sys.matrix, s);
        bool structure_ok = js.real_blocks.size() == 1 && js.real_blocks[0].lambda == 0.0 &&
                            js.real_blocks[0].sizes == std::vector<int>{2} &&
                            js.complex_blocks.size() == 1 && js.complex_blocks[0].a == -1.0 &&
                            js.complex_blocks[0].b == 1.0 &&
                            js.complex_blocks[0].sizes == std::vector<int>{1};
        checks.push_back({"jordan structure J2(0) + C1(-1,1)", structure_ok,
                          "J(0){2} C(-1,1){1}", "detected block inventory"});
    } else if (name == "remark2") {
        SpectralSummary s = summarize(sys.matrix);
        checks.push_back(detail::check_label("tau tends to infinity", sys, Quantity::tau(),
                                             LimitClass::Label::TendsToInfinity, cfg));
        Trace tr = sample_trace(sys.matrix, sys.r0, Quantity::tau(), cfg);
        LimitClass lc = classify_limit(tr, cfg);
        StabilityVerdict v = torsion_verdict(sys.matrix, {lc}, s);
        bool note_ok = false;
        for (const auto& note : v.notes) note_ok = note_ok || note.find("det A = 0") != std::string::npos;
        checks.push_back({"verdict inconclusive with the det-zero note",
                          v.verdict == StabilityVerdict::Verdict::Inconclusive && note_ok,
                          "inconclusive + det-zero note", to_string(v.verdict)});
        StabilityVerdict oracle = classify_eigen_stability(s);
        checks.push_back({"oracle says stable (zero eigenvalue is semisimple)",
                          oracle.verdict == StabilityVerdict::Verdict::Stable, "stable",
                          to_string(oracle.verdict)});
        JordanStructure js = jordan_structure(sys.matrix, s);
        bool structure_ok = js.real_blocks.size() == 2 && js.real_blocks[0].lambda == 0.0 &&
                            js.real_blocks[0].sizes == std::vector<int>{1} &&
                            js.real_blocks[1].lambda == -1.0 &&
                            js.real_blocks[1].sizes == std::vector<int>{3} &&
                            js.complex_blocks.empty();
        checks.push_back({"jordan structure J3(-1) + J1(0)", structure_ok, "J(-1){3} J(0){1}",
                          "detected block inventory"});
    } else if (name == "lemma46") {
        const double want = std::sqrt(36.0 / 425.0);
        LogQuantity tau1000 = detail::tau_at(sys, 1000.0);
        checks.push_back(
            detail::check_rel("numeric tau(1000) = sqrt(36/425)", want, tau1000.linear(), 1e-4));
        SpectralSummary s = summarize(sys.matrix);
        JordanStructure js = jordan_structure(sys.matrix, s);
        LimitPrediction pred = predict_tau_limit(s, js, sys.r0);
        bool pred_ok = pred.cls == LimitPrediction::Class::TendsToPositiveConst && pred.value &&
                       std::abs(*pred.value - want) <= 1e-12;
        checks.push_back({"predicted limit constant sqrt(36/425)", pred_ok, format_full(want),
                          pred.value ? format_full(*pred.value) : "(absent)"});
        // Dual route: sum-of-squared-minors evaluation of tau at large t.
        auto engine = std::make_shared<TrajectoryEngine>(sys.matrix);
        Trajectory traj(engine, sys.r0);
        DerivativeStack st = traj.public_stack(1000.0, 3);
        LogVolume v2 = volume_minor_sum(st, 2);
        LogVolume v3 = volume_minor_sum(st, 3);
        double tau_bf = std::exp(v3.log_value - 2.0 * v2.log_value);
        checks.push_back(detail::check_rel("minor-sum route agrees at t = 1000", want, tau_bf,
                                           1e-9));
        Trace tr = sample_trace(sys.matrix, sys.r0, Quantity::tau(), cfg);
        LimitClass lc = classify_limit(tr, cfg);
        checks.push_back({"classifier label tends-to-positive-const",
                          lc.label == LimitClass::Label::TendsToPositiveConst,
                          "tends-to-positive-const", to_string(lc.label)});
    }

    if (elapsed_seconds) {
        *elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return checks;
}

}  // namespace torsionstab
