#pragma once

#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "torsionstab/asymptotics.hpp"
#include "torsionstab/builtin_systems.hpp"
#include "torsionstab/canonical.hpp"
#include "torsionstab/discriminance.hpp"
#include "torsionstab/rng.hpp"

namespace torsionstab {

struct CaseResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<CaseResult> cases;
    bool pass = false;
    std::string aggregate;
    double elapsed_seconds = 0.0;

    int passed() const {
        int p = 0;
        for (const auto& c : cases) p += c.pass ? 1 : 0;
        return p;
    }
};

namespace detail {

constexpr std::uint64_t kTagTrichotomy = 0x7472696368ULL;
constexpr std::uint64_t kTagLemma44 = 0x6c656d3434ULL;
constexpr std::uint64_t kTagLemma45 = 0x6c656d3435ULL;
constexpr std::uint64_t kTagLemma46 = 0x6c656d3436ULL;
constexpr std::uint64_t kTagV2 = 0x76320000ULL;
constexpr std::uint64_t kTagProps = 0x70726f7073ULL;

template <class Fn>
void run_cases(SuiteReport& report, int count, Fn&& make_case) {
    report.cases.assign(static_cast<std::size_t>(count), CaseResult{});
    parallel_for(count, [&](int i) {
        CaseResult r;
        try {
            r = make_case(i);
        } catch (const std::exception& e) {
            r.name = "case " + std::to_string(i);
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        report.cases[static_cast<std::size_t>(i)] = r;
    });
}

inline Vector to_vector(const std::vector<double>& v) {
    Vector out(static_cast<int>(v.size()));
    for (int i = 0; i < out.size(); ++i) out(i) = v[static_cast<std::size_t>(i)];
    return out;
}

/// Diagonal suite draw: entries from +/-[0.2, 3], pairwise gaps >= 0.05 and
/// every exponent-comparison margin >= 0.05, so the fixed slope tolerance can
/// classify each case decisively within the default horizon.
inline std::vector<double> draw_trichotomy_spectrum(Rng& rng, int n) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<double> lam(static_cast<std::size_t>(n));
        for (auto& v : lam) v = rng.signed_uniform(0.2, 3.0);
        bool ok = true;
        for (std::size_t i = 0; i < lam.size() && ok; ++i)
            for (std::size_t j = i + 1; j < lam.size() && ok; ++j)
                if (std::abs(lam[i] - lam[j]) < 0.05) ok = false;
        if (!ok) continue;
        std::vector<double> sorted = lam;
        std::sort(sorted.rbegin(), sorted.rend());
        for (int i = 1; i < n && ok; ++i)
            if (std::abs(sorted[0] + sorted[static_cast<std::size_t>(i - 1)] -
                         sorted[static_cast<std::size_t>(i)]) < 0.05)
                ok = false;
        if (ok) return lam;
    }
    throw PreconditionError("trichotomy spectrum rejection sampling did not converge");
}

/// Random canonical layout. Re parts are drawn from the given ranges; sizes
/// kept small enough for n <= max_n.
struct LayoutOptions {
    int min_n = 3;
    int max_n = 6;
    bool force_positive_block = false;  // at least one block with Re > 0
    double stable_lo = -2.5, stable_hi = -0.3;
    double positive_lo = 0.5, positive_hi = 2.0;
};

inline CanonicalLayout random_canonical_layout(Rng& rng, const LayoutOptions& opt) {
    const int n_target = opt.min_n + rng.below(opt.max_n - opt.min_n + 1);
    std::vector<CanonicalBlock> blocks;
    int used = 0;
    bool have_positive = false;
    while (used < n_target) {
        int room = n_target - used;
        bool positive = opt.force_positive_block && !have_positive;
        if (!positive && opt.force_positive_block && rng.unit() < 0.25) positive = true;
        double re = positive ? rng.uniform(opt.positive_lo, opt.positive_hi)
                             : rng.uniform(opt.stable_lo, opt.stable_hi);
        bool use_complex = room >= 2 && rng.unit() < 0.45;
        if (use_complex) {
            int m = 1 + rng.below(std::min(2, room / 2));
            blocks.push_back(complex_block(re, rng.uniform(0.5, 3.0), m));
            used += 2 * m;
        } else {
            int p = 1 + rng.below(std::min(3, room));
            blocks.push_back(jordan_block(re, p));
            used += p;
        }
        if (re > 0) have_positive = true;
    }
    return make_layout(std::move(blocks));
}

}  // namespace detail

/// Diagonal trichotomy: analytic limit class of every kappa_i against the
/// numeric classifier on a seeded suite of 200 diagonal systems.
inline SuiteReport run_trichotomy_suite(std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport report;
    report.suite = "trichotomy";
    const int matrices = 200;
    TraceConfig cfg;

    struct MatrixOutcome {
        std::vector<CaseResult> results;
    };
    std::vector<MatrixOutcome> outcomes(static_cast<std::size_t>(matrices));
    detail::parallel_for(matrices, [&](int m) {
        Rng rng = Rng::for_sample(seed ^ detail::kTagTrichotomy, static_cast<std::uint64_t>(m));
        int n = 3 + rng.below(4);
        std::vector<double> lam = detail::draw_trichotomy_spectrum(rng, n);
        RealMatrix a = RealMatrix::diagonal(lam);
        Vector r0 = detail::to_vector(rng.initial_condition(n));
        SpectralSummary s = summarize(a);

        auto& out = outcomes[static_cast<std::size_t>(m)].results;
        try {
            auto engine = std::make_shared<TrajectoryEngine>(a);
            Trajectory traj(engine, r0);
            ProfileTrace profile =
                sample_profile_trace(traj, cfg, n, detail::structural_v2_flag(a, s));
            for (int i = 1; i <= n - 1; ++i) {
                LimitPrediction pred = predict_kappa_limit_diagonal(s, i);
                Trace tr = extract_trace(profile, Quantity::kappa(i), n);
                LimitClass lc = classify_limit(tr, cfg);
                CaseResult r;
                r.name = "matrix " + std::to_string(m) + " kappa_" + std::to_string(i);
                bool agree = matches(lc.label, pred.cls);
                bool inconclusive = lc.label == LimitClass::Label::Inconclusive;
                r.pass = agree || inconclusive;
                std::ostringstream os;
                os << "predicted " << to_string(pred.cls) << ", numeric " << to_string(lc.label)
                   << (agree ? " (agree)" : inconclusive ? " (inconclusive)" : " (CONTRADICTION)");
                r.detail = os.str();
                out.push_back(std::move(r));
            }
        } catch (const std::exception& e) {
            CaseResult r;
            r.name = "matrix " + std::to_string(m);
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
            out.push_back(std::move(r));
        }
    });

    int agree = 0, total = 0, contradictions = 0;
    for (auto& o : outcomes)
        for (auto& c : o.results) {
            ++total;
            if (c.detail.find("(agree)") != std::string::npos) ++agree;
            if (!c.pass) ++contradictions;
            report.cases.push_back(std::move(c));
        }
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream os;
    os << agree << "/" << total << " predictor-numeric agreements, " << contradictions
       << " contradictions, " << report.elapsed_seconds << "s";
    report.aggregate = os.str();
    report.pass = contradictions == 0 && agree >= static_cast<int>(std::ceil(0.98 * total));
    return report;
}

/// Positive spectral abscissa forces tau -> 0 (canonical-form suite).
inline SuiteReport run_lemma44_suite(std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport report;
    report.suite = "lemma44";
    TraceConfig cfg;
    const int count = 50;
    detail::run_cases(report, count, [&](int i) {
        Rng rng = Rng::for_sample(seed ^ detail::kTagLemma44, static_cast<std::uint64_t>(i));
        detail::LayoutOptions opt;
        opt.force_positive_block = true;
        CanonicalLayout layout = detail::random_canonical_layout(rng, opt);
        RealMatrix a = build_canonical(layout);
        Vector r0 = detail::to_vector(rng.initial_condition(layout.n));
        Trace tr = sample_trace(a, r0, Quantity::tau(), cfg);
        LimitClass lc = classify_limit(tr, cfg);
        CaseResult r;
        r.name = "M>0 case " + std::to_string(i) + " (n=" + std::to_string(layout.n) + ")";
        r.pass = lc.label == LimitClass::Label::TendsToZero;
        r.detail = std::string("tau label ") + to_string(lc.label) +
                   (lc.label == LimitClass::Label::Inconclusive ? " [counted against budget]" : "");
        return r;
    });
    int inconclusive = 0, wrong = 0;
    for (const auto& c : report.cases)
        if (!c.pass) {
            if (c.detail.find("inconclusive") != std::string::npos)
                ++inconclusive;
            else
                ++wrong;
        }
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream os;
    os << report.passed() << "/" << count << " tends-to-zero, " << inconclusive
       << " inconclusive, " << wrong << " contradictory";
    report.aggregate = os.str();
    report.pass = wrong == 0 && inconclusive <= 1;
    return report;
}

/// A critical rotation block of size >= 2 forces tau -> 0.
inline SuiteReport run_lemma45_suite(std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport report;
    report.suite = "lemma45";
    TraceConfig cfg;
    const int count = 20;
    detail::run_cases(report, count, [&](int i) {
        Rng rng = Rng::for_sample(seed ^ detail::kTagLemma45, static_cast<std::uint64_t>(i));
        std::vector<CanonicalBlock> blocks;
        int m = 2 + rng.below(2);
        blocks.push_back(complex_block(0.0, rng.uniform(0.5, 2.5), m));
        int fill = rng.below(3);
        for (int f = 0; f < fill; ++f) {
            if (rng.unit() < 0.5)
                blocks.push_back(jordan_block(rng.uniform(-2.0, -0.3), 1 + rng.below(2)));
            else
                blocks.push_back(complex_block(rng.uniform(-2.0, -0.3), rng.uniform(0.5, 2.5), 1));
        }
        CanonicalLayout layout = make_layout(std::move(blocks));
        RealMatrix a = build_canonical(layout);
        Vector r0 = detail::to_vector(rng.initial_condition(layout.n));
        Trace tr = sample_trace(a, r0, Quantity::tau(), cfg);
        LimitClass lc = classify_limit(tr, cfg);
        CaseResult r;
        r.name = "C_m(0,b) m=" + std::to_string(m) + " case " + std::to_string(i);
        r.pass = lc.label == LimitClass::Label::TendsToZero;
        r.detail = std::string("tau label ") + to_string(lc.label) + ", slope " +
                   format_human(lc.slope);
        return r;
    });
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream os;
    os << report.passed() << "/" << count << " tends-to-zero";
    report.aggregate = os.str();
    report.pass = report.passed() == count;
    return report;
}

/// Distinct critical rotation rates: tau converges to the closed-form
/// constant; prediction against numeric tau at t = 1000.
inline SuiteReport run_lemma46_suite(std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport report;
    report.suite = "lemma46";
    const int count = 10;
    detail::run_cases(report, count, [&](int i) {
        Rng rng = Rng::for_sample(seed ^ detail::kTagLemma46, static_cast<std::uint64_t>(i));
        std::vector<CanonicalBlock> blocks;
        int s_count = 2 + rng.below(2);
        double b = rng.uniform(0.3, 1.0);
        for (int k = 0; k < s_count; ++k) {
            blocks.push_back(complex_block(0.0, b, 1));
            b += rng.uniform(0.2, 1.0);
        }
        if (rng.unit() < 0.5) blocks.push_back(jordan_block(rng.uniform(-2.0, -0.4), 1));
        CanonicalLayout layout = make_layout(std::move(blocks));
        RealMatrix a = build_canonical(layout);
        Vector r0 = detail::to_vector(rng.initial_condition(layout.n));

        SpectralSummary s = summarize(a);
        JordanStructure js = jordan_structure(a, s);
        LimitPrediction pred = predict_tau_limit(s, js, r0);

        auto engine = std::make_shared<TrajectoryEngine>(a);
        Trajectory traj(engine, r0);
        LogQuantity tau = traj.with_stack(1000.0, 3, [&](const auto& st) {
            return torsion(detail::curvature_profile_impl(st), false);
        });

        CaseResult r;
        r.name = "C1-blocks s=" + std::to_string(s_count) + " case " + std::to_string(i);
        if (pred.cls != LimitPrediction::Class::TendsToPositiveConst || !pred.value) {
            r.pass = false;
            r.detail = std::string("unexpected prediction class ") + to_string(pred.cls);
            return r;
        }
        double rel = std::abs(tau.linear() - *pred.value) / *pred.value;
        r.pass = rel <= 1e-4;
        r.detail = "predicted " + format_full(*pred.value) + ", numeric tau(1000) " +
                   format_full(tau.linear()) + ", rel err " + format_human(rel);
        return r;
    });
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream os;
    os << report.passed() << "/" << count << " within 1e-4 of the closed form";
    report.aggregate = os.str();
    report.pass = report.passed() == count;
    return report;
}

/// Structural V2 degeneracy detection against sampled volumes (both ways).
inline SuiteReport run_v2_degeneracy_suite(std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport report;
    report.suite = "v2-degeneracy";
    TraceConfig cfg;

    auto sample_v2_states = [&](const RealMatrix& a, const Vector& r0) {
        auto engine = std::make_shared<TrajectoryEngine>(a);
        Trajectory traj(engine, r0);
        std::vector<std::pair<double, bool>> states;  // (t, is_zero)
        for (double t : cfg.times()) {
            bool zero = traj.with_stack(t, std::min(a.n(), 3), [&](const auto& st) {
                return static_cast<bool>(detail::volume_ladder(st, 2).zero[2]);
            });
            states.emplace_back(t, zero);
        }
        return states;
    };

    // The two structural families must be flagged zero at every sample.
    std::vector<std::pair<std::string, RealMatrix>> structural = {
        {"3*I4", RealMatrix::diagonal({3, 3, 3, 3})},
        {"J2(0)+J2(0)", build_canonical(make_layout({jordan_block(0, 2), jordan_block(0, 2)}))}};
    int case_idx = 0;
    for (const auto& [label, a] : structural) {
        bool structure = v2_degenerate(jordan_structure(a, summarize(a)));
        bool all_zero = true;
        for (int s = 0; s < 20; ++s) {
            Rng rng = Rng::for_sample(seed ^ detail::kTagV2, static_cast<std::uint64_t>(case_idx * 100 + s));
            Vector r0 = detail::to_vector(rng.initial_condition(a.n()));
            for (auto [t, zero] : sample_v2_states(a, r0)) {
                (void)t;
                all_zero = all_zero && zero;
            }
        }
        CaseResult r;
        r.name = "structural " + label;
        r.pass = structure && all_zero;
        r.detail = structure ? (all_zero ? "flagged and all sampled V2 zero"
                                         : "flagged but some sampled V2 nonzero")
                             : "v2_degenerate returned false";
        report.cases.push_back(std::move(r));
        ++case_idx;
    }

    // Non-degenerate canonical forms: V2 > 0 on the whole grid past t = 50.
    for (int i = 0; i < 20; ++i) {
        Rng rng = Rng::for_sample(seed ^ detail::kTagV2, static_cast<std::uint64_t>(1000 + i));
        detail::LayoutOptions opt;
        opt.min_n = 3;
        opt.max_n = 6;
        opt.stable_lo = -2.0;
        opt.stable_hi = 2.0;
        CanonicalLayout layout = detail::random_canonical_layout(rng, opt);
        RealMatrix a = build_canonical(layout);
        JordanStructure js = jordan_structure(a, summarize(a));
        if (v2_degenerate(js)) {
            --i;  // redraw: the structural families are excluded from this half
            continue;
        }
        Vector r0 = detail::to_vector(rng.initial_condition(layout.n));
        bool ok = true;
        for (auto [t, zero] : sample_v2_states(a, r0))
            if (t > 50.0 && zero) ok = false;
        CaseResult r;
        r.name = "non-degenerate case " + std::to_string(i);
        r.pass = ok;
        r.detail = ok ? "V2 > 0 for all grid t > 50" : "V2 flagged zero at some t > 50";
        report.cases.push_back(std::move(r));
    }

    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream os;
    os << report.passed() << "/" << report.cases.size() << " cases";
    report.aggregate = os.str();
    report.pass = report.passed() == static_cast<int>(report.cases.size());
    return report;
}

/// Cross-cutting properties: Cauchy-Binet equivalence, semigroup law, scaling
/// laws, similarity invariance of limit labels.
inline SuiteReport run_properties_suite(std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport report;
    report.suite = "properties";
    TraceConfig cfg;

    // (a) orthogonal-factorization volumes vs sum of squared minors.
    {
        int bad = 0, total = 0;
        double worst = 0.0;
        for (int c = 0; c < 500; ++c) {
            Rng rng = Rng::for_sample(seed ^ detail::kTagProps, static_cast<std::uint64_t>(c));
            int n = 2 + rng.below(4);
            Eigen::MatrixXd m(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
            RealMatrix a{std::move(m)};
            Vector r0 = detail::to_vector(rng.initial_condition(n));
            // Small horizon: the minor-sum route computes signed determinants in
            // plain double, whose cancellation grows like e^{spread t}.
            double t = rng.uniform(0.0, 1.5);
            int k = 1 + rng.below(std::min(3, n));
            DerivativeStack st = derivative_stack(a, r0, t, k);
            LogVolume qr = log_volume(st, k);
            LogVolume ms = volume_minor_sum(st, k);
            double vq = qr.is_zero ? 0.0 : std::exp(qr.log_value);
            double vm = ms.is_zero ? 0.0 : std::exp(ms.log_value);
            double err = std::abs(vq - vm) / (1.0 + std::max(vq, vm));
            worst = std::max(worst, err);
            ++total;
            if (err > 1e-9) ++bad;
        }
        CaseResult r;
        r.name = "cauchy-binet oracle equivalence (500 cases)";
        r.pass = bad == 0;
        r.detail = "worst normalized error " + format_human(worst);
        report.cases.push_back(std::move(r));
    }

    // (b) semigroup law of the matrix exponential.
    {
        int bad = 0;
        double worst = 0.0;
        for (int c = 0; c < 100; ++c) {
            Rng rng = Rng::for_sample(seed ^ detail::kTagProps, static_cast<std::uint64_t>(1000 + c));
            int n = 2 + rng.below(4);
            Eigen::MatrixXd m(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
            RealMatrix a{std::move(m)};
            double s = rng.uniform(0.0, 3.0), t = rng.uniform(0.0, 3.0);
            Eigen::MatrixXd lhs = mat_exp(a, s + t).mat();
            Eigen::MatrixXd rhs = mat_exp(a, s).mat() * mat_exp(a, t).mat();
            double err = (lhs - rhs).norm() / std::max(1.0, lhs.norm());
            worst = std::max(worst, err);
            if (err > 1e-9) ++bad;
        }
        CaseResult r;
        r.name = "semigroup law (100 cases)";
        r.pass = bad == 0;
        r.detail = "worst relative Frobenius error " + format_human(worst);
        report.cases.push_back(std::move(r));
    }

    // (c) scaling laws: r0 -> c r0 shifts log V_k by k log c, log kappa by -log c.
    {
        int bad = 0;
        double worst = 0.0;
        for (int c = 0; c < 100; ++c) {
            Rng rng = Rng::for_sample(seed ^ detail::kTagProps, static_cast<std::uint64_t>(2000 + c));
            int n = 2 + rng.below(4);
            Eigen::MatrixXd m(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
            RealMatrix a{std::move(m)};
            Vector r0 = detail::to_vector(rng.initial_condition(n));
            double t = rng.uniform(0.2, 3.0);
            // Power-of-two factors keep c*r0 exactly representable; V_k amplifies
            // input rounding by e^{spread t}, which would otherwise swamp the
            // 1e-10 log-domain budget without touching the law itself.
            double scale = (c % 2 == 0) ? 0.125 : 8.0;
            CurvatureSample base = curvature_profile(derivative_stack(a, r0, t, n));
            CurvatureSample scaled = curvature_profile(derivative_stack(a, scale * r0, t, n));
            double log_c = std::log(scale);
            for (int k = 1; k <= n; ++k) {
                const auto& v0 = base.log_v[static_cast<std::size_t>(k)];
                const auto& v1 = scaled.log_v[static_cast<std::size_t>(k)];
                if (v0.is_zero || v1.is_zero) continue;
                double err = std::abs(v1.log_value - v0.log_value - k * log_c);
                worst = std::max(worst, err);
                if (err > 1e-10) ++bad;
            }
            for (std::size_t i = 0; i < base.log_kappa.size(); ++i) {
                if (!base.log_kappa[i].is_defined() || !scaled.log_kappa[i].is_defined()) continue;
                double err = std::abs(scaled.log_kappa[i].log_value -
                                      base.log_kappa[i].log_value + log_c);
                worst = std::max(worst, err);
                if (err > 1e-10) ++bad;
            }
        }
        CaseResult r;
        r.name = "scaling laws for V_k and kappa_i (100 cases)";
        r.pass = bad == 0;
        r.detail = "worst log-domain error " + format_human(worst);
        report.cases.push_back(std::move(r));
    }

    // (d) similarity invariance of decisive labels under well-conditioned P.
    {
        int checked = 0, mismatches = 0;
        for (int c = 0; c < 20; ++c) {
            Rng rng = Rng::for_sample(seed ^ detail::kTagProps, static_cast<std::uint64_t>(3000 + c));
            int n = 3 + rng.below(3);
            std::vector<double> lam = detail::draw_trichotomy_spectrum(rng, n);
            RealMatrix d = RealMatrix::diagonal(lam);
            Eigen::MatrixXd p(n, n);
            double cond = 1e18;
            do {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        p(i, j) = (i == j ? 1.0 : 0.0) + rng.uniform(-0.6, 0.6);
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(p);
                cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
            } while (cond >= 100.0);
            RealMatrix b{Eigen::MatrixXd(p * d.mat() * p.inverse())};
            Vector r0 = detail::to_vector(rng.initial_condition(n));
            Vector v0 = p * r0;

            auto eng_d = std::make_shared<TrajectoryEngine>(d);
            auto eng_b = std::make_shared<TrajectoryEngine>(b);
            ProfileTrace prof_d = sample_profile_trace(Trajectory(eng_d, r0), cfg, n, false);
            ProfileTrace prof_b = sample_profile_trace(Trajectory(eng_b, v0), cfg, n, false);
            for (int i = 1; i <= n - 1; ++i) {
                LimitClass ld = classify_limit(extract_trace(prof_d, Quantity::kappa(i), n), cfg);
                if (ld.label != LimitClass::Label::TendsToZero &&
                    ld.label != LimitClass::Label::TendsToInfinity)
                    continue;
                LimitClass lb = classify_limit(extract_trace(prof_b, Quantity::kappa(i), n), cfg);
                ++checked;
                if (lb.label != ld.label) ++mismatches;
            }
        }
        CaseResult r;
        r.name = "similarity invariance of zero/infinity labels (20 transforms)";
        r.pass = mismatches == 0 && checked > 0;
        r.detail = std::to_string(checked) + " decisive labels compared, " +
                   std::to_string(mismatches) + " mismatches";
        report.cases.push_back(std::move(r));
    }

    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream os;
    os << report.passed() << "/" << report.cases.size() << " property groups";
    report.aggregate = os.str();
    report.pass = report.passed() == static_cast<int>(report.cases.size());
    return report;
}

/// Suites reachable from the command line: trichotomy, lemmas, properties, all.
inline std::vector<SuiteReport> run_suites(const std::string& which, std::uint64_t seed) {
    std::vector<SuiteReport> reports;
    if (which == "trichotomy" || which == "all") reports.push_back(run_trichotomy_suite(seed));
    if (which == "lemmas" || which == "all") {
        reports.push_back(run_lemma44_suite(seed));
        reports.push_back(run_lemma45_suite(seed));
        reports.push_back(run_lemma46_suite(seed));
        reports.push_back(run_v2_degeneracy_suite(seed));
    }
    if (which == "properties" || which == "all") reports.push_back(run_properties_suite(seed));
    if (reports.empty())
        throw PreconditionError("unknown suite '" + which +
                                "' (expected trichotomy, lemmas, properties, or all)");
    return reports;
}

}  // namespace torsionstab
