#include <catch2/catch_amalgamated.hpp>

#include <torsionstab/builtin_systems.hpp>
#include <torsionstab/discriminance.hpp>
#include <torsionstab/suites.hpp>

using namespace torsionstab;

namespace {

std::vector<LimitClass> labels_of(std::initializer_list<LimitClass::Label> ls) {
    std::vector<LimitClass> out;
    for (auto l : ls) {
        LimitClass lc;
        lc.label = l;
        out.push_back(lc);
    }
    return out;
}

using L = LimitClass::Label;
using V = StabilityVerdict::Verdict;

}  // namespace

TEST_CASE("torsion verdict rules", "[discriminance]") {
    RealMatrix stable = RealMatrix::diagonal({-1, -2, -2.5});
    SpectralSummary s = summarize(stable);

    SECTION("divergence consensus certifies asymptotic stability") {
        auto v = torsion_verdict(stable, labels_of({L::TendsToInfinity, L::TendsToInfinity,
                                                    L::TendsToInfinity, L::TendsToInfinity,
                                                    L::TendsToZero}),
                                 s);
        CHECK(v.verdict == V::AsymptoticallyStable);
        CHECK(v.provenance == StabilityVerdict::Provenance::TorsionTheorem);
    }
    SECTION("bounded-nonconvergent consensus certifies stability") {
        auto v = torsion_verdict(stable, labels_of({L::NoLimitBounded, L::NoLimitBounded,
                                                    L::TendsToPositiveConst}),
                                 s);
        CHECK(v.verdict == V::Stable);
    }
    SECTION("tau to zero certifies nothing") {
        auto v = torsion_verdict(stable, labels_of({L::TendsToZero, L::TendsToZero}), s);
        CHECK(v.verdict == V::Inconclusive);
        REQUIRE_FALSE(v.notes.empty());
        CHECK(v.notes[0].find("sufficient") != std::string::npos);
    }
    SECTION("mixed labels below consensus are inconclusive") {
        auto v = torsion_verdict(stable, labels_of({L::TendsToInfinity, L::TendsToZero,
                                                    L::NoLimitBounded, L::TendsToZero}),
                                 s);
        CHECK(v.verdict == V::Inconclusive);
    }
    SECTION("singular systems are gated regardless of labels") {
        RealMatrix singular{{0, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, -1, 1}, {0, 0, -1, -1}};
        auto v = torsion_verdict(singular, labels_of({L::TendsToPositiveConst}),
                                 summarize(singular));
        CHECK(v.verdict == V::Inconclusive);
        REQUIRE_FALSE(v.notes.empty());
        CHECK(v.notes[0].find("det A = 0") != std::string::npos);
    }
    SECTION("empty labels are a precondition error") {
        CHECK_THROWS_AS(torsion_verdict(stable, {}, s), PreconditionError);
    }
    SECTION("unanimity always matches the single-label rule") {
        for (L l : {L::TendsToZero, L::TendsToInfinity, L::TendsToPositiveConst,
                    L::NoLimitBounded, L::Inconclusive}) {
            auto one = torsion_verdict(stable, labels_of({l}), s);
            auto many = torsion_verdict(stable, labels_of({l, l, l, l, l, l, l, l, l, l}), s);
            CHECK(one.verdict == many.verdict);
        }
    }
}

TEST_CASE("curvature verdict rules", "[discriminance]") {
    RealMatrix d = RealMatrix::diagonal({-1, -2, -3});
    SpectralSummary s = summarize(d);

    SECTION("nonzero-limit consensus with invertible A upgrades to asymptotic") {
        auto v = curvature_verdict(d, 1, labels_of({L::TendsToPositiveConst,
                                                    L::TendsToPositiveConst}),
                                   s, true);
        CHECK(v.verdict == V::AsymptoticallyStable);
        CHECK(v.provenance == StabilityVerdict::Provenance::CurvatureTheorem);
    }
    SECTION("without invertibility the verdict stays stable") {
        RealMatrix d0 = RealMatrix::diagonal({0, -1, -2});
        auto v = curvature_verdict(d0, 1, labels_of({L::TendsToPositiveConst}), summarize(d0),
                                   true);
        CHECK(v.verdict == V::Stable);
    }
    SECTION("hypothesis gate: not similar to a real diagonal matrix") {
        RealMatrix rot{{0, 1}, {-1, 0}};
        auto v = curvature_verdict(rot, 1, labels_of({L::TendsToPositiveConst}), summarize(rot),
                                   false);
        CHECK(v.verdict == V::Inconclusive);
        CHECK(v.notes[0].find("hypothesis") != std::string::npos);
    }
    SECTION("kappa to zero is a one-way street") {
        auto v = curvature_verdict(d, 2, labels_of({L::TendsToZero, L::TendsToZero}), s, true);
        CHECK(v.verdict == V::Inconclusive);
    }
    SECTION("empty labels are a precondition error") {
        CHECK_THROWS_AS(curvature_verdict(d, 1, {}, s, true), PreconditionError);
    }
}

TEST_CASE("reconciliation of the geometric pipeline with the oracle", "[discriminance]") {
    TraceConfig cfg;
    SECTION("asymptotically stable diagonal: both paths agree") {
        ReconciliationReport rep = reconcile(RealMatrix::diagonal({-1, -2, -2.5}), cfg, 8, 42);
        CHECK(rep.oracle.verdict == V::AsymptoticallyStable);
        CHECK(rep.geometric.verdict == V::AsymptoticallyStable);
        CHECK(rep.consistent);
        CHECK(rep.diagonalizable_real);
    }
    SECTION("remark 2: diverging torsion blocked by the determinant gate") {
        RealMatrix a{{-1, 1, 0, 0}, {0, -1, 1, 0}, {0, 0, -1, 0}, {0, 0, 0, 0}};
        ReconciliationReport rep = reconcile(a, cfg, 8, 42);
        CHECK(rep.oracle.verdict == V::Stable);
        CHECK(rep.geometric.verdict == V::Inconclusive);
        CHECK(rep.consistent);
        // tau labels do diverge; only the gate stops the verdict
        REQUIRE_FALSE(rep.quantities.empty());
        int divergent = 0;
        for (const auto& l : rep.quantities[0].labels)
            divergent += l.label == L::TendsToInfinity ? 1 : 0;
        CHECK(divergent == 8);
    }
    SECTION("planar saddle: tau is conventionally zero, oracle says unstable") {
        RealMatrix a = build_canonical(make_layout({jordan_block(1, 1), jordan_block(-1, 1)}));
        ReconciliationReport rep = reconcile(a, cfg, 6, 42);
        CHECK(rep.oracle.verdict == V::Unstable);
        CHECK(rep.geometric.verdict == V::Inconclusive);
        CHECK(rep.consistent);
        for (const auto& l : rep.quantities[0].labels)
            CHECK(l.label == L::TendsToZero);
    }
    SECTION("one-dimensional systems have no curvature story") {
        ReconciliationReport rep = reconcile(RealMatrix{{-1.0}}, cfg, 6, 42);
        CHECK(rep.oracle.verdict == V::AsymptoticallyStable);
        CHECK(rep.geometric.verdict == V::Inconclusive);
        CHECK(rep.consistent);
    }
}

TEST_CASE("soundness: geometric claims never exceed the oracle", "[discriminance]") {
    TraceConfig cfg;
    int claims = 0;
    for (int c = 0; c < 10; ++c) {
        Rng rng = Rng::for_sample(808, static_cast<std::uint64_t>(c));
        RealMatrix a = [&]() -> RealMatrix {
            switch (c % 3) {
                case 0: {  // diagonal
                    std::vector<double> lam;
                    int n = 3 + rng.below(2);
                    for (int i = 0; i < n; ++i) lam.push_back(rng.signed_uniform(0.2, 2.5));
                    return RealMatrix::diagonal(lam);
                }
                case 1: {  // canonical mix
                    detail::LayoutOptions opt;
                    opt.min_n = 3;
                    opt.max_n = 5;
                    opt.stable_lo = -2.0;
                    opt.stable_hi = 1.5;
                    return build_canonical(detail::random_canonical_layout(rng, opt));
                }
                default: {  // dense
                    int n = 3 + rng.below(2);
                    Eigen::MatrixXd m(n, n);
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-1.5, 1.5);
                    return RealMatrix{std::move(m)};
                }
            }
        }();
        ReconciliationReport rep = reconcile(a, cfg, 6, 42);
        if (rep.geometric.verdict == V::AsymptoticallyStable) {
            ++claims;
            REQUIRE(rep.oracle.verdict == V::AsymptoticallyStable);
        } else if (rep.geometric.verdict == V::Stable) {
            ++claims;
            REQUIRE((rep.oracle.verdict == V::Stable ||
                     rep.oracle.verdict == V::AsymptoticallyStable));
        }
        REQUIRE(rep.consistent);
    }
    CHECK(claims > 0);  // the sweep must actually exercise the claim path
}
