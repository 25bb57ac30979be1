#include <catch2/catch_amalgamated.hpp>

#include <torsionstab/geometry.hpp>
#include <torsionstab/rng.hpp>
#include <torsionstab/spectral.hpp>

#include <cmath>

using namespace torsionstab;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector r(static_cast<int>(v.size()));
    int i = 0;
    for (double x : v) r(i++) = x;
    return r;
}

DerivativeStack raw_stack(std::vector<Vector> vectors, double log_scale = 0.0) {
    DerivativeStack st;
    st.t = 0.0;
    st.order = static_cast<int>(vectors.size());
    st.state = vectors.front();
    st.r0 = vectors.front();
    st.vectors = std::move(vectors);
    st.log_scale = log_scale;
    return st;
}

}  // namespace

TEST_CASE("log volume reference points", "[geometry]") {
    SECTION("single vector: V1 is its length") {
        LogVolume v = log_volume(raw_stack({vec({3, 4, 0})}), 1);
        REQUIRE_FALSE(v.is_zero);
        CHECK(v.log_value == Catch::Approx(std::log(5.0)).epsilon(1e-14));
    }
    SECTION("unit axes span the unit cube") {
        LogVolume v = log_volume(raw_stack({vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1})}), 3);
        REQUIRE_FALSE(v.is_zero);
        CHECK(std::abs(v.log_value) < 1e-14);
    }
    SECTION("parallel edges collapse") {
        LogVolume v = log_volume(raw_stack({vec({1, 0}), vec({2, 0})}), 2);
        CHECK(v.is_zero);
    }
    SECTION("V0 = 1 by convention") {
        LogVolume v = log_volume(raw_stack({vec({1, 0})}), 0);
        REQUIRE_FALSE(v.is_zero);
        CHECK(v.log_value == 0.0);
    }
    SECTION("log scale enters with multiplicity k") {
        LogVolume v = log_volume(raw_stack({vec({1, 0}), vec({0, 1})}, 2.5), 2);
        CHECK(v.log_value == Catch::Approx(5.0).epsilon(1e-14));
    }
    SECTION("order bound enforced") {
        CHECK_THROWS_AS(log_volume(raw_stack({vec({1, 0})}), 2), PreconditionError);
    }
}

TEST_CASE("minor-sum reference volumes", "[geometry]") {
    SECTION("k = 1 agrees with the factorization route exactly") {
        DerivativeStack st = raw_stack({vec({0.3, -1.2, 0.4, 2.0})});
        CHECK(volume_minor_sum(st, 1).log_value ==
              Catch::Approx(log_volume(st, 1).log_value).epsilon(1e-15));
    }
    SECTION("random stack agrees within 1e-10 on V squared") {
        Rng rng(21);
        Eigen::MatrixXd m(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
        RealMatrix a{std::move(m)};
        DerivativeStack st = derivative_stack(a, vec({1, 1, 1, 1}), 0.3, 2);
        double v2_qr = std::exp(2.0 * log_volume(st, 2).log_value);
        double v2_ms = std::exp(2.0 * volume_minor_sum(st, 2).log_value);
        CHECK(std::abs(v2_qr - v2_ms) <= 1e-10 * v2_qr);
    }
    SECTION("parallel vectors are flagged zero") {
        CHECK(volume_minor_sum(raw_stack({vec({1, 0}), vec({2, 0})}), 2).is_zero);
    }
    SECTION("reference path size limits") {
        std::vector<Vector> four(4, vec({1, 2, 3, 4, 5, 6, 7, 8, 9}));
        CHECK_THROWS_AS(volume_minor_sum(raw_stack(four), 4), UnsupportedSizeError);
        std::vector<Vector> big = {vec({1, 2, 3, 4, 5, 6, 7, 8, 9})};
        CHECK_THROWS_AS(volume_minor_sum(raw_stack(big), 1), UnsupportedSizeError);
    }
}

TEST_CASE("curvature profile reference points", "[geometry]") {
    SECTION("unit circle has curvature one at every sampled time") {
        RealMatrix a{{0, 1}, {-1, 0}};
        for (double t : {0.0, 0.7, 2.9, 14.0}) {
            CurvatureSample s = curvature_profile(derivative_stack(a, vec({1, 0}), t, 2));
            REQUIRE(s.log_kappa.size() == 1);
            REQUIRE(s.log_kappa[0].is_defined());
            CHECK(s.log_kappa[0].linear() == Catch::Approx(1.0).epsilon(1e-10));
        }
    }
    SECTION("hand-computed Gram value at t = 0") {
        CurvatureSample s = curvature_profile(
            derivative_stack(RealMatrix::diagonal({-1, -2, -3}), vec({1, 1, 1}), 0.0, 3));
        REQUIRE(s.log_kappa[0].is_defined());
        double want = std::sqrt(76.0) / std::pow(14.0, 1.5);
        CHECK(s.log_kappa[0].linear() == Catch::Approx(want).epsilon(1e-12));
    }
    SECTION("profile length is n - 1 at most") {
        CurvatureSample s = curvature_profile(
            derivative_stack(RealMatrix::diagonal({-1, -2}), vec({1, 1}), 0.0, 2));
        CHECK(s.log_kappa.size() == 1);
        CHECK(s.m_detected == 2);
    }
    SECTION("equilibrium is an error, not a sample") {
        CHECK_THROWS_AS(curvature_profile(derivative_stack(RealMatrix::zero(2), vec({1, 1}), 1.0, 2)),
                        EquilibriumError);
    }
    SECTION("order below two is rejected") {
        CHECK_THROWS_AS(curvature_profile(raw_stack({vec({1, 0})})), PreconditionError);
    }
}

TEST_CASE("torsion conventions", "[geometry]") {
    SECTION("scalar multiples of the identity have structurally zero torsion") {
        RealMatrix a = RealMatrix::diagonal({3, 3, 3});
        SpectralSummary s = summarize(a);
        bool structural = v2_degenerate(jordan_structure(a, s));
        REQUIRE(structural);
        CurvatureSample sample = curvature_profile(derivative_stack(a, vec({1, 2, -1}), 0.8, 3));
        LogQuantity tau = torsion(sample, structural);
        CHECK(tau.is_zero());
        CHECK(tau.linear() == 0.0);
    }
    SECTION("transient degeneracy stays undefined without the structural certificate") {
        RealMatrix a = RealMatrix::diagonal({3, 3, 3});
        CurvatureSample sample = curvature_profile(derivative_stack(a, vec({1, 2, -1}), 0.8, 3));
        CHECK(torsion(sample, false).is_undefined());
    }
    SECTION("planar systems have zero torsion by convention") {
        CurvatureSample sample = curvature_profile(
            derivative_stack(RealMatrix{{0, 1}, {-1, 0}}, vec({1, 0}), 0.5, 2));
        CHECK(torsion(sample, false).is_zero());
    }
    SECTION("oscillator torsion at t = 0") {
        RealMatrix a{{0, 0, 1, 0}, {0, 0, 0, 1}, {-3, 2, 0, 0}, {2, -3, 0, 0}};
        CurvatureSample sample =
            curvature_profile(derivative_stack(a, vec({1, 2, 1, 2}), 0.0, 3));
        LogQuantity tau = torsion(sample, false);
        REQUIRE(tau.is_defined());
        CHECK(tau.linear() * tau.linear() == Catch::Approx(19.0 / 162.0).epsilon(1e-8));
    }
}

TEST_CASE("defined curvatures are nonnegative and finite", "[geometry]") {
    for (int c = 0; c < 40; ++c) {
        Rng rng = Rng::for_sample(404, static_cast<std::uint64_t>(c));
        int n = 2 + rng.below(4);
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
        RealMatrix a{std::move(m)};
        Vector r0(n);
        for (int i = 0; i < n; ++i) r0(i) = rng.signed_uniform(0.1, 1.0);
        CurvatureSample s =
            curvature_profile(derivative_stack(a, r0, rng.uniform(0.0, 2.0), n));
        for (const auto& q : s.log_kappa) {
            if (q.is_defined()) {
                REQUIRE(std::isfinite(q.log_value));
                REQUIRE(q.linear() >= 0.0);
            }
        }
        LogQuantity tau = torsion(s, false);
        if (tau.is_defined()) REQUIRE(tau.linear() >= 0.0);
        // m_detected is the largest non-degenerate prefix
        for (int k = 1; k <= s.m_detected; ++k)
            REQUIRE_FALSE(s.log_v[static_cast<std::size_t>(k)].is_zero);
    }
}

TEST_CASE("volume oracle equivalence across a seeded sweep", "[geometry]") {
    for (int c = 0; c < 80; ++c) {
        Rng rng = Rng::for_sample(505, static_cast<std::uint64_t>(c));
        int n = 2 + rng.below(4);
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
        RealMatrix a{std::move(m)};
        Vector r0(n);
        for (int i = 0; i < n; ++i) r0(i) = rng.signed_uniform(0.1, 1.0);
        int k = 1 + rng.below(std::min(3, n));
        DerivativeStack st = derivative_stack(a, r0, rng.uniform(0.0, 1.5), k);
        LogVolume qr = log_volume(st, k);
        LogVolume ms = volume_minor_sum(st, k);
        double vq = qr.is_zero ? 0.0 : std::exp(qr.log_value);
        double vm = ms.is_zero ? 0.0 : std::exp(ms.log_value);
        REQUIRE(std::abs(vq - vm) <= 1e-9 * (1.0 + std::max(vq, vm)));
    }
}
