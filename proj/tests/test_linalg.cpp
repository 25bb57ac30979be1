#include <catch2/catch_amalgamated.hpp>

#include <torsionstab/canonical.hpp>
#include <torsionstab/matrix.hpp>
#include <torsionstab/rng.hpp>
#include <torsionstab/trajectory.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

using namespace torsionstab;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector r(static_cast<int>(v.size()));
    int i = 0;
    for (double x : v) r(i++) = x;
    return r;
}

Eigen::MatrixXd random_matrix(Rng& rng, int n, double lo, double hi) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

// Independent eigenvalue oracle: characteristic polynomial coefficients by the
// Faddeev-LeVerrier recursion, roots by Durand-Kerner iteration. Shares no
// code with the QR-based solver under test.
std::vector<std::complex<double>> char_poly_roots(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    std::vector<double> coef(static_cast<std::size_t>(n) + 1);  // lambda^n + c1 lambda^{n-1} + ...
    coef[0] = 1.0;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        m = a * (m + coef[static_cast<std::size_t>(k - 1)] * Eigen::MatrixXd::Identity(n, n));
        coef[static_cast<std::size_t>(k)] = -m.trace() / k;
    }
    std::vector<std::complex<double>> roots(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        roots[static_cast<std::size_t>(i)] =
            std::pow(std::complex<double>(0.4, 0.9), i + 1) * std::max(1.0, a.norm());
    auto eval = [&](std::complex<double> z) {
        std::complex<double> p(1.0, 0.0);
        for (int k = 1; k <= n; ++k) p = p * z + coef[static_cast<std::size_t>(k)];
        return p;
    };
    for (int iter = 0; iter < 500; ++iter) {
        double moved = 0.0;
        for (int i = 0; i < n; ++i) {
            std::complex<double> denom(1.0, 0.0);
            for (int j = 0; j < n; ++j)
                if (j != i)
                    denom *= roots[static_cast<std::size_t>(i)] - roots[static_cast<std::size_t>(j)];
            std::complex<double> delta = eval(roots[static_cast<std::size_t>(i)]) / denom;
            roots[static_cast<std::size_t>(i)] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-13 * std::max(1.0, a.norm())) break;
    }
    return roots;
}

}  // namespace

TEST_CASE("matrix exponential reference points", "[linalg]") {
    SECTION("zero matrix at any time is the identity exactly") {
        RealMatrix e = mat_exp(RealMatrix::zero(2), 7.0);
        CHECK(e.mat() == Eigen::MatrixXd::Identity(2, 2));
    }
    SECTION("diagonal exponential") {
        RealMatrix e = mat_exp(RealMatrix::diagonal({1, 2}), 1.0);
        CHECK(e(0, 0) == Catch::Approx(std::exp(1.0)).epsilon(1e-14));
        CHECK(e(1, 1) == Catch::Approx(std::exp(2.0)).epsilon(1e-14));
        CHECK(std::abs(e(0, 1)) < 1e-15);
    }
    SECTION("quarter-turn rotation") {
        RealMatrix e = mat_exp(RealMatrix{{0, 1}, {-1, 0}}, M_PI / 2.0);
        CHECK(std::abs(e(0, 0)) < 1e-12);
        CHECK(std::abs(e(0, 1) - 1.0) < 1e-12);
        CHECK(std::abs(e(1, 0) + 1.0) < 1e-12);
        CHECK(std::abs(e(1, 1)) < 1e-12);
    }
    SECTION("t = 0 is the identity exactly") {
        Rng rng(7);
        RealMatrix a{random_matrix(rng, 4, -2, 2)};
        CHECK(mat_exp(a, 0.0).mat() == Eigen::MatrixXd::Identity(4, 4));
    }
    SECTION("overflow names the offending time") {
        RealMatrix a{{1000.0}};
        CHECK_THROWS_AS(mat_exp(a, 1000.0), OverflowError);
        try {
            mat_exp(a, 1000.0);
        } catch (const OverflowError& e) {
            CHECK(e.t == 1000.0);
        }
    }
    SECTION("non-finite time is rejected") {
        CHECK_THROWS_AS(mat_exp(RealMatrix::zero(2), std::nan("")), PreconditionError);
    }
}

TEST_CASE("matrix exponential semigroup law", "[linalg]") {
    for (int c = 0; c < 50; ++c) {
        Rng rng = Rng::for_sample(101, static_cast<std::uint64_t>(c));
        int n = 2 + rng.below(4);
        RealMatrix a{random_matrix(rng, n, -2, 2)};
        double s = rng.uniform(0.0, 3.0), t = rng.uniform(0.0, 3.0);
        Eigen::MatrixXd lhs = mat_exp(a, s + t).mat();
        Eigen::MatrixXd rhs = mat_exp(a, s).mat() * mat_exp(a, t).mat();
        REQUIRE((lhs - rhs).norm() <= 1e-9 * std::max(1.0, lhs.norm()));
    }
}

TEST_CASE("eigenvalues of reference matrices", "[linalg]") {
    SECTION("diagonal") {
        auto eigs = eigenvalues(RealMatrix::diagonal({-1, -2, -3}));
        REQUIRE(eigs.size() == 3);
        CHECK(eigs[0].real() == Catch::Approx(-1.0));
        CHECK(eigs[1].real() == Catch::Approx(-2.0));
        CHECK(eigs[2].real() == Catch::Approx(-3.0));
        for (const auto& z : eigs) CHECK(z.imag() == 0.0);
    }
    SECTION("rotation block gives a conjugate pair, +Im first") {
        auto eigs = eigenvalues(RealMatrix{{0, 1}, {-1, 0}});
        REQUIRE(eigs.size() == 2);
        CHECK(std::abs(eigs[0] - std::complex<double>(0, 1)) < 1e-12);
        CHECK(std::abs(eigs[1] - std::complex<double>(0, -1)) < 1e-12);
    }
    SECTION("sorted by (Re desc, |Im| asc)") {
        RealMatrix a{{0, 2, 0, 0}, {-2, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, -3}};
        auto eigs = eigenvalues(a);
        REQUIRE(eigs.size() == 4);
        CHECK(eigs[0].real() == Catch::Approx(1.0));
        CHECK(eigs[1].real() == Catch::Approx(0.0).margin(1e-12));
        CHECK(eigs[1].imag() == Catch::Approx(2.0));
        CHECK(eigs[2].imag() == Catch::Approx(-2.0));
        CHECK(eigs[3].real() == Catch::Approx(-3.0));
    }
}

TEST_CASE("example-1 system eigenvalues against an independent oracle", "[linalg]") {
    RealMatrix a{{-25, -8, -39, 19}, {-14, -10, -26, 14}, {9, 0, 7, -9}, {-5, -8, -21, -1}};
    auto eigs = eigenvalues(a);

    std::complex<double> prod(1, 0);
    for (const auto& z : eigs) prod *= z;
    CHECK(std::abs(prod.real() - 1320.0) <= 1e-6 * 1320.0);
    CHECK(std::abs(a.determinant() - 1320.0) <= 1e-6 * 1320.0);

    auto oracle = char_poly_roots(a.mat());
    REQUIRE(oracle.size() == eigs.size());
    std::vector<bool> used(oracle.size(), false);
    for (const auto& z : eigs) {
        double best = 1e300;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            if (used[i]) continue;
            double d = std::abs(z - oracle[i]);
            if (d < best) {
                best = d;
                arg = i;
            }
        }
        used[arg] = true;
        REQUIRE(best < 1e-6 * a.norm());
    }
}

TEST_CASE("eigenvalue product equals the determinant", "[linalg]") {
    for (int c = 0; c < 60; ++c) {
        Rng rng = Rng::for_sample(202, static_cast<std::uint64_t>(c));
        int n = 2 + rng.below(5);
        RealMatrix a{random_matrix(rng, n, -2, 2)};
        auto eigs = eigenvalues(a);
        std::complex<double> prod(1, 0);
        for (const auto& z : eigs) prod *= z;
        double det = a.determinant();
        REQUIRE(std::abs(prod.real() - det) <= 1e-8 * std::max(1.0, std::abs(det)));
        REQUIRE(std::abs(prod.imag()) <= 1e-8 * std::max(1.0, std::abs(det)));
    }
}

TEST_CASE("numerical rank", "[linalg]") {
    CHECK(numerical_rank(RealMatrix::identity(3), 1e-9) == 3);
    CHECK(numerical_rank(RealMatrix{{0, 1}, {0, 0}}, 1e-9) == 1);
    CHECK(numerical_rank(RealMatrix{{1, 1}, {1, 1}}, 1e-9) == 1);
    CHECK(numerical_rank(RealMatrix::zero(3), 1e-9) == 0);
    CHECK_THROWS_AS(numerical_rank(RealMatrix::identity(2), 0.0), PreconditionError);
}

TEST_CASE("derivative stack reference points", "[linalg]") {
    SECTION("diagonal system at t = 0") {
        DerivativeStack st = derivative_stack(RealMatrix::diagonal({-1, -2}), vec({1, 1}), 0.0, 2);
        double gain = std::exp(st.log_scale);
        CHECK(gain * st.vectors[0](0) == Catch::Approx(-1.0).epsilon(1e-14));
        CHECK(gain * st.vectors[0](1) == Catch::Approx(-2.0).epsilon(1e-14));
        CHECK(gain * st.vectors[1](0) == Catch::Approx(1.0).epsilon(1e-14));
        CHECK(gain * st.vectors[1](1) == Catch::Approx(4.0).epsilon(1e-14));
        // normalization contract: the largest stack entry sits in [1/2, 2]
        double mx = 0;
        for (const auto& w : st.vectors) mx = std::max(mx, w.cwiseAbs().maxCoeff());
        CHECK(mx >= 0.5);
        CHECK(mx <= 2.0);
    }
    SECTION("componentwise exponential law for diagonal systems") {
        double lambda = -0.7, t = 1.3;
        DerivativeStack st =
            derivative_stack(RealMatrix::diagonal({lambda, 0.4}), vec({2, 1}), t, 3);
        double gain = std::exp(st.log_scale);
        for (int j = 1; j <= 3; ++j) {
            double want = std::pow(lambda, j) * std::exp(lambda * t) * 2.0;
            CHECK(gain * st.vectors[static_cast<std::size_t>(j - 1)](0) ==
                  Catch::Approx(want).epsilon(1e-12));
        }
    }
    SECTION("rotation at t = pi") {
        DerivativeStack st =
            derivative_stack(RealMatrix{{0, 1}, {-1, 0}}, vec({1, 0}), M_PI, 2);
        double gain = std::exp(st.log_scale);
        CHECK(gain * st.state(0) == Catch::Approx(-1.0).epsilon(1e-12));
        CHECK(std::abs(gain * st.state(1)) < 1e-12);
        CHECK(std::abs(gain * st.vectors[0](0)) < 1e-12);
        CHECK(gain * st.vectors[0](1) == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("vectors chain through A") {
        Rng rng(11);
        RealMatrix a{random_matrix(rng, 4, -2, 2)};
        Vector r0 = vec({0.3, -0.8, 0.5, 1.0});
        DerivativeStack st = derivative_stack(a, r0, 0.9, 4);
        for (std::size_t j = 0; j + 1 < st.vectors.size(); ++j) {
            Vector want = a.mat() * st.vectors[j];
            REQUIRE((want - st.vectors[j + 1]).norm() <= 1e-12 * want.norm());
        }
    }
    SECTION("preconditions") {
        CHECK_THROWS_AS(derivative_stack(RealMatrix::identity(2), vec({0, 0}), 1.0, 2),
                        DegenerateInitialConditionError);
        CHECK_THROWS_AS(derivative_stack(RealMatrix::identity(2), vec({1, 0}), -1.0, 2),
                        PreconditionError);
        CHECK_THROWS_AS(derivative_stack(RealMatrix::identity(2), vec({1, 0}), 1.0, 4),
                        PreconditionError);
        CHECK_THROWS_AS(derivative_stack(RealMatrix::identity(2), vec({1, 0}), 1.0, 0),
                        PreconditionError);
    }
}

TEST_CASE("evaluation routes agree with the direct exponential", "[linalg]") {
    SECTION("dense defective systems take the exponential fallback") {
        Eigen::MatrixXd p(3, 3), j(3, 3);
        p << 1, 2, 0, 0, 1, 1, 1, 0, 1;
        j << -1, 1, 0, 0, -1, 0, 0, 0, 0.5;
        RealMatrix a{Eigen::MatrixXd(p * j * p.inverse())};
        TrajectoryEngine engine(a);
        CHECK(engine.route() == TrajectoryEngine::Route::MatExp);

        Vector r0 = vec({0.7, -1.1, 0.4});
        for (double t : {0.0, 0.8, 2.3}) {
            DerivativeStack st = derivative_stack(a, r0, t, 3);
            Vector state = mat_exp(a, t).mat() * r0;
            double gain = std::exp(st.log_scale);
            REQUIRE((gain * st.state - state).norm() <= 1e-9 * (1.0 + state.norm()));
            Vector w = state;
            for (int k = 0; k < 3; ++k) {
                w = a.mat() * w;
                REQUIRE((gain * st.vectors[static_cast<std::size_t>(k)] - w).norm() <=
                        1e-9 * (1.0 + w.norm()));
            }
        }
    }
    SECTION("canonical closed forms agree with the direct exponential") {
        RealMatrix a = build_canonical(
            make_layout({jordan_block(-1, 3), complex_block(-0.3, 1.7, 2)}));
        TrajectoryEngine engine(a);
        CHECK(engine.route() == TrajectoryEngine::Route::Canonical);
        Vector r0 = vec({1, -0.5, 0.25, 0.8, -0.6, 0.4, 1.2});
        for (double t : {0.4, 1.9, 3.5}) {
            DerivativeStack st = derivative_stack(a, r0, t, 2);
            Vector state = mat_exp(a, t).mat() * r0;
            double gain = std::exp(st.log_scale);
            REQUIRE((gain * st.state - state).norm() <= 1e-10 * (1.0 + state.norm()));
        }
    }
}

TEST_CASE("finite-difference derivative identity", "[linalg]") {
    Rng rng(5);
    RealMatrix a{random_matrix(rng, 3, -1.5, 1.5)};
    Vector r0 = vec({1.0, -0.4, 0.7});
    double t = 0.7;
    DerivativeStack st = derivative_stack(a, r0, t, 1);
    Vector w1 = std::exp(st.log_scale) * st.vectors[0];

    std::vector<double> hs = {1e-2, 1e-3, 1e-4};
    std::vector<double> errs;
    for (double h : hs) {
        Vector fd = (mat_exp(a, t + h).mat() * r0 - mat_exp(a, t - h).mat() * r0) / (2 * h);
        errs.push_back((fd - w1).norm());
    }
    // central differences are O(h^2): each decade in h buys ~two decades of error
    CHECK(errs[1] / errs[0] < 0.05);
    CHECK(errs[2] / errs[1] < 0.05);
}

TEST_CASE("shift consistency of the derivative stack", "[linalg]") {
    for (int c = 0; c < 20; ++c) {
        Rng rng = Rng::for_sample(303, static_cast<std::uint64_t>(c));
        int n = 2 + rng.below(3);
        RealMatrix a{random_matrix(rng, n, -1.5, 1.5)};
        Vector r0(n);
        for (int i = 0; i < n; ++i) r0(i) = rng.signed_uniform(0.1, 1.0);
        double t0 = rng.uniform(0.0, 2.0), t1 = rng.uniform(0.0, 2.0);
        int k = std::min(n, 3);

        DerivativeStack direct = derivative_stack(a, r0, t0 + t1, k);
        Vector shifted0 = mat_exp(a, t0).mat() * r0;
        DerivativeStack stepped = derivative_stack(a, shifted0, t1, k);
        for (int j = 0; j < k; ++j) {
            Vector lhs = std::exp(direct.log_scale) * direct.vectors[static_cast<std::size_t>(j)];
            Vector rhs = std::exp(stepped.log_scale) * stepped.vectors[static_cast<std::size_t>(j)];
            REQUIRE((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
        }
    }
}
