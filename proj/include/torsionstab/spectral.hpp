#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "torsionstab/canonical.hpp"
#include "torsionstab/errors.hpp"
#include "torsionstab/matrix.hpp"
#include "torsionstab/verdict.hpp"

namespace torsionstab {

/// Analytic spectrum digest driving the classical verdict and the limit
/// predictors.
struct SpectralSummary {
    int n = 0;
    std::vector<std::complex<double>> eigs;  // with multiplicity, sorted
    double M = 0.0;                          // spectral abscissa
    std::optional<double> N;                 // second abscissa over the reduced set
    /// Distinct nonzero eigenvalues, decreasing; present only when A is
    /// diagonalizable with an all-real spectrum.
    std::optional<std::vector<double>> lambda_order;
    bool invertible = false;
    bool semisimple_critical = true;
    double det = 0.0;
    double scale = 1.0;  // matrix norm all snapping tolerances refer to
    std::vector<std::string> notes;
};

/// Real Jordan block inventory: sizes per distinct eigenvalue. Conjugate pairs
/// are stored once with b > 0. `layout` is set when the input was literally in
/// canonical form (block positions then carry meaning for r(0)).
struct JordanStructure {
    struct RealGroup {
        double lambda = 0.0;
        std::vector<int> sizes;
    };
    struct ComplexGroup {
        double a = 0.0;
        double b = 0.0;
        std::vector<int> sizes;
    };
    std::vector<RealGroup> real_blocks;
    std::vector<ComplexGroup> complex_blocks;
    std::optional<CanonicalLayout> layout;
};

/// Predicted t -> infinity behavior of a curvature or torsion trace.
struct LimitPrediction {
    enum class Class {
        TendsToZero,
        TendsToPositiveConst,
        TendsToInfinity,
        NoLimitBounded,
        NotPredicted
    };
    Class cls = Class::NotPredicted;
    std::optional<double> value;  // present only for TendsToPositiveConst
    bool applicable = false;
    std::string reason;
};

inline const char* to_string(LimitPrediction::Class c) {
    switch (c) {
        case LimitPrediction::Class::TendsToZero: return "tends-to-zero";
        case LimitPrediction::Class::TendsToPositiveConst: return "tends-to-positive-const";
        case LimitPrediction::Class::TendsToInfinity: return "tends-to-infinity";
        case LimitPrediction::Class::NoLimitBounded: return "no-limit-bounded";
        default: return "not-predicted";
    }
}

namespace detail {

inline bool is_critical(const std::complex<double>& z) {
    return std::abs(z.real()) < 1e-9 * (1.0 + std::abs(z));
}

inline bool snapped_zero(const std::complex<double>& z, double scale) {
    return std::abs(z) <= 1e-9 * scale;
}

/// Chain clustering of eigenvalues at the structure-detection tolerance.
struct EigenCluster {
    std::complex<double> value;  // representative (mean)
    int multiplicity = 0;
};

inline std::vector<EigenCluster> cluster_eigenvalues(
    const std::vector<std::complex<double>>& eigs, double tol) {
    std::vector<EigenCluster> clusters;
    std::vector<std::complex<double>> sorted = eigs;
    std::sort(sorted.begin(), sorted.end(), [](auto x, auto y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    for (const auto& z : sorted) {
        bool merged = false;
        for (auto& c : clusters) {
            if (std::abs(z - c.value) <= tol) {
                c.value = (c.value * static_cast<double>(c.multiplicity) + z) /
                          static_cast<double>(c.multiplicity + 1);
                ++c.multiplicity;
                merged = true;
                break;
            }
        }
        if (!merged) clusters.push_back({z, 1});
    }
    return clusters;
}

/// Block sizes of one eigenvalue from the rank sequence of B^j;
/// #blocks of size >= j equals rank(B^{j-1}) - rank(B^j).
inline std::vector<int> block_sizes_from_ranks(const Eigen::MatrixXd& b, int n,
                                               int multiplicity, bool pair) {
    std::vector<int> drops;  // drops[j-1] = #blocks of size >= j (pair-counted)
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
    int prev_rank = n;
    for (int j = 1; j <= multiplicity + 1; ++j) {
        power = power * b;
        double norm = power.norm();
        if (norm == 0.0) {
            drops.push_back(prev_rank);
            prev_rank = 0;
            break;
        }
        int r = numerical_rank(power, 1e-9);
        int d = prev_rank - r;
        if (d <= 0) break;
        drops.push_back(d);
        prev_rank = r;
    }
    if (pair) {
        for (auto& d : drops) {
            if (d % 2 != 0)
                throw IllConditionedSpectrumError(
                    "odd rank drop for a complex pair: structure detection unreliable");
            d /= 2;
        }
    }
    for (std::size_t j = 1; j < drops.size(); ++j)
        if (drops[j] > drops[j - 1])
            throw IllConditionedSpectrumError("rank sequence is not monotone");

    std::vector<int> sizes;
    int total = 0;
    for (std::size_t j = 0; j < drops.size(); ++j) {
        int next = (j + 1 < drops.size()) ? drops[j + 1] : 0;
        for (int c = 0; c < drops[j] - next; ++c) {
            sizes.push_back(static_cast<int>(j) + 1);
            total += static_cast<int>(j) + 1;
        }
    }
    if (total != multiplicity)
        throw IllConditionedSpectrumError(
            "detected block sizes are inconsistent with eigenvalue multiplicity");
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

}  // namespace detail

/// Spectrum digest: abscissas, invertibility (with a rank cross-check),
/// semisimplicity of critical eigenvalues, and the ordered distinct nonzero
/// eigenvalue sequence when A is real-diagonalizable.
inline SpectralSummary summarize(const RealMatrix& a) {
    SpectralSummary s;
    s.n = a.n();
    s.scale = std::max(a.norm(), 1e-300);
    s.eigs = eigenvalues(a);
    s.det = a.determinant();

    s.M = s.eigs.front().real();
    for (const auto& z : s.eigs) s.M = std::max(s.M, z.real());

    // Invertibility: eigenvalue snapping, cross-checked against numerical rank.
    bool eig_zero = false;
    for (const auto& z : s.eigs) eig_zero = eig_zero || detail::snapped_zero(z, s.scale);
    bool rank_deficient = numerical_rank(a, 1e-9) < s.n;
    if (eig_zero != rank_deficient)
        s.notes.push_back("invertibility cross-check disagreement between eigenvalue "
                          "snapping and numerical rank; reporting the conservative answer");
    s.invertible = !eig_zero && !rank_deficient;

    // Semisimplicity of critical eigenvalues via rank(B) = rank(B^2).
    const Eigen::MatrixXd& m = a.mat();
    std::vector<std::complex<double>> crit_done;
    s.semisimple_critical = true;
    for (const auto& z : s.eigs) {
        if (!detail::is_critical(z)) continue;
        if (z.imag() < 0) continue;
        bool seen = false;
        for (const auto& w : crit_done)
            if (std::abs(w - z) <= 1e-6 * s.scale) seen = true;
        if (seen) continue;
        crit_done.push_back(z);
        Eigen::MatrixXd b;
        if (z.imag() == 0.0) {
            b = m - z.real() * Eigen::MatrixXd::Identity(s.n, s.n);
        } else {
            double a2b2 = std::norm(z);
            b = m * m - 2.0 * z.real() * m + a2b2 * Eigen::MatrixXd::Identity(s.n, s.n);
        }
        if (numerical_rank(b, 1e-9) != numerical_rank(Eigen::MatrixXd(b * b), 1e-9))
            s.semisimple_critical = false;
    }

    // lambda_order: distinct nonzero eigenvalues, decreasing, in the
    // real-diagonalizable case only.
    bool all_real = true;
    for (const auto& z : s.eigs) all_real = all_real && z.imag() == 0.0;
    if (all_real) {
        auto clusters = detail::cluster_eigenvalues(s.eigs, 1e-6 * std::max(1.0, s.scale));
        bool diagonalizable = true;
        for (const auto& c : clusters) {
            if (c.multiplicity == 1) continue;
            Eigen::MatrixXd b =
                m - c.value.real() * Eigen::MatrixXd::Identity(s.n, s.n);
            if (numerical_rank(b, 1e-9) != s.n - c.multiplicity) diagonalizable = false;
        }
        if (diagonalizable) {
            std::vector<double> order;
            for (const auto& c : clusters)
                if (!detail::snapped_zero(c.value, s.scale)) order.push_back(c.value.real());
            std::sort(order.rbegin(), order.rend());
            s.lambda_order = std::move(order);
        }
    }

    // N: second abscissa over the spectrum minus J1(0) zeros and minus the
    // abscissa achievers themselves.
    bool zero_semisimple = false;
    if (eig_zero)
        zero_semisimple =
            numerical_rank(a, 1e-9) == numerical_rank(Eigen::MatrixXd(m * m), 1e-9);
    double best = -std::numeric_limits<double>::infinity();
    bool have = false;
    for (const auto& z : s.eigs) {
        if (detail::snapped_zero(z, s.scale) && zero_semisimple) continue;
        if (z.imag() == 0.0 && std::abs(z.real() - s.M) <= 1e-9 * (1.0 + std::abs(s.M)))
            continue;  // the value M itself
        best = std::max(best, z.real());
        have = true;
    }
    if (have) s.N = best;
    return s;
}

/// Classical eigenvalue criterion (the oracle verdict).
inline StabilityVerdict classify_eigen_stability(const SpectralSummary& s) {
    StabilityVerdict v;
    v.provenance = StabilityVerdict::Provenance::EigenvalueOracle;
    bool any_critical = false;
    bool any_positive = false;
    for (const auto& z : s.eigs) {
        if (detail::is_critical(z))
            any_critical = true;
        else if (z.real() > 0)
            any_positive = true;
    }
    if (any_positive) {
        v.verdict = StabilityVerdict::Verdict::Unstable;
    } else if (any_critical) {
        v.verdict = s.semisimple_critical ? StabilityVerdict::Verdict::Stable
                                          : StabilityVerdict::Verdict::Unstable;
        if (!s.semisimple_critical)
            v.notes.push_back("critical eigenvalue is not a simple root of the minimal polynomial");
    } else {
        v.verdict = StabilityVerdict::Verdict::AsymptoticallyStable;
    }
    return v;
}

/// Jordan block structure via rank sequences (the transform itself is never
/// constructed). Exact when A is literally in canonical form.
inline JordanStructure jordan_structure(const RealMatrix& a, const SpectralSummary& s) {
    JordanStructure js;
    if (auto layout = parse_canonical(a)) {
        for (const auto& blk : layout->blocks) {
            if (blk.is_complex) {
                bool found = false;
                for (auto& g : js.complex_blocks)
                    if (g.a == blk.a && g.b == blk.b) {
                        g.sizes.push_back(blk.size);
                        found = true;
                    }
                if (!found) js.complex_blocks.push_back({blk.a, blk.b, {blk.size}});
            } else {
                bool found = false;
                for (auto& g : js.real_blocks)
                    if (g.lambda == blk.lambda) {
                        g.sizes.push_back(blk.size);
                        found = true;
                    }
                if (!found) js.real_blocks.push_back({blk.lambda, {blk.size}});
            }
        }
        js.layout = std::move(*layout);
        for (auto& g : js.real_blocks) std::sort(g.sizes.rbegin(), g.sizes.rend());
        for (auto& g : js.complex_blocks) std::sort(g.sizes.rbegin(), g.sizes.rend());
        std::sort(js.real_blocks.begin(), js.real_blocks.end(),
                  [](const auto& x, const auto& y) { return x.lambda > y.lambda; });
        std::sort(js.complex_blocks.begin(), js.complex_blocks.end(),
                  [](const auto& x, const auto& y) {
                      if (x.a != y.a) return x.a > y.a;
                      return x.b < y.b;
                  });
        return js;
    }

    const Eigen::MatrixXd& m = a.mat();
    const int n = s.n;
    auto clusters = detail::cluster_eigenvalues(s.eigs, 1e-6 * std::max(1.0, s.scale));
    int covered = 0;
    for (const auto& c : clusters) {
        if (c.value.imag() < 0) continue;  // conjugate partner of a +Im cluster
        if (c.value.imag() == 0.0) {
            double lambda = detail::snapped_zero(c.value, s.scale) ? 0.0 : c.value.real();
            Eigen::MatrixXd b = m - lambda * Eigen::MatrixXd::Identity(n, n);
            auto sizes = detail::block_sizes_from_ranks(b, n, c.multiplicity, false);
            for (int sz : sizes) covered += sz;
            js.real_blocks.push_back({lambda, std::move(sizes)});
        } else {
            double aa = c.value.real();
            double bb = c.value.imag();
            Eigen::MatrixXd b = m * m - 2.0 * aa * m +
                                (aa * aa + bb * bb) * Eigen::MatrixXd::Identity(n, n);
            auto sizes = detail::block_sizes_from_ranks(b, n, c.multiplicity, true);
            for (int sz : sizes) covered += 2 * sz;
            js.complex_blocks.push_back({aa, bb, std::move(sizes)});
        }
    }
    if (covered != n)
        throw IllConditionedSpectrumError("block sizes do not tile the dimension");
    std::sort(js.real_blocks.begin(), js.real_blocks.end(),
              [](const auto& x, const auto& y) { return x.lambda > y.lambda; });
    std::sort(js.complex_blocks.begin(), js.complex_blocks.end(),
              [](const auto& x, const auto& y) {
                  if (x.a != y.a) return x.a > y.a;
                  return x.b < y.b;
              });
    return js;
}

/// The two structural families with V_2 identically zero: a scalar multiple of
/// the identity padded by zeros, or a stack of J_2(0) blocks padded by zeros.
inline bool v2_degenerate(const JordanStructure& j) {
    if (!j.complex_blocks.empty()) return false;

    bool all_size_one = true;
    std::vector<double> distinct_nonzero;
    bool zeros_small = true;  // all zero-eigenvalue blocks have size <= 2
    bool any_j2_zero = false;
    bool nonzero_present = false;
    for (const auto& g : j.real_blocks) {
        for (int sz : g.sizes) {
            if (sz != 1) all_size_one = false;
            if (g.lambda == 0.0) {
                if (sz > 2) zeros_small = false;
                if (sz == 2) any_j2_zero = true;
            } else {
                nonzero_present = true;
                if (std::find(distinct_nonzero.begin(), distinct_nonzero.end(), g.lambda) ==
                    distinct_nonzero.end())
                    distinct_nonzero.push_back(g.lambda);
            }
        }
    }
    if (all_size_one && distinct_nonzero.size() <= 1) return true;
    if (!nonzero_present && zeros_small && any_j2_zero) return true;
    return false;
}

/// Diagonal-case trichotomy: the limit of kappa_i from comparing the exponents
/// of the dominant volume terms.
inline LimitPrediction predict_kappa_limit_diagonal(const SpectralSummary& s, int i) {
    if (i < 1) throw PreconditionError("predict_kappa_limit_diagonal: i must be >= 1");
    LimitPrediction p;
    if (!s.lambda_order) {
        p.reason = "matrix is not diagonalizable with a real spectrum";
        return p;
    }
    const auto& order = *s.lambda_order;
    const int d = static_cast<int>(order.size());
    if (d == 0) {
        p.reason = "zero matrix: every trajectory is an equilibrium";
        return p;
    }
    p.applicable = true;
    if (d < i + 1) {
        p.cls = LimitPrediction::Class::TendsToZero;
        p.reason = "curve confined to lower-dimensional span";
        return p;
    }
    double sum = order[0] + order[static_cast<std::size_t>(i - 1)];
    double next = order[static_cast<std::size_t>(i)];
    double tol = 1e-9 * (1.0 + std::abs(sum) + std::abs(next));
    if (sum > next + tol) {
        p.cls = LimitPrediction::Class::TendsToZero;
        p.reason = "lambda(1)+lambda(i) > lambda(i+1)";
    } else if (sum < next - tol) {
        p.cls = LimitPrediction::Class::TendsToInfinity;
        p.reason = "lambda(1)+lambda(i) < lambda(i+1)";
    } else {
        p.cls = LimitPrediction::Class::TendsToPositiveConst;
        p.reason = "lambda(1)+lambda(i) = lambda(i+1)";
    }
    return p;
}

/// Closed-form torsion limits for invertible canonical-form systems. Block
/// layout is required: the limit constant reads r(0) in block coordinates.
inline LimitPrediction predict_tau_limit(const SpectralSummary& s, const JordanStructure& j,
                                         const Vector& r0) {
    LimitPrediction p;
    if (!j.layout) {
        p.reason = "system matrix is not in canonical form; block coordinates of r(0) "
                   "have no meaning";
        return p;
    }
    const auto& layout = *j.layout;
    for (const auto& blk : layout.blocks) {
        if (!blk.is_complex) {
            if (r0(blk.offset + blk.size - 1) == 0.0)
                throw PreconditionError(
                    "r(0) lies outside the genericity set S: the trailing coordinate of a "
                    "Jordan block vanishes");
        } else {
            double x = r0(blk.offset + 2 * (blk.size - 1));
            double y = r0(blk.offset + 2 * (blk.size - 1) + 1);
            if (x == 0.0 && y == 0.0)
                throw PreconditionError(
                    "r(0) lies outside the genericity set S: the trailing pair of a "
                    "complex block vanishes");
        }
    }
    if (!s.invertible) {
        p.reason = "invertible hypothesis not met";
        return p;
    }

    const double re_tol = 1e-9 * (1.0 + std::abs(s.M));
    if (s.M > re_tol) {
        p.applicable = true;
        p.cls = LimitPrediction::Class::TendsToZero;
        p.reason = "positive spectral abscissa forces tau -> 0";
        return p;
    }
    if (s.M < -re_tol) {
        p.reason = "no closed-form torsion limit when every mode decays";
        return p;
    }

    // M = 0 with invertible A: critical blocks are all C_m(0, b).
    std::vector<const CanonicalBlock*> critical;
    for (const auto& blk : layout.blocks)
        if (std::abs(blk.re()) <= re_tol) critical.push_back(&blk);
    for (const auto* blk : critical) {
        if (!blk->is_complex) {
            p.reason = "critical real Jordan blocks are not covered by a limit formula";
            return p;
        }
    }
    for (const auto* blk : critical) {
        if (blk->size >= 2) {
            p.applicable = true;
            p.cls = LimitPrediction::Class::TendsToZero;
            p.reason = "critical rotation block of size >= 2 forces tau -> 0";
            return p;
        }
    }

    p.applicable = true;
    if (critical.size() == 1) {
        p.cls = LimitPrediction::Class::TendsToZero;
        p.reason = "a single critical rotation block forces tau -> 0";
        return p;
    }
    std::vector<double> bs, rho;
    for (const auto* blk : critical) {
        bs.push_back(blk->b);
        double x = r0(blk->offset);
        double y = r0(blk->offset + 1);
        rho.push_back(x * x + y * y);
    }
    bool all_equal = true;
    for (std::size_t i = 1; i < bs.size(); ++i)
        if (std::abs(bs[i] - bs[0]) > 1e-12 * (1.0 + std::abs(bs[0]))) all_equal = false;
    if (all_equal) {
        p.cls = LimitPrediction::Class::TendsToZero;
        p.reason = "all critical rotation rates equal: tau -> 0";
        return p;
    }
    double num = 0.0;
    for (std::size_t i = 0; i < bs.size(); ++i)
        for (std::size_t k = i + 1; k < bs.size(); ++k) {
            double bi2 = bs[i] * bs[i], bk2 = bs[k] * bs[k];
            double diff = bi2 - bk2;
            num += bi2 * bk2 * diff * diff * rho[i] * rho[k];
        }
    double s2 = 0.0, s4 = 0.0;
    for (std::size_t i = 0; i < bs.size(); ++i) {
        s2 += bs[i] * bs[i] * rho[i];
        s4 += bs[i] * bs[i] * bs[i] * bs[i] * rho[i];
    }
    p.cls = LimitPrediction::Class::TendsToPositiveConst;
    p.value = std::sqrt(num / (s2 * s2 * s4));
    p.reason = "distinct critical rotation rates: tau converges to the block-rate quotient";
    return p;
}

}  // namespace torsionstab
