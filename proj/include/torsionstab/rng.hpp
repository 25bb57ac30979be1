#pragma once

#include <cstdint>
#include <vector>

namespace torsionstab {

/// Deterministic counter-based generator (splitmix64). Used everywhere a
/// seeded draw is needed so results are identical across platforms and
/// standard-library implementations; std::uniform_real_distribution is
/// implementation-defined and deliberately avoided.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Independent stream for sample `index` of a suite seeded with `seed`.
    static Rng for_sample(std::uint64_t seed, std::uint64_t index) {
        Rng r(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
        r.next();  // decorrelate small seeds
        return r;
    }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    /// Uniform over ±[lo, hi): magnitude in [lo, hi), random sign.
    double signed_uniform(double lo, double hi) {
        double mag = uniform(lo, hi);
        return (next() & 1) ? mag : -mag;
    }

    /// Integer in [0, n).
    int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

    /// Initial condition with every coordinate drawn from a continuous
    /// distribution on [-1, 1] excluding (-1e-3, 1e-3), so r(0) lands in the
    /// genericity set S almost surely.
    std::vector<double> initial_condition(int n) {
        std::vector<double> r0(n);
        for (int i = 0; i < n; ++i) r0[i] = signed_uniform(1e-3, 1.0);
        return r0;
    }

private:
    std::uint64_t state_;
};

}  // namespace torsionstab
