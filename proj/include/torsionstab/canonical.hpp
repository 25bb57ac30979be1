#pragma once

#include <optional>
#include <vector>

#include "torsionstab/matrix.hpp"

namespace torsionstab {

/// One diagonal block of a real Jordan canonical form: J_p(lambda) for a real
/// eigenvalue, or C_m(a, b) (b > 0) for a conjugate pair. `size` is p
/// respectively m; a complex block occupies 2m rows.
struct CanonicalBlock {
    bool is_complex = false;
    double lambda = 0.0;  // real block eigenvalue
    double a = 0.0;       // complex block Re
    double b = 0.0;       // complex block Im, > 0
    int size = 1;
    int offset = 0;       // first row of the block

    int dim() const { return is_complex ? 2 * size : size; }
    double re() const { return is_complex ? a : lambda; }
};

/// Ordered diagonal layout of a matrix that is literally in canonical form.
struct CanonicalLayout {
    int n = 0;
    std::vector<CanonicalBlock> blocks;
};

/// Assemble the block-diagonal matrix for a layout.
inline RealMatrix build_canonical(const CanonicalLayout& layout) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(layout.n, layout.n);
    for (const auto& blk : layout.blocks) {
        int o = blk.offset;
        if (!blk.is_complex) {
            for (int i = 0; i < blk.size; ++i) {
                m(o + i, o + i) = blk.lambda;
                if (i + 1 < blk.size) m(o + i, o + i + 1) = 1.0;
            }
        } else {
            for (int i = 0; i < blk.size; ++i) {
                int p = o + 2 * i;
                m(p, p) = blk.a;
                m(p, p + 1) = blk.b;
                m(p + 1, p) = -blk.b;
                m(p + 1, p + 1) = blk.a;
                if (i + 1 < blk.size) {
                    m(p, p + 2) = 1.0;
                    m(p + 1, p + 3) = 1.0;
                }
            }
        }
    }
    return RealMatrix(std::move(m));
}

inline CanonicalLayout make_layout(std::vector<CanonicalBlock> blocks) {
    CanonicalLayout layout;
    int offset = 0;
    for (auto& blk : blocks) {
        blk.offset = offset;
        offset += blk.dim();
    }
    layout.blocks = std::move(blocks);
    layout.n = offset;
    return layout;
}

inline CanonicalBlock jordan_block(double lambda, int p) {
    CanonicalBlock b;
    b.is_complex = false;
    b.lambda = lambda;
    b.size = p;
    return b;
}

inline CanonicalBlock complex_block(double a, double b, int m) {
    CanonicalBlock blk;
    blk.is_complex = true;
    blk.a = a;
    blk.b = b;
    blk.size = m;
    return blk;
}

/// Recognize a matrix that is exactly (entrywise) a real Jordan canonical
/// form. Returns the block layout, or nullopt if the pattern does not match.
/// Exactness is deliberate: block-aligned coordinates of r(0) only mean
/// anything when A is literally in this basis.
inline std::optional<CanonicalLayout> parse_canonical(const RealMatrix& am) {
    const Eigen::MatrixXd& m = am.mat();
    const int n = am.n();
    CanonicalLayout layout;
    layout.n = n;

    int i = 0;
    while (i < n) {
        // Complex block: Lambda = [[a, b], [-b, a]] with b > 0, chained by I2.
        if (i + 1 < n && m(i + 1, i) != 0.0) {
            double a = m(i, i);
            double b = m(i, i + 1);
            if (!(b > 0.0) || m(i + 1, i) != -b || m(i + 1, i + 1) != a) return std::nullopt;
            int size = 1;
            while (true) {
                int p = i + 2 * size;
                bool chained = p + 1 < n && m(i + 2 * size - 2, p) == 1.0 &&
                               m(i + 2 * size - 1, p + 1) == 1.0 && m(p, p) == a &&
                               m(p, p + 1) == b && m(p + 1, p) == -b && m(p + 1, p + 1) == a;
                if (!chained) break;
                ++size;
            }
            CanonicalBlock blk = complex_block(a, b, size);
            blk.offset = i;
            layout.blocks.push_back(blk);
            i += 2 * size;
        } else {
            double lambda = m(i, i);
            int size = 1;
            while (i + size < n && m(i + size - 1, i + size) == 1.0 &&
                   m(i + size, i + size) == lambda && (i + size + 1 >= n || m(i + size + 1, i + size) == 0.0)) {
                ++size;
            }
            CanonicalBlock blk = jordan_block(lambda, size);
            blk.offset = i;
            layout.blocks.push_back(blk);
            i += size;
        }
    }

    // Everything outside the recognized blocks must vanish identically.
    Eigen::MatrixXd rebuilt = build_canonical(layout).mat();
    if ((rebuilt - m).cwiseAbs().maxCoeff() != 0.0) return std::nullopt;
    return layout;
}

}  // namespace torsionstab
