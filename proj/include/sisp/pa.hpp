#pragma once

#include <cmath>
#include <cstdlib>

#include "sisp/common.hpp"
#include "sisp/signals.hpp"

namespace sisp {

// Polynomial annihilation edge transform of order m on a uniform grid.
//
// A stencil of m+1 consecutive points carries the coefficients
//   c_j = m! / (prod_{k != j} (j - k) * dx),  j = 1..m+1,
// which reduce to c_j = (-1)^(m+1-j) * binom(m, j-1) / dx on uniform grids.
// Any such row annihilates polynomials of degree <= m-1 and responds to a
// jump with magnitude ~ [jump] once normalized.
//
// Each output row l is centered via offsets (j-1) - floor(m/2); rows are
// normalized by q = sum of coefficients at stencil points left of or at the
// center.  That orientation makes the periodic matrices come out as
//   m=1: rows (1, -1) with wraparound (-1, 0, ..., 0, 1)
//   m=3: circulant rows (1/2) * (3, -3, 1, 0, ..., 0, -1)
// which is the convention this codebase treats as canonical.  With periodic
// boundaries the matrix is circulant; otherwise stencils slide one-sided
// near the boundary, and the one row whose stencil lies entirely left of its
// center falls back to the right-side sum so q stays nonzero.

struct PaTransform {
    int order = 0;
    bool periodic = true;
    Mat matrix; // n x n
};

// Uniform-grid annihilation coefficients, length m+1.
inline Vec pa_coefficients(int m, double dx) {
    require(m >= 1, "pa_coefficients: order must be >= 1");
    require(dx > 0.0, "pa_coefficients: dx must be positive");
    Vec c(m + 1);
    double binom = 1.0; // binom(m, j-1), built up incrementally
    for (int j = 1; j <= m + 1; ++j) {
        const int sign = ((m + 1 - j) % 2 == 0) ? 1 : -1;
        c[j - 1] = sign * binom / dx;
        binom = binom * (m - (j - 1)) / j;
    }
    return c;
}

// Stencil offsets relative to the row index, length m+1.
inline Eigen::VectorXi pa_offsets(int m) {
    Eigen::VectorXi off(m + 1);
    for (int j = 0; j <= m; ++j) off[j] = j - m / 2;
    return off;
}

// Row normalization: sum of coefficients whose stencil point sits at or left
// of the evaluation point (offset <= 0).  If that sum vanishes (fully
// left-sided stencil), the right-side sum is used instead.
inline double pa_normalization(const Vec& coeffs, const Eigen::VectorXi& offsets) {
    require_dim(coeffs.size() == offsets.size(), "pa_normalization: size mismatch");
    double left = 0.0, right = 0.0;
    for (int j = 0; j < coeffs.size(); ++j) {
        if (offsets[j] <= 0) left += coeffs[j];
        if (offsets[j] >= 0) right += coeffs[j];
    }
    const double scale = coeffs.cwiseAbs().maxCoeff();
    if (std::abs(left) > 1e-12 * scale) return left;
    if (std::abs(right) > 1e-12 * scale) return right;
    throw SolverError("pa_normalization: degenerate stencil, zero normalization");
}

inline PaTransform build_pa_matrix(int m, const Grid& grid, bool periodic = true) {
    require(m >= 1, "build_pa_matrix: order must be >= 1");
    require(m <= grid.n - 1, "build_pa_matrix: order must be <= n-1");
    const int n = grid.n;
    const Vec c = pa_coefficients(m, grid.dx());
    const Eigen::VectorXi off = pa_offsets(m);

    PaTransform t;
    t.order = m;
    t.periodic = periodic;
    t.matrix = Mat::Zero(n, n);

    if (periodic) {
        const double q = pa_normalization(c, off);
        for (int l = 0; l < n; ++l) {
            for (int j = 0; j <= m; ++j) {
                const int col = ((l + off[j]) % n + n) % n;
                t.matrix(l, col) += c[j] / q;
            }
        }
    } else {
        for (int l = 0; l < n; ++l) {
            int start = l - m / 2;
            if (start < 0) start = 0;
            if (start > n - 1 - m) start = n - 1 - m;
            Eigen::VectorXi row_off(m + 1);
            for (int j = 0; j <= m; ++j) row_off[j] = start + j - l;
            const double q = pa_normalization(c, row_off);
            for (int j = 0; j <= m; ++j) t.matrix(l, start + j) += c[j] / q;
        }
    }
    return t;
}

inline Vec apply_pa(const PaTransform& t, const Vec& x) {
    require_dim(x.size() == t.matrix.cols(), "apply_pa: dimension mismatch");
    return t.matrix * x;
}

} // namespace sisp
