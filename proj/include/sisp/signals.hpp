#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "sisp/common.hpp"

namespace sisp {

// Uniform grid s_i = lo + i*(hi-lo)/n for i = 1..n.  The left endpoint is
// excluded and the right endpoint included, so dx * n spans (lo, hi].
struct Grid {
    int n = 0;
    double lo = 0.0;
    double hi = 1.0;

    double dx() const { return (hi - lo) / n; }

    double point(int i_zero_based) const {
        // Multiply before dividing so that exact ratios (8/80 = 0.1) land on
        // the same double as the corresponding literal.
        return lo + (hi - lo) * static_cast<double>(i_zero_based + 1) / n;
    }

    Vec points() const {
        Vec s(n);
        for (int i = 0; i < n; ++i) s[i] = point(i);
        return s;
    }
};

inline Grid make_grid(int n, double lo = 0.0, double hi = 1.0) {
    require(n >= 1, "grid: n must be positive");
    require(hi > lo, "grid: hi must exceed lo");
    return Grid{n, lo, hi};
}

enum class SignalKind { PiecewiseExample, SparseSpikes, Custom };

struct SignalSpec {
    SignalKind kind = SignalKind::PiecewiseExample;
    // SparseSpikes: 1-based grid indices carrying the spikes, common amplitude.
    std::vector<int> support;
    double amplitude = 1.0;
    // Custom: explicit sample values, length must match the grid.
    Vec values;
};

inline SignalSpec piecewise_example() {
    return SignalSpec{SignalKind::PiecewiseExample, {}, 1.0, {}};
}

inline SignalSpec sparse_spikes(std::vector<int> support, double amplitude = 1.0) {
    return SignalSpec{SignalKind::SparseSpikes, std::move(support), amplitude, {}};
}

inline SignalSpec custom_signal(Vec values) {
    return SignalSpec{SignalKind::Custom, {}, 1.0, std::move(values)};
}

// Piecewise test function: two plateaus (40 and 10) and a Gaussian bump of
// peak 20*sqrt(2*pi) on the right half.  Branches are checked in order and
// the first match wins; everything else is 0.
inline double piecewise_example_value(double s) {
    if (s >= 0.1 && s <= 0.25) return 40.0;
    if (s >= 0.325 && s <= 0.35) return 10.0;
    if (s > 0.5) {
        const double t = (s - 0.75) / 0.05;
        return 20.0 * std::sqrt(2.0 * std::numbers::pi) * std::exp(-t * t);
    }
    return 0.0;
}

inline Vec sample_signal(const SignalSpec& spec, const Grid& grid) {
    switch (spec.kind) {
        case SignalKind::PiecewiseExample: {
            Vec x(grid.n);
            for (int i = 0; i < grid.n; ++i) x[i] = piecewise_example_value(grid.point(i));
            return x;
        }
        case SignalKind::SparseSpikes: {
            Vec x = Vec::Zero(grid.n);
            for (int idx : spec.support) {
                require(idx >= 1 && idx <= grid.n, "sparse_spikes: support index out of [1, n]");
                x[idx - 1] = spec.amplitude;
            }
            return x;
        }
        case SignalKind::Custom:
            require_dim(spec.values.size() == grid.n, "custom signal: length mismatch with grid");
            return spec.values;
    }
    throw std::invalid_argument("sample_signal: unknown signal kind");
}

} // namespace sisp
