#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "sisp/common.hpp"
#include "sisp/mcmc.hpp"

namespace sisp {

// Post-sampling analysis: equal-tailed credibility intervals, correlograms,
// acceptance-ratio traces, error metrics, and histograms.

// Empirical quantile with linear interpolation between order statistics
// (position q*(N-1) in the sorted sample).
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
    const std::size_t N = sorted.size();
    require(N >= 1, "quantile: empty sample");
    require(q >= 0.0 && q <= 1.0, "quantile: q outside [0,1]");
    const double pos = q * static_cast<double>(N - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= N) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Equal-tailed interval holding 1-eta of the sample mass: the (eta/2,
// 1-eta/2) empirical quantiles of one component's retained samples.
inline std::pair<double, double> credibility_interval(const std::vector<double>& samples,
                                                      double eta) {
    require(samples.size() >= 10, "credibility_interval: need at least 10 samples");
    require(eta > 0.0 && eta < 1.0, "credibility_interval: eta must be inside (0,1)");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    return {sorted_quantile(sorted, eta / 2.0), sorted_quantile(sorted, 1.0 - eta / 2.0)};
}

struct CredInterval {
    double eta = 0.05;
    Vec lower;
    Vec upper;

    Vec width() const { return upper - lower; }
    double mean_width() const { return width().mean(); }
};

// Per-component equal-tailed intervals over a chain's retained states.
inline CredInterval credibility_band(const Chain& chain, double eta) {
    require(chain.burn_in < chain.iterations(),
            "credibility_band: burn-in swallows the whole chain");
    const int kept = chain.iterations() - chain.burn_in;
    CredInterval ci;
    ci.eta = eta;
    ci.lower.resize(chain.n());
    ci.upper.resize(chain.n());
    std::vector<double> samples(static_cast<std::size_t>(kept));
    for (int i = 0; i < chain.n(); ++i) {
        for (int t = 0; t < kept; ++t)
            samples[static_cast<std::size_t>(t)] = chain.states(i, chain.burn_in + t);
        const auto [lo, hi] = credibility_interval(samples, eta);
        ci.lower[i] = lo;
        ci.upper[i] = hi;
    }
    return ci;
}

// Correlogram r_0..r_max_lag with the full-series variance as denominator.
inline Vec acf(const std::vector<double>& samples, int max_lag) {
    const int N = static_cast<int>(samples.size());
    require(max_lag >= 0, "acf: max_lag must be nonnegative");
    require(max_lag < N, "acf: max_lag must be below the sample count");
    double mean = 0.0, lo = samples.front(), hi = samples.front();
    for (const double s : samples) {
        mean += s;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    mean /= N;
    // A constant series (the rounding of the mean notwithstanding) has no
    // correlogram: the variance in the denominator is identically zero.
    if (lo == hi) throw SolverError("acf: constant series has no correlogram");
    double denom = 0.0;
    for (const double s : samples) denom += (s - mean) * (s - mean);
    if (denom == 0.0) throw SolverError("acf: constant series has no correlogram");
    Vec r(max_lag + 1);
    for (int k = 0; k <= max_lag; ++k) {
        double acc = 0.0;
        for (int t = 0; t + k < N; ++t)
            acc += (samples[static_cast<std::size_t>(t)] - mean) *
                   (samples[static_cast<std::size_t>(t + k)] - mean);
        r[k] = acc / denom;
    }
    return r;
}

// Running accepted/proposed ratio after each recorded iteration.
inline Vec acceptance_ratio_series(const Chain& chain) {
    const int T = chain.iterations();
    Vec series(T);
    long long acc = 0;
    for (int t = 0; t < T; ++t) {
        acc += chain.accepts_per_iteration[t];
        series[t] = static_cast<double>(acc) /
                    (static_cast<double>(t + 1) * chain.proposals_per_iteration);
    }
    return series;
}

inline double relative_error(const Vec& x, const Vec& x_true) {
    require_dim(x.size() == x_true.size(), "relative_error: size mismatch");
    const double denom = x_true.norm();
    require(denom > 0.0, "relative_error: zero-norm reference");
    return (x - x_true).norm() / denom;
}

inline Vec pointwise_abs_error(const Vec& x, const Vec& x_true,
                               const std::vector<int>& indices) {
    require_dim(x.size() == x_true.size(), "pointwise_abs_error: size mismatch");
    Vec out(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const int i = indices[k];
        require(i >= 0 && i < x.size(), "pointwise_abs_error: index out of range");
        out[static_cast<Eigen::Index>(k)] = std::abs(x[i] - x_true[i]);
    }
    return out;
}

struct Histogram {
    Vec edges;             // bins+1 ascending edges
    Eigen::VectorXi counts; // per-bin tallies, summing to the sample count
};

// Uniform-width histogram over [min, max].  A zero-width sample (all values
// equal) is widened to a unit span centered on the value so every count has
// a well-defined bin.
inline Histogram histogram(const std::vector<double>& samples, int bins) {
    require(!samples.empty(), "histogram: empty sample");
    require(bins >= 1, "histogram: need at least one bin");
    double lo = samples.front(), hi = samples.front();
    for (const double s : samples) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    Histogram h;
    h.edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b)
        h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
    h.counts = Eigen::VectorXi::Zero(bins);
    const double width = (hi - lo) / bins;
    for (const double s : samples) {
        int b = static_cast<int>((s - lo) / width);
        b = std::clamp(b, 0, bins - 1); // the maximum lands in the last bin
        ++h.counts[b];
    }
    return h;
}

// Sturges' bin-count rule, the default when no count is configured.
inline int sturges_bins(std::size_t sample_count) {
    require(sample_count >= 1, "histogram: empty sample");
    return static_cast<int>(
               std::ceil(std::log2(static_cast<double>(sample_count)))) +
           1;
}

inline Histogram histogram(const std::vector<double>& samples) {
    return histogram(samples, sturges_bins(samples.size()));
}

} // namespace sisp
