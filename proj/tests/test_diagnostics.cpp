#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sisp/diagnostics.hpp"
#include "sisp/rng.hpp"

using namespace sisp;

namespace {

std::vector<double> normal_samples(std::size_t N, std::uint64_t seed, double mu = 0.0,
                                   double sd = 1.0) {
    Rng rng(seed);
    std::vector<double> s(N);
    for (auto& v : s) v = mu + sd * rng.normal();
    return s;
}

} // namespace

TEST_CASE("quantile interpolation hand values") {
    const std::vector<double> sorted{0.0, 1.0, 2.0, 3.0};
    REQUIRE(sorted_quantile(sorted, 0.0) == 0.0);
    REQUIRE(sorted_quantile(sorted, 1.0) == 3.0);
    REQUIRE(sorted_quantile(sorted, 0.5) == Catch::Approx(1.5).margin(1e-15));
    REQUIRE(sorted_quantile(sorted, 0.05) == Catch::Approx(0.15).margin(1e-12));
    REQUIRE(sorted_quantile(sorted, 0.95) == Catch::Approx(2.85).margin(1e-12));
}

TEST_CASE("credibility interval degenerate and symmetric hand cases") {
    const std::vector<double> equal(12, 4.2);
    const auto [lo, hi] = credibility_interval(equal, 0.05);
    REQUIRE(lo == 4.2);
    REQUIRE(hi == 4.2);

    // Symmetric 11-point sample -5..5: the half-mass interval is (-2.5, 2.5).
    std::vector<double> sym;
    for (int v = -5; v <= 5; ++v) sym.push_back(v);
    const auto [l2, h2] = credibility_interval(sym, 0.5);
    REQUIRE(l2 == Catch::Approx(-2.5).margin(1e-12));
    REQUIRE(h2 == Catch::Approx(2.5).margin(1e-12));
    REQUIRE(l2 + h2 == Catch::Approx(0.0).margin(1e-12));

    REQUIRE_THROWS_AS(credibility_interval({1, 2, 3}, 0.05), std::invalid_argument);
    REQUIRE_THROWS_AS(credibility_interval(equal, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(credibility_interval(equal, 1.0), std::invalid_argument);
}

TEST_CASE("credibility interval matches the normal quantile oracle") {
    const auto s = normal_samples(100000, 314);
    const auto [lo, hi] = credibility_interval(s, 0.05);
    REQUIRE(lo == Catch::Approx(-1.959964).margin(0.05));
    REQUIRE(hi == Catch::Approx(1.959964).margin(0.05));
}

TEST_CASE("interval mass and nesting invariants hold on a 10k sample") {
    const auto s = normal_samples(10000, 2718, 1.0, 2.0);
    const double N = static_cast<double>(s.size());
    std::pair<double, double> prev{-1e300, 1e300};
    for (const double eta : {0.01, 0.05, 0.1}) {
        const auto [lo, hi] = credibility_interval(s, eta);
        REQUIRE(lo <= hi);
        // Shrinking credibility: each wider interval contains the narrower one.
        REQUIRE(lo >= prev.first);
        REQUIRE(hi <= prev.second);
        prev = {lo, hi};
        std::size_t inside = 0;
        for (const double v : s)
            if (v >= lo && v <= hi) ++inside;
        const double frac = static_cast<double>(inside) / N;
        REQUIRE(frac >= 1.0 - eta - 2.0 / N);
        REQUIRE(frac <= 1.0 - eta + 2.0 / N);
    }
}

TEST_CASE("credibility band runs per component over the retained states") {
    Chain ch;
    ch.states.resize(2, 30);
    for (int t = 0; t < 30; ++t) {
        ch.states(0, t) = t;        // retained part: 10..29
        ch.states(1, t) = -2.0 * t; // retained part: -58..-20
    }
    ch.burn_in = 10;
    const CredInterval ci = credibility_band(ch, 0.5);
    REQUIRE(ci.lower.size() == 2);
    REQUIRE(ci.lower[0] == Catch::Approx(sorted_quantile(
                               std::vector<double>{10, 11, 12, 13, 14, 15, 16, 17, 18,
                                                   19, 20, 21, 22, 23, 24, 25, 26, 27,
                                                   28, 29},
                               0.25))
                               .margin(1e-12));
    REQUIRE(ci.upper[0] > ci.lower[0]);
    REQUIRE(ci.width()[0] == Catch::Approx(ci.upper[0] - ci.lower[0]).margin(1e-15));
    REQUIRE(ci.mean_width() ==
            Catch::Approx((ci.width()[0] + ci.width()[1]) / 2.0).margin(1e-12));
}

TEST_CASE("correlogram fixed points: unity at lag zero, anticorrelated alternation") {
    std::vector<double> alt(1000);
    for (std::size_t t = 0; t < alt.size(); ++t) alt[t] = (t % 2 == 0) ? 1.0 : -1.0;
    const Vec r = acf(alt, 3);
    REQUIRE(r[0] == 1.0);
    REQUIRE(r[1] == Catch::Approx(-1.0).margin(0.01));
    REQUIRE(r[2] == Catch::Approx(1.0).margin(0.01));

    REQUIRE_THROWS_AS(acf(std::vector<double>(50, 3.3), 5), SolverError);
    REQUIRE_THROWS_AS(acf(alt, 1000), std::invalid_argument);
}

TEST_CASE("correlogram of white noise stays inside the confidence band") {
    const auto s = normal_samples(10000, 555);
    const Vec r = acf(s, 100);
    const double band = 3.0 / std::sqrt(10000.0);
    int inside = 0;
    for (int k = 1; k <= 100; ++k)
        if (std::abs(r[k]) < band) ++inside;
    REQUIRE(inside >= 99);
}

TEST_CASE("correlogram recovers a first-order autoregression coefficient") {
    const double rho = 0.8;
    Rng rng(808);
    std::vector<double> s(50000);
    s[0] = 0.0;
    for (std::size_t t = 1; t < s.size(); ++t)
        s[t] = rho * s[t - 1] + std::sqrt(1.0 - rho * rho) * rng.normal();
    const Vec r = acf(s, 2);
    REQUIRE(r[1] == Catch::Approx(rho).margin(0.02));
}

TEST_CASE("acceptance ratio series is the running cumulative ratio") {
    Chain ch;
    ch.states = Mat::Zero(1, 3);
    ch.accepts_per_iteration.resize(3);
    ch.accepts_per_iteration << 1, 0, 1;
    ch.proposals_per_iteration = 1;
    const Vec series = acceptance_ratio_series(ch);
    REQUIRE(series[0] == 1.0);
    REQUIRE(series[1] == 0.5);
    REQUIRE(series[2] == Catch::Approx(2.0 / 3.0).margin(1e-15));

    // Sweep-style chain with multiple proposals per iteration: cumulative-sum oracle.
    Chain sweep;
    sweep.states = Mat::Zero(4, 6);
    sweep.accepts_per_iteration.resize(6);
    sweep.accepts_per_iteration << 4, 2, 0, 3, 1, 4;
    sweep.proposals_per_iteration = 4;
    const Vec rs = acceptance_ratio_series(sweep);
    long long acc = 0;
    for (int t = 0; t < 6; ++t) {
        acc += sweep.accepts_per_iteration[t];
        REQUIRE(rs[t] ==
                Catch::Approx(static_cast<double>(acc) / (4.0 * (t + 1))).margin(1e-15));
    }
    REQUIRE(rs.minCoeff() >= 0.0);
    REQUIRE(rs.maxCoeff() <= 1.0);
}

TEST_CASE("relative error identities and scale awareness") {
    Vec x(3);
    x << 1.0, -2.0, 2.0;
    REQUIRE(relative_error(x, x) == 0.0);
    REQUIRE(relative_error(2.0 * x, x) == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(relative_error(Vec::Zero(3), x) == Catch::Approx(1.0).margin(1e-15));
    for (const double c : {0.0, 0.5, 1.0, 3.0}) {
        REQUIRE(relative_error(c * x, x) == Catch::Approx(std::abs(c - 1.0)).margin(1e-12));
    }
    REQUIRE_THROWS_AS(relative_error(x, Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("pointwise absolute errors match a loop oracle") {
    Vec a(5), b(5);
    a << 1, 2, 3, 4, 5;
    b << 1, 2, 3, 4, 5;
    const Vec zero = pointwise_abs_error(a, b, {0, 2, 4});
    REQUIRE(zero.cwiseAbs().maxCoeff() == 0.0);

    b[3] += 1.0;
    const Vec hit = pointwise_abs_error(a, b, {2, 3});
    REQUIRE(hit[0] == 0.0);
    REQUIRE(hit[1] == 1.0);

    Rng rng(99);
    Vec u(8), v(8);
    for (int i = 0; i < 8; ++i) {
        u[i] = rng.normal();
        v[i] = rng.normal();
    }
    const std::vector<int> idx{7, 0, 3};
    const Vec out = pointwise_abs_error(u, v, idx);
    for (std::size_t k = 0; k < idx.size(); ++k)
        REQUIRE(out[static_cast<Eigen::Index>(k)] == std::abs(u[idx[k]] - v[idx[k]]));

    REQUIRE_THROWS_AS(pointwise_abs_error(u, v, {8}), std::invalid_argument);
    REQUIRE_THROWS_AS(pointwise_abs_error(u, v, {-1}), std::invalid_argument);
}

TEST_CASE("histogram conservation, degenerate samples, and uniform fill") {
    const std::vector<double> equal(37, 2.0);
    const Histogram one = histogram(equal, 1);
    REQUIRE(one.counts.size() == 1);
    REQUIRE(one.counts[0] == 37);
    REQUIRE(one.edges[0] < 2.0);
    REQUIRE(one.edges[1] > 2.0);

    Rng rng(5150);
    std::vector<double> uni(100000);
    for (auto& v : uni) v = rng.uniform01();
    const Histogram h = histogram(uni, 10);
    REQUIRE(h.counts.sum() == 100000);
    for (int b = 0; b < 10; ++b) {
        REQUIRE(h.counts[b] > 10000 * 0.95);
        REQUIRE(h.counts[b] < 10000 * 1.05);
    }
    // Edges are uniform and span the sample range.
    for (int b = 0; b < 10; ++b) REQUIRE(h.edges[b] < h.edges[b + 1]);

    REQUIRE_THROWS_AS(histogram({}, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(histogram(uni, 0), std::invalid_argument);
}

TEST_CASE("default bin count follows the log2 rule") {
    REQUIRE(sturges_bins(1) == 1);
    REQUIRE(sturges_bins(100) == 8);
    REQUIRE(sturges_bins(1024) == 11);
    const auto s = normal_samples(100, 1);
    REQUIRE(histogram(s).counts.size() == 8);
}
