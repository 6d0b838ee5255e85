#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sisp/signals.hpp"

using namespace sisp;

//==============================================================================
// Grid
//==============================================================================

TEST_CASE("grid points exclude lo and include hi") {
    Grid g = make_grid(80, 0.0, 1.0);
    REQUIRE(g.dx() == Catch::Approx(1.0 / 80.0));
    REQUIRE(g.point(0) == Catch::Approx(1.0 / 80.0));
    REQUIRE(g.point(79) == 1.0);
    // Ratio points land exactly on the matching literals.
    REQUIRE(g.point(7) == 0.1);
    REQUIRE(g.point(19) == 0.25);
    REQUIRE(g.point(25) == 0.325);
    REQUIRE(g.point(27) == 0.35);
}

TEST_CASE("grid on [-pi, pi]") {
    Grid g = make_grid(4, -std::numbers::pi, std::numbers::pi);
    REQUIRE(g.point(3) == Catch::Approx(std::numbers::pi));
    REQUIRE(g.point(1) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("grid validation") {
    REQUIRE_THROWS(make_grid(0));
    REQUIRE_THROWS(make_grid(10, 1.0, 1.0));
    REQUIRE_THROWS(make_grid(10, 2.0, 1.0));
}

//==============================================================================
// Piecewise test function
//==============================================================================

TEST_CASE("piecewise example branch values") {
    REQUIRE(piecewise_example_value(0.15) == 40.0);
    REQUIRE(piecewise_example_value(0.1) == 40.0);
    REQUIRE(piecewise_example_value(0.25) == 40.0);
    REQUIRE(piecewise_example_value(0.3375) == 10.0);
    REQUIRE(piecewise_example_value(0.45) == 0.0);
    REQUIRE(piecewise_example_value(0.5) == 0.0); // bump branch is strict s > 0.5
    const double peak = 20.0 * std::sqrt(2.0 * std::numbers::pi);
    REQUIRE(piecewise_example_value(0.75) == Catch::Approx(peak));
    REQUIRE(peak == Catch::Approx(50.13256549).epsilon(1e-8));
    REQUIRE(piecewise_example_value(0.99) < 1e-8);
    REQUIRE(piecewise_example_value(0.05) == 0.0);
}

TEST_CASE("piecewise example sampled on the default grid") {
    Grid g = make_grid(80, 0.0, 1.0);
    Vec x = sample_signal(piecewise_example(), g);
    // Plateau of 40 spans indices 8..20 (1-based), the 10 plateau 26..28.
    for (int i = 7; i <= 19; ++i) REQUIRE(x[i] == 40.0);
    REQUIRE(x[6] == 0.0);
    REQUIRE(x[20] == 0.0);
    for (int i = 25; i <= 27; ++i) REQUIRE(x[i] == 10.0);
    REQUIRE(x[24] == 0.0);
    REQUIRE(x[28] == 0.0);
    REQUIRE(x[59] == Catch::Approx(20.0 * std::sqrt(2.0 * std::numbers::pi)));
}

//==============================================================================
// Sparse spikes and custom signals
//==============================================================================

TEST_CASE("sparse spikes place unit amplitudes at 1-based indices") {
    Grid g = make_grid(80);
    Vec x = sample_signal(sparse_spikes({10, 40}), g);
    REQUIRE(x.sum() == 2.0);
    REQUIRE(x[9] == 1.0);
    REQUIRE(x[39] == 1.0);
    REQUIRE(x[10] == 0.0);
}

TEST_CASE("sparse spikes validate support and amplitude") {
    Grid g = make_grid(8);
    REQUIRE_THROWS(sample_signal(sparse_spikes({0}), g));
    REQUIRE_THROWS(sample_signal(sparse_spikes({9}), g));
    Vec x = sample_signal(sparse_spikes({3}, 2.5), g);
    REQUIRE(x[2] == 2.5);
}

TEST_CASE("custom signal length must match the grid") {
    Grid g = make_grid(5);
    Vec v(4);
    v << 1, 2, 3, 4;
    REQUIRE_THROWS_AS(sample_signal(custom_signal(v), g), DimensionError);
    Vec w(5);
    w << 1, 2, 3, 4, 5;
    REQUIRE(sample_signal(custom_signal(w), g)[4] == 5.0);
}
