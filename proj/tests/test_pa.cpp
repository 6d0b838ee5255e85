#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sisp/pa.hpp"
#include "sisp/rng.hpp"

using namespace sisp;

//==============================================================================
// Coefficients and stencils
//==============================================================================

TEST_CASE("annihilation coefficients at unit spacing") {
    Vec c1 = pa_coefficients(1, 1.0);
    REQUIRE(c1.size() == 2);
    REQUIRE(c1[0] == Catch::Approx(-1.0));
    REQUIRE(c1[1] == Catch::Approx(1.0));

    Vec c2 = pa_coefficients(2, 1.0);
    REQUIRE(c2[0] == Catch::Approx(1.0));
    REQUIRE(c2[1] == Catch::Approx(-2.0));
    REQUIRE(c2[2] == Catch::Approx(1.0));

    Vec c3 = pa_coefficients(3, 1.0);
    REQUIRE(c3[0] == Catch::Approx(-1.0));
    REQUIRE(c3[1] == Catch::Approx(3.0));
    REQUIRE(c3[2] == Catch::Approx(-3.0));
    REQUIRE(c3[3] == Catch::Approx(1.0));
}

TEST_CASE("coefficients scale as 1/dx and sum to zero") {
    for (int m = 1; m <= 4; ++m) {
        Vec a = pa_coefficients(m, 1.0);
        Vec b = pa_coefficients(m, 0.125);
        REQUIRE((b - a * 8.0).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE(std::abs(a.sum()) < 1e-12);
    }
    REQUIRE_THROWS(pa_coefficients(0, 1.0));
    REQUIRE_THROWS(pa_coefficients(2, 0.0));
}

TEST_CASE("stencil offsets are centered via floor(m/2)") {
    REQUIRE(pa_offsets(1)[0] == 0);
    REQUIRE(pa_offsets(1)[1] == 1);
    REQUIRE(pa_offsets(2)[0] == -1);
    REQUIRE(pa_offsets(2)[2] == 1);
    REQUIRE(pa_offsets(3)[0] == -1);
    REQUIRE(pa_offsets(3)[3] == 2);
    REQUIRE(pa_offsets(4)[0] == -2);
    REQUIRE(pa_offsets(4)[4] == 2);
}

TEST_CASE("normalization picks the left-or-center sum") {
    // m=1 interior stencil {x_l, x_{l+1}}: left sum is -1/dx.
    Vec c = pa_coefficients(1, 1.0);
    REQUIRE(pa_normalization(c, pa_offsets(1)) == Catch::Approx(-1.0));
    // m=3 interior: c = (-1, 3, -3, 1), offsets (-1,0,1,2), left sum 2.
    Vec c3 = pa_coefficients(3, 1.0);
    REQUIRE(pa_normalization(c3, pa_offsets(3)) == Catch::Approx(2.0));
    // Fully left-sided stencil falls back to the right-side sum (last coeff).
    Eigen::VectorXi off(4);
    off << -3, -2, -1, 0;
    REQUIRE(pa_normalization(c3, off) == Catch::Approx(1.0));
}

//==============================================================================
// Canonical periodic matrices
//==============================================================================

TEST_CASE("periodic first-order matrix on five points") {
    Grid g = make_grid(5, 0.0, 1.0);
    PaTransform t = build_pa_matrix(1, g, true);
    Mat expected(5, 5);
    expected << 1, -1, 0, 0, 0,
                0, 1, -1, 0, 0,
                0, 0, 1, -1, 0,
                0, 0, 0, 1, -1,
                -1, 0, 0, 0, 1;
    REQUIRE((t.matrix - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("periodic third-order matrix on six points") {
    Grid g = make_grid(6, 0.0, 1.0);
    PaTransform t = build_pa_matrix(3, g, true);
    Mat expected(6, 6);
    expected << 3, -3, 1, 0, 0, -1,
                -1, 3, -3, 1, 0, 0,
                0, -1, 3, -3, 1, 0,
                0, 0, -1, 3, -3, 1,
                1, 0, 0, -1, 3, -3,
                -3, 1, 0, 0, -1, 3;
    expected *= 0.5;
    REQUIRE((t.matrix - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("periodic matrices are circulant") {
    Grid g = make_grid(9, 0.0, 1.0);
    for (int m = 1; m <= 4; ++m) {
        PaTransform t = build_pa_matrix(m, g, true);
        for (int r = 1; r < 9; ++r) {
            for (int col = 0; col < 9; ++col) {
                REQUIRE(t.matrix(r, col) ==
                        Catch::Approx(t.matrix(0, ((col - r) % 9 + 9) % 9)).margin(1e-14));
            }
        }
    }
}

TEST_CASE("normalized matrix does not depend on the grid spacing") {
    Grid unit = make_grid(24, 0.0, 1.0);
    Grid wide = make_grid(24, -std::numbers::pi, std::numbers::pi);
    for (int m = 1; m <= 3; ++m) {
        for (bool periodic : {true, false}) {
            Mat a = build_pa_matrix(m, unit, periodic).matrix;
            Mat b = build_pa_matrix(m, wide, periodic).matrix;
            REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

//==============================================================================
// Annihilation and jump response
//==============================================================================

TEST_CASE("rows sum to zero so constants are annihilated everywhere") {
    Grid g = make_grid(20, 0.0, 1.0);
    for (int m = 1; m <= 4; ++m) {
        for (bool periodic : {true, false}) {
            Mat M = build_pa_matrix(m, g, periodic).matrix;
            REQUIRE(M.rowwise().sum().cwiseAbs().maxCoeff() < 1e-11);
        }
    }
}

TEST_CASE("non-periodic transform annihilates polynomials of degree below m") {
    Grid g = make_grid(80, 0.0, 1.0);
    Vec s = g.points();
    Rng rng(404);
    for (int m = 1; m <= 4; ++m) {
        PaTransform t = build_pa_matrix(m, g, false);
        const double row_scale = t.matrix.cwiseAbs().rowwise().sum().maxCoeff();
        for (int rep = 0; rep < 5; ++rep) {
            Vec p = Vec::Zero(80);
            for (int k = 0; k <= m - 1; ++k) {
                const double coef = 5.0 * rng.normal();
                for (int i = 0; i < 80; ++i) p[i] += coef * std::pow(s[i], k);
            }
            const double scale = row_scale * (p.cwiseAbs().maxCoeff() + 1.0);
            REQUIRE(apply_pa(t, p).cwiseAbs().maxCoeff() < 1e-10 * scale);
        }
    }
}

TEST_CASE("periodic transform annihilates polynomials on non-wrapping rows") {
    // Wraparound rows see the periodic extension of the input, which has a
    // genuine jump for a non-periodic polynomial, so only interior rows are
    // expected to vanish.
    Grid g = make_grid(80, 0.0, 1.0);
    Vec s = g.points();
    for (int m = 2; m <= 4; ++m) {
        Vec p = 5.0 * s + Vec::Constant(80, 2.0); // degree 1, annihilated once m >= 2
        for (int k = 2; k <= m - 1; ++k) p += s.array().pow(k).matrix();
        PaTransform t = build_pa_matrix(m, g, true);
        Vec out = apply_pa(t, p);
        Eigen::VectorXi off = pa_offsets(m);
        const int lo = -off[0];
        const int hi = 79 - off[m];
        double interior_max = 0.0;
        for (int l = lo; l <= hi; ++l) interior_max = std::max(interior_max, std::abs(out[l]));
        REQUIRE(interior_max < 1e-10 * p.cwiseAbs().maxCoeff());
        // The wrap rows must detect the extension jump of p, here of size 5.
        REQUIRE(out.cwiseAbs().maxCoeff() > 1.0);
    }
}

TEST_CASE("unit step response has near-unit peak") {
    Grid g = make_grid(40, 0.0, 1.0);
    Vec step = Vec::Zero(40);
    for (int i = 20; i < 40; ++i) step[i] = 1.0;
    for (int m = 1; m <= 4; ++m) {
        for (bool periodic : {true, false}) {
            PaTransform t = build_pa_matrix(m, g, periodic);
            const double peak = apply_pa(t, step).cwiseAbs().maxCoeff();
            REQUIRE(peak >= 0.9);
            REQUIRE(peak <= 1.1);
        }
    }
}

TEST_CASE("periodic first-order step response is two opposite unit entries") {
    Grid g = make_grid(40, 0.0, 1.0);
    Vec step = Vec::Zero(40);
    for (int i = 20; i < 40; ++i) step[i] = 1.0;
    PaTransform t = build_pa_matrix(1, g, true);
    Vec out = apply_pa(t, step);
    int nonzero = 0;
    for (int i = 0; i < 40; ++i) {
        if (std::abs(out[i]) > 1e-12) {
            ++nonzero;
            REQUIRE(std::abs(out[i]) == Catch::Approx(1.0));
        }
    }
    REQUIRE(nonzero == 2);
}

TEST_CASE("transform construction validates the order") {
    Grid g = make_grid(6);
    REQUIRE_THROWS(build_pa_matrix(0, g, true));
    REQUIRE_THROWS(build_pa_matrix(6, g, true));
    REQUIRE_NOTHROW(build_pa_matrix(5, g, false));
    PaTransform t = build_pa_matrix(2, g, true);
    REQUIRE_THROWS_AS(apply_pa(t, Vec::Zero(5)), DimensionError);
}
