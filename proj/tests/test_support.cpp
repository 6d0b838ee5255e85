#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sisp/fourier.hpp"
#include "sisp/pa.hpp"
#include "sisp/rng.hpp"
#include "sisp/signals.hpp"
#include "sisp/support.hpp"

using namespace sisp;

namespace {

Vec step_signal(int n, double height) {
    Vec x = Vec::Zero(n);
    for (int i = n / 2; i < n; ++i) x[i] = height;
    return x;
}

// Two-pass textbook variance, population form, as an independent check.
Vec two_pass_variance(const Mat& P) {
    const int rows = static_cast<int>(P.rows());
    const int J = static_cast<int>(P.cols());
    Vec v(rows);
    for (int i = 0; i < rows; ++i) {
        double mean = 0.0;
        for (int j = 0; j < J; ++j) mean += P(i, j);
        mean /= J;
        double acc = 0.0;
        for (int j = 0; j < J; ++j) {
            const double d = P(i, j) - mean;
            acc += d * d;
        }
        v[i] = acc / J;
    }
    return v;
}

} // namespace

TEST_CASE("noiseless measurements reproduce the sparse profile exactly") {
    const int n = 24;
    const auto op = make_dft(n);
    const Vec x = step_signal(n, 5.0);
    const auto ens = generate_mmv(x, 3, 0.0, 11, op);
    const Mat T = build_pa_matrix(1, make_grid(n), true).matrix;
    const Vec tx = T * x;

    JointSparsityOptions direct;
    direct.approx = SparsityApprox::DirectInverse;
    const Mat P1 = joint_sparsity_profiles(ens, op, T, direct);

    // RegularizedMap without a noise estimate falls back to the direct route.
    JointSparsityOptions fallback;
    fallback.approx = SparsityApprox::RegularizedMap;
    fallback.sigma2 = 0.0;
    const Mat P2 = joint_sparsity_profiles(ens, op, T, fallback);

    for (int j = 0; j < 3; ++j) {
        REQUIRE((P1.col(j) - tx).cwiseAbs().maxCoeff() < 1e-10);
        REQUIRE((P2.col(j) - tx).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("spatial variance hand case for two measurements") {
    Mat P(3, 2);
    P << 1.0, 3.0,
         -2.0, -2.0,
         0.0, 5.0;
    const Vec v = spatial_variance(P);
    // For two columns the variance is (difference/2)^2.
    REQUIRE(v[0] == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(v[1] == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(v[2] == Catch::Approx(6.25).margin(1e-15));
}

TEST_CASE("spatial variance matches a two-pass reference on random data") {
    Rng rng(404);
    Mat P(17, 9);
    for (int i = 0; i < P.rows(); ++i)
        for (int j = 0; j < P.cols(); ++j) P(i, j) = 50.0 + 3.0 * rng.normal();
    const Vec fast = spatial_variance(P);
    const Vec slow = two_pass_variance(P);
    REQUIRE((fast - slow).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE((fast.array() >= 0.0).all());
}

TEST_CASE("spatial variance needs at least two measurements") {
    REQUIRE_THROWS_AS(spatial_variance(Mat::Zero(5, 1)), InsufficientDataError);
}

TEST_CASE("variance weights invert the shifted variance") {
    Vec v(3);
    v << 0.0, 1.0, 3.0;
    const Vec w = variance_weights(v, 1.0);
    REQUIRE(w[0] == Catch::Approx(1.0));
    REQUIRE(w[1] == Catch::Approx(0.5));
    REQUIRE(w[2] == Catch::Approx(0.25));
    REQUIRE_THROWS_AS(variance_weights(v, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(variance_weights(v, -1.0), std::invalid_argument);
}

TEST_CASE("threshold mask keeps low-variance locations and validates tau") {
    Vec v(3);
    v << 0.0, 1.0, 3.0; // weights 1, 0.5, 0.25 with eps = 1
    const SupportMask sm = threshold_mask(v, 1.0, 0.5);
    REQUIRE(sm.mask[0] == 1.0);
    REQUIRE(sm.mask[1] == 1.0); // threshold is inclusive
    REQUIRE(sm.mask[2] == 0.0);
    REQUIRE(sm.count_ones() == 2);
    REQUIRE(sm.tau == 0.5);
    REQUIRE(sm.weights[2] == Catch::Approx(0.25));
    REQUIRE_THROWS_AS(threshold_mask(v, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("mask is invariant under joint rescaling of variance and threshold") {
    Rng rng(405);
    Vec v(40);
    for (int i = 0; i < 40; ++i) v[i] = std::abs(rng.normal());
    const double eps = 1e-6, tau = 1.7, c = 7.3;
    const SupportMask base = threshold_mask(v, eps, tau);
    const SupportMask scaled = threshold_mask(c * v, c * eps, tau / c);
    REQUIRE((base.mask - scaled.mask).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weighted l1 norm hand values and validation") {
    Vec p(3), w(3);
    p << -2.0, 0.0, 3.0;
    w << 1.0, 5.0, 0.5;
    REQUIRE(weighted_l1_norm(p, w) == Catch::Approx(3.5));
    REQUIRE_THROWS_AS(weighted_l1_norm(p, Vec::Ones(4)), DimensionError);
    Vec bad = w;
    bad[1] = 0.0;
    REQUIRE_THROWS_AS(weighted_l1_norm(p, bad), std::invalid_argument);
}

TEST_CASE("masked transform zeroes the rows the mask switches off") {
    Mat T(3, 3);
    T << 1, 2, 3,
         4, 5, 6,
         7, 8, 9;
    SupportMask sm;
    sm.mask = Vec(3);
    sm.mask << 1.0, 0.0, 1.0;
    const Mat M = masked_transform(T, sm);
    REQUIRE(M.row(0).isApprox(T.row(0)));
    REQUIRE(M.row(1).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(M.row(2).isApprox(T.row(2)));
    sm.mask = Vec::Ones(4);
    REQUIRE_THROWS_AS(masked_transform(T, sm), DimensionError);
}

TEST_CASE("largest row norm hand value") {
    Mat T(2, 2);
    T << 3.0, 4.0,
         1.0, 0.0;
    REQUIRE(max_row_norm(T) == Catch::Approx(5.0));
}

// The step has jumps at rows 15 and 31 of the first-order transform.  Under
// noise the per-measurement estimates place each jump within a row or two of
// its true position, so the across-measurement variance piles up in a small
// neighborhood of each jump; rows far from any jump are shrunk to near zero.
// The direct (unregularized) inversion shows no such localization: its
// variance is the same everywhere because the noise it inherits is white.
TEST_CASE("denoised profiles concentrate variance near the jumps, direct ones do not") {
    const int n = 32, J = 8;
    const double sigma = 1.5;
    const auto op = make_dft(n);
    const Vec x = step_signal(n, 4.0);
    const Mat T = build_pa_matrix(1, make_grid(n), true).matrix;

    auto near_jump = [&](int i) {
        const int d1 = std::min(std::abs(i - 15), n - std::abs(i - 15));
        const int d2 = std::min(std::abs(i - 31), n - std::abs(i - 31));
        return std::min(d1, d2) <= 2;
    };

    double direct_jump_sum = 0.0, direct_far_sum = 0.0;
    double denoised_far_sum = 0.0;
    int jump_count = 0, far_count = 0;

    for (std::uint64_t seed : {111, 222, 333, 444, 555}) {
        const auto ens = generate_mmv(x, J, sigma, seed, op);

        JointSparsityOptions dn;
        dn.approx = SparsityApprox::RegularizedMap;
        dn.sigma2 = sigma * sigma;
        dn.shrinkage_sigmas = 3.0;
        const Vec vd = spatial_variance(joint_sparsity_profiles(ens, op, T, dn));

        JointSparsityOptions di;
        di.approx = SparsityApprox::DirectInverse;
        const Vec vr = spatial_variance(joint_sparsity_profiles(ens, op, T, di));

        double peak15 = 0.0, peak31 = 0.0, far_max = 0.0;
        for (int i = 0; i < n; ++i) {
            const int d1 = std::min(std::abs(i - 15), n - std::abs(i - 15));
            const int d2 = std::min(std::abs(i - 31), n - std::abs(i - 31));
            if (d1 <= 2) peak15 = std::max(peak15, vd[i]);
            if (d2 <= 2) peak31 = std::max(peak31, vd[i]);
            if (!near_jump(i)) {
                far_max = std::max(far_max, vd[i]);
                denoised_far_sum += vd[i];
                direct_far_sum += vr[i];
                ++far_count;
            }
        }
        direct_jump_sum += vr[15] + vr[31];
        jump_count += 2;

        // Each jump neighborhood must stand clear of everything far away.
        REQUIRE(std::min(peak15, peak31) > 1.5 * (far_max + 1e-12));
    }

    // Direct route: variance at the jumps is statistically indistinguishable
    // from variance far away (white noise in, white noise out).
    const double direct_jump_mean = direct_jump_sum / jump_count;
    const double direct_far_mean = direct_far_sum / far_count;
    REQUIRE(direct_jump_mean > direct_far_mean / 3.0);
    REQUIRE(direct_jump_mean < 3.0 * direct_far_mean);

    // Denoising crushes the far-field variance the direct route leaves flat.
    REQUIRE(denoised_far_sum / far_count < 0.3 * direct_far_mean);
}

TEST_CASE("masks are nested as the weight threshold grows") {
    Rng rng(2024);
    for (int rep = 0; rep < 10; ++rep) {
        Vec v(40);
        for (int i = 0; i < 40; ++i) v[i] = std::abs(rng.normal()) * 10.0;
        const double eps = 1e-8;
        Vec prev = Vec::Ones(40);
        // Raising tau can only switch entries off, never back on.
        for (double tau : {0.01, 0.05, 0.2, 1.0, 5.0, 1e3, 1e9}) {
            const Vec m = threshold_mask(v, eps, tau).mask;
            REQUIRE(((prev - m).array() >= -1e-15).all());
            prev = m;
        }
    }
}

TEST_CASE("noiseless masks are all-ones across a band of thresholds") {
    const int n = 40;
    const auto op = make_dft(n);
    const Vec x = step_signal(n, 7.0);
    const Mat T = build_pa_matrix(2, make_grid(n), true).matrix;
    const auto ens = generate_mmv(x, 4, 0.0, 99, op);
    JointSparsityOptions di;
    di.approx = SparsityApprox::DirectInverse;
    const Vec v = spatial_variance(joint_sparsity_profiles(ens, op, T, di));
    for (double tau : {0.5 / n, 1.0 / n, 2.0 / n}) {
        const auto sm = threshold_mask(v, 1e-8, tau);
        REQUIRE(sm.count_ones() == n);
    }
}

TEST_CASE("large-jump mask zeros persist when the threshold moves twofold") {
    // Piecewise example at heavy noise: the two height-40 jumps produce
    // profile variance an order of magnitude above the operating threshold,
    // so halving or doubling tau never loses their mask zeros.
    const int n = 80, J = 20;
    const double sigma = 5.5;
    const Grid grid = make_grid(n);
    const Vec x = sample_signal(piecewise_example(), grid);
    const auto op = make_dft(n);
    const Mat T = build_pa_matrix(3, grid, true).matrix;
    const std::vector<int> big_jumps{6, 19}; // first sample of each height-40 pair

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto ens = generate_mmv(x, J, sigma, derive_seed(seed, 0x5452, 0, 0), op);
        JointSparsityOptions jo;
        jo.sigma2 = estimate_noise_variance(ens.Y);
        jo.shrinkage_sigmas = 0.25;
        const Vec v = spatial_variance(joint_sparsity_profiles(ens, op, T, jo));
        for (double tau : {0.125, 0.25, 0.5}) {
            const auto sm = threshold_mask(v, 1e-8, tau);
            for (int a : big_jumps) {
                bool zero_near = false;
                for (int i = a - 2; i <= a + 3; ++i)
                    if (sm.mask[i] == 0.0) zero_near = true;
                REQUIRE(zero_near);
            }
        }
    }
}
