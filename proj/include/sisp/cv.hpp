#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "sisp/common.hpp"
#include "sisp/fourier.hpp"
#include "sisp/map.hpp"
#include "sisp/rng.hpp"

namespace sisp {

// Regularization strength selection by K-fold cross validation over the
// measurement ensemble.  Each trial shuffles the J columns into M training
// and J-M testing vectors; every training vector gets a candidate strength
// drawn uniformly from [0, 1], an l1 MAP estimate is formed from it alone,
// and the re-projected estimate is scored against all testing vectors by
// mean squared error.  The candidate with the lowest score wins.

inline double mse(const CVec& a, const CVec& b) {
    require_dim(a.size() == b.size(), "mse: size mismatch");
    require(a.size() > 0, "mse: empty vectors");
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

struct CvRecord {
    int trial = 0;        // k in 1..K
    int column = 0;       // measurement column scored (0-based)
    double lambda = 0.0;  // candidate strength drawn for this column
    double score = 0.0;   // mean MSE against the trial's testing vectors
};

struct HyperPrior {
    double lambda_hat = 0.0;
    std::vector<CvRecord> trace;
};

inline HyperPrior kfold_cv(const MeasurementEnsemble& ens, int K, int M_train, const Mat& T,
                           double sigma2, std::uint64_t seed, const ForwardOperator& op,
                           const AdmmOptions& admm = {}) {
    const int J = ens.J();
    require(K >= 1, "kfold_cv: K must be positive");
    require(M_train >= 1, "kfold_cv: M_train must be positive");
    require(M_train < J, "kfold_cv: M_train must be smaller than J");
    require(sigma2 > 0.0, "kfold_cv: sigma2 must be positive");

    HyperPrior hp;
    hp.trace.reserve(static_cast<std::size_t>(K) * M_train);
    for (int k = 0; k < K; ++k) {
        // Per-trial shuffle; per-column substreams keep results independent
        // of evaluation order.
        Rng shuffle_rng(derive_seed(seed, 0xC1ULL, k));
        std::vector<int> perm(J);
        for (int j = 0; j < J; ++j) perm[j] = j;
        for (int j = J - 1; j >= 1; --j) {
            const int swap = static_cast<int>(shuffle_rng.uniform01() * (j + 1));
            std::swap(perm[j], perm[std::min(swap, j)]);
        }
        for (int i = 0; i < M_train; ++i) {
            Rng draw_rng(derive_seed(seed, 0xC2ULL, k, i));
            const double lambda = draw_rng.uniform01();
            const int col = perm[i];
            const Vec xhat = map_l1(ens.Y.col(col), lambda, T, sigma2, op, admm).x;
            const CVec yhat = op.apply(xhat);
            double score = 0.0;
            for (int l = M_train; l < J; ++l) score += mse(yhat, ens.Y.col(perm[l]));
            score /= (J - M_train);
            hp.trace.push_back(CvRecord{k + 1, col, lambda, score});
        }
    }
    const auto best = std::min_element(
        hp.trace.begin(), hp.trace.end(),
        [](const CvRecord& a, const CvRecord& b) { return a.score < b.score; });
    hp.lambda_hat = best->lambda;
    return hp;
}

} // namespace sisp
