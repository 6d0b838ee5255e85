#pragma once

#include <cmath>
#include <cstdint>

#include "sisp/common.hpp"
#include "sisp/fourier.hpp"
#include "sisp/map.hpp"

namespace sisp {

// Support detection across a measurement ensemble.  Each measurement vector
// is mapped to the sparse domain, the across-measurement sample variance is
// taken pointwise, and locations whose variance stays low (shared support,
// stable estimate) receive weight 1/(v + eps).  Thresholding the weights
// yields a binary mask that switches the sparsity penalty off where the
// measurements disagree, i.e. where the signal actually has content.

enum class SparsityApprox {
    RegularizedMap, // per-measurement l1-regularized inversion (denoised)
    DirectInverse   // real part of A^{-1} y_j, kept for exact/noiseless work
};

struct JointSparsityOptions {
    SparsityApprox approx = SparsityApprox::RegularizedMap;
    // Shrinkage of the per-measurement solves, in units of the noise standard
    // deviation seen in the sparse domain.  Only used by RegularizedMap.
    double shrinkage_sigmas = 1.0;
    double sigma2 = 0.0; // noise variance estimate; <= 0 falls back to DirectInverse
    AdmmOptions admm{};
};

// Largest row 2-norm of T, used to express shrinkage in sparse-domain noise
// units (the transform amplifies per-sample noise by its row norm).
inline double max_row_norm(const Mat& T) {
    return std::sqrt(T.rowwise().squaredNorm().maxCoeff());
}

// P has one column per measurement: column j approximates T x from y_j.
inline Mat joint_sparsity_profiles(const MeasurementEnsemble& ens, const ForwardOperator& op,
                                   const Mat& T, const JointSparsityOptions& opts = {}) {
    require_dim(T.cols() == ens.n() && op.n() == ens.n(),
                "joint_sparsity_profiles: dimension mismatch");
    const int J = ens.J();
    Mat P(T.rows(), J);
    const bool denoise =
        opts.approx == SparsityApprox::RegularizedMap && opts.sigma2 > 1e-300;
    double lambda = 0.0;
    if (denoise) {
        const double sparse_noise_sd = std::sqrt(opts.sigma2 / 2.0) * max_row_norm(T);
        lambda = opts.shrinkage_sigmas * sparse_noise_sd / opts.sigma2;
    }
    for (int j = 0; j < J; ++j) {
        const CVec y = ens.Y.col(j);
        if (denoise) {
            P.col(j) = T * map_l1(y, lambda, T, opts.sigma2, op, opts.admm).x;
        } else {
            P.col(j) = T * op.inverse(y).real();
        }
    }
    return P;
}

// Pointwise across-measurement variance, (1/J) sum p^2 - ((1/J) sum p)^2.
inline Vec spatial_variance(const Mat& P) {
    const int J = static_cast<int>(P.cols());
    if (J < 2) throw InsufficientDataError("spatial_variance: needs at least 2 columns");
    const Vec mean = P.rowwise().mean();
    const Vec msq = P.cwiseAbs2().rowwise().mean();
    return (msq - mean.cwiseAbs2()).cwiseMax(0.0);
}

inline Vec variance_weights(const Vec& v, double eps) {
    require(eps > 0.0, "variance_weights: eps must be positive");
    return (v.array() + eps).inverse();
}

struct SupportMask {
    Vec mask; // entries in {0, 1}
    double tau = 0.0;
    double eps = 0.0;
    Vec variance;
    Vec weights;

    int count_ones() const { return static_cast<int>(mask.sum()); }
};

// m_i = 1 where w_i >= tau (stable support, penalty stays on).
inline SupportMask threshold_mask(const Vec& v, double eps, double tau) {
    require(tau > 0.0, "threshold_mask: tau must be positive");
    SupportMask sm;
    sm.tau = tau;
    sm.eps = eps;
    sm.variance = v;
    sm.weights = variance_weights(v, eps);
    sm.mask = (sm.weights.array() >= tau).cast<double>();
    return sm;
}

inline double weighted_l1_norm(const Vec& p, const Vec& w) {
    require_dim(p.size() == w.size(), "weighted_l1_norm: size mismatch");
    require((w.array() > 0.0).all(), "weighted_l1_norm: weights must be positive");
    return (w.array() * p.array().abs()).sum();
}

inline Mat masked_transform(const Mat& T, const SupportMask& sm) {
    require_dim(sm.mask.size() == T.rows(), "masked_transform: mask/transform mismatch");
    return sm.mask.asDiagonal() * T;
}

} // namespace sisp
