#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "sisp/common.hpp"
#include "sisp/rng.hpp"

namespace sisp {

enum class OperatorKind { UnitaryDft, Identity };

inline std::string operator_kind_name(OperatorKind k) {
    return k == OperatorKind::UnitaryDft ? "unitary_dft" : "identity";
}

inline OperatorKind operator_kind_from_name(const std::string& s) {
    if (s == "unitary_dft") return OperatorKind::UnitaryDft;
    if (s == "identity") return OperatorKind::Identity;
    throw ConfigError("unknown operator kind: " + s);
}

// Forward measurement operator.  UnitaryDft is the n x n DFT matrix with
// 1/sqrt(n) normalization, applied as a dense matrix product; its adjoint
// equals its inverse.  Identity is provided for sampler calibration tests.
class ForwardOperator {
  public:
    ForwardOperator() = default;

    ForwardOperator(OperatorKind kind, int n) : kind_(kind), n_(n) {
        require(n >= 1, "forward operator: n must be positive");
        if (kind_ == OperatorKind::UnitaryDft) {
            mat_.resize(n, n);
            const double norm = 1.0 / std::sqrt(static_cast<double>(n));
            for (int k = 0; k < n; ++k) {
                for (int j = 0; j < n; ++j) {
                    const double angle =
                        -2.0 * std::numbers::pi * static_cast<double>(k) * j / n;
                    mat_(k, j) = Cplx(std::cos(angle), std::sin(angle)) * norm;
                }
            }
        }
    }

    OperatorKind kind() const { return kind_; }
    int n() const { return n_; }

    CVec apply(const Vec& x) const {
        require_dim(x.size() == n_, "forward operator: apply dimension mismatch");
        if (kind_ == OperatorKind::Identity) return x.cast<Cplx>();
        return mat_ * x.cast<Cplx>();
    }

    CVec adjoint(const CVec& y) const {
        require_dim(y.size() == n_, "forward operator: adjoint dimension mismatch");
        if (kind_ == OperatorKind::Identity) return y;
        return mat_.adjoint() * y;
    }

    // Unitary, so the inverse is the adjoint.
    CVec inverse(const CVec& y) const { return adjoint(y); }

  private:
    OperatorKind kind_ = OperatorKind::Identity;
    int n_ = 1;
    CMat mat_;
};

inline ForwardOperator make_dft(int n) { return {OperatorKind::UnitaryDft, n}; }
inline ForwardOperator make_identity_op(int n) { return {OperatorKind::Identity, n}; }

// J noisy looks at the same signal: column j is A x + e_j with e_j complex
// Gaussian, each component's real and imaginary part independent N(0, s^2/2).
struct MeasurementEnsemble {
    CMat Y;               // n x J
    double sigma_true = 0.0;
    std::uint64_t seed = 0;
    OperatorKind op_kind = OperatorKind::UnitaryDft;

    int n() const { return static_cast<int>(Y.rows()); }
    int J() const { return static_cast<int>(Y.cols()); }

    CVec mean_observation() const {
        require(J() >= 1, "ensemble: no columns");
        return Y.rowwise().mean();
    }
};

inline MeasurementEnsemble generate_mmv(const Vec& x, int J, double sigma,
                                        std::uint64_t seed, const ForwardOperator& op) {
    require(J >= 1, "generate_mmv: J must be positive");
    require(sigma >= 0.0, "generate_mmv: sigma must be nonnegative");
    require_dim(x.size() == op.n(), "generate_mmv: signal/operator size mismatch");
    const CVec ax = op.apply(x);
    MeasurementEnsemble ens;
    ens.Y.resize(op.n(), J);
    ens.sigma_true = sigma;
    ens.seed = seed;
    ens.op_kind = op.kind();
    const double comp_sd = sigma / std::sqrt(2.0);
    Rng rng(derive_seed(seed, 0x4d4dULL));
    for (int j = 0; j < J; ++j) {
        for (int i = 0; i < op.n(); ++i) {
            const double re = comp_sd * rng.normal();
            const double im = comp_sd * rng.normal();
            ens.Y(i, j) = ax[i] + Cplx(re, im);
        }
    }
    return ens;
}

// Mean received power (1/(nJ)) sum |Y_ij|^2.
inline double mean_power(const CMat& Y) {
    require(Y.size() > 0, "mean_power: empty matrix");
    return Y.cwiseAbs2().sum() / static_cast<double>(Y.size());
}

inline double snr_db(double power, double sigma2) {
    require(power > 0.0, "snr_db: power must be positive");
    require(sigma2 > 0.0, "snr_db: sigma2 must be positive");
    return 10.0 * std::log10(power / sigma2);
}

// Noise level that yields a target SNR against the clean signal power
// (1/n) ||A x||^2.  The reported SNR of generated data then also includes
// the noise's own contribution to received power.
inline double sigma_for_snr_db(const Vec& x, const ForwardOperator& op, double target_db) {
    const CVec ax = op.apply(x);
    const double clean = ax.cwiseAbs2().sum() / static_cast<double>(ax.size());
    require(clean > 0.0, "sigma_for_snr_db: signal has zero power");
    return std::sqrt(clean / std::pow(10.0, target_db / 10.0));
}

// Row-averaged across-measurement sample variance,
//   (1/n) sum_i [ (1/J) sum_j |Y_ij|^2 - |(1/J) sum_j Y_ij|^2 ].
// Unbiased up to the (J-1)/J factor of the 1/J form; requires J >= 2.
inline double estimate_noise_variance(const CMat& Y) {
    const int J = static_cast<int>(Y.cols());
    if (J < 2) throw InsufficientDataError("estimate_noise_variance: needs J >= 2");
    const int n = static_cast<int>(Y.rows());
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        double p = 0.0;
        Cplx m(0.0, 0.0);
        for (int j = 0; j < J; ++j) {
            p += std::norm(Y(i, j));
            m += Y(i, j);
        }
        p /= J;
        m /= static_cast<double>(J);
        acc += p - std::norm(m);
    }
    return acc / n;
}

} // namespace sisp
