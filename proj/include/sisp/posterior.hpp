#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sisp/common.hpp"
#include "sisp/fourier.hpp"
#include "sisp/support.hpp"

namespace sisp {

// Unnormalized log posteriors over the signal x given the averaged
// observation y, up to an additive constant:
//   LaplaceL1:  -lambda ||L x||_1     - ||y - A x||^2 / (2 sigma^2)
//   MaskedL1:   -lambda ||M L x||_1   - ||y - A x||^2 / (2 sigma^2)
//   PlainL2:    -lambda/2 ||L x||^2   - ||y - A x||^2 / (2 sigma^2)
//   MaskedL2:   -lambda/2 ||M L x||^2 - ||y - A x||^2 / (2 sigma^2)
// Everything is evaluated in the log domain; densities themselves are never
// formed.  A is unitary, so the fidelity term is precomputed as
// ||Re(A*y) - x||^2 + ||Im(A*y)||^2.

enum class PosteriorVariant { LaplaceL1, MaskedL1, PlainL2, MaskedL2 };

inline bool is_masked(PosteriorVariant v) {
    return v == PosteriorVariant::MaskedL1 || v == PosteriorVariant::MaskedL2;
}

inline int penalty_power(PosteriorVariant v) {
    return (v == PosteriorVariant::LaplaceL1 || v == PosteriorVariant::MaskedL1) ? 1 : 2;
}

inline std::string variant_name(PosteriorVariant v) {
    switch (v) {
        case PosteriorVariant::LaplaceL1: return "laplace_l1";
        case PosteriorVariant::MaskedL1: return "masked_l1";
        case PosteriorVariant::PlainL2: return "plain_l2";
        case PosteriorVariant::MaskedL2: return "masked_l2";
    }
    return "unknown";
}

inline PosteriorVariant variant_from_name(const std::string& s) {
    if (s == "laplace_l1") return PosteriorVariant::LaplaceL1;
    if (s == "masked_l1") return PosteriorVariant::MaskedL1;
    if (s == "plain_l2") return PosteriorVariant::PlainL2;
    if (s == "masked_l2") return PosteriorVariant::MaskedL2;
    throw ConfigError("unknown posterior variant: " + s);
}

struct PosteriorSpec {
    PosteriorVariant variant = PosteriorVariant::LaplaceL1;
    double lambda = 0.0;
    double sigma2 = 1.0;
    ForwardOperator op;
    CVec y;     // averaged observation
    Mat T;      // effective transform, mask already folded in for masked variants
    Vec re_c;   // Re(A* y)
    double im_const = 0.0; // ||Im(A* y)||^2
};

inline PosteriorSpec make_posterior(PosteriorVariant variant, double lambda, double sigma2,
                                    const ForwardOperator& op, const CVec& y, const Mat& L,
                                    const std::optional<SupportMask>& mask = std::nullopt) {
    require(lambda >= 0.0, "posterior: lambda must be nonnegative");
    require(sigma2 > 0.0, "posterior: sigma2 must be positive");
    require_dim(y.size() == op.n(), "posterior: observation/operator size mismatch");
    require_dim(L.cols() == op.n(), "posterior: transform/operator size mismatch");
    if (is_masked(variant)) {
        require(mask.has_value(), "posterior: masked variant needs a support mask");
    }
    PosteriorSpec spec;
    spec.variant = variant;
    spec.lambda = lambda;
    spec.sigma2 = sigma2;
    spec.op = op;
    spec.y = y;
    spec.T = is_masked(variant) ? masked_transform(L, *mask) : L;
    const CVec c = op.adjoint(y);
    spec.re_c = c.real();
    spec.im_const = c.imag().squaredNorm();
    return spec;
}

inline double penalty_term(const PosteriorSpec& spec, const Vec& tx) {
    if (penalty_power(spec.variant) == 1) return spec.lambda * tx.lpNorm<1>();
    return 0.5 * spec.lambda * tx.squaredNorm();
}

inline double log_unnormalized_posterior(const PosteriorSpec& spec, const Vec& x) {
    require_dim(x.size() == spec.op.n(), "posterior: state size mismatch");
    const double fid =
        ((spec.re_c - x).squaredNorm() + spec.im_const) / (2.0 * spec.sigma2);
    return -penalty_term(spec, spec.T * x) - fid;
}

// Reference implementation forming y - A x explicitly; the cached fast path
// above must agree with this to rounding error.
inline double log_unnormalized_posterior_direct(const PosteriorSpec& spec, const Vec& x) {
    const double fid = (spec.y - spec.op.apply(x)).squaredNorm() / (2.0 * spec.sigma2);
    return -penalty_term(spec, spec.T * x) - fid;
}

// Incremental evaluator for single-component Metropolis sweeps.  Keeps T x
// and the penalty/fidelity totals cached; a single-component change touches
// only the transform rows whose stencil covers that component.
class PosteriorEvaluator {
  public:
    PosteriorEvaluator(const PosteriorSpec& spec, Vec x) : spec_(&spec), x_(std::move(x)) {
        require_dim(x_.size() == spec.op.n(), "evaluator: state size mismatch");
        const int n = spec.op.n();
        cols_.resize(n);
        for (int i = 0; i < n; ++i) {
            for (int r = 0; r < spec.T.rows(); ++r) {
                if (spec.T(r, i) != 0.0) cols_[i].emplace_back(r, spec.T(r, i));
            }
        }
        refresh();
    }

    const Vec& state() const { return x_; }

    double log_value() const {
        return -penalty_ - (fid_ + spec_->im_const) / (2.0 * spec_->sigma2);
    }

    // Log-posterior change if component i moved to value xi.
    double delta_component(int i, double xi) const {
        const double d = xi - x_[i];
        double dpen = 0.0;
        if (penalty_power(spec_->variant) == 1) {
            for (const auto& [r, t] : cols_[i]) {
                const double old_v = tx_[r];
                dpen += std::abs(old_v + t * d) - std::abs(old_v);
            }
            dpen *= spec_->lambda;
        } else {
            for (const auto& [r, t] : cols_[i]) {
                const double old_v = tx_[r];
                const double new_v = old_v + t * d;
                dpen += new_v * new_v - old_v * old_v;
            }
            dpen *= 0.5 * spec_->lambda;
        }
        const double old_r = spec_->re_c[i] - x_[i];
        const double new_r = spec_->re_c[i] - xi;
        const double dfid = (new_r * new_r - old_r * old_r) / (2.0 * spec_->sigma2);
        return -dpen - dfid;
    }

    void commit_component(int i, double xi) {
        const double d = xi - x_[i];
        double dpen = 0.0;
        if (penalty_power(spec_->variant) == 1) {
            for (const auto& [r, t] : cols_[i]) {
                const double new_v = tx_[r] + t * d;
                dpen += std::abs(new_v) - std::abs(tx_[r]);
                tx_[r] = new_v;
            }
            penalty_ += spec_->lambda * dpen;
        } else {
            for (const auto& [r, t] : cols_[i]) {
                const double new_v = tx_[r] + t * d;
                dpen += new_v * new_v - tx_[r] * tx_[r];
                tx_[r] = new_v;
            }
            penalty_ += 0.5 * spec_->lambda * dpen;
        }
        const double old_r = spec_->re_c[i] - x_[i];
        const double new_r = spec_->re_c[i] - xi;
        fid_ += new_r * new_r - old_r * old_r;
        x_[i] = xi;
        if (++commits_since_refresh_ >= refresh_interval_) refresh();
    }

    void set_state(const Vec& x) {
        require_dim(x.size() == x_.size(), "evaluator: state size mismatch");
        x_ = x;
        refresh();
    }

    void refresh() {
        tx_ = spec_->T * x_;
        commits_since_refresh_ = 0;
        recompute_totals_full();
    }

    // Exact snapshot of the cached state, including the refresh counter, so
    // a restored evaluator reproduces the original's future values bit for
    // bit (a fresh refresh would reset the drift-control schedule and let
    // totals differ in the last ulp).
    void save(std::ostream& os) const {
        os << x_.size() << ' ' << tx_.size() << ' ' << commits_since_refresh_ << ' ';
        for (int i = 0; i < x_.size(); ++i) write_double_bits(os, x_[i]);
        for (int i = 0; i < tx_.size(); ++i) write_double_bits(os, tx_[i]);
        write_double_bits(os, penalty_);
        write_double_bits(os, fid_);
    }

    void restore(std::istream& is) {
        Eigen::Index nx = 0, nt = 0;
        is >> nx >> nt >> commits_since_refresh_;
        require_dim(nx == x_.size() && nt == tx_.size(),
                    "evaluator: snapshot size mismatch");
        for (Eigen::Index i = 0; i < nx; ++i) x_[i] = read_double_bits(is);
        for (Eigen::Index i = 0; i < nt; ++i) tx_[i] = read_double_bits(is);
        penalty_ = read_double_bits(is);
        fid_ = read_double_bits(is);
    }

  private:
    void recompute_totals_full() {
        if (penalty_power(spec_->variant) == 1) {
            penalty_ = spec_->lambda * tx_.lpNorm<1>();
        } else {
            penalty_ = 0.5 * spec_->lambda * tx_.squaredNorm();
        }
        fid_ = (spec_->re_c - x_).squaredNorm();
    }

    const PosteriorSpec* spec_;
    Vec x_;
    Vec tx_;
    double penalty_ = 0.0;
    double fid_ = 0.0;
    int commits_since_refresh_ = 0;
    static constexpr int refresh_interval_ = 4096;
    std::vector<std::vector<std::pair<int, double>>> cols_;
};

} // namespace sisp
