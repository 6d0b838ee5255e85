#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sisp/common.hpp"
#include "sisp/fourier.hpp"
#include "sisp/map.hpp"
#include "sisp/posterior.hpp"
#include "sisp/rng.hpp"

namespace sisp {

// Random-walk Metropolis sampling of the log posteriors, with Gaussian
// proposals (symmetric, so the acceptance probability needs only the target
// ratio), optional proposal-scale adaptation during burn-in, and posterior
// mean extraction over the retained states.

enum class ProposalMode {
    ComponentwiseSweep, // one recorded state = n single-component updates
    JointVector         // one recorded state = one whole-vector update
};

inline std::string proposal_mode_name(ProposalMode m) {
    return m == ProposalMode::ComponentwiseSweep ? "componentwise" : "joint";
}

inline ProposalMode proposal_mode_from_name(const std::string& s) {
    if (s == "componentwise") return ProposalMode::ComponentwiseSweep;
    if (s == "joint") return ProposalMode::JointVector;
    throw ConfigError("unknown proposal mode: " + s);
}

struct ProposalConfig {
    double sigma_q = 0.0; // proposal standard deviation; <= 0 means derive from x0
    ProposalMode mode = ProposalMode::ComponentwiseSweep;
    bool adapt = true;
    double window_low = 0.2;  // acceptance band the adaptation steers into
    double window_high = 0.8;
    double adapt_factor = 1.5;
    int adapt_interval = 500; // recorded iterations between adaptation checks
};

inline void validate(const ProposalConfig& cfg) {
    require(cfg.window_low > 0.0 && cfg.window_high < 1.0 &&
                cfg.window_low < cfg.window_high,
            "proposal: acceptance window must satisfy 0 < low < high < 1");
    require(cfg.adapt_factor > 1.0, "proposal: adapt_factor must exceed 1");
    require(cfg.adapt_interval >= 1, "proposal: adapt_interval must be positive");
}

// Scale-aware default when no proposal width is configured.
inline double default_sigma_q(const Vec& x0) {
    return 0.1 * (x0.maxCoeff() - x0.minCoeff() + 1.0);
}

struct SigmaQEvent {
    long long iteration = 0;    // recorded iterations completed at the check
    double sigma_q = 0.0;       // value in force after the check
    double window_ratio = 0.0;  // acceptance ratio over the closed window
};

struct Chain {
    Mat states;      // n x N_iter; column t = state after recorded iteration t+1
    Vec log_values;  // log posterior of each recorded state
    int burn_in = 0;
    std::uint64_t seed = 0;
    ProposalMode mode = ProposalMode::ComponentwiseSweep;
    double initial_sigma_q = 0.0;
    double final_sigma_q = 0.0;
    std::vector<SigmaQEvent> sigma_q_history;
    Eigen::VectorXi accepts_per_iteration; // accepted proposals per recorded iteration
    int proposals_per_iteration = 1;       // n in sweep mode, 1 in joint mode
    std::vector<long long> accept_per_component;
    long long accepted_total = 0;
    long long proposed_total = 0;

    int n() const { return static_cast<int>(states.rows()); }
    int iterations() const { return static_cast<int>(states.cols()); }
    double acceptance_ratio() const {
        return proposed_total == 0
                   ? 0.0
                   : static_cast<double>(accepted_total) / proposed_total;
    }
};

// Symmetric-proposal Metropolis acceptance probability min{1, f_cand/f_prev}
// in the log domain.  A -inf previous state is an escape hatch: any candidate
// is accepted unconditionally.
inline double acceptance_probability(double log_f_cand, double log_f_prev) {
    require(!std::isnan(log_f_cand) && !std::isnan(log_f_prev),
            "acceptance_probability: NaN log density");
    require(log_f_prev < std::numeric_limits<double>::infinity() &&
                log_f_cand < std::numeric_limits<double>::infinity(),
            "acceptance_probability: +inf log density");
    if (log_f_prev == -std::numeric_limits<double>::infinity()) return 1.0;
    const double delta = log_f_cand - log_f_prev;
    if (delta >= 0.0) return 1.0;
    return std::exp(delta); // exp(-inf) = 0 handles impossible candidates
}

// One Metropolis chain.  Strictly sequential; snapshot/restore captures the
// complete dynamic state (current point, cached evaluator totals, RNG,
// proposal scale, adaptation tallies) so that a restored sampler replays the
// original chain bit for bit -- the future depends on nothing else.
class MhSampler {
  public:
    MhSampler(const PosteriorSpec& spec, const Vec& x0, int burn_in,
              const ProposalConfig& cfg, std::uint64_t seed)
        : spec_(&spec),
          eval_(spec, x0),
          rng_(derive_seed(seed, 0x6d63ULL)),
          cfg_(cfg),
          burn_in_(burn_in) {
        validate(cfg_);
        require(burn_in >= 0, "mh_sample: burn-in must be nonnegative");
        require(x0.allFinite() && std::isfinite(eval_.log_value()),
                "mh_sample: log posterior is not finite at the initial state");
        sigma_q_ = cfg_.sigma_q > 0.0 ? cfg_.sigma_q : default_sigma_q(x0);
        accept_per_component_.assign(static_cast<std::size_t>(x0.size()), 0);
    }

    int n() const { return static_cast<int>(eval_.state().size()); }
    const Vec& state() const { return eval_.state(); }
    double log_value() const { return eval_.log_value(); }
    double sigma_q() const { return sigma_q_; }
    long long completed_iterations() const { return iter_; }
    long long accepted_total() const { return accepted_total_; }
    long long proposed_total() const { return proposed_total_; }
    const std::vector<long long>& accept_per_component() const {
        return accept_per_component_;
    }
    const std::vector<SigmaQEvent>& sigma_q_history() const { return history_; }

    // Runs one recorded iteration; returns the number of accepted proposals
    // within it (0..n in sweep mode, 0 or 1 in joint mode).
    int step() {
        int accepted = 0;
        if (cfg_.mode == ProposalMode::ComponentwiseSweep) {
            for (int i = 0; i < n(); ++i) {
                const double cand = eval_.state()[i] + sigma_q_ * rng_.normal();
                const double lp = eval_.log_value();
                const double alpha =
                    acceptance_probability(lp + eval_.delta_component(i, cand), lp);
                ++proposed_total_;
                ++window_proposed_;
                if (rng_.uniform01() < alpha) {
                    eval_.commit_component(i, cand);
                    ++accepted;
                    ++accepted_total_;
                    ++window_accepted_;
                    ++accept_per_component_[static_cast<std::size_t>(i)];
                }
            }
        } else {
            Vec cand(n());
            for (int i = 0; i < n(); ++i)
                cand[i] = eval_.state()[i] + sigma_q_ * rng_.normal();
            const double lp_cand = log_unnormalized_posterior(*spec_, cand);
            const double alpha = acceptance_probability(lp_cand, eval_.log_value());
            ++proposed_total_;
            ++window_proposed_;
            if (rng_.uniform01() < alpha) {
                eval_.set_state(cand);
                accepted = 1;
                ++accepted_total_;
                ++window_accepted_;
                for (auto& c : accept_per_component_) ++c;
            }
        }
        ++iter_;
        maybe_adapt();
        return accepted;
    }

    void save(std::ostream& os) const {
        os << iter_ << ' ' << accepted_total_ << ' ' << proposed_total_ << ' '
           << window_accepted_ << ' ' << window_proposed_ << ' ';
        write_double_bits(os, sigma_q_);
        for (const auto c : accept_per_component_) os << c << ' ';
        rng_.save(os);
        os << ' ';
        eval_.save(os);
    }

    void restore(std::istream& is) {
        is >> iter_ >> accepted_total_ >> proposed_total_ >> window_accepted_ >>
            window_proposed_;
        sigma_q_ = read_double_bits(is);
        for (auto& c : accept_per_component_) is >> c;
        rng_.restore(is);
        eval_.restore(is);
        require(static_cast<bool>(is), "mh_sample: snapshot restore failed");
    }

  private:
    void maybe_adapt() {
        if (!cfg_.adapt) return;
        if (iter_ > burn_in_) return; // frozen after burn-in
        if (iter_ % cfg_.adapt_interval != 0) return;
        const double ratio =
            window_proposed_ == 0
                ? 0.0
                : static_cast<double>(window_accepted_) / window_proposed_;
        if (ratio < cfg_.window_low) {
            sigma_q_ /= cfg_.adapt_factor; // too many rejections: smaller steps
        } else if (ratio > cfg_.window_high) {
            sigma_q_ *= cfg_.adapt_factor; // too timid: larger steps
        }
        history_.push_back(SigmaQEvent{iter_, sigma_q_, ratio});
        window_accepted_ = 0;
        window_proposed_ = 0;
    }

    const PosteriorSpec* spec_;
    PosteriorEvaluator eval_;
    Rng rng_;
    ProposalConfig cfg_;
    long long burn_in_ = 0;
    double sigma_q_ = 0.1;
    long long iter_ = 0;
    long long accepted_total_ = 0;
    long long proposed_total_ = 0;
    long long window_accepted_ = 0;
    long long window_proposed_ = 0;
    std::vector<long long> accept_per_component_;
    std::vector<SigmaQEvent> history_;
};

inline Chain mh_sample(const PosteriorSpec& spec, const Vec& x0, int N_iter, int B,
                       const ProposalConfig& proposal, std::uint64_t seed) {
    require(N_iter > B && B >= 0, "mh_sample: need N_iter > B >= 0");
    MhSampler sampler(spec, x0, B, proposal, seed);

    Chain chain;
    chain.states.resize(x0.size(), N_iter);
    chain.log_values.resize(N_iter);
    chain.burn_in = B;
    chain.seed = seed;
    chain.mode = proposal.mode;
    chain.initial_sigma_q = sampler.sigma_q();
    chain.accepts_per_iteration.resize(N_iter);
    chain.proposals_per_iteration =
        proposal.mode == ProposalMode::ComponentwiseSweep ? static_cast<int>(x0.size())
                                                          : 1;

    for (int t = 0; t < N_iter; ++t) {
        chain.accepts_per_iteration[t] = sampler.step();
        chain.states.col(t) = sampler.state();
        chain.log_values[t] = sampler.log_value();
    }

    chain.final_sigma_q = sampler.sigma_q();
    chain.sigma_q_history = sampler.sigma_q_history();
    chain.accept_per_component = sampler.accept_per_component();
    chain.accepted_total = sampler.accepted_total();
    chain.proposed_total = sampler.proposed_total();
    return chain;
}

// Mean of the retained states: columns B+1 .. N_iter (1-based).
inline Vec posterior_mean(const Chain& chain) {
    require(chain.burn_in >= 0 && chain.burn_in < chain.iterations(),
            "posterior_mean: need 0 <= burn_in < iterations");
    const int kept = chain.iterations() - chain.burn_in;
    return chain.states.rightCols(kept).rowwise().mean();
}

// Average of the per-measurement MAP estimates under the posterior's own
// penalty; the standard starting point for the chains.
inline Vec default_initial_state(const MeasurementEnsemble& ens,
                                 const PosteriorSpec& spec, double lambda_hat,
                                 const AdmmOptions& admm = {}) {
    require(ens.J() >= 1, "default_initial_state: empty ensemble");
    require_dim(ens.n() == spec.op.n(), "default_initial_state: size mismatch");
    const int nu = penalty_power(spec.variant);
    Vec x0 = Vec::Zero(ens.n());
    for (int j = 0; j < ens.J(); ++j) {
        x0 += map_estimate(ens.Y.col(j), lambda_hat, nu, spec.T, spec.sigma2, spec.op,
                           admm)
                  .x;
    }
    return x0 / ens.J();
}

} // namespace sisp
