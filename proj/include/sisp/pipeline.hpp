#pragma once

// Batch experiment orchestration: the end-to-end recovery pipeline
// (measure → estimate noise → select regularization strength → build support
// mask → sample each posterior variant → summarize), plus the sweep, mask,
// cross-validation, and chain-diagnosis runners used by the command-line
// tool.  Every runner writes its artifacts into an output directory and
// finishes with a manifest of content hashes; identical config + seed gives
// byte-identical artifacts.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sisp/common.hpp"
#include "sisp/config.hpp"
#include "sisp/cv.hpp"
#include "sisp/diagnostics.hpp"
#include "sisp/fourier.hpp"
#include "sisp/io.hpp"
#include "sisp/map.hpp"
#include "sisp/mcmc.hpp"
#include "sisp/pa.hpp"
#include "sisp/posterior.hpp"
#include "sisp/signals.hpp"
#include "sisp/support.hpp"
#include "sisp/svg.hpp"

namespace sisp {

// Noise variances below this floor are treated as exactly noiseless: the
// posterior still needs a positive variance to be defined, but cross
// validation and regularized denoising become meaningless (and badly
// conditioned), so both are skipped in that regime.
constexpr double kSigma2Floor = 1e-12;

struct RunOptions {
    std::filesystem::path out_dir = "out";
    bool svg = false;
    int threads = 1;
};

struct RunReport {
    int exit_code = 0;  // 0 all complete, 2 config rejected, 3 partial failure
    ordered_json summary;
    std::vector<std::string> files;  // artifact names, relative to out_dir
};

// ---------------------------------------------------------------------------
// Worker pool: runs fn(0..count-1) on up to `threads` workers.  Results must
// be written into preallocated per-index slots so aggregation order never
// depends on scheduling.
// ---------------------------------------------------------------------------

inline void parallel_run(int count, int threads, const std::function<void(int)>& fn) {
    require(count >= 0, "parallel_run: negative task count");
    require(threads >= 1, "parallel_run: need at least one worker");
    if (threads == 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const int workers = std::min(threads, count);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> guard(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Single-trial pipeline pass
// ---------------------------------------------------------------------------

struct VariantOutcome {
    PosteriorVariant variant = PosteriorVariant::LaplaceL1;
    bool failed = false;
    std::string message;
    Vec x_init;
    Vec mean;
    Vec lower;
    Vec upper;
    double rel_error = 0.0;
    double mean_width = 0.0;
    double acceptance = 0.0;
    double final_sigma_q = 0.0;
    std::vector<double> probe_errors;
    // Share of components whose initial state (the averaged regularized
    // estimate) falls inside the credibility band; low values are reported as
    // a warning, not a failure.
    double anchor_fraction = 0.0;
    Chain chain;  // populated only when the caller asked to keep chains
};

struct TrialResult {
    double sigma = 0.0;
    int trial = 0;
    bool noiseless = false;
    double sigma2_hat = 0.0;
    double lambda_hat = 0.0;
    Vec x_true;
    MeasurementEnsemble ensemble;
    std::vector<CvRecord> cv_trace;
    Mat profiles;  // empty unless a masked variant was requested
    std::optional<SupportMask> mask;
    std::vector<VariantOutcome> variants;
};

// Executes one full pipeline pass for one noise level and trial index:
// generate measurements, estimate the noise variance, pick the
// regularization strength (cross validation unless overridden or
// noiseless), build the support mask if any masked variant was requested,
// then sample every requested posterior variant.  Per-variant sampling
// failures are captured in the outcome rather than thrown, so one bad
// variant cannot sink the rest of the run.
inline TrialResult run_trial(const ExperimentConfig& cfg, double sigma, int sigma_index,
                             int trial, bool keep_chains) {
    const Grid grid{cfg.n, cfg.lo, cfg.hi};
    TrialResult res;
    res.sigma = sigma;
    res.trial = trial;
    res.x_true = sample_signal(signal_spec_from_config(cfg), grid);

    const ForwardOperator op(cfg.op, cfg.n);
    const std::uint64_t trial_seed =
        derive_seed(cfg.seed, 0x5452ULL, static_cast<std::uint64_t>(sigma_index),
                    static_cast<std::uint64_t>(trial));
    res.ensemble = generate_mmv(res.x_true, cfg.J, sigma, trial_seed, op);

    const double sigma2_raw =
        cfg.J >= 2 ? estimate_noise_variance(res.ensemble.Y) : sigma * sigma;
    res.noiseless = sigma2_raw < kSigma2Floor;
    res.sigma2_hat = std::max(sigma2_raw, kSigma2Floor);

    const PaTransform pa = build_pa_matrix(cfg.order, grid, cfg.periodic);
    const Mat& L = pa.matrix;

    if (cfg.lambda_override >= 0.0) {
        res.lambda_hat = cfg.lambda_override;
    } else if (res.noiseless) {
        res.lambda_hat = 0.0;  // no noise to regularize against
    } else {
        const HyperPrior hp = kfold_cv(res.ensemble, cfg.K, cfg.M_train, L, res.sigma2_hat,
                                       derive_seed(trial_seed, 0x4356ULL), op);
        res.lambda_hat = hp.lambda_hat;
        res.cv_trace = hp.trace;
    }

    bool need_mask = false;
    for (PosteriorVariant v : cfg.variants)
        if (is_masked(v)) need_mask = true;
    if (need_mask) {
        JointSparsityOptions jopts;
        jopts.approx = res.noiseless ? SparsityApprox::DirectInverse : cfg.approx;
        jopts.shrinkage_sigmas = cfg.shrinkage;
        jopts.sigma2 = res.sigma2_hat;
        res.profiles = joint_sparsity_profiles(res.ensemble, op, L, jopts);
        const Vec v = spatial_variance(res.profiles);
        res.mask = threshold_mask(v, cfg.eps, cfg.effective_tau());
    }

    const CVec y_bar = res.ensemble.mean_observation();
    for (std::size_t vi = 0; vi < cfg.variants.size(); ++vi) {
        const PosteriorVariant variant = cfg.variants[vi];
        VariantOutcome out;
        out.variant = variant;
        try {
            const PosteriorSpec spec =
                make_posterior(variant, res.lambda_hat, res.sigma2_hat, op, y_bar, L,
                               is_masked(variant) ? res.mask : std::nullopt);
            out.x_init = default_initial_state(res.ensemble, spec, res.lambda_hat);

            ProposalConfig prop;
            prop.mode = cfg.mode;
            prop.adapt = cfg.adapt;
            prop.adapt_interval = cfg.adapt_interval;
            prop.adapt_factor = cfg.adapt_factor;
            prop.sigma_q = cfg.sigma_q > 0.0 ? cfg.sigma_q : default_sigma_q(out.x_init);

            Chain chain = mh_sample(spec, out.x_init, cfg.iterations, cfg.effective_burn_in(),
                                    prop, derive_seed(trial_seed, 0x4d43ULL,
                                                      static_cast<std::uint64_t>(variant)));
            out.mean = posterior_mean(chain);
            const CredInterval band = credibility_band(chain, cfg.eta);
            out.lower = band.lower;
            out.upper = band.upper;
            out.mean_width = band.mean_width();
            out.rel_error = relative_error(out.mean, res.x_true);
            out.probe_errors.reserve(cfg.probes.size());
            const Vec pe = pointwise_abs_error(out.mean, res.x_true, cfg.probes);
            for (Eigen::Index i = 0; i < pe.size(); ++i) out.probe_errors.push_back(pe[i]);
            int inside = 0;
            for (int i = 0; i < cfg.n; ++i)
                if (out.x_init[i] >= out.lower[i] && out.x_init[i] <= out.upper[i]) ++inside;
            out.anchor_fraction = static_cast<double>(inside) / cfg.n;
            out.acceptance = chain.acceptance_ratio();
            out.final_sigma_q = chain.final_sigma_q;
            if (keep_chains) out.chain = std::move(chain);
        } catch (const std::exception& e) {
            out.failed = true;
            out.message = e.what();
        }
        res.variants.push_back(std::move(out));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Shared serialization helpers
// ---------------------------------------------------------------------------

inline ordered_json config_to_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["signal"] = {{"kind", signal_kind_name(cfg.signal_kind)},
                   {"n", cfg.n},
                   {"lo", cfg.lo},
                   {"hi", cfg.hi},
                   {"support", cfg.support},
                   {"amplitude", cfg.amplitude}};
    j["measurements"] = {{"J", cfg.J},
                         {"sigma", cfg.sigma},
                         {"seed", cfg.seed},
                         {"operator", operator_kind_name(cfg.op)},
                         {"trials", cfg.trials}};
    j["transform"] = {{"order", cfg.order}, {"periodic", cfg.periodic}};
    ordered_json variants = ordered_json::array();
    for (PosteriorVariant v : cfg.variants) variants.push_back(variant_name(v));
    j["prior"] = {{"variants", variants},
                  {"tau", cfg.effective_tau()},
                  {"eps", cfg.eps},
                  {"shrinkage", cfg.shrinkage},
                  {"profile",
                   cfg.approx == SparsityApprox::RegularizedMap ? "denoised" : "direct"}};
    j["cv"] = {{"K", cfg.K}, {"M", cfg.M_train}, {"lambda", cfg.lambda_override}};
    j["mcmc"] = {{"iterations", cfg.iterations},
                 {"burn_in", cfg.effective_burn_in()},
                 {"sigma_q", cfg.sigma_q},
                 {"mode", proposal_mode_name(cfg.mode)},
                 {"adapt", cfg.adapt},
                 {"adapt_interval", cfg.adapt_interval},
                 {"adapt_factor", cfg.adapt_factor}};
    j["output"] = {{"probes", cfg.probes}, {"eta", cfg.eta}, {"chains", cfg.write_chains}};
    return j;
}

inline void write_signal_csv(const std::filesystem::path& path, const Grid& grid,
                             const Vec& x_true) {
    Mat data(grid.n, 3);
    for (int i = 0; i < grid.n; ++i) {
        data(i, 0) = i;
        data(i, 1) = grid.point(i);
        data(i, 2) = x_true[i];
    }
    write_csv(path, {"i", "s", "x"}, data);
}

inline void write_cv_trace_csv(const std::filesystem::path& path,
                               const std::vector<CvRecord>& trace) {
    Mat data(static_cast<Eigen::Index>(trace.size()), 4);
    for (std::size_t r = 0; r < trace.size(); ++r) {
        data(static_cast<Eigen::Index>(r), 0) = trace[r].trial;
        data(static_cast<Eigen::Index>(r), 1) = trace[r].column;
        data(static_cast<Eigen::Index>(r), 2) = trace[r].lambda;
        data(static_cast<Eigen::Index>(r), 3) = trace[r].score;
    }
    write_csv(path, {"trial", "column", "lambda", "score"}, data);
}

inline void write_mask_csvs(const std::filesystem::path& dir, const TrialResult& trial,
                            std::vector<std::string>& files) {
    const int rows = static_cast<int>(trial.profiles.rows());
    std::vector<std::string> pheader{"i"};
    for (int j = 0; j < trial.ensemble.J(); ++j) pheader.push_back("p" + std::to_string(j));
    Mat pdata(rows, 1 + trial.profiles.cols());
    for (int i = 0; i < rows; ++i) {
        pdata(i, 0) = i;
        pdata.row(i).tail(trial.profiles.cols()) = trial.profiles.row(i);
    }
    write_csv(dir / "profiles.csv", pheader, pdata);
    files.push_back("profiles.csv");

    const SupportMask& sm = *trial.mask;
    Mat mdata(rows, 4);
    for (int i = 0; i < rows; ++i) {
        mdata(i, 0) = i;
        mdata(i, 1) = sm.variance[i];
        mdata(i, 2) = sm.weights[i];
        mdata(i, 3) = sm.mask[i];
    }
    write_csv(dir / "mask.csv", {"i", "variance", "weight", "mask"}, mdata);
    files.push_back("mask.csv");
}

// Per-variant artifacts for a kept chain: reconstruction table, chain
// metadata (and optionally full states), plus diagnostic series.  Returns
// JSON notes about anything skipped.
inline ordered_json write_variant_artifacts(const std::filesystem::path& dir,
                                            const ExperimentConfig& cfg, const Grid& grid,
                                            const TrialResult& trial,
                                            const VariantOutcome& out,
                                            std::vector<std::string>& files, bool svg) {
    ordered_json notes = ordered_json::object();
    const std::string vn = variant_name(out.variant);

    Mat recon(cfg.n, 7);
    for (int i = 0; i < cfg.n; ++i) {
        recon(i, 0) = i;
        recon(i, 1) = grid.point(i);
        recon(i, 2) = trial.x_true[i];
        recon(i, 3) = out.x_init[i];
        recon(i, 4) = out.mean[i];
        recon(i, 5) = out.lower[i];
        recon(i, 6) = out.upper[i];
    }
    write_csv(dir / ("recon_" + vn + ".csv"),
              {"i", "s", "x_true", "x_init", "mean", "lower", "upper"}, recon);
    files.push_back("recon_" + vn + ".csv");

    write_chain_meta(dir / ("chain_" + vn + "_meta.json"), out.chain);
    files.push_back("chain_" + vn + "_meta.json");
    if (cfg.write_chains) {
        write_chain_states(dir / ("chain_" + vn + ".csv"), out.chain);
        files.push_back("chain_" + vn + ".csv");
    }

    // Cumulative acceptance ratio, one row per iteration.
    const Vec acc = acceptance_ratio_series(out.chain);
    Mat acc_data(acc.size(), 2);
    for (Eigen::Index i = 0; i < acc.size(); ++i) {
        acc_data(i, 0) = static_cast<double>(i);
        acc_data(i, 1) = acc[i];
    }
    write_csv(dir / ("diag_" + vn + "_acceptance.csv"), {"iteration", "ratio"}, acc_data);
    files.push_back("diag_" + vn + "_acceptance.csv");

    // Autocorrelation of the retained samples at each probe component.  A
    // degenerate (constant) series has no autocorrelation; it is skipped and
    // noted rather than faked.
    const int kept = out.chain.iterations() - out.chain.burn_in;
    const int max_lag = std::min(100, kept - 1);
    if (max_lag >= 1) {
        std::vector<std::string> aheader{"lag"};
        std::vector<Vec> acfs;
        std::vector<int> acf_probes;
        for (int p : cfg.probes) {
            std::vector<double> samples(static_cast<std::size_t>(kept));
            for (int t = 0; t < kept; ++t)
                samples[static_cast<std::size_t>(t)] =
                    out.chain.states(p, out.chain.burn_in + t);
            try {
                acfs.push_back(acf(samples, max_lag));
                acf_probes.push_back(p);
                aheader.push_back("x" + std::to_string(p));
            } catch (const SolverError&) {
                notes["acf_skipped_x" + std::to_string(p)] = "constant retained series";
            }
        }
        if (!acfs.empty()) {
            Mat adata(max_lag + 1, static_cast<Eigen::Index>(acfs.size()) + 1);
            for (int lag = 0; lag <= max_lag; ++lag) {
                adata(lag, 0) = lag;
                for (std::size_t c = 0; c < acfs.size(); ++c)
                    adata(lag, static_cast<Eigen::Index>(c) + 1) = acfs[c][lag];
            }
            write_csv(dir / ("diag_" + vn + "_acf.csv"), aheader, adata);
            files.push_back("diag_" + vn + "_acf.csv");
        }
    }

    // Marginal histograms at the probe components.
    for (int p : cfg.probes) {
        std::vector<double> samples(static_cast<std::size_t>(kept));
        for (int t = 0; t < kept; ++t)
            samples[static_cast<std::size_t>(t)] = out.chain.states(p, out.chain.burn_in + t);
        const Histogram h = histogram(samples);
        Mat hdata(h.counts.size(), 3);
        for (Eigen::Index b = 0; b < h.counts.size(); ++b) {
            hdata(b, 0) = h.edges[b];
            hdata(b, 1) = h.edges[b + 1];
            hdata(b, 2) = h.counts[b];
        }
        const std::string name = "diag_" + vn + "_hist_x" + std::to_string(p) + ".csv";
        write_csv(dir / name, {"lo", "hi", "count"}, hdata);
        files.push_back(name);
    }

    if (svg) {
        Vec s(cfg.n);
        for (int i = 0; i < cfg.n; ++i) s[i] = grid.point(i);
        SvgPlot plot("posterior mean, " + vn, "s", "x");
        plot.add_band("credibility band", s, out.lower, out.upper);
        plot.add_line("truth", s, trial.x_true);
        plot.add_line("posterior mean", s, out.mean);
        plot.save(dir / ("recon_" + vn + ".svg"));
        files.push_back("recon_" + vn + ".svg");

        SvgPlot tplot("chain trace at x" + std::to_string(cfg.probes.front()) + ", " + vn,
                      "iteration", "value");
        tplot.add_line("trace",
                       out.chain.states.row(cfg.probes.front()).transpose().eval());
        tplot.add_line("cumulative acceptance", acc);
        tplot.save(dir / ("trace_" + vn + ".svg"));
        files.push_back("trace_" + vn + ".svg");
    }
    return notes;
}

inline ordered_json variant_summary_json(const VariantOutcome& out,
                                         const ExperimentConfig& cfg) {
    ordered_json v;
    v["variant"] = variant_name(out.variant);
    v["failed"] = out.failed;
    if (out.failed) {
        v["message"] = out.message;
        return v;
    }
    v["acceptance_ratio"] = out.acceptance;
    v["final_sigma_q"] = out.final_sigma_q;
    v["relative_error"] = out.rel_error;
    v["mean_credibility_width"] = out.mean_width;
    ordered_json probes = ordered_json::object();
    for (std::size_t i = 0; i < cfg.probes.size(); ++i)
        probes["x" + std::to_string(cfg.probes[i])] = out.probe_errors[i];
    v["probe_abs_error"] = probes;
    v["anchor_fraction"] = out.anchor_fraction;
    if (out.anchor_fraction < 0.9)
        v["warning"] = "initial state lies outside the credibility band on more than 10% "
                       "of components";
    return v;
}

// ---------------------------------------------------------------------------
// recover: one noise level, one trial, full artifact set
// ---------------------------------------------------------------------------

inline RunReport run_recover(const ExperimentConfig& cfg, const RunOptions& opts) {
    if (cfg.sigma.size() != 1)
        throw ConfigError("recover expects exactly one noise level; use sweep for lists");
    const double sigma = cfg.sigma[0];
    std::filesystem::create_directories(opts.out_dir);
    const Grid grid{cfg.n, cfg.lo, cfg.hi};

    TrialResult trial = run_trial(cfg, sigma, 0, 0, /*keep_chains=*/true);

    RunReport report;
    write_signal_csv(opts.out_dir / "signal_true.csv", grid, trial.x_true);
    report.files.push_back("signal_true.csv");
    write_ensemble(opts.out_dir / "ensemble.csv", opts.out_dir / "ensemble_meta.json",
                   trial.ensemble);
    report.files.push_back("ensemble.csv");
    report.files.push_back("ensemble_meta.json");
    if (!trial.cv_trace.empty()) {
        write_cv_trace_csv(opts.out_dir / "cv_trace.csv", trial.cv_trace);
        report.files.push_back("cv_trace.csv");
    }
    if (trial.mask) write_mask_csvs(opts.out_dir, trial, report.files);

    ordered_json summary;
    summary["command"] = "recover";
    summary["config"] = config_to_json(cfg);
    summary["sigma"] = sigma;
    summary["noiseless"] = trial.noiseless;
    summary["sigma2_hat"] = trial.sigma2_hat;
    summary["lambda_hat"] = trial.lambda_hat;
    if (trial.mask) summary["mask_ones"] = trial.mask->count_ones();

    bool any_failed = false;
    ordered_json vlist = ordered_json::array();
    for (const VariantOutcome& out : trial.variants) {
        ordered_json v = variant_summary_json(out, cfg);
        if (out.failed) {
            any_failed = true;
        } else {
            const ordered_json notes = write_variant_artifacts(opts.out_dir, cfg, grid, trial,
                                                               out, report.files, opts.svg);
            for (auto it = notes.begin(); it != notes.end(); ++it) v[it.key()] = it.value();
        }
        vlist.push_back(std::move(v));
    }
    summary["variants"] = vlist;
    summary["all_variants_completed"] = !any_failed;

    write_json(opts.out_dir / "summary.json", summary);
    report.files.push_back("summary.json");
    write_manifest(opts.out_dir, report.files);
    report.files.push_back("manifest.json");
    report.summary = std::move(summary);
    report.exit_code = any_failed ? 3 : 0;
    return report;
}

// ---------------------------------------------------------------------------
// sweep: noise levels x trials x variants, aggregated
// ---------------------------------------------------------------------------

inline RunReport run_sweep(const ExperimentConfig& cfg, const RunOptions& opts) {
    std::filesystem::create_directories(opts.out_dir);
    std::vector<double> sigmas = cfg.sigma;
    std::sort(sigmas.begin(), sigmas.end(), std::greater<double>());

    const int S = static_cast<int>(sigmas.size());
    const int T = cfg.trials;
    std::vector<TrialResult> results(static_cast<std::size_t>(S) * T);
    parallel_run(S * T, opts.threads, [&](int task) {
        const int si = task / T;
        const int t = task % T;
        results[static_cast<std::size_t>(task)] =
            run_trial(cfg, sigmas[static_cast<std::size_t>(si)], si, t, /*keep_chains=*/false);
    });

    RunReport report;
    const std::size_t P = cfg.probes.size();

    // Per-trial noise/regularization estimates.
    Mat est(static_cast<Eigen::Index>(results.size()), 4);
    for (std::size_t r = 0; r < results.size(); ++r) {
        est(static_cast<Eigen::Index>(r), 0) = results[r].sigma;
        est(static_cast<Eigen::Index>(r), 1) = results[r].trial;
        est(static_cast<Eigen::Index>(r), 2) = results[r].sigma2_hat;
        est(static_cast<Eigen::Index>(r), 3) = results[r].lambda_hat;
    }
    write_csv(opts.out_dir / "sweep_estimates.csv", {"sigma", "trial", "sigma2_hat", "lambda_hat"},
              est);
    report.files.push_back("sweep_estimates.csv");

    bool any_failed = false;
    ordered_json failures = ordered_json::array();
    ordered_json aggregate_summary = ordered_json::object();

    for (std::size_t vi = 0; vi < cfg.variants.size(); ++vi) {
        const std::string vn = variant_name(cfg.variants[vi]);

        std::vector<std::string> header{"sigma", "trial", "rel_error", "mean_width"};
        for (int p : cfg.probes) header.push_back("err_x" + std::to_string(p));
        Mat rows(static_cast<Eigen::Index>(results.size()), static_cast<Eigen::Index>(4 + P));
        Eigen::Index nrows = 0;
        for (const TrialResult& tr : results) {
            const VariantOutcome& out = tr.variants[vi];
            if (out.failed) {
                any_failed = true;
                ordered_json f;
                f["sigma"] = tr.sigma;
                f["trial"] = tr.trial;
                f["variant"] = vn;
                f["message"] = out.message;
                failures.push_back(f);
                continue;
            }
            rows(nrows, 0) = tr.sigma;
            rows(nrows, 1) = tr.trial;
            rows(nrows, 2) = out.rel_error;
            rows(nrows, 3) = out.mean_width;
            for (std::size_t p = 0; p < P; ++p)
                rows(nrows, static_cast<Eigen::Index>(4 + p)) = out.probe_errors[p];
            ++nrows;
        }
        write_csv(opts.out_dir / ("sweep_" + vn + ".csv"), header, rows.topRows(nrows));
        report.files.push_back("sweep_" + vn + ".csv");

        // Aggregate across trials per noise level: mean and population std.
        std::vector<std::string> aheader{"sigma"};
        for (const char* stat : {"rel_error", "mean_width"}) {
            aheader.push_back(std::string(stat) + "_mean");
            aheader.push_back(std::string(stat) + "_std");
        }
        for (int p : cfg.probes) {
            aheader.push_back("err_x" + std::to_string(p) + "_mean");
            aheader.push_back("err_x" + std::to_string(p) + "_std");
        }
        Mat agg(S, static_cast<Eigen::Index>(1 + 2 * (2 + P)));
        ordered_json vagg = ordered_json::array();
        for (int si = 0; si < S; ++si) {
            std::vector<std::vector<double>> cols(2 + P);
            for (int t = 0; t < T; ++t) {
                const VariantOutcome& out =
                    results[static_cast<std::size_t>(si) * T + t].variants[vi];
                if (out.failed) continue;
                cols[0].push_back(out.rel_error);
                cols[1].push_back(out.mean_width);
                for (std::size_t p = 0; p < P; ++p) cols[2 + p].push_back(out.probe_errors[p]);
            }
            agg(si, 0) = sigmas[static_cast<std::size_t>(si)];
            for (std::size_t c = 0; c < cols.size(); ++c) {
                double mean = std::numeric_limits<double>::quiet_NaN();
                double sd = std::numeric_limits<double>::quiet_NaN();
                if (!cols[c].empty()) {
                    double sum = 0.0;
                    for (double x : cols[c]) sum += x;
                    mean = sum / static_cast<double>(cols[c].size());
                    double ss = 0.0;
                    for (double x : cols[c]) ss += (x - mean) * (x - mean);
                    sd = std::sqrt(ss / static_cast<double>(cols[c].size()));
                }
                agg(si, static_cast<Eigen::Index>(1 + 2 * c)) = mean;
                agg(si, static_cast<Eigen::Index>(2 + 2 * c)) = sd;
            }
            ordered_json row;
            row["sigma"] = sigmas[static_cast<std::size_t>(si)];
            row["trials_completed"] = cols[0].size();
            row["rel_error_mean"] = agg(si, 1);
            row["mean_width_mean"] = agg(si, 3);
            vagg.push_back(row);
        }
        write_csv(opts.out_dir / ("sweep_" + vn + "_agg.csv"), aheader, agg);
        report.files.push_back("sweep_" + vn + "_agg.csv");
        aggregate_summary[vn] = vagg;
    }

    if (opts.svg) {
        Vec sx(S);
        for (int si = 0; si < S; ++si) sx[si] = sigmas[static_cast<std::size_t>(si)];
        SvgPlot eplot("mean relative error vs noise level", "sigma", "relative error");
        SvgPlot wplot("mean credibility width vs noise level", "sigma", "width");
        for (std::size_t vi = 0; vi < cfg.variants.size(); ++vi) {
            const std::string vn = variant_name(cfg.variants[vi]);
            const CsvTable agg = read_csv(opts.out_dir / ("sweep_" + vn + "_agg.csv"));
            eplot.add_line(vn, sx, agg.data.col(1));
            wplot.add_line(vn, sx, agg.data.col(3));
        }
        eplot.save(opts.out_dir / "sweep_error.svg");
        report.files.push_back("sweep_error.svg");
        wplot.save(opts.out_dir / "sweep_width.svg");
        report.files.push_back("sweep_width.svg");
    }

    ordered_json summary;
    summary["command"] = "sweep";
    summary["config"] = config_to_json(cfg);
    summary["sigma_descending"] = sigmas;
    summary["trials"] = T;
    summary["aggregates"] = aggregate_summary;
    summary["failures"] = failures;
    summary["all_variants_completed"] = !any_failed;
    write_json(opts.out_dir / "sweep_summary.json", summary);
    report.files.push_back("sweep_summary.json");
    write_manifest(opts.out_dir, report.files);
    report.files.push_back("manifest.json");
    report.summary = std::move(summary);
    report.exit_code = any_failed ? 3 : 0;
    return report;
}

// ---------------------------------------------------------------------------
// mask: the five mask-construction panels as data
// ---------------------------------------------------------------------------

inline RunReport run_mask(const ExperimentConfig& cfg, const RunOptions& opts) {
    if (cfg.sigma.size() != 1)
        throw ConfigError("mask expects exactly one noise level");
    const double sigma = cfg.sigma[0];
    std::filesystem::create_directories(opts.out_dir);
    const Grid grid{cfg.n, cfg.lo, cfg.hi};

    const Vec x_true = sample_signal(signal_spec_from_config(cfg), grid);
    const ForwardOperator op(cfg.op, cfg.n);
    const std::uint64_t trial_seed = derive_seed(cfg.seed, 0x5452ULL, 0ULL, 0ULL);
    const MeasurementEnsemble ens = generate_mmv(x_true, cfg.J, sigma, trial_seed, op);
    const double sigma2_raw = cfg.J >= 2 ? estimate_noise_variance(ens.Y) : sigma * sigma;
    const bool noiseless = sigma2_raw < kSigma2Floor;
    const double sigma2_hat = std::max(sigma2_raw, kSigma2Floor);

    const PaTransform pa = build_pa_matrix(cfg.order, grid, cfg.periodic);
    JointSparsityOptions jopts;
    jopts.approx = noiseless ? SparsityApprox::DirectInverse : cfg.approx;
    jopts.shrinkage_sigmas = cfg.shrinkage;
    jopts.sigma2 = sigma2_hat;
    const Mat P = joint_sparsity_profiles(ens, op, pa.matrix, jopts);
    const Vec v = spatial_variance(P);
    const SupportMask sm = threshold_mask(v, cfg.eps, cfg.effective_tau());

    RunReport report;
    write_signal_csv(opts.out_dir / "signal_true.csv", grid, x_true);
    report.files.push_back("signal_true.csv");

    std::vector<std::string> pheader{"i"};
    for (int j = 0; j < ens.J(); ++j) pheader.push_back("p" + std::to_string(j));
    Mat pdata(P.rows(), 1 + P.cols());
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        pdata(i, 0) = static_cast<double>(i);
        pdata.row(i).tail(P.cols()) = P.row(i);
    }
    write_csv(opts.out_dir / "profiles.csv", pheader, pdata);
    report.files.push_back("profiles.csv");

    auto write_panel = [&](const std::string& name, const std::string& col, const Vec& vals) {
        Mat data(vals.size(), 2);
        for (Eigen::Index i = 0; i < vals.size(); ++i) {
            data(i, 0) = static_cast<double>(i);
            data(i, 1) = vals[i];
        }
        write_csv(opts.out_dir / name, {"i", col}, data);
        report.files.push_back(name);
    };
    write_panel("variance.csv", "variance", sm.variance);
    write_panel("weights.csv", "weight", sm.weights);
    write_panel("mask.csv", "mask", sm.mask);

    if (opts.svg) {
        Vec idx(cfg.n);
        for (int i = 0; i < cfg.n; ++i) idx[i] = static_cast<double>(i);
        const double xscale = std::max(1.0, x_true.cwiseAbs().maxCoeff());
        const double vscale = std::max(sm.variance.maxCoeff(), 1e-300);
        SvgPlot plot("support mask construction (series scaled to [0,1])", "i", "scaled value");
        plot.add_line("signal", idx, (x_true / xscale).eval());
        plot.add_line("variance", idx, (sm.variance / vscale).eval());
        plot.add_line("mask", idx, sm.mask);
        plot.save(opts.out_dir / "mask.svg");
        report.files.push_back("mask.svg");
    }

    ordered_json summary;
    summary["command"] = "mask";
    summary["config"] = config_to_json(cfg);
    summary["sigma"] = sigma;
    summary["noiseless"] = noiseless;
    summary["sigma2_hat"] = sigma2_hat;
    summary["tau"] = sm.tau;
    summary["eps"] = sm.eps;
    summary["mask_ones"] = sm.count_ones();
    summary["mask_zeros"] = cfg.n - sm.count_ones();
    write_json(opts.out_dir / "mask_summary.json", summary);
    report.files.push_back("mask_summary.json");
    write_manifest(opts.out_dir, report.files);
    report.files.push_back("manifest.json");
    report.summary = std::move(summary);
    report.exit_code = 0;
    return report;
}

// ---------------------------------------------------------------------------
// cv: cross-validation trace for one ensemble
// ---------------------------------------------------------------------------

inline RunReport run_cv(const ExperimentConfig& cfg, const RunOptions& opts) {
    if (cfg.sigma.size() != 1)
        throw ConfigError("cv expects exactly one noise level");
    const double sigma = cfg.sigma[0];
    std::filesystem::create_directories(opts.out_dir);
    const Grid grid{cfg.n, cfg.lo, cfg.hi};

    const Vec x_true = sample_signal(signal_spec_from_config(cfg), grid);
    const ForwardOperator op(cfg.op, cfg.n);
    const std::uint64_t trial_seed = derive_seed(cfg.seed, 0x5452ULL, 0ULL, 0ULL);
    const MeasurementEnsemble ens = generate_mmv(x_true, cfg.J, sigma, trial_seed, op);
    const double sigma2_raw = cfg.J >= 2 ? estimate_noise_variance(ens.Y) : sigma * sigma;
    if (sigma2_raw < kSigma2Floor)
        throw ConfigError("cv needs noisy measurements; the estimated noise variance is zero");
    const PaTransform pa = build_pa_matrix(cfg.order, grid, cfg.periodic);

    const HyperPrior hp = kfold_cv(ens, cfg.K, cfg.M_train, pa.matrix, sigma2_raw,
                                   derive_seed(trial_seed, 0x4356ULL), op);

    RunReport report;
    write_cv_trace_csv(opts.out_dir / "cv_trace.csv", hp.trace);
    report.files.push_back("cv_trace.csv");

    if (opts.svg) {
        Vec lam(static_cast<Eigen::Index>(hp.trace.size()));
        Vec score(static_cast<Eigen::Index>(hp.trace.size()));
        std::vector<std::size_t> order(hp.trace.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return hp.trace[a].lambda < hp.trace[b].lambda;
        });
        for (std::size_t i = 0; i < order.size(); ++i) {
            lam[static_cast<Eigen::Index>(i)] = hp.trace[order[i]].lambda;
            score[static_cast<Eigen::Index>(i)] = hp.trace[order[i]].score;
        }
        SvgPlot plot("cross-validation score by regularization strength", "lambda", "score");
        plot.add_line("score", lam, score);
        plot.save(opts.out_dir / "cv_scores.svg");
        report.files.push_back("cv_scores.svg");
    }

    ordered_json summary;
    summary["command"] = "cv";
    summary["config"] = config_to_json(cfg);
    summary["sigma"] = sigma;
    summary["sigma2_hat"] = sigma2_raw;
    summary["lambda_hat"] = hp.lambda_hat;
    summary["candidates"] = hp.trace.size();
    write_json(opts.out_dir / "cv_summary.json", summary);
    report.files.push_back("cv_summary.json");
    write_manifest(opts.out_dir, report.files);
    report.files.push_back("manifest.json");
    report.summary = std::move(summary);
    report.exit_code = 0;
    return report;
}

// ---------------------------------------------------------------------------
// diagnose: post-hoc diagnostics for a stored chain
// ---------------------------------------------------------------------------

inline RunReport run_diagnose(const std::filesystem::path& chain_csv,
                              const std::filesystem::path& chain_meta, double eta,
                              const RunOptions& opts) {
    std::filesystem::create_directories(opts.out_dir);
    const CsvTable table = read_csv(chain_csv);
    require(table.data.rows() >= 2 && table.data.cols() >= 1,
            "diagnose: chain must have at least two iterations");
    const ordered_json meta = read_json(chain_meta);

    Chain chain;
    chain.states = table.data.transpose();
    chain.burn_in = meta.at("burn_in").get<int>();
    require(chain.burn_in >= 0 && chain.burn_in < chain.iterations(),
            "diagnose: burn-in outside the stored iteration range");

    const int n = chain.n();
    const CredInterval band = credibility_band(chain, eta);
    const Vec mean = posterior_mean(chain);

    RunReport report;
    Mat comp(n, 4);
    for (int i = 0; i < n; ++i) {
        comp(i, 0) = i;
        comp(i, 1) = mean[i];
        comp(i, 2) = band.lower[i];
        comp(i, 3) = band.upper[i];
    }
    write_csv(opts.out_dir / "diagnose_components.csv", {"i", "mean", "lower", "upper"}, comp);
    report.files.push_back("diagnose_components.csv");

    const int kept = chain.iterations() - chain.burn_in;
    const int max_lag = std::min(100, kept - 1);
    ordered_json notes = ordered_json::object();
    if (max_lag >= 1) {
        std::vector<std::string> header{"lag"};
        std::vector<Vec> acfs;
        for (int i = 0; i < n; ++i) {
            std::vector<double> samples(static_cast<std::size_t>(kept));
            for (int t = 0; t < kept; ++t)
                samples[static_cast<std::size_t>(t)] = chain.states(i, chain.burn_in + t);
            try {
                acfs.push_back(acf(samples, max_lag));
                header.push_back("x" + std::to_string(i));
            } catch (const SolverError&) {
                notes["acf_skipped_x" + std::to_string(i)] = "constant retained series";
            }
        }
        if (!acfs.empty()) {
            Mat adata(max_lag + 1, static_cast<Eigen::Index>(acfs.size()) + 1);
            for (int lag = 0; lag <= max_lag; ++lag) {
                adata(lag, 0) = lag;
                for (std::size_t c = 0; c < acfs.size(); ++c)
                    adata(lag, static_cast<Eigen::Index>(c) + 1) = acfs[c][lag];
            }
            write_csv(opts.out_dir / "diagnose_acf.csv", header, adata);
            report.files.push_back("diagnose_acf.csv");
        }
    }

    if (opts.svg) {
        SvgPlot plot("posterior mean with credibility band", "component", "value");
        Vec idx(n);
        for (int i = 0; i < n; ++i) idx[i] = static_cast<double>(i);
        plot.add_band("credibility band", idx, band.lower, band.upper);
        plot.add_line("mean", idx, mean);
        plot.save(opts.out_dir / "diagnose_components.svg");
        report.files.push_back("diagnose_components.svg");
    }

    ordered_json summary;
    summary["command"] = "diagnose";
    summary["chain_csv"] = chain_csv.filename().string();
    summary["iterations"] = chain.iterations();
    summary["burn_in"] = chain.burn_in;
    summary["components"] = n;
    summary["eta"] = eta;
    summary["chain_meta"] = meta;
    if (!notes.empty()) summary["notes"] = notes;
    write_json(opts.out_dir / "diagnose_summary.json", summary);
    report.files.push_back("diagnose_summary.json");
    write_manifest(opts.out_dir, report.files);
    report.files.push_back("manifest.json");
    report.summary = std::move(summary);
    report.exit_code = 0;
    return report;
}

}  // namespace sisp
