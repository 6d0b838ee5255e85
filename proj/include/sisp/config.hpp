#pragma once

// Experiment configuration: a small INI dialect parsed into a validated
// ExperimentConfig.  The dialect supports [section] headers, key = value
// pairs, blank lines, and comments starting with '#' or ';'.  Values may be
// scalars or comma-separated lists.  Unknown sections or keys are errors so
// that typos fail loudly instead of silently running defaults.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sisp/common.hpp"
#include "sisp/fourier.hpp"
#include "sisp/mcmc.hpp"
#include "sisp/posterior.hpp"
#include "sisp/signals.hpp"
#include "sisp/support.hpp"

namespace sisp {

// ---------------------------------------------------------------------------
// INI parsing
// ---------------------------------------------------------------------------

using IniData = std::map<std::string, std::map<std::string, std::string>>;

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline IniData parse_ini(const std::string& text) {
    IniData data;
    std::string section;
    std::size_t start = 0;
    int lineno = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        std::string line = text.substr(start, end == std::string::npos ? std::string::npos
                                                                       : end - start);
        start = end == std::string::npos ? text.size() + 1 : end + 1;
        ++lineno;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            data[section];  // register even if empty
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any [section]");
        data[section][key] = value;  // last assignment wins
    }
    return data;
}

// ---------------------------------------------------------------------------
// Value parsing helpers
// ---------------------------------------------------------------------------

inline double parse_double_value(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(what + ": not a number: '" + s + "'");
    }
}

inline long long parse_int_value(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(what + ": not an integer: '" + s + "'");
    }
}

inline bool parse_bool_value(const std::string& s, const std::string& what) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(what + ": not a boolean: '" + s + "'");
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cur = trim(cur);
    if (!cur.empty() || !out.empty()) out.push_back(cur);
    for (const auto& item : out)
        if (item.empty()) throw ConfigError("empty element in list: '" + s + "'");
    return out;
}

inline std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(parse_double_value(item, what));
    return out;
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
    std::vector<int> out;
    for (const auto& item : split_list(s))
        out.push_back(static_cast<int>(parse_int_value(item, what)));
    return out;
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    // [signal]
    SignalKind signal_kind = SignalKind::PiecewiseExample;
    std::vector<int> support;    // spikes: 1-based indices
    double amplitude = 1.0;      // spikes: common height
    std::vector<double> values;  // custom: explicit samples
    int n = 80;
    double lo = 0.0;
    double hi = 1.0;

    // [measurements]
    int J = 20;
    std::vector<double> sigma{5.5};  // one entry per sweep level
    std::uint64_t seed = 1;
    OperatorKind op = OperatorKind::UnitaryDft;
    int trials = 1;

    // [transform]
    int order = 3;
    bool periodic = true;

    // [prior]
    std::vector<PosteriorVariant> variants{
        PosteriorVariant::LaplaceL1, PosteriorVariant::MaskedL1,
        PosteriorVariant::PlainL2, PosteriorVariant::MaskedL2};
    double tau = 0.0;  // <= 0: use 1/n
    double eps = 1e-8;
    double shrinkage = 1.0;
    SparsityApprox approx = SparsityApprox::RegularizedMap;

    // [cv]
    int K = 20;
    int M_train = 10;
    double lambda_override = -1.0;  // >= 0 fixes lambda_hat, skipping CV

    // [mcmc]
    int iterations = 10000;
    int burn_in = -1;  // < 0: iterations / 2
    double sigma_q = 0.0;  // <= 0: data-derived default
    ProposalMode mode = ProposalMode::ComponentwiseSweep;
    bool adapt = true;
    int adapt_interval = 500;
    double adapt_factor = 1.5;

    // [output]
    std::string out_dir = "out";
    std::vector<int> probes{7, 19, 35, 59};  // 0-based grid indices
    double eta = 0.05;
    bool write_chains = false;  // full per-iteration chain CSVs are large; opt in

    double effective_tau() const { return tau > 0.0 ? tau : 1.0 / static_cast<double>(n); }
    int effective_burn_in() const { return burn_in >= 0 ? burn_in : iterations / 2; }
};

inline SignalKind signal_kind_from_name(const std::string& s) {
    if (s == "piecewise") return SignalKind::PiecewiseExample;
    if (s == "spikes") return SignalKind::SparseSpikes;
    if (s == "custom") return SignalKind::Custom;
    throw ConfigError("unknown signal kind: '" + s + "'");
}

inline std::string signal_kind_name(SignalKind k) {
    switch (k) {
        case SignalKind::PiecewiseExample: return "piecewise";
        case SignalKind::SparseSpikes: return "spikes";
        case SignalKind::Custom: return "custom";
    }
    return "unknown";
}

inline void validate_config(const ExperimentConfig& cfg) {
    auto check = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    check(cfg.n >= 2, "signal.n must be at least 2");
    check(cfg.hi > cfg.lo, "signal interval must have hi > lo");
    if (cfg.signal_kind == SignalKind::SparseSpikes) {
        check(!cfg.support.empty(), "spikes signal needs a nonempty support list");
        for (int idx : cfg.support)
            check(idx >= 1 && idx <= cfg.n, "spike index out of [1, n]");
    }
    if (cfg.signal_kind == SignalKind::Custom)
        check(static_cast<int>(cfg.values.size()) == cfg.n,
              "custom signal needs exactly n values");
    check(cfg.J >= 1, "measurements.J must be at least 1");
    check(!cfg.sigma.empty(), "measurements.sigma must list at least one level");
    for (double s : cfg.sigma) check(s >= 0.0, "noise level must be nonnegative");
    check(cfg.trials >= 1, "measurements.trials must be at least 1");
    check(cfg.order >= 1 && cfg.order <= cfg.n - 1, "transform.order out of [1, n-1]");
    check(!cfg.variants.empty(), "prior.variants must list at least one variant");
    check(cfg.eps > 0.0, "prior.eps must be positive");
    check(cfg.shrinkage > 0.0, "prior.shrinkage must be positive");
    check(cfg.K >= 1, "cv.K must be at least 1");
    check(cfg.M_train >= 1, "cv.M must be at least 1");
    if (cfg.lambda_override < 0.0)
        check(cfg.M_train < cfg.J, "cv.M must be smaller than measurements.J");
    check(cfg.iterations >= 2, "mcmc.iterations must be at least 2");
    check(cfg.effective_burn_in() < cfg.iterations,
          "mcmc.burn_in must be smaller than mcmc.iterations");
    check(cfg.adapt_interval >= 1, "mcmc.adapt_interval must be at least 1");
    check(cfg.adapt_factor > 1.0, "mcmc.adapt_factor must exceed 1");
    check(cfg.eta > 0.0 && cfg.eta < 1.0, "output.eta must lie in (0, 1)");
    for (int p : cfg.probes)
        check(p >= 0 && p < cfg.n, "probe index out of [0, n)");
}

inline ExperimentConfig config_from_ini(const IniData& ini) {
    ExperimentConfig cfg;
    // Track handled keys so anything unrecognized raises an error.
    auto get = [&ini](const std::string& sec, const std::string& key,
                      bool& present) -> std::string {
        auto sit = ini.find(sec);
        if (sit == ini.end()) {
            present = false;
            return "";
        }
        auto kit = sit->second.find(key);
        present = kit != sit->second.end();
        return present ? kit->second : "";
    };
    std::map<std::string, std::vector<std::string>> known = {
        {"signal", {"kind", "n", "support", "amplitude", "values", "lo", "hi"}},
        {"measurements", {"J", "sigma", "seed", "operator", "trials"}},
        {"transform", {"order", "periodic"}},
        {"prior", {"variants", "tau", "eps", "shrinkage", "profile"}},
        {"cv", {"K", "M", "lambda"}},
        {"mcmc", {"iterations", "burn_in", "sigma_q", "mode", "adapt", "adapt_interval",
                  "adapt_factor"}},
        {"output", {"dir", "probes", "eta", "chains"}},
    };
    for (const auto& [sec, keys] : ini) {
        auto kit = known.find(sec);
        if (kit == known.end()) throw ConfigError("unknown section [" + sec + "]");
        for (const auto& [key, value] : keys) {
            (void)value;
            bool found = false;
            for (const auto& k : kit->second)
                if (k == key) found = true;
            if (!found) throw ConfigError("unknown key '" + key + "' in [" + sec + "]");
        }
    }

    bool has = false;
    std::string v;

    v = get("signal", "kind", has);
    if (has) cfg.signal_kind = signal_kind_from_name(v);
    v = get("signal", "n", has);
    if (has) cfg.n = static_cast<int>(parse_int_value(v, "signal.n"));
    v = get("signal", "support", has);
    if (has) cfg.support = parse_int_list(v, "signal.support");
    v = get("signal", "amplitude", has);
    if (has) cfg.amplitude = parse_double_value(v, "signal.amplitude");
    v = get("signal", "values", has);
    if (has) cfg.values = parse_double_list(v, "signal.values");
    v = get("signal", "lo", has);
    if (has) cfg.lo = parse_double_value(v, "signal.lo");
    v = get("signal", "hi", has);
    if (has) cfg.hi = parse_double_value(v, "signal.hi");

    v = get("measurements", "J", has);
    if (has) cfg.J = static_cast<int>(parse_int_value(v, "measurements.J"));
    v = get("measurements", "sigma", has);
    if (has) cfg.sigma = parse_double_list(v, "measurements.sigma");
    v = get("measurements", "seed", has);
    if (has) cfg.seed = static_cast<std::uint64_t>(parse_int_value(v, "measurements.seed"));
    v = get("measurements", "operator", has);
    if (has) cfg.op = operator_kind_from_name(v);
    v = get("measurements", "trials", has);
    if (has) cfg.trials = static_cast<int>(parse_int_value(v, "measurements.trials"));

    v = get("transform", "order", has);
    if (has) cfg.order = static_cast<int>(parse_int_value(v, "transform.order"));
    v = get("transform", "periodic", has);
    if (has) cfg.periodic = parse_bool_value(v, "transform.periodic");

    v = get("prior", "variants", has);
    if (has) {
        cfg.variants.clear();
        for (const auto& name : split_list(v)) cfg.variants.push_back(variant_from_name(name));
    }
    v = get("prior", "tau", has);
    if (has) cfg.tau = parse_double_value(v, "prior.tau");
    v = get("prior", "eps", has);
    if (has) cfg.eps = parse_double_value(v, "prior.eps");
    v = get("prior", "shrinkage", has);
    if (has) cfg.shrinkage = parse_double_value(v, "prior.shrinkage");
    v = get("prior", "profile", has);
    if (has) {
        if (v == "denoised") cfg.approx = SparsityApprox::RegularizedMap;
        else if (v == "direct") cfg.approx = SparsityApprox::DirectInverse;
        else throw ConfigError("prior.profile must be 'denoised' or 'direct'");
    }

    v = get("cv", "K", has);
    if (has) cfg.K = static_cast<int>(parse_int_value(v, "cv.K"));
    v = get("cv", "M", has);
    if (has) cfg.M_train = static_cast<int>(parse_int_value(v, "cv.M"));
    v = get("cv", "lambda", has);
    if (has) cfg.lambda_override = parse_double_value(v, "cv.lambda");

    v = get("mcmc", "iterations", has);
    if (has) cfg.iterations = static_cast<int>(parse_int_value(v, "mcmc.iterations"));
    v = get("mcmc", "burn_in", has);
    if (has) cfg.burn_in = static_cast<int>(parse_int_value(v, "mcmc.burn_in"));
    v = get("mcmc", "sigma_q", has);
    if (has) cfg.sigma_q = parse_double_value(v, "mcmc.sigma_q");
    v = get("mcmc", "mode", has);
    if (has) cfg.mode = proposal_mode_from_name(v);
    v = get("mcmc", "adapt", has);
    if (has) cfg.adapt = parse_bool_value(v, "mcmc.adapt");
    v = get("mcmc", "adapt_interval", has);
    if (has) cfg.adapt_interval = static_cast<int>(parse_int_value(v, "mcmc.adapt_interval"));
    v = get("mcmc", "adapt_factor", has);
    if (has) cfg.adapt_factor = parse_double_value(v, "mcmc.adapt_factor");

    v = get("output", "dir", has);
    if (has) cfg.out_dir = v;
    v = get("output", "probes", has);
    if (has) cfg.probes = parse_int_list(v, "output.probes");
    v = get("output", "eta", has);
    if (has) cfg.eta = parse_double_value(v, "output.eta");
    v = get("output", "chains", has);
    if (has) cfg.write_chains = parse_bool_value(v, "output.chains");

    validate_config(cfg);
    return cfg;
}

inline ExperimentConfig load_config(const std::string& text) {
    return config_from_ini(parse_ini(text));
}

inline SignalSpec signal_spec_from_config(const ExperimentConfig& cfg) {
    switch (cfg.signal_kind) {
        case SignalKind::PiecewiseExample: return piecewise_example();
        case SignalKind::SparseSpikes: return sparse_spikes(cfg.support, cfg.amplitude);
        case SignalKind::Custom: {
            Vec vals(static_cast<Eigen::Index>(cfg.values.size()));
            for (std::size_t i = 0; i < cfg.values.size(); ++i)
                vals[static_cast<Eigen::Index>(i)] = cfg.values[i];
            return custom_signal(std::move(vals));
        }
    }
    throw ConfigError("unknown signal kind");
}

}  // namespace sisp
