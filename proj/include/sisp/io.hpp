#pragma once

// File input/output: CSV tables, JSON sidecars, and a content-hash manifest.
//
// Conventions chosen for reproducibility:
//  * every floating-point number is written with %.17g, which round-trips
//    IEEE doubles exactly through strtod;
//  * JSON objects preserve insertion order (nlohmann ordered_json) and are
//    dumped with a fixed indent, so identical runs produce identical bytes;
//  * no timestamps or machine-specific data are ever written;
//  * the manifest records an FNV-1a 64-bit hash of every artifact so a rerun
//    can be checked for byte-identical output at a glance.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sisp/common.hpp"
#include "sisp/fourier.hpp"
#include "sisp/mcmc.hpp"

namespace sisp {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

// strtod-based parser: unlike std::stod it accepts subnormals instead of
// throwing out_of_range, so %.17g output always reads back.
inline double parse_csv_double(const std::string& s, const std::string& context) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    require(end == begin + s.size() && !s.empty(),
            "parse_csv_double: bad number '" + s + "' in " + context);
    return v;
}

// ---------------------------------------------------------------------------
// Whole-file helpers
// ---------------------------------------------------------------------------

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "write_text_file: cannot open " + path.string());
    os << text;
    require(os.good(), "write_text_file: write failed for " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "read_text_file: cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    Mat data;  // rows x cols, parsed as doubles
};

inline std::string csv_to_string(const std::vector<std::string>& header, const Mat& data) {
    require(header.size() == static_cast<std::size_t>(data.cols()) || data.size() == 0,
            "csv_to_string: header/column mismatch");
    std::ostringstream os;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) os << ',';
        os << header[c];
    }
    os << '\n';
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.cols(); ++c) {
            if (c) os << ',';
            os << format_double(data(r, c));
        }
        os << '\n';
    }
    return os.str();
}

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const Mat& data) {
    write_text_file(path, csv_to_string(header, data));
}

inline std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::istringstream is(read_text_file(path));
    CsvTable table;
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), "read_csv: empty file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.header = split_line(line, ',');
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line, ',');
        require(cells.size() == table.header.size(),
                "read_csv: ragged row in " + path.string());
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& cell : cells) row.push_back(parse_csv_double(cell, path.string()));
        rows.push_back(std::move(row));
    }
    table.data.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            table.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return table;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline void write_json(const std::filesystem::path& path, const ordered_json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

inline ordered_json read_json(const std::filesystem::path& path) {
    return ordered_json::parse(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Measurement ensembles (long-format CSV + JSON sidecar)
// ---------------------------------------------------------------------------

inline void write_ensemble(const std::filesystem::path& csv_path,
                           const std::filesystem::path& meta_path,
                           const MeasurementEnsemble& ens) {
    const int n = ens.n();
    const int J = ens.J();
    Mat data(static_cast<Eigen::Index>(n) * J, 4);
    Eigen::Index r = 0;
    for (int j = 0; j < J; ++j)
        for (int i = 0; i < n; ++i, ++r) {
            data(r, 0) = i;
            data(r, 1) = j;
            data(r, 2) = ens.Y(i, j).real();
            data(r, 3) = ens.Y(i, j).imag();
        }
    write_csv(csv_path, {"row", "measurement", "re", "im"}, data);
    ordered_json meta;
    meta["n"] = n;
    meta["J"] = J;
    meta["sigma_true"] = ens.sigma_true;
    meta["seed"] = ens.seed;
    meta["operator"] = operator_kind_name(ens.op_kind);
    write_json(meta_path, meta);
}

inline MeasurementEnsemble read_ensemble(const std::filesystem::path& csv_path,
                                         const std::filesystem::path& meta_path) {
    const ordered_json meta = read_json(meta_path);
    MeasurementEnsemble ens;
    const int n = meta.at("n").get<int>();
    const int J = meta.at("J").get<int>();
    require(n > 0 && J > 0, "read_ensemble: bad dimensions in " + meta_path.string());
    ens.sigma_true = meta.at("sigma_true").get<double>();
    ens.seed = meta.at("seed").get<std::uint64_t>();
    ens.op_kind = operator_kind_from_name(meta.at("operator").get<std::string>());
    ens.Y = CMat::Zero(n, J);
    const CsvTable table = read_csv(csv_path);
    require(table.data.rows() == static_cast<Eigen::Index>(n) * J,
            "read_ensemble: row count mismatch in " + csv_path.string());
    for (Eigen::Index r = 0; r < table.data.rows(); ++r) {
        const int i = static_cast<int>(table.data(r, 0));
        const int j = static_cast<int>(table.data(r, 1));
        require(i >= 0 && i < n && j >= 0 && j < J,
                "read_ensemble: index out of range in " + csv_path.string());
        ens.Y(i, j) = Cplx(table.data(r, 2), table.data(r, 3));
    }
    return ens;
}

// ---------------------------------------------------------------------------
// Chains (CSV of states + JSON metadata)
// ---------------------------------------------------------------------------

inline void write_chain_states(const std::filesystem::path& csv_path, const Chain& chain) {
    std::vector<std::string> header;
    header.reserve(static_cast<std::size_t>(chain.n()));
    for (int i = 0; i < chain.n(); ++i) header.push_back("x" + std::to_string(i));
    // Rows are iterations (oldest first), columns are signal components.
    write_csv(csv_path, header, chain.states.transpose());
}

inline void write_chain_meta(const std::filesystem::path& meta_path, const Chain& chain) {
    ordered_json meta;
    meta["iterations"] = chain.iterations();
    meta["burn_in"] = chain.burn_in;
    meta["components"] = chain.n();
    meta["seed"] = chain.seed;
    meta["proposal_mode"] = proposal_mode_name(chain.mode);
    meta["initial_sigma_q"] = chain.initial_sigma_q;
    meta["final_sigma_q"] = chain.final_sigma_q;
    meta["proposals_per_iteration"] = chain.proposals_per_iteration;
    meta["accepted_total"] = chain.accepted_total;
    meta["proposed_total"] = chain.proposed_total;
    meta["acceptance_ratio"] = chain.acceptance_ratio();
    ordered_json hist = ordered_json::array();
    for (const auto& ev : chain.sigma_q_history) {
        ordered_json e;
        e["iteration"] = ev.iteration;
        e["sigma_q"] = ev.sigma_q;
        e["window_ratio"] = ev.window_ratio;
        hist.push_back(e);
    }
    meta["sigma_q_events"] = hist;
    write_json(meta_path, meta);
}

inline void write_chain(const std::filesystem::path& csv_path,
                        const std::filesystem::path& meta_path, const Chain& chain) {
    write_chain_states(csv_path, chain);
    write_chain_meta(meta_path, chain);
}

// ---------------------------------------------------------------------------
// FNV-1a content hashes and the run manifest
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    return fnv1a(read_text_file(path));
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// Writes manifest.json listing each artifact with its size and content hash.
// `names` are paths relative to `dir`; they are recorded sorted so the
// manifest itself is deterministic regardless of production order.
inline void write_manifest(const std::filesystem::path& dir, std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    ordered_json files = ordered_json::array();
    for (const auto& name : names) {
        const std::string bytes = read_text_file(dir / name);
        ordered_json f;
        f["name"] = name;
        f["bytes"] = bytes.size();
        f["fnv1a"] = hash_hex(fnv1a(bytes));
        files.push_back(f);
    }
    ordered_json manifest;
    manifest["files"] = files;
    write_json(dir / "manifest.json", manifest);
}

}  // namespace sisp
