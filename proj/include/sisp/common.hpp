#pragma once

#include <Eigen/Dense>
#include <bit>
#include <complex>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sisp {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Cplx = std::complex<double>;

// Exact (bit-pattern) double serialization for state snapshots; the decimal
// round trip through iostreams is not guaranteed to be lossless.
inline void write_double_bits(std::ostream& os, double v) {
    os << std::bit_cast<std::uint64_t>(v) << ' ';
}

inline double read_double_bits(std::istream& is) {
    std::uint64_t u = 0;
    is >> u;
    return std::bit_cast<double>(u);
}

// Thrown when vector/matrix shapes disagree with what an operation expects.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a statistic needs more data than was supplied (e.g. J < 2).
struct InsufficientDataError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a numerical routine cannot produce a usable result.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on invalid or inconsistent run configuration.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_dim(bool cond, const std::string& msg) {
    if (!cond) throw DimensionError(msg);
}

} // namespace sisp
