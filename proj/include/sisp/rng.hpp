#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "sisp/common.hpp"

namespace sisp {

// Stream derivation: hash a base seed with a sequence of tags so that each
// (trial, column, stage) gets an independent generator regardless of the
// order in which work items run.  splitmix64 is the usual mixer for this.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t base, Tags... tags) {
    std::uint64_t s = mix_seed(base);
    ((s = mix_seed(s ^ static_cast<std::uint64_t>(tags))), ...);
    return s;
}

// Wraps mt19937_64 with explicit uniform/normal draws.  The distributions in
// <random> are implementation-defined, so sampling is done by hand here to
// keep ensembles and chains bit-reproducible across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; draws are generated in pairs.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::mt19937_64& engine() { return gen_; }

    void save(std::ostream& os) const {
        os << gen_ << ' ' << (have_spare_ ? 1 : 0) << ' ';
        write_double_bits(os, spare_);
    }

    void restore(std::istream& is) {
        int flag = 0;
        is >> gen_ >> flag;
        spare_ = read_double_bits(is);
        have_spare_ = (flag != 0);
    }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace sisp
