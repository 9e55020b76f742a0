#ifndef GCDTC_UTIL_RNG_HPP
#define GCDTC_UTIL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace gcdtc {

// Deterministic random source. mt19937_64 has a portable bit sequence, and we
// derive all distributions ourselves so that two builds draw identical values
// (std::normal_distribution and friends are implementation-defined).
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi], inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        // Lemire's multiply-shift; span of 0 means the full 64-bit range.
        if (span == 0) return static_cast<int64_t>(gen_());
        unsigned __int128 m = static_cast<unsigned __int128>(gen_()) * span;
        return lo + static_cast<int64_t>(static_cast<uint64_t>(m >> 64));
    }

    // Standard normal via Box-Muller (no cached spare: one draw consumes two
    // uniforms, keeping the stream position independent of call history).
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));  // u1 in [0,1) so 1-u1 in (0,1]
        return r * std::cos(2.0 * M_PI * u2);
    }

    std::mt19937_64& engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
};

}  // namespace gcdtc

#endif
