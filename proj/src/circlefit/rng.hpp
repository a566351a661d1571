#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace circlefit {

// Counter-free splitmix64 step; also used as the mixing function for
// deriving independent substreams from (seed, a, b) triples.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Seed for the independent substream of task (a, b) under a master seed.
inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b) {
    uint64_t s = mix64(seed);
    s = mix64(s ^ (a + 0x9e3779b97f4a7c15ull));
    return mix64(s ^ (b + 0xd1b54a32d192ed03ull));
}

// Deterministic generator: same seed, same sequence, on every platform and
// from any thread. Substreams derived by hashing never share state.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    // Independent stream for task (a, b) under a master seed.
    static Rng stream(uint64_t seed, uint64_t a, uint64_t b) {
        return Rng(derive_seed(seed, a, b));
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    // Uniform on the open interval (0,1): 53-bit mantissa, offset by half an ulp.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    // Standard normal via Box-Muller; one deviate per call, nothing cached,
    // so the draw count per generated object is fixed.
    double next_gaussian() {
        double u1 = next_unit();
        double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    uint64_t state_;
};

}  // namespace circlefit
