#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace wg {

// Counter-based pseudo-random stream keyed by (seed, label).
//
// The i-th output is a pure function of (seed, label, i), so streams can be
// created independently in any thread and always yield the same sequence.
// Integer outputs are exact on every platform; floating-point outputs are
// built from them with arithmetic that is reproducible under IEEE-754
// (gaussian() additionally goes through libm log/cos, which is stable per
// toolchain).
class RngStream {
  public:
    RngStream(uint64_t seed, std::string_view label);

    uint64_t next_u64();

    // Uniform in [0, n). n must be > 0.
    uint64_t next_below(uint64_t n);

    // Uniform in [0, 1), 53-bit resolution.
    double next_double();

    // Standard normal via Box-Muller. Consumes two uniforms per call.
    double gaussian();

    // +1 or -1, equiprobable.
    int rademacher();

    // First k entries of a seeded Fisher-Yates shuffle of {0, ..., n-1}.
    std::vector<uint64_t> sample_indices(uint64_t n, uint64_t k);

    uint64_t seed() const { return seed_; }

  private:
    uint64_t seed_;
    uint64_t key_;
    uint64_t counter_ = 0;
};

// SplitMix64 finalizer; exposed for key derivation and config hashing.
uint64_t mix64(uint64_t z);

// FNV-1a over bytes; used to fold stream labels into the key.
uint64_t fnv1a64(std::string_view s);

} // namespace wg
