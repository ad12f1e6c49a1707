#include "weightguard/rng.hpp"

#include "weightguard/common.hpp"

#include <cmath>
#include <numbers>

namespace wg {

uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RngStream::RngStream(uint64_t seed, std::string_view label)
        : seed_(seed), key_(mix64(seed ^ mix64(fnv1a64(label)))) {}

uint64_t RngStream::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
}

uint64_t RngStream::next_below(uint64_t n) {
    check(n > 0, "RngStream::next_below: n must be positive");
    const uint64_t threshold = (0 - n) % n;
    uint64_t r = next_u64();
    while (r < threshold) {
        r = next_u64();
    }
    return r % n;
}

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::gaussian() {
    // u1 in (0,1] so the log is finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

int RngStream::rademacher() {
    return (next_u64() & 1) ? 1 : -1;
}

std::vector<uint64_t> RngStream::sample_indices(uint64_t n, uint64_t k) {
    check(k <= n, "RngStream::sample_indices: k exceeds population size");
    std::vector<uint64_t> pool(n);
    for (uint64_t i = 0; i < n; ++i) {
        pool[i] = i;
    }
    for (uint64_t i = 0; i < k; ++i) {
        const uint64_t j = i + next_below(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

} // namespace wg
