#pragma once

#include <cstdint>

#include "rxgov/codec.hpp"
#include "rxgov/pre/entropy.hpp"

// Deterministic draws on top of an EntropySource. Kept free of std::
// distribution types so seeded runs agree across platforms and library
// versions.

namespace rxgov {

inline uint64_t next_u64(pre::EntropySource& entropy) {
    uint8_t buf[8];
    entropy.fill(buf);
    uint64_t v = 0;
    for (uint8_t b : buf) v = v << 8 | b;
    return v;
}

// Uniform in [lo, hi]. Modulo bias is negligible for the ranges used here
// (spans far below 2^32).
inline uint64_t uniform_u64(pre::EntropySource& entropy, uint64_t lo, uint64_t hi) {
    if (lo >= hi) return lo;
    return lo + next_u64(entropy) % (hi - lo + 1);
}

inline Bytes random_bytes(pre::EntropySource& entropy, size_t n) {
    Bytes out(n);
    entropy.fill(out);
    return out;
}

}  // namespace rxgov
