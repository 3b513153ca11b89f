#include "rxgov/pre/entropy.hpp"

#include <openssl/rand.h>

#include <cstring>

#include "rxgov/codec.hpp"
#include "rxgov/pre/curve.hpp"

namespace rxgov::pre {

void SystemEntropy::fill(std::span<uint8_t> out) {
    if (out.empty()) return;
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
        throw EntropyFailure("system RNG unavailable");
}

SystemEntropy& SystemEntropy::instance() {
    static SystemEntropy inst;
    return inst;
}

SeededEntropy::SeededEntropy(std::span<const uint8_t> seed)
    : seed_(seed.begin(), seed.end()) {}

SeededEntropy::SeededEntropy(uint64_t seed) {
    ByteWriter w;
    w.u64(seed);
    seed_ = w.take();
}

void SeededEntropy::refill() {
    ByteWriter w;
    w.raw(seed_);
    w.u64(counter_++);
    block_ = sha256(w.bytes());
    block_used_ = 0;
}

void SeededEntropy::fill(std::span<uint8_t> out) {
    size_t off = 0;
    while (off < out.size()) {
        if (block_used_ >= block_.size()) refill();
        size_t n = std::min(out.size() - off, block_.size() - block_used_);
        std::memcpy(out.data() + off, block_.data() + block_used_, n);
        block_used_ += n;
        off += n;
    }
}

}  // namespace rxgov::pre
