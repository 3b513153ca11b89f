#pragma once

#include <cstdint>
#include <span>

#include "rxgov/codec.hpp"

namespace rxgov::pre {

// All randomized operations take their randomness through this interface so
// fixed-seed runs are reproducible bit for bit.
class EntropySource {
public:
    virtual ~EntropySource() = default;
    virtual void fill(std::span<uint8_t> out) = 0;
};

// OS randomness via the crypto library. Throws EntropyFailure if the
// underlying generator reports an error.
class SystemEntropy final : public EntropySource {
public:
    void fill(std::span<uint8_t> out) override;
    static SystemEntropy& instance();
};

// Deterministic stream: block i = SHA-256(seed || be64(i)).
class SeededEntropy final : public EntropySource {
public:
    explicit SeededEntropy(std::span<const uint8_t> seed);
    explicit SeededEntropy(uint64_t seed);
    void fill(std::span<uint8_t> out) override;

private:
    void refill();

    Bytes seed_;
    uint64_t counter_ = 0;
    std::array<uint8_t, 32> block_{};
    size_t block_used_ = 32;  // forces first refill
};

}  // namespace rxgov::pre
