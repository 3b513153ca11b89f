#pragma once

// secp256k1 group arithmetic, hashing, KDF, and the authenticated cipher,
// wrapped from OpenSSL libcrypto. Scalars live in Z_q (q = group order),
// points on the prime-order curve. Both are immutable value types and safe
// to share across threads. The curve is a build-time constant.

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string_view>

#include "rxgov/codec.hpp"

typedef struct bignum_st BIGNUM;
typedef struct ec_point_st EC_POINT;

namespace rxgov::pre {

inline constexpr size_t kScalarBytes = 32;
inline constexpr size_t kPointBytes = 33;   // SEC1 compressed
inline constexpr size_t kDigestBytes = 32;  // SHA-256

struct CryptoError : std::runtime_error {
    explicit CryptoError(const std::string& what) : std::runtime_error(what) {}
};
struct EntropyFailure : CryptoError {
    explicit EntropyFailure(const std::string& what) : CryptoError(what) {}
};
struct InvalidPoint : CryptoError {
    explicit InvalidPoint(const std::string& what) : CryptoError(what) {}
};
struct InvalidScalar : CryptoError {
    explicit InvalidScalar(const std::string& what) : CryptoError(what) {}
};

class EntropySource;

class Scalar {
public:
    Scalar();  // zero
    Scalar(const Scalar& other);
    Scalar(Scalar&& other) noexcept;
    Scalar& operator=(Scalar other) noexcept;
    ~Scalar();

    static Scalar from_u64(uint64_t v);
    // 32 big-endian bytes; must already be < q.
    static Scalar from_bytes(std::span<const uint8_t> bytes);
    // Arbitrary bytes reduced mod q (hash outputs).
    static Scalar from_bytes_mod_q(std::span<const uint8_t> bytes);
    // Uniform in [1, q-1] by rejection sampling.
    static Scalar random_nonzero(EntropySource& entropy);

    Scalar add(const Scalar& other) const;
    Scalar sub(const Scalar& other) const;
    Scalar mul(const Scalar& other) const;
    Scalar invert() const;  // throws InvalidScalar on zero
    bool is_zero() const;
    bool operator==(const Scalar& other) const;

    std::array<uint8_t, kScalarBytes> to_bytes() const;
    const BIGNUM* bn() const { return bn_; }

private:
    BIGNUM* bn_;
};

class Point {
public:
    Point();  // identity
    Point(const Point& other);
    Point(Point&& other) noexcept;
    Point& operator=(Point other) noexcept;
    ~Point();

    static Point generator();
    // Second generator with unknown discrete log w.r.t. the first,
    // derived by hashing to the curve. Stable across runs and platforms.
    static Point aux_generator();
    static Point base_mul(const Scalar& k);  // generator * k
    // Rejects off-curve encodings and the identity.
    static Point from_bytes(std::span<const uint8_t> bytes);

    Point mul(const Scalar& k) const;
    Point add(const Point& other) const;
    bool is_identity() const;
    bool operator==(const Point& other) const;

    std::array<uint8_t, kPointBytes> to_bytes() const;
    const EC_POINT* pt() const { return pt_; }

private:
    EC_POINT* pt_;
};

std::array<uint8_t, kDigestBytes> sha256(std::span<const uint8_t> data);

// Incremental SHA-256, used for state roots over large contract states.
class Sha256Stream {
public:
    Sha256Stream();
    ~Sha256Stream();
    Sha256Stream(const Sha256Stream&) = delete;
    Sha256Stream& operator=(const Sha256Stream&) = delete;
    void update(std::span<const uint8_t> data);
    std::array<uint8_t, kDigestBytes> finish();

private:
    void* ctx_;
};

// Domain-separated hash to Z_q: SHA-256 over the tag and length-prefixed
// parts, reduced mod q.
Scalar hash_to_scalar(std::string_view tag, std::initializer_list<std::span<const uint8_t>> parts);

// HKDF-SHA256 -> 32-byte symmetric key.
std::array<uint8_t, 32> kdf(std::span<const uint8_t> ikm, std::span<const uint8_t> info);

// ChaCha20-Poly1305. Sealed layout: nonce(12) || ciphertext || tag(16).
inline constexpr size_t kAeadOverhead = 12 + 16;
Bytes aead_seal(const std::array<uint8_t, 32>& key, std::span<const uint8_t> plaintext,
                std::span<const uint8_t> aad, EntropySource& entropy);
// Returns false on authentication failure (wrong key or tampered data).
bool aead_open(const std::array<uint8_t, 32>& key, std::span<const uint8_t> sealed,
               std::span<const uint8_t> aad, Bytes& plaintext_out);

}  // namespace rxgov::pre
