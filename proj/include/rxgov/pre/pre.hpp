#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "rxgov/codec.hpp"
#include "rxgov/pre/curve.hpp"
#include "rxgov/pre/entropy.hpp"

// Single-hop unidirectional proxy re-encryption (KEM/DEM hybrid, one key
// fragment). A delegator encrypts to itself, hands a DelegationKey to a
// blind proxy, and the proxy's ReEncryption lets exactly one delegatee
// recover the payload with its own secret key.

namespace rxgov::pre {

struct CapsuleInvalid : CryptoError {
    using CryptoError::CryptoError;
};
struct DecryptionFailed : CryptoError {
    using CryptoError::CryptoError;
};
struct DelegationKeyInvalid : CryptoError {
    using CryptoError::CryptoError;
};
struct ReEncryptionInvalid : CryptoError {
    using CryptoError::CryptoError;
};

class SecretKey;
class PublicKey;
struct KeyPair;

KeyPair keygen(EntropySource& entropy = SystemEntropy::instance());

class SecretKey {
  public:
    static SecretKey from_bytes(std::span<const uint8_t> bytes);
    std::array<uint8_t, kScalarBytes> to_bytes() const { return scalar_.to_bytes(); }
    const Scalar& scalar() const { return scalar_; }

  private:
    friend KeyPair keygen(EntropySource&);
    explicit SecretKey(Scalar s) : scalar_(std::move(s)) {}
    Scalar scalar_;
};

class PublicKey {
  public:
    static PublicKey from_secret(const SecretKey& sk);
    static PublicKey from_bytes(std::span<const uint8_t> bytes);
    std::array<uint8_t, kPointBytes> to_bytes() const { return point_.to_bytes(); }
    const Point& point() const { return point_; }
    bool operator==(const PublicKey& other) const { return point_ == other.point_; }

  private:
    explicit PublicKey(Point p) : point_(std::move(p)) {}
    Point point_;
};

struct KeyPair {
    SecretKey sk;
    PublicKey pk;
};

// KEM encapsulation: (E, V, s) with g*s == V + H(E,V)*E.
struct Capsule {
    Point e;
    Point v;
    Scalar s;

    static constexpr size_t kBytes = 2 * kPointBytes + kScalarBytes;

    bool verify() const;
    Bytes to_bytes() const;
    static Capsule from_bytes(std::span<const uint8_t> bytes);
    static Capsule read(ByteReader& r);
    void write(ByteWriter& w) const;
    bool operator==(const Capsule& other) const;
};

struct Ciphertext {
    Capsule capsule;
    Bytes dem_payload;
    Bytes associated_data;

    Bytes to_bytes() const;
    static Ciphertext from_bytes(std::span<const uint8_t> bytes);
    static Ciphertext read(ByteReader& r);
    void write(ByteWriter& w) const;
    bool operator==(const Ciphertext& other) const = default;
};

// Re-encryption key fragment. rk transforms capsules encrypted to the
// delegator; precursor X and delegatee_binding U1 tie it to one delegatee;
// proof is a signature of knowledge binding every field to the delegator key.
struct DelegationKey {
    Scalar id;
    Scalar rk;
    Point precursor;
    Point delegatee_binding;
    Bytes proof;

    Bytes to_bytes() const;
    static DelegationKey from_bytes(std::span<const uint8_t> bytes);
    bool operator==(const DelegationKey& other) const;
};

// Transformed capsule fragment with a Chaum-Pedersen style proof that the
// same rk scaled E, V, and the binding generator.
struct ReEncryption {
    Point e_prime;
    Point v_prime;
    Point precursor;
    Bytes proof;

    bool verify(const Capsule& capsule) const;
    Bytes to_bytes() const;
    static ReEncryption from_bytes(std::span<const uint8_t> bytes);
    bool operator==(const ReEncryption& other) const;
};

Ciphertext encrypt(const PublicKey& pk, std::span<const uint8_t> plaintext,
                   std::span<const uint8_t> associated_data,
                   EntropySource& entropy = SystemEntropy::instance());

Bytes decrypt_original(const SecretKey& sk, const Ciphertext& ct);

DelegationKey generate_delegation_key(const SecretKey& sk_delegator, const PublicKey& pk_delegatee,
                                      EntropySource& entropy = SystemEntropy::instance());

bool verify_delegation_key(const DelegationKey& dk, const PublicKey& pk_delegator,
                           const PublicKey& pk_delegatee);

// Deliberately takes no secret key: safe to run on an untrusted proxy.
ReEncryption reencrypt(const DelegationKey& dk, const Capsule& capsule);

Bytes decrypt_reencrypted(const SecretKey& sk_delegatee, const PublicKey& pk_delegator,
                          const ReEncryption& re, const Ciphertext& ct);

// Known-answer records: everything below is derived from the seed alone
// (keygen, then a 64-byte plaintext, then one encrypt, all off one seeded
// stream), so a record can be re-generated and cross-checked anywhere.
struct KatRecord {
    Bytes seed;
    Bytes pk;
    std::array<uint8_t, kDigestBytes> plaintext_hash;
    std::array<uint8_t, kDigestBytes> ciphertext_hash;

    bool operator==(const KatRecord& other) const = default;
};

KatRecord make_kat_record(std::span<const uint8_t> seed);
bool check_kat_record(const KatRecord& rec);
std::string kat_to_line(const KatRecord& rec);
KatRecord kat_from_line(const std::string& line);
void write_kat_file(const std::string& path, const std::vector<KatRecord>& records);
std::vector<KatRecord> read_kat_file(const std::string& path);

}  // namespace rxgov::pre
