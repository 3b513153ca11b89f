#pragma once

#include "rxgov/ledger/types.hpp"
#include "rxgov/pre/pre.hpp"

namespace rxgov::ledger {

inline constexpr size_t kSignatureBytes = pre::kPointBytes + pre::kScalarBytes;

// Schnorr signature over the shared curve with a deterministic nonce, so
// signing is reproducible under seeded runs. Layout: R(33) || s(32).
Bytes sign_message(const pre::SecretKey& sk, std::span<const uint8_t> msg);
bool verify_signature(const pre::PublicKey& pk, std::span<const uint8_t> msg,
                      std::span<const uint8_t> sig);

SignedTransaction make_transaction(const pre::SecretKey& sk, const Address& sender, uint64_t nonce,
                                   uint64_t instance_id, std::string method, Bytes payload);

}  // namespace rxgov::ledger
