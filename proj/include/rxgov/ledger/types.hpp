#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rxgov/codec.hpp"
#include "rxgov/pre/pre.hpp"
#include "rxgov/roles.hpp"

namespace rxgov::ledger {

inline constexpr size_t kAddressBytes = 20;
inline constexpr size_t kHashBytes = 32;

using Hash = std::array<uint8_t, kHashBytes>;

struct Address {
    std::array<uint8_t, kAddressBytes> bytes{};

    static Address from_public_key(const pre::PublicKey& pk);
    auto operator<=>(const Address&) const = default;
    std::string hex() const;

    void write(ByteWriter& w) const { w.fixed(bytes); }
    static Address read(ByteReader& r) { return Address{r.fixed<kAddressBytes>()}; }
};

// Outcome of applying one transaction inside a block. Failed calls stay
// on-chain with ok = false and leave contract state untouched.
struct TxResult {
    bool ok = false;
    std::string error;
    Bytes output;

    void write(ByteWriter& w) const;
    static TxResult read(ByteReader& r);
    bool operator==(const TxResult&) const = default;
};

struct SignedTransaction {
    Address sender;
    uint64_t nonce = 0;
    uint64_t instance_id = 0;
    std::string method;
    Bytes payload;
    Bytes signature;

    // Canonical encoding of every field except the signature; this is what
    // gets signed.
    Bytes signing_bytes() const;
    void write(ByteWriter& w) const;
    static SignedTransaction read(ByteReader& r);
    Bytes to_bytes() const;
    bool operator==(const SignedTransaction&) const = default;
};

struct Block {
    uint64_t height = 0;
    uint64_t timestamp_ms = 0;
    Hash prev_hash{};
    std::vector<SignedTransaction> tx_list;
    std::vector<TxResult> results;  // parallel to tx_list
    Hash state_root{};

    Bytes to_bytes() const;
    static Block from_bytes(std::span<const uint8_t> bytes);
    bool operator==(const Block&) const = default;
};

Hash block_hash(const Block& b);

struct AccountRecord {
    pre::PublicKey pk;
    Role role;
    std::string name;
    uint64_t next_nonce = 0;
};

using AccountTable = std::map<Address, AccountRecord>;

}  // namespace rxgov::ledger
