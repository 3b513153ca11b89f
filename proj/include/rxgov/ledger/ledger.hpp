#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rxgov/contracts/contracts.hpp"
#include "rxgov/ledger/types.hpp"
#include "rxgov/roles.hpp"

// Single-process append-only chain. Consensus is modeled as a configurable
// block interval on a simulated millisecond clock; everything else (sender
// authentication, nonce replay protection, deterministic contract dispatch,
// full replay verification) behaves like the real thing.

namespace rxgov::ledger {

struct LedgerConfig {
    uint64_t block_interval_ms = 6130;
    bool skip_empty = false;
};

struct LedgerError : std::runtime_error {
    explicit LedgerError(const std::string& what) : std::runtime_error(what) {}
};
struct AlreadyRegistered : LedgerError {
    using LedgerError::LedgerError;
};
struct LateRegistration : LedgerError {
    using LedgerError::LedgerError;
};
struct NotFound : LedgerError {
    using LedgerError::LedgerError;
};

enum class SubmitStatus : uint8_t {
    Accepted = 0,
    UnknownSender,
    BadSignature,
    BadNonce,
    UnknownInstance,
};

std::string submit_status_name(SubmitStatus s);

struct SubmitResult {
    SubmitStatus status = SubmitStatus::Accepted;
    std::string message;
    bool accepted() const { return status == SubmitStatus::Accepted; }
};

struct VerifyResult {
    bool valid = true;
    uint64_t height = 0;
    std::string reason;
};

// Everything a verifier needs besides the blocks: chain parameters and the
// account directory (name, role, public key per address).
struct GenesisInfo {
    LedgerConfig config;
    struct Account {
        Address address;
        Bytes pk;
        Role role;
        std::string name;
    };
    std::vector<Account> accounts;

    Bytes to_bytes() const;
    static GenesisInfo from_bytes(std::span<const uint8_t> bytes);
    Hash state_root() const;  // genesis block commits to this encoding
};

struct ChainFile {
    GenesisInfo genesis;
    std::vector<Block> blocks;
    Hash head{};
};

class Ledger {
  public:
    explicit Ledger(LedgerConfig cfg = {});

    // Accounts join before the first block is sealed; the genesis block
    // commits to the full directory.
    Address register_account(const pre::PublicKey& pk, Role role, std::string name);

    SubmitResult submit(const SignedTransaction& tx);

    // Seals a block if the interval has elapsed (and, in skip-empty mode,
    // the mempool is non-empty). Returns the new block.
    std::optional<Block> produce_block(uint64_t now_ms);

    // Advances the simulated clock to the next boundary and seals a block.
    const Block& commit();

    const contracts::ContractInstance& get_state(uint64_t instance_id) const;
    const Block& get_block(uint64_t height) const;
    const std::vector<Block>& chain() const { return chain_; }
    const AccountTable& accounts() const { return accounts_; }
    const std::map<uint64_t, contracts::ContractInstance>& instances() const { return instances_; }
    std::optional<Address> address_of(const pre::PublicKey& pk) const;

    uint64_t next_nonce(const Address& sender) const;  // includes mempool reservations
    uint64_t now_ms() const { return now_ms_; }
    size_t mempool_size() const { return mempool_.size(); }
    Hash state_root() const;
    GenesisInfo genesis_info() const;

    void export_chain(const std::string& path) const;
    static ChainFile load_chain(const std::string& path);  // throws DecodeError
    static VerifyResult verify_chain(const GenesisInfo& genesis, const std::vector<Block>& blocks,
                                     const Hash* head = nullptr);
    static VerifyResult verify_file(const std::string& path);

  private:
    void seal_genesis() const;
    Hash compute_state_root() const;

    LedgerConfig cfg_;
    mutable bool genesis_sealed_ = false;
    mutable std::vector<Block> chain_;
    AccountTable accounts_;
    std::map<Address, uint64_t> reserved_nonce_;
    std::deque<SignedTransaction> mempool_;
    std::map<uint64_t, contracts::ContractInstance> instances_;
    uint64_t next_instance_id_ = 1;
    uint64_t now_ms_ = 0;
};

}  // namespace rxgov::ledger
