#include "rxgov/ledger/ledger.hpp"

#include <algorithm>
#include <fstream>

#include "rxgov/ledger/signature.hpp"
#include "rxgov/pre/curve.hpp"

namespace rxgov::ledger {

using contracts::ContractInstance;

std::string submit_status_name(SubmitStatus s) {
    switch (s) {
        case SubmitStatus::Accepted: return "Accepted";
        case SubmitStatus::UnknownSender: return "UnknownSender";
        case SubmitStatus::BadSignature: return "BadSignature";
        case SubmitStatus::BadNonce: return "BadNonce";
        case SubmitStatus::UnknownInstance: return "UnknownInstance";
    }
    return "Unknown";
}

// ---------------------------------------------------------------------------
// GenesisInfo

Bytes GenesisInfo::to_bytes() const {
    ByteWriter w;
    w.str("rxgov/genesis/v1");
    w.u64(config.block_interval_ms);
    w.u8(config.skip_empty ? 1 : 0);
    w.u32(static_cast<uint32_t>(accounts.size()));
    for (const auto& a : accounts) {
        a.address.write(w);
        w.blob(a.pk);
        w.u8(static_cast<uint8_t>(a.role));
        w.str(a.name);
    }
    return w.take();
}

GenesisInfo GenesisInfo::from_bytes(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    if (r.str() != "rxgov/genesis/v1") throw DecodeError("bad genesis magic");
    GenesisInfo g;
    g.config.block_interval_ms = r.u64();
    uint8_t skip = r.u8();
    if (skip > 1) throw DecodeError("bad skip-empty flag");
    g.config.skip_empty = skip == 1;
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        Account a;
        a.address = Address::read(r);
        a.pk = r.blob();
        try {
            a.role = role_from_u8(r.u8());
        } catch (const std::invalid_argument&) {
            throw DecodeError("bad role in genesis");
        }
        a.name = r.str();
        g.accounts.push_back(std::move(a));
    }
    r.expect_done();
    return g;
}

Hash GenesisInfo::state_root() const { return pre::sha256(to_bytes()); }

// ---------------------------------------------------------------------------
// Ledger

namespace {

Hash instances_root(const std::map<uint64_t, ContractInstance>& instances) {
    pre::Sha256Stream stream;
    ByteWriter header;
    header.str("rxgov/state/v1");
    header.u32(static_cast<uint32_t>(instances.size()));
    stream.update(header.bytes());
    for (const auto& [id, inst] : instances) stream.update(contracts::encode_instance(inst));
    return stream.finish();
}

}  // namespace

Ledger::Ledger(LedgerConfig cfg) : cfg_(cfg) {}

Address Ledger::register_account(const pre::PublicKey& pk, Role role, std::string name) {
    if (genesis_sealed_) throw LateRegistration("accounts must register before the first block");
    Address addr = Address::from_public_key(pk);
    if (accounts_.count(addr)) throw AlreadyRegistered("address already registered");
    accounts_.emplace(addr, AccountRecord{pk, role, std::move(name), 0});
    reserved_nonce_[addr] = 0;
    return addr;
}

GenesisInfo Ledger::genesis_info() const {
    GenesisInfo g;
    g.config = cfg_;
    for (const auto& [addr, rec] : accounts_) {
        auto pk_bytes = rec.pk.to_bytes();
        g.accounts.push_back(
            GenesisInfo::Account{addr, Bytes(pk_bytes.begin(), pk_bytes.end()), rec.role, rec.name});
    }
    return g;
}

void Ledger::seal_genesis() const {
    if (genesis_sealed_) return;
    Block g;
    g.height = 0;
    g.timestamp_ms = 0;
    g.prev_hash = Hash{};
    g.state_root = genesis_info().state_root();
    chain_.push_back(std::move(g));
    genesis_sealed_ = true;
}

SubmitResult Ledger::submit(const SignedTransaction& tx) {
    seal_genesis();
    auto acct = accounts_.find(tx.sender);
    if (acct == accounts_.end())
        return {SubmitStatus::UnknownSender, "sender address not registered"};
    if (!verify_signature(acct->second.pk, tx.signing_bytes(), tx.signature))
        return {SubmitStatus::BadSignature, "signature does not verify"};
    uint64_t expected = reserved_nonce_.at(tx.sender);
    if (tx.nonce != expected)
        return {SubmitStatus::BadNonce,
                "expected nonce " + std::to_string(expected) + ", got " + std::to_string(tx.nonce)};
    if (tx.method == contracts::method::kInstantiate) {
        if (tx.instance_id != 0)
            return {SubmitStatus::UnknownInstance, "instantiate targets instance 0"};
    } else if (!instances_.count(tx.instance_id)) {
        return {SubmitStatus::UnknownInstance,
                "no instance " + std::to_string(tx.instance_id)};
    }

    reserved_nonce_[tx.sender] = expected + 1;
    mempool_.push_back(tx);
    return {SubmitStatus::Accepted, ""};
}

std::optional<Block> Ledger::produce_block(uint64_t now) {
    seal_genesis();
    now_ms_ = std::max(now_ms_, now);
    const Block& last = chain_.back();
    if (now < last.timestamp_ms + cfg_.block_interval_ms) return std::nullopt;
    if (cfg_.skip_empty && mempool_.empty()) return std::nullopt;

    Block b;
    b.height = chain_.size();
    b.timestamp_ms = now;
    b.prev_hash = block_hash(last);
    while (!mempool_.empty()) {
        b.tx_list.push_back(std::move(mempool_.front()));
        mempool_.pop_front();
    }

    contracts::ExecContext ctx{accounts_, instances_, next_instance_id_, b.height};
    for (const auto& tx : b.tx_list) {
        b.results.push_back(contracts::apply_transaction(ctx, tx));
        accounts_.at(tx.sender).next_nonce = tx.nonce + 1;
    }
    b.state_root = compute_state_root();
    chain_.push_back(b);
    return b;
}

const Block& Ledger::commit() {
    seal_genesis();
    uint64_t target = std::max(now_ms_, chain_.back().timestamp_ms + cfg_.block_interval_ms);
    if (!produce_block(target)) throw LedgerError("nothing to commit");
    return chain_.back();
}

const ContractInstance& Ledger::get_state(uint64_t instance_id) const {
    auto it = instances_.find(instance_id);
    if (it == instances_.end()) throw NotFound("no instance " + std::to_string(instance_id));
    return it->second;
}

const Block& Ledger::get_block(uint64_t height) const {
    if (height >= chain_.size()) throw NotFound("no block at height " + std::to_string(height));
    return chain_[height];
}

std::optional<Address> Ledger::address_of(const pre::PublicKey& pk) const {
    Address addr = Address::from_public_key(pk);
    if (!accounts_.count(addr)) return std::nullopt;
    return addr;
}

uint64_t Ledger::next_nonce(const Address& sender) const {
    auto it = reserved_nonce_.find(sender);
    if (it == reserved_nonce_.end()) throw NotFound("unknown sender");
    return it->second;
}

Hash Ledger::state_root() const { return instances_root(instances_); }

Hash Ledger::compute_state_root() const { return instances_root(instances_); }

// ---------------------------------------------------------------------------
// Export / verification

void Ledger::export_chain(const std::string& path) const {
    seal_genesis();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw LedgerError("cannot open for writing: " + path);
    out << "RXGOV-CHAIN v1\n";
    out << "GENESIS " << to_hex(genesis_info().to_bytes()) << "\n";
    for (const auto& b : chain_) out << "BLOCK " << to_hex(b.to_bytes()) << "\n";
    out << "HEAD " << to_hex(block_hash(chain_.back())) << "\n";
}

ChainFile Ledger::load_chain(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DecodeError("cannot open: " + path);

    ChainFile cf;
    std::string line;
    size_t lineno = 0;
    bool saw_genesis = false, saw_head = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fail = [&](const std::string& why) {
            throw DecodeError("line " + std::to_string(lineno) + ": " + why);
        };
        try {
            if (lineno == 1) {
                if (line != "RXGOV-CHAIN v1") fail("bad file magic");
            } else if (line.rfind("GENESIS ", 0) == 0) {
                if (saw_genesis) fail("duplicate genesis line");
                cf.genesis = GenesisInfo::from_bytes(from_hex(line.substr(8)));
                saw_genesis = true;
            } else if (line.rfind("BLOCK ", 0) == 0) {
                if (!saw_genesis) fail("block before genesis line");
                if (saw_head) fail("block after head line");
                cf.blocks.push_back(Block::from_bytes(from_hex(line.substr(6))));
            } else if (line.rfind("HEAD ", 0) == 0) {
                if (saw_head) fail("duplicate head line");
                Bytes h = from_hex(line.substr(5));
                if (h.size() != kHashBytes) fail("bad head hash length");
                std::copy(h.begin(), h.end(), cf.head.begin());
                saw_head = true;
            } else {
                fail("unrecognized line");
            }
        } catch (const DecodeError& e) {
            std::string what = e.what();
            if (what.rfind("line ", 0) == 0) throw;
            throw DecodeError("line " + std::to_string(lineno) + ": " + what);
        }
    }
    if (lineno == 0) throw DecodeError("empty chain file");
    if (!saw_genesis) throw DecodeError("missing genesis line");
    if (cf.blocks.empty()) throw DecodeError("no blocks in chain file");
    if (!saw_head) throw DecodeError("missing head line");
    return cf;
}

VerifyResult Ledger::verify_chain(const GenesisInfo& genesis, const std::vector<Block>& blocks,
                                  const Hash* head) {
    uint64_t at = 0;
    try {
        if (blocks.empty()) return {false, 0, "EmptyChain"};

        AccountTable accounts;
        for (const auto& a : genesis.accounts) {
            pre::PublicKey pk = pre::PublicKey::from_bytes(a.pk);
            if (!(Address::from_public_key(pk) == a.address))
                return {false, 0, "AddressKeyMismatch"};
            if (!accounts.emplace(a.address, AccountRecord{pk, a.role, a.name, 0}).second)
                return {false, 0, "DuplicateAccount"};
        }

        const Block& g = blocks[0];
        if (g.height != 0 || g.timestamp_ms != 0 || !(g.prev_hash == Hash{}) ||
            !g.tx_list.empty() || !g.results.empty())
            return {false, 0, "BadGenesisBlock"};
        if (!(g.state_root == genesis.state_root())) return {false, 0, "GenesisRootMismatch"};

        std::map<uint64_t, ContractInstance> instances;
        uint64_t next_id = 1;
        for (size_t h = 1; h < blocks.size(); ++h) {
            at = h;
            const Block& b = blocks[h];
            if (b.height != h) return {false, h, "HeightMismatch"};
            if (!(block_hash(blocks[h - 1]) == b.prev_hash))
                return {false, h - 1, "HashLinkMismatch"};
            if (b.timestamp_ms < blocks[h - 1].timestamp_ms)
                return {false, h, "TimestampRegression"};
            if (b.results.size() != b.tx_list.size()) return {false, h, "ResultCountMismatch"};

            contracts::ExecContext ctx{accounts, instances, next_id, h};
            for (size_t i = 0; i < b.tx_list.size(); ++i) {
                const auto& tx = b.tx_list[i];
                auto acct = accounts.find(tx.sender);
                if (acct == accounts.end()) return {false, h, "UnknownSender"};
                if (!verify_signature(acct->second.pk, tx.signing_bytes(), tx.signature))
                    return {false, h, "BadSignature"};
                if (tx.nonce != acct->second.next_nonce) return {false, h, "NonceMismatch"};
                if (tx.method == contracts::method::kInstantiate && tx.instance_id != 0)
                    return {false, h, "BadInstanceRef"};
                acct->second.next_nonce = tx.nonce + 1;
                TxResult res = contracts::apply_transaction(ctx, tx);
                if (!(res == b.results[i])) return {false, h, "ResultMismatch"};
            }
            if (!(instances_root(instances) == b.state_root))
                return {false, h, "StateRootMismatch"};
        }

        if (head && !(block_hash(blocks.back()) == *head))
            return {false, blocks.size() - 1, "HeadAnchorMismatch"};
        return {true, 0, ""};
    } catch (const std::exception& e) {
        return {false, at, std::string("ReplayError: ") + e.what()};
    }
}

VerifyResult Ledger::verify_file(const std::string& path) {
    try {
        ChainFile cf = load_chain(path);
        return verify_chain(cf.genesis, cf.blocks, &cf.head);
    } catch (const std::exception& e) {
        return {false, 0, std::string("ParseError: ") + e.what()};
    }
}

}  // namespace rxgov::ledger
