#include "rxgov/ledger/types.hpp"

#include "rxgov/pre/curve.hpp"

namespace rxgov::ledger {

Address Address::from_public_key(const pre::PublicKey& pk) {
    auto digest = pre::sha256(pk.to_bytes());
    Address a;
    std::copy(digest.begin(), digest.begin() + kAddressBytes, a.bytes.begin());
    return a;
}

std::string Address::hex() const { return to_hex(std::span<const uint8_t>(bytes)); }

void TxResult::write(ByteWriter& w) const {
    w.u8(ok ? 1 : 0);
    w.str(error);
    w.blob(output);
}

TxResult TxResult::read(ByteReader& r) {
    uint8_t flag = r.u8();
    if (flag > 1) throw DecodeError("bad tx result flag");
    TxResult res;
    res.ok = flag == 1;
    res.error = r.str();
    res.output = r.blob();
    return res;
}

Bytes SignedTransaction::signing_bytes() const {
    ByteWriter w;
    w.str("rxgov/tx/v1");
    sender.write(w);
    w.u64(nonce);
    w.u64(instance_id);
    w.str(method);
    w.blob(payload);
    return w.take();
}

void SignedTransaction::write(ByteWriter& w) const {
    sender.write(w);
    w.u64(nonce);
    w.u64(instance_id);
    w.str(method);
    w.blob(payload);
    w.blob(signature);
}

SignedTransaction SignedTransaction::read(ByteReader& r) {
    SignedTransaction tx;
    tx.sender = Address::read(r);
    tx.nonce = r.u64();
    tx.instance_id = r.u64();
    tx.method = r.str();
    tx.payload = r.blob();
    tx.signature = r.blob();
    return tx;
}

Bytes SignedTransaction::to_bytes() const {
    ByteWriter w;
    write(w);
    return w.take();
}

Bytes Block::to_bytes() const {
    ByteWriter w;
    w.str("rxgov/block/v1");
    w.u64(height);
    w.u64(timestamp_ms);
    w.fixed(prev_hash);
    w.u32(static_cast<uint32_t>(tx_list.size()));
    for (const auto& tx : tx_list) tx.write(w);
    w.u32(static_cast<uint32_t>(results.size()));
    for (const auto& res : results) res.write(w);
    w.fixed(state_root);
    return w.take();
}

Block Block::from_bytes(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    if (r.str() != "rxgov/block/v1") throw DecodeError("bad block magic");
    Block b;
    b.height = r.u64();
    b.timestamp_ms = r.u64();
    b.prev_hash = r.fixed<kHashBytes>();
    uint32_t n_tx = r.u32();
    b.tx_list.reserve(n_tx);
    for (uint32_t i = 0; i < n_tx; ++i) b.tx_list.push_back(SignedTransaction::read(r));
    uint32_t n_res = r.u32();
    if (n_res != n_tx) throw DecodeError("result count does not match tx count");
    b.results.reserve(n_res);
    for (uint32_t i = 0; i < n_res; ++i) b.results.push_back(TxResult::read(r));
    b.state_root = r.fixed<kHashBytes>();
    r.expect_done();
    return b;
}

Hash block_hash(const Block& b) { return pre::sha256(b.to_bytes()); }

}  // namespace rxgov::ledger
