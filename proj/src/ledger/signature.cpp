#include "rxgov/ledger/signature.hpp"

#include "rxgov/pre/curve.hpp"

namespace rxgov::ledger {

using pre::Point;
using pre::Scalar;

Bytes sign_message(const pre::SecretKey& sk, std::span<const uint8_t> msg) {
    auto sk_bytes = sk.to_bytes();
    Scalar k = pre::hash_to_scalar("rxgov/txsig-nonce", {std::span<const uint8_t>(sk_bytes), msg});
    if (k.is_zero()) throw pre::CryptoError("degenerate signing nonce");
    Point r_point = Point::base_mul(k);
    auto r_bytes = r_point.to_bytes();
    auto pk_bytes = pre::PublicKey::from_secret(sk).to_bytes();
    Scalar e = pre::hash_to_scalar(
        "rxgov/txsig", {std::span<const uint8_t>(r_bytes), std::span<const uint8_t>(pk_bytes), msg});
    Scalar s = k.add(e.mul(sk.scalar()));

    ByteWriter w;
    w.fixed(r_bytes);
    w.fixed(s.to_bytes());
    return w.take();
}

bool verify_signature(const pre::PublicKey& pk, std::span<const uint8_t> msg,
                      std::span<const uint8_t> sig) {
    if (sig.size() != kSignatureBytes) return false;
    try {
        Point r_point = Point::from_bytes(sig.subspan(0, pre::kPointBytes));
        Scalar s = Scalar::from_bytes(sig.subspan(pre::kPointBytes));
        auto r_bytes = r_point.to_bytes();
        auto pk_bytes = pk.to_bytes();
        Scalar e = pre::hash_to_scalar(
            "rxgov/txsig",
            {std::span<const uint8_t>(r_bytes), std::span<const uint8_t>(pk_bytes), msg});
        return Point::base_mul(s) == r_point.add(pk.point().mul(e));
    } catch (const pre::CryptoError&) {
        return false;
    }
}

SignedTransaction make_transaction(const pre::SecretKey& sk, const Address& sender, uint64_t nonce,
                                   uint64_t instance_id, std::string method, Bytes payload) {
    SignedTransaction tx;
    tx.sender = sender;
    tx.nonce = nonce;
    tx.instance_id = instance_id;
    tx.method = std::move(method);
    tx.payload = std::move(payload);
    tx.signature = sign_message(sk, tx.signing_bytes());
    return tx;
}

}  // namespace rxgov::ledger
