#include "rxgov/pre/curve.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/kdf.h>
#include <openssl/obj_mac.h>

#include <cstring>

#include "rxgov/pre/entropy.hpp"

namespace rxgov::pre {

namespace {

struct CurveCtx {
    EC_GROUP* group;
    const BIGNUM* order;

    CurveCtx() {
        group = EC_GROUP_new_by_curve_name(NID_secp256k1);
        if (!group) throw CryptoError("cannot create secp256k1 group");
        order = EC_GROUP_get0_order(group);
    }
};

const CurveCtx& curve() {
    static CurveCtx ctx;
    return ctx;
}

BN_CTX* bn_ctx() {
    thread_local struct Holder {
        BN_CTX* ctx = BN_CTX_new();
        ~Holder() { BN_CTX_free(ctx); }
    } holder;
    if (!holder.ctx) throw CryptoError("BN_CTX_new failed");
    return holder.ctx;
}

[[noreturn]] void fail(const char* what) { throw CryptoError(what); }

}  // namespace

// ---------------------------------------------------------------------------
// Scalar

Scalar::Scalar() : bn_(BN_new()) {
    if (!bn_) fail("BN_new failed");
    BN_zero(bn_);
}

Scalar::Scalar(const Scalar& other) : bn_(BN_dup(other.bn_)) {
    if (!bn_) fail("BN_dup failed");
}

Scalar::Scalar(Scalar&& other) noexcept : bn_(other.bn_) { other.bn_ = nullptr; }

Scalar& Scalar::operator=(Scalar other) noexcept {
    std::swap(bn_, other.bn_);
    return *this;
}

Scalar::~Scalar() {
    if (bn_) BN_clear_free(bn_);
}

Scalar Scalar::from_u64(uint64_t v) {
    Scalar s;
    if (!BN_set_word(s.bn_, v)) fail("BN_set_word failed");
    BN_nnmod(s.bn_, s.bn_, curve().order, bn_ctx());
    return s;
}

Scalar Scalar::from_bytes(std::span<const uint8_t> bytes) {
    if (bytes.size() != kScalarBytes) throw InvalidScalar("scalar must be 32 bytes");
    Scalar s;
    if (!BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), s.bn_)) fail("BN_bin2bn failed");
    if (BN_cmp(s.bn_, curve().order) >= 0) throw InvalidScalar("scalar not reduced mod group order");
    return s;
}

Scalar Scalar::from_bytes_mod_q(std::span<const uint8_t> bytes) {
    Scalar s;
    if (!BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), s.bn_)) fail("BN_bin2bn failed");
    if (!BN_nnmod(s.bn_, s.bn_, curve().order, bn_ctx())) fail("BN_nnmod failed");
    return s;
}

Scalar Scalar::random_nonzero(EntropySource& entropy) {
    std::array<uint8_t, kScalarBytes> buf{};
    for (;;) {
        entropy.fill(buf);
        Scalar s;
        if (!BN_bin2bn(buf.data(), static_cast<int>(buf.size()), s.bn_)) fail("BN_bin2bn failed");
        if (BN_cmp(s.bn_, curve().order) >= 0) continue;
        if (BN_is_zero(s.bn_)) continue;
        return s;
    }
}

Scalar Scalar::add(const Scalar& other) const {
    Scalar r;
    if (!BN_mod_add(r.bn_, bn_, other.bn_, curve().order, bn_ctx())) fail("BN_mod_add failed");
    return r;
}

Scalar Scalar::sub(const Scalar& other) const {
    Scalar r;
    if (!BN_mod_sub(r.bn_, bn_, other.bn_, curve().order, bn_ctx())) fail("BN_mod_sub failed");
    return r;
}

Scalar Scalar::mul(const Scalar& other) const {
    Scalar r;
    if (!BN_mod_mul(r.bn_, bn_, other.bn_, curve().order, bn_ctx())) fail("BN_mod_mul failed");
    return r;
}

Scalar Scalar::invert() const {
    if (is_zero()) throw InvalidScalar("cannot invert zero");
    Scalar r;
    if (!BN_mod_inverse(r.bn_, bn_, curve().order, bn_ctx())) fail("BN_mod_inverse failed");
    return r;
}

bool Scalar::is_zero() const { return BN_is_zero(bn_); }

bool Scalar::operator==(const Scalar& other) const { return BN_cmp(bn_, other.bn_) == 0; }

std::array<uint8_t, kScalarBytes> Scalar::to_bytes() const {
    std::array<uint8_t, kScalarBytes> out{};
    if (BN_bn2binpad(bn_, out.data(), kScalarBytes) != kScalarBytes) fail("BN_bn2binpad failed");
    return out;
}

// ---------------------------------------------------------------------------
// Point

Point::Point() : pt_(EC_POINT_new(curve().group)) {
    if (!pt_) fail("EC_POINT_new failed");
    if (!EC_POINT_set_to_infinity(curve().group, pt_)) fail("set_to_infinity failed");
}

Point::Point(const Point& other) : pt_(EC_POINT_dup(other.pt_, curve().group)) {
    if (!pt_) fail("EC_POINT_dup failed");
}

Point::Point(Point&& other) noexcept : pt_(other.pt_) { other.pt_ = nullptr; }

Point& Point::operator=(Point other) noexcept {
    std::swap(pt_, other.pt_);
    return *this;
}

Point::~Point() {
    if (pt_) EC_POINT_free(pt_);
}

Point Point::generator() {
    Point p;
    if (!EC_POINT_copy(p.pt_, EC_GROUP_get0_generator(curve().group))) fail("copy generator failed");
    return p;
}

Point Point::aux_generator() {
    // Try-and-increment on SHA-256("rxgov/pre/u-generator" || ctr) as a
    // compressed even-y x-coordinate; first valid point wins.
    static const Point u = [] {
        const std::string_view tag = "rxgov/pre/u-generator";
        for (uint32_t ctr = 0;; ++ctr) {
            ByteWriter w;
            w.raw(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(tag.data()), tag.size()));
            w.u32(ctr);
            auto digest = sha256(w.bytes());
            std::array<uint8_t, kPointBytes> enc{};
            enc[0] = 0x02;
            std::memcpy(enc.data() + 1, digest.data(), kDigestBytes);
            Point p;
            if (EC_POINT_oct2point(curve().group, p.pt_, enc.data(), enc.size(), bn_ctx()) == 1 &&
                !EC_POINT_is_at_infinity(curve().group, p.pt_)) {
                return p;
            }
        }
    }();
    return u;
}

Point Point::base_mul(const Scalar& k) {
    Point p;
    if (!EC_POINT_mul(curve().group, p.pt_, k.bn(), nullptr, nullptr, bn_ctx())) fail("EC_POINT_mul failed");
    return p;
}

Point Point::from_bytes(std::span<const uint8_t> bytes) {
    if (bytes.size() != kPointBytes) throw InvalidPoint("point must be 33 bytes compressed");
    Point p;
    if (EC_POINT_oct2point(curve().group, p.pt_, bytes.data(), bytes.size(), bn_ctx()) != 1)
        throw InvalidPoint("not a valid curve point");
    if (EC_POINT_is_at_infinity(curve().group, p.pt_)) throw InvalidPoint("identity point rejected");
    return p;
}

Point Point::mul(const Scalar& k) const {
    Point r;
    if (!EC_POINT_mul(curve().group, r.pt_, nullptr, pt_, k.bn(), bn_ctx())) fail("EC_POINT_mul failed");
    return r;
}

Point Point::add(const Point& other) const {
    Point r;
    if (!EC_POINT_add(curve().group, r.pt_, pt_, other.pt_, bn_ctx())) fail("EC_POINT_add failed");
    return r;
}

bool Point::is_identity() const { return EC_POINT_is_at_infinity(curve().group, pt_) == 1; }

bool Point::operator==(const Point& other) const {
    return EC_POINT_cmp(curve().group, pt_, other.pt_, bn_ctx()) == 0;
}

std::array<uint8_t, kPointBytes> Point::to_bytes() const {
    if (is_identity()) throw InvalidPoint("cannot encode identity point");
    std::array<uint8_t, kPointBytes> out{};
    size_t n = EC_POINT_point2oct(curve().group, pt_, POINT_CONVERSION_COMPRESSED, out.data(),
                                  out.size(), bn_ctx());
    if (n != kPointBytes) fail("point encoding failed");
    return out;
}

// ---------------------------------------------------------------------------
// Hashing / KDF / AEAD

std::array<uint8_t, kDigestBytes> sha256(std::span<const uint8_t> data) {
    std::array<uint8_t, kDigestBytes> out{};
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) ||
        len != kDigestBytes)
        fail("EVP_Digest failed");
    return out;
}

Sha256Stream::Sha256Stream() {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) fail("digest init failed");
    ctx_ = ctx;
}

Sha256Stream::~Sha256Stream() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void Sha256Stream::update(std::span<const uint8_t> data) {
    if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size()) != 1)
        fail("digest update failed");
}

std::array<uint8_t, kDigestBytes> Sha256Stream::finish() {
    std::array<uint8_t, kDigestBytes> out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len) != 1 ||
        len != kDigestBytes)
        fail("digest final failed");
    return out;
}

Scalar hash_to_scalar(std::string_view tag, std::initializer_list<std::span<const uint8_t>> parts) {
    ByteWriter w;
    w.str(tag);
    for (const auto& part : parts) w.blob(part);
    auto digest = sha256(w.bytes());
    return Scalar::from_bytes_mod_q(digest);
}

std::array<uint8_t, 32> kdf(std::span<const uint8_t> ikm, std::span<const uint8_t> info) {
    static const char* salt = "rxgov/pre/kdf/v1";
    std::array<uint8_t, 32> out{};
    EVP_PKEY_CTX* ctx = EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr);
    if (!ctx) fail("HKDF ctx failed");
    bool ok = EVP_PKEY_derive_init(ctx) > 0 &&
              EVP_PKEY_CTX_set_hkdf_md(ctx, EVP_sha256()) > 0 &&
              EVP_PKEY_CTX_set1_hkdf_salt(ctx, reinterpret_cast<const unsigned char*>(salt),
                                          static_cast<int>(std::strlen(salt))) > 0 &&
              EVP_PKEY_CTX_set1_hkdf_key(ctx, ikm.data(), static_cast<int>(ikm.size())) > 0 &&
              EVP_PKEY_CTX_add1_hkdf_info(ctx, info.data(), static_cast<int>(info.size())) > 0;
    size_t outlen = out.size();
    ok = ok && EVP_PKEY_derive(ctx, out.data(), &outlen) > 0 && outlen == out.size();
    EVP_PKEY_CTX_free(ctx);
    if (!ok) fail("HKDF derive failed");
    return out;
}

Bytes aead_seal(const std::array<uint8_t, 32>& key, std::span<const uint8_t> plaintext,
                std::span<const uint8_t> aad, EntropySource& entropy) {
    std::array<uint8_t, 12> nonce{};
    entropy.fill(nonce);

    Bytes out(12 + plaintext.size() + 16);
    std::memcpy(out.data(), nonce.data(), 12);

    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (!ctx) fail("cipher ctx failed");
    int len = 0;
    bool ok = EVP_EncryptInit_ex(ctx, EVP_chacha20_poly1305(), nullptr, key.data(), nonce.data()) == 1;
    if (ok && !aad.empty())
        ok = EVP_EncryptUpdate(ctx, nullptr, &len, aad.data(), static_cast<int>(aad.size())) == 1;
    if (ok && !plaintext.empty())
        ok = EVP_EncryptUpdate(ctx, out.data() + 12, &len, plaintext.data(),
                               static_cast<int>(plaintext.size())) == 1 &&
             static_cast<size_t>(len) == plaintext.size();
    int fin = 0;
    ok = ok && EVP_EncryptFinal_ex(ctx, out.data() + 12 + plaintext.size(), &fin) == 1 && fin == 0;
    ok = ok && EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_AEAD_GET_TAG, 16,
                                   out.data() + 12 + plaintext.size()) == 1;
    EVP_CIPHER_CTX_free(ctx);
    if (!ok) fail("AEAD seal failed");
    return out;
}

bool aead_open(const std::array<uint8_t, 32>& key, std::span<const uint8_t> sealed,
               std::span<const uint8_t> aad, Bytes& plaintext_out) {
    if (sealed.size() < kAeadOverhead) return false;
    const uint8_t* nonce = sealed.data();
    const uint8_t* ct = sealed.data() + 12;
    size_t ct_len = sealed.size() - kAeadOverhead;
    const uint8_t* tag = sealed.data() + 12 + ct_len;

    Bytes out(ct_len);
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (!ctx) fail("cipher ctx failed");
    int len = 0;
    bool ok = EVP_DecryptInit_ex(ctx, EVP_chacha20_poly1305(), nullptr, key.data(), nonce) == 1;
    if (ok && !aad.empty())
        ok = EVP_DecryptUpdate(ctx, nullptr, &len, aad.data(), static_cast<int>(aad.size())) == 1;
    if (ok && ct_len > 0)
        ok = EVP_DecryptUpdate(ctx, out.data(), &len, ct, static_cast<int>(ct_len)) == 1 &&
             static_cast<size_t>(len) == ct_len;
    ok = ok && EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_AEAD_SET_TAG, 16, const_cast<uint8_t*>(tag)) == 1;
    int fin = 0;
    uint8_t scratch = 0;
    uint8_t* fin_ptr = out.empty() ? &scratch : out.data() + ct_len;
    ok = ok && EVP_DecryptFinal_ex(ctx, fin_ptr, &fin) == 1 && fin == 0;
    EVP_CIPHER_CTX_free(ctx);
    if (!ok) return false;
    plaintext_out = std::move(out);
    return true;
}

}  // namespace rxgov::pre
