#include "rxgov/pre/pre.hpp"

#include <fstream>
#include <sstream>
#include <utility>

namespace rxgov::pre {

namespace {

void put_part(ByteWriter& w, const Point& p) {
    auto b = p.to_bytes();
    w.blob(b);
}
void put_part(ByteWriter& w, const Scalar& s) {
    auto b = s.to_bytes();
    w.blob(b);
}
void put_part(ByteWriter& w, std::span<const uint8_t> b) { w.blob(b); }

template <typename... Parts>
Scalar hash_parts(std::string_view tag, const Parts&... parts) {
    ByteWriter w;
    w.str(tag);
    (put_part(w, parts), ...);
    return Scalar::from_bytes_mod_q(sha256(w.bytes()));
}

Scalar capsule_challenge(const Point& e, const Point& v) {
    return hash_parts("rxgov/pre/capsule", e, v);
}

std::array<uint8_t, 32> shared_key(const Point& shared, const PublicKey& pk_delegator) {
    auto ikm = shared.to_bytes();
    auto info = pk_delegator.to_bytes();
    return kdf(ikm, info);
}

}  // namespace

// ---------------------------------------------------------------------------
// Keys

KeyPair keygen(EntropySource& entropy) {
    Scalar s = Scalar::random_nonzero(entropy);
    Point p = Point::base_mul(s);
    return KeyPair{SecretKey(std::move(s)), PublicKey::from_bytes(p.to_bytes())};
}

SecretKey SecretKey::from_bytes(std::span<const uint8_t> bytes) {
    Scalar s = Scalar::from_bytes(bytes);
    if (s.is_zero()) throw InvalidScalar("secret key must be nonzero");
    return SecretKey(std::move(s));
}

PublicKey PublicKey::from_secret(const SecretKey& sk) {
    return PublicKey(Point::base_mul(sk.scalar()));
}

PublicKey PublicKey::from_bytes(std::span<const uint8_t> bytes) {
    return PublicKey(Point::from_bytes(bytes));
}

// ---------------------------------------------------------------------------
// Capsule / Ciphertext

bool Capsule::verify() const {
    Scalar h = capsule_challenge(e, v);
    return Point::base_mul(s) == v.add(e.mul(h));
}

void Capsule::write(ByteWriter& w) const {
    w.raw(e.to_bytes());
    w.raw(v.to_bytes());
    w.raw(s.to_bytes());
}

Capsule Capsule::read(ByteReader& r) {
    auto e = Point::from_bytes(r.fixed<kPointBytes>());
    auto v = Point::from_bytes(r.fixed<kPointBytes>());
    auto s = Scalar::from_bytes(r.fixed<kScalarBytes>());
    return Capsule{std::move(e), std::move(v), std::move(s)};
}

Bytes Capsule::to_bytes() const {
    ByteWriter w;
    write(w);
    return w.take();
}

Capsule Capsule::from_bytes(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    Capsule c = read(r);
    r.expect_done();
    return c;
}

bool Capsule::operator==(const Capsule& other) const {
    return e == other.e && v == other.v && s == other.s;
}

void Ciphertext::write(ByteWriter& w) const {
    capsule.write(w);
    w.blob(dem_payload);
    w.blob(associated_data);
}

Ciphertext Ciphertext::read(ByteReader& r) {
    Capsule c = Capsule::read(r);
    Bytes dem = r.blob();
    Bytes ad = r.blob();
    return Ciphertext{std::move(c), std::move(dem), std::move(ad)};
}

Bytes Ciphertext::to_bytes() const {
    ByteWriter w;
    write(w);
    return w.take();
}

Ciphertext Ciphertext::from_bytes(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    Ciphertext ct = read(r);
    r.expect_done();
    return ct;
}

// ---------------------------------------------------------------------------
// Encrypt / decrypt (delegator path)

Ciphertext encrypt(const PublicKey& pk, std::span<const uint8_t> plaintext,
                   std::span<const uint8_t> associated_data, EntropySource& entropy) {
    Scalar r = Scalar::random_nonzero(entropy);
    Scalar u = Scalar::random_nonzero(entropy);
    Point e = Point::base_mul(r);
    Point v = Point::base_mul(u);
    Scalar s = u.add(r.mul(capsule_challenge(e, v)));

    Point shared = pk.point().mul(r.add(u));
    auto key = shared_key(shared, pk);
    Bytes dem = aead_seal(key, plaintext, associated_data, entropy);
    return Ciphertext{Capsule{std::move(e), std::move(v), std::move(s)}, std::move(dem),
                      Bytes(associated_data.begin(), associated_data.end())};
}

Bytes decrypt_original(const SecretKey& sk, const Ciphertext& ct) {
    if (!ct.capsule.verify()) throw CapsuleInvalid("capsule check failed");
    Point shared = ct.capsule.e.add(ct.capsule.v).mul(sk.scalar());
    auto key = shared_key(shared, PublicKey::from_secret(sk));
    Bytes plaintext;
    if (!aead_open(key, ct.dem_payload, ct.associated_data, plaintext))
        throw DecryptionFailed("payload authentication failed");
    return plaintext;
}

// ---------------------------------------------------------------------------
// Delegation

DelegationKey generate_delegation_key(const SecretKey& sk_delegator, const PublicKey& pk_delegatee,
                                      EntropySource& entropy) {
    PublicKey pk_delegator = PublicKey::from_secret(sk_delegator);

    Scalar x = Scalar::random_nonzero(entropy);
    Point precursor = Point::base_mul(x);
    Point dh = pk_delegatee.point().mul(x);
    Scalar d = hash_parts("rxgov/pre/dh", precursor, pk_delegatee.point(), dh);
    Scalar rk = sk_delegator.scalar().mul(d.invert());

    Scalar id = Scalar::random_nonzero(entropy);
    Point u1 = Point::aux_generator().mul(rk);

    auto sk_bytes = sk_delegator.to_bytes();
    Scalar y = hash_parts("rxgov/pre/kfrag-y", std::span<const uint8_t>(sk_bytes), id, precursor,
                          u1, pk_delegatee.point());
    Point big_y = Point::base_mul(y);
    Scalar z1 = hash_parts("rxgov/pre/kfrag-sig", big_y, id, pk_delegator.point(),
                           pk_delegatee.point(), u1, precursor);
    Scalar z2 = y.sub(sk_delegator.scalar().mul(z1));

    ByteWriter pw;
    pw.raw(z1.to_bytes());
    pw.raw(z2.to_bytes());
    return DelegationKey{std::move(id), std::move(rk), std::move(precursor), std::move(u1),
                         pw.take()};
}

bool verify_delegation_key(const DelegationKey& dk, const PublicKey& pk_delegator,
                           const PublicKey& pk_delegatee) {
    if (!(Point::aux_generator().mul(dk.rk) == dk.delegatee_binding)) return false;
    if (dk.proof.size() != 2 * kScalarBytes) return false;
    Scalar z1, z2;
    try {
        ByteReader r(dk.proof);
        z1 = Scalar::from_bytes(r.fixed<kScalarBytes>());
        z2 = Scalar::from_bytes(r.fixed<kScalarBytes>());
    } catch (const InvalidScalar&) {
        return false;
    }
    Point big_y = Point::base_mul(z2).add(pk_delegator.point().mul(z1));
    Scalar expect = hash_parts("rxgov/pre/kfrag-sig", big_y, dk.id, pk_delegator.point(),
                               pk_delegatee.point(), dk.delegatee_binding, dk.precursor);
    return z1 == expect;
}

Bytes DelegationKey::to_bytes() const {
    ByteWriter w;
    w.raw(id.to_bytes());
    w.raw(rk.to_bytes());
    w.raw(precursor.to_bytes());
    w.raw(delegatee_binding.to_bytes());
    w.blob(proof);
    return w.take();
}

DelegationKey DelegationKey::from_bytes(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    auto id = Scalar::from_bytes(r.fixed<kScalarBytes>());
    auto rk = Scalar::from_bytes(r.fixed<kScalarBytes>());
    auto precursor = Point::from_bytes(r.fixed<kPointBytes>());
    auto binding = Point::from_bytes(r.fixed<kPointBytes>());
    Bytes proof = r.blob();
    r.expect_done();
    return DelegationKey{std::move(id), std::move(rk), std::move(precursor), std::move(binding),
                         std::move(proof)};
}

bool DelegationKey::operator==(const DelegationKey& other) const {
    return id == other.id && rk == other.rk && precursor == other.precursor &&
           delegatee_binding == other.delegatee_binding && proof == other.proof;
}

// ---------------------------------------------------------------------------
// Re-encryption

ReEncryption reencrypt(const DelegationKey& dk, const Capsule& capsule) {
    if (!capsule.verify()) throw CapsuleInvalid("capsule check failed");
    Point u = Point::aux_generator();
    if (!(u.mul(dk.rk) == dk.delegatee_binding))
        throw DelegationKeyInvalid("rk does not match delegatee binding");

    Point e1 = capsule.e.mul(dk.rk);
    Point v1 = capsule.v.mul(dk.rk);

    // Deterministic proof nonce: re-encryption stays entropy-free.
    auto rk_bytes = dk.rk.to_bytes();
    Scalar t = hash_parts("rxgov/pre/cfrag-nonce", std::span<const uint8_t>(rk_bytes), capsule.e,
                          capsule.v, dk.delegatee_binding);
    Point e2 = capsule.e.mul(t);
    Point v2 = capsule.v.mul(t);
    Point u2 = u.mul(t);
    Scalar h = hash_parts("rxgov/pre/cfrag-proof", capsule.e, capsule.v, e1, v1, dk.precursor,
                          dk.delegatee_binding, e2, v2, u2);
    Scalar rho = t.add(h.mul(dk.rk));

    ByteWriter pw;
    pw.raw(e2.to_bytes());
    pw.raw(v2.to_bytes());
    pw.raw(u2.to_bytes());
    pw.raw(rho.to_bytes());
    pw.raw(dk.delegatee_binding.to_bytes());
    return ReEncryption{std::move(e1), std::move(v1), Point(dk.precursor), pw.take()};
}

bool ReEncryption::verify(const Capsule& capsule) const {
    if (!capsule.verify()) return false;
    if (proof.size() != 4 * kPointBytes + kScalarBytes) return false;
    try {
        ByteReader r(proof);
        Point e2 = Point::from_bytes(r.fixed<kPointBytes>());
        Point v2 = Point::from_bytes(r.fixed<kPointBytes>());
        Point u2 = Point::from_bytes(r.fixed<kPointBytes>());
        Scalar rho = Scalar::from_bytes(r.fixed<kScalarBytes>());
        Point u1 = Point::from_bytes(r.fixed<kPointBytes>());

        Scalar h = hash_parts("rxgov/pre/cfrag-proof", capsule.e, capsule.v, e_prime, v_prime,
                              precursor, u1, e2, v2, u2);
        if (!(capsule.e.mul(rho) == e2.add(e_prime.mul(h)))) return false;
        if (!(capsule.v.mul(rho) == v2.add(v_prime.mul(h)))) return false;
        if (!(Point::aux_generator().mul(rho) == u2.add(u1.mul(h)))) return false;
        return true;
    } catch (const CryptoError&) {
        return false;
    }
}

Bytes ReEncryption::to_bytes() const {
    ByteWriter w;
    w.raw(e_prime.to_bytes());
    w.raw(v_prime.to_bytes());
    w.raw(precursor.to_bytes());
    w.blob(proof);
    return w.take();
}

ReEncryption ReEncryption::from_bytes(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    auto e1 = Point::from_bytes(r.fixed<kPointBytes>());
    auto v1 = Point::from_bytes(r.fixed<kPointBytes>());
    auto precursor = Point::from_bytes(r.fixed<kPointBytes>());
    Bytes proof = r.blob();
    r.expect_done();
    return ReEncryption{std::move(e1), std::move(v1), std::move(precursor), std::move(proof)};
}

bool ReEncryption::operator==(const ReEncryption& other) const {
    return e_prime == other.e_prime && v_prime == other.v_prime &&
           precursor == other.precursor && proof == other.proof;
}

Bytes decrypt_reencrypted(const SecretKey& sk_delegatee, const PublicKey& pk_delegator,
                          const ReEncryption& re, const Ciphertext& ct) {
    if (!re.verify(ct.capsule)) throw ReEncryptionInvalid("re-encryption check failed");

    PublicKey pk_delegatee = PublicKey::from_secret(sk_delegatee);
    Point dh = re.precursor.mul(sk_delegatee.scalar());
    Scalar d = hash_parts("rxgov/pre/dh", re.precursor, pk_delegatee.point(), dh);

    Point shared = re.e_prime.add(re.v_prime).mul(d);
    auto key = shared_key(shared, pk_delegator);
    Bytes plaintext;
    if (!aead_open(key, ct.dem_payload, ct.associated_data, plaintext))
        throw DecryptionFailed("payload authentication failed");
    return plaintext;
}

// ---------------------------------------------------------------------------
// Known-answer records

KatRecord make_kat_record(std::span<const uint8_t> seed) {
    SeededEntropy entropy(seed);
    KeyPair kp = keygen(entropy);
    Bytes plaintext(64);
    entropy.fill(plaintext);
    Ciphertext ct = encrypt(kp.pk, plaintext, {}, entropy);
    auto pk_bytes = kp.pk.to_bytes();
    return KatRecord{Bytes(seed.begin(), seed.end()), Bytes(pk_bytes.begin(), pk_bytes.end()),
                     sha256(plaintext), sha256(ct.to_bytes())};
}

bool check_kat_record(const KatRecord& rec) { return make_kat_record(rec.seed) == rec; }

std::string kat_to_line(const KatRecord& rec) {
    return to_hex(rec.seed) + "," + to_hex(rec.pk) + "," + to_hex(rec.plaintext_hash) + "," +
           to_hex(rec.ciphertext_hash);
}

namespace {

std::array<uint8_t, kDigestBytes> digest_from_hex(const std::string& hex) {
    Bytes b = from_hex(hex);
    if (b.size() != kDigestBytes) throw DecodeError("bad digest length in record");
    std::array<uint8_t, kDigestBytes> out{};
    std::copy(b.begin(), b.end(), out.begin());
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

KatRecord kat_from_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (fields.size() != 4) throw DecodeError("record needs 4 comma-separated fields");
    return KatRecord{from_hex(fields[0]), from_hex(fields[1]), digest_from_hex(fields[2]),
                     digest_from_hex(fields[3])};
}

void write_kat_file(const std::string& path, const std::vector<KatRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& rec : records) out << kat_to_line(rec) << "\n";
}

std::vector<KatRecord> read_kat_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<KatRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        records.push_back(kat_from_line(line));
    }
    return records;
}

}  // namespace rxgov::pre
