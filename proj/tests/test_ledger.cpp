#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rxgov/ledger/ledger.hpp"
#include "rxgov/ledger/signature.hpp"
#include "rxgov/rand.hpp"

using namespace rxgov;
using namespace rxgov::ledger;
using contracts::Item;
using contracts::Kind;
namespace method = contracts::method;

namespace {

struct Actor {
    pre::KeyPair kp;
    Address addr;
};

Actor join(Ledger& led, Role role, const std::string& name, pre::EntropySource& entropy) {
    Actor a{pre::keygen(entropy), {}};
    a.addr = led.register_account(a.kp.pk, role, name);
    return a;
}

SignedTransaction tx_of(const Actor& a, Ledger& led, uint64_t instance, const char* m,
                        Bytes payload) {
    return make_transaction(a.kp.sk, a.addr, led.next_nonce(a.addr), instance, m,
                            std::move(payload));
}

Bytes valid_ciphertext_bytes(const pre::PublicKey& pk, pre::EntropySource& entropy) {
    return pre::encrypt(pk, random_bytes(entropy, 48), {}, entropy).to_bytes();
}

// Doctor-and-patient ledger with one committed prescription instance.
struct Net {
    pre::SeededEntropy entropy{12345u};
    Ledger led;
    Actor doctor, patient, pharmacy, regulator;
    uint64_t rx_id = 0;

    explicit Net(LedgerConfig cfg = {})
        : led(cfg),
          doctor(join(led, Role::Doctor, "dr", entropy)),
          patient(join(led, Role::Patient, "pat", entropy)),
          pharmacy(join(led, Role::Pharmacy, "pharm", entropy)),
          regulator(join(led, Role::Regulator, "reg", entropy)) {}

    uint64_t instantiate(const Actor& a, Kind kind, const Address& recipient, uint64_t mint = 0) {
        auto res = led.submit(tx_of(a, led, 0, method::kInstantiate,
                                    contracts::InstantiatePayload{kind, recipient, mint}.build()));
        REQUIRE(res.accepted());
        const Block& b = led.commit();
        REQUIRE(b.results.back().ok);
        ByteReader r(b.results.back().output);
        return r.u64();
    }

    void make_prescription() {
        rx_id = instantiate(doctor, Kind::Prescription, patient.addr);
        contracts::CreatePrescriptionPayload p;
        p.c_pi = valid_ciphertext_bytes(patient.kp.pk, entropy);
        p.c_med = valid_ciphertext_bytes(patient.kp.pk, entropy);
        p.c_dia = valid_ciphertext_bytes(patient.kp.pk, entropy);
        REQUIRE(led.submit(tx_of(doctor, led, rx_id, method::kCreatePrescription, p.build()))
                    .accepted());
        REQUIRE(led.commit().results.back().ok);
    }
};

}  // namespace

TEST_CASE("signatures verify and reject foreign keys") {
    pre::SeededEntropy entropy(1u);
    auto kp = pre::keygen(entropy);
    auto other = pre::keygen(entropy);
    Bytes msg{1, 2, 3};
    Bytes sig = sign_message(kp.sk, msg);
    CHECK(verify_signature(kp.pk, msg, sig));
    CHECK_FALSE(verify_signature(other.pk, msg, sig));
    Bytes wrong = msg;
    wrong[0] ^= 1;
    CHECK_FALSE(verify_signature(kp.pk, wrong, sig));
    Bytes cut(sig.begin(), sig.end() - 1);
    CHECK_FALSE(verify_signature(kp.pk, msg, cut));
    for (size_t bit = 0; bit < sig.size() * 8; bit += 7) {
        Bytes flipped = sig;
        flipped[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
        CHECK_FALSE(verify_signature(kp.pk, msg, flipped));
    }
}

TEST_CASE("deterministic signing") {
    pre::SeededEntropy entropy(2u);
    auto kp = pre::keygen(entropy);
    Bytes msg{9, 9, 9};
    CHECK(sign_message(kp.sk, msg) == sign_message(kp.sk, msg));
}

TEST_CASE("account registration") {
    pre::SeededEntropy entropy(3u);
    Ledger led;
    auto kp = pre::keygen(entropy);
    Address a = led.register_account(kp.pk, Role::Patient, "p");
    CHECK(a == Address::from_public_key(kp.pk));
    CHECK_THROWS_AS(led.register_account(kp.pk, Role::Patient, "again"), AlreadyRegistered);

    auto kp2 = pre::keygen(entropy);
    Address b = led.register_account(kp2.pk, Role::Doctor, "d");
    CHECK_FALSE(a == b);
    CHECK(led.accounts().size() == 2);
}

TEST_CASE("registration closes once the chain starts") {
    Net net;
    net.led.commit();
    pre::SeededEntropy entropy(4u);
    auto kp = pre::keygen(entropy);
    CHECK_THROWS_AS(net.led.register_account(kp.pk, Role::Patient, "late"), LateRegistration);
}

TEST_CASE("submit validation order and reasons") {
    Net net;
    net.make_prescription();

    auto good = tx_of(net.pharmacy, net.led, net.rx_id, method::kRecordAccess,
                      contracts::RecordAccessPayload{2, "dispense"}.build());
    SUBCASE("happy path") { CHECK(net.led.submit(good).accepted()); }

    SUBCASE("unknown sender") {
        pre::SeededEntropy e(5u);
        auto stranger = pre::keygen(e);
        auto tx = make_transaction(stranger.sk, Address::from_public_key(stranger.pk), 0,
                                   net.rx_id, method::kRecordAccess,
                                   contracts::RecordAccessPayload{2, "x"}.build());
        CHECK(net.led.submit(tx).status == SubmitStatus::UnknownSender);
    }

    SUBCASE("foreign signature") {
        auto forged = good;
        forged.signature = sign_message(net.doctor.kp.sk, forged.signing_bytes());
        CHECK(net.led.submit(forged).status == SubmitStatus::BadSignature);
    }

    SUBCASE("tampered field breaks the signature") {
        auto tampered = good;
        tampered.instance_id += 1;
        CHECK(net.led.submit(tampered).status == SubmitStatus::BadSignature);
    }

    SUBCASE("nonce replay") {
        CHECK(net.led.submit(good).accepted());
        CHECK(net.led.submit(good).status == SubmitStatus::BadNonce);
        net.led.commit();
        CHECK(net.led.submit(good).status == SubmitStatus::BadNonce);
    }

    SUBCASE("unknown instance") {
        auto tx = tx_of(net.pharmacy, net.led, 777, method::kRecordAccess,
                        contracts::RecordAccessPayload{2, "x"}.build());
        CHECK(net.led.submit(tx).status == SubmitStatus::UnknownInstance);
    }

    SUBCASE("rejected txs leave no trace") {
        Hash before = net.led.state_root();
        size_t pool = net.led.mempool_size();
        auto forged = good;
        forged.signature[10] ^= 1;
        CHECK_FALSE(net.led.submit(forged).accepted());
        CHECK(net.led.mempool_size() == pool);
        CHECK(net.led.state_root() == before);
    }
}

TEST_CASE("block production honors the interval") {
    Net net;  // default interval 6130
    net.led.commit();
    uint64_t t0 = net.led.chain().back().timestamp_ms;

    auto tx1 = tx_of(net.doctor, net.led, 0, method::kInstantiate,
                     contracts::InstantiatePayload{Kind::Prescription, net.patient.addr}.build());
    REQUIRE(net.led.submit(tx1).accepted());
    auto tx2 = tx_of(net.pharmacy, net.led, 0, method::kInstantiate,
                     contracts::InstantiatePayload{Kind::Sales, net.patient.addr}.build());
    REQUIRE(net.led.submit(tx2).accepted());

    CHECK_FALSE(net.led.produce_block(t0 + 6129).has_value());
    auto b = net.led.produce_block(t0 + 6130);
    REQUIRE(b.has_value());
    CHECK(b->tx_list.size() == 2);
    CHECK(b->tx_list[0] == tx1);
    CHECK(b->tx_list[1] == tx2);
    CHECK(b->timestamp_ms == t0 + 6130);
}

TEST_CASE("empty blocks are configurable") {
    SUBCASE("default keeps empty blocks") {
        Ledger led;
        auto b = led.produce_block(6130);
        REQUIRE(b.has_value());
        CHECK(b->tx_list.empty());
        CHECK(b->height == 1);
    }
    SUBCASE("skip-empty suppresses them") {
        Ledger led(LedgerConfig{6130, true});
        CHECK_FALSE(led.produce_block(6130).has_value());
        CHECK_FALSE(led.produce_block(100 * 6130).has_value());
    }
}

TEST_CASE("one production opportunity per elapsed interval") {
    Ledger led(LedgerConfig{1000, false});
    int produced = 0;
    for (uint64_t t = 0; t <= 5500; t += 500)
        if (led.produce_block(t)) ++produced;
    CHECK(produced == 5);  // at 1000..5000; genesis itself sits at t=0
}

TEST_CASE("failed methods stay on-chain without touching state") {
    Net net;
    uint64_t consent = net.instantiate(net.patient, Kind::Consent, net.patient.addr);
    Hash before = net.led.state_root();

    // Wrong-kind call: create_prescription against a consent instance.
    contracts::CreatePrescriptionPayload p;
    p.c_pi = p.c_med = p.c_dia = valid_ciphertext_bytes(net.patient.kp.pk, net.entropy);
    REQUIRE(net.led
                .submit(tx_of(net.patient, net.led, consent, method::kCreatePrescription,
                              p.build()))
                .accepted());
    const Block& b = net.led.commit();
    REQUIRE(b.tx_list.size() == 1);
    CHECK_FALSE(b.results[0].ok);
    CHECK(b.results[0].error == contracts::errc::kWrongKind);
    CHECK(net.led.state_root() == before);
    CHECK(b.state_root == before);
}

TEST_CASE("reads return snapshots and flag missing data") {
    Net net;
    net.make_prescription();
    const auto& inst = net.led.get_state(net.rx_id);
    const auto& state = std::get<contracts::PrescriptionState>(inst.state);
    CHECK(state.created);
    CHECK_FALSE(state.c_pi.empty());
    CHECK_FALSE(state.c_med.empty());
    CHECK_FALSE(state.c_dia.empty());

    CHECK(net.led.get_block(0).height == 0);
    CHECK(net.led.get_block(0).prev_hash == Hash{});
    CHECK_THROWS_AS(net.led.get_state(404), NotFound);
    CHECK_THROWS_AS(net.led.get_block(404), NotFound);
}

TEST_CASE("chain replays to identical state roots") {
    Net net;
    net.make_prescription();
    uint64_t consent = net.instantiate(net.patient, Kind::Consent, net.patient.addr);
    REQUIRE(net.led
                .submit(tx_of(net.pharmacy, net.led, consent, method::kRequestDelegation,
                              contracts::RequestDelegationPayload{
                                  Bytes(net.pharmacy.kp.pk.to_bytes().begin(),
                                        net.pharmacy.kp.pk.to_bytes().end()),
                                  {2}}
                                  .build()))
                .accepted());
    net.led.commit();

    auto res = Ledger::verify_chain(net.led.genesis_info(), net.led.chain());
    INFO(res.reason);
    CHECK(res.valid);
}

TEST_CASE("chain export round-trips and verifies") {
    Net net;
    net.make_prescription();
    auto path = (std::filesystem::temp_directory_path() / "rxgov_chain_rt.txt").string();
    net.led.export_chain(path);

    ChainFile cf = Ledger::load_chain(path);
    REQUIRE(cf.blocks.size() == net.led.chain().size());
    for (size_t i = 0; i < cf.blocks.size(); ++i)
        CHECK(cf.blocks[i].to_bytes() == net.led.chain()[i].to_bytes());
    CHECK(cf.genesis.to_bytes() == net.led.genesis_info().to_bytes());
    CHECK(cf.head == block_hash(net.led.chain().back()));

    auto verdict = Ledger::verify_file(path);
    INFO(verdict.reason);
    CHECK(verdict.valid);
    std::filesystem::remove(path);
}

TEST_CASE("payload mutation is detected at or before its height") {
    Net net;
    net.make_prescription();
    net.instantiate(net.patient, Kind::Report, net.regulator.addr);

    ChainFile cf;
    cf.genesis = net.led.genesis_info();
    cf.blocks = net.led.chain();
    cf.head = block_hash(cf.blocks.back());

    // Block 2 carries create_prescription; flip one payload byte.
    uint64_t target = 2;
    cf.blocks[target].tx_list[0].payload[40] ^= 0x01;
    auto res = Ledger::verify_chain(cf.genesis, cf.blocks, &cf.head);
    CHECK_FALSE(res.valid);
    CHECK(res.height <= target);
}

TEST_CASE("transaction reorder is detected at that height") {
    Net net;
    net.make_prescription();
    auto a = tx_of(net.pharmacy, net.led, net.rx_id, method::kRecordAccess,
                   contracts::RecordAccessPayload{2, "dispense"}.build());
    auto b = tx_of(net.regulator, net.led, net.rx_id, method::kRecordAccess,
                   contracts::RecordAccessPayload{2, "audit"}.build());
    REQUIRE(net.led.submit(a).accepted());
    REQUIRE(net.led.submit(b).accepted());
    net.led.commit();
    uint64_t target = net.led.chain().back().height;

    ChainFile cf;
    cf.genesis = net.led.genesis_info();
    cf.blocks = net.led.chain();
    cf.head = block_hash(cf.blocks.back());
    std::swap(cf.blocks[target].tx_list[0], cf.blocks[target].tx_list[1]);
    std::swap(cf.blocks[target].results[0], cf.blocks[target].results[1]);

    auto res = Ledger::verify_chain(cf.genesis, cf.blocks, &cf.head);
    CHECK_FALSE(res.valid);
    CHECK(res.height <= target);
}

TEST_CASE("forged result flags are detected") {
    Net net;
    net.make_prescription();
    ChainFile cf;
    cf.genesis = net.led.genesis_info();
    cf.blocks = net.led.chain();
    cf.head = block_hash(cf.blocks.back());
    cf.blocks[2].results[0].ok = false;
    cf.blocks[2].results[0].error = contracts::errc::kUnauthorizedSender;
    auto res = Ledger::verify_chain(cf.genesis, cf.blocks, &cf.head);
    CHECK_FALSE(res.valid);
    CHECK(res.height <= 2);
}

TEST_CASE("malformed chain files are rejected with a line number") {
    auto path = (std::filesystem::temp_directory_path() / "rxgov_chain_bad.txt").string();
    {
        std::ofstream out(path);
        out << "RXGOV-CHAIN v1\nGENESIS zz\n";
    }
    CHECK_THROWS_WITH_AS(Ledger::load_chain(path), doctest::Contains("line 2"), DecodeError);
    auto res = Ledger::verify_file(path);
    CHECK_FALSE(res.valid);
    CHECK(res.reason.find("ParseError") == 0);
    std::filesystem::remove(path);
}

TEST_CASE("block serialization round trips") {
    Net net;
    net.make_prescription();
    for (const auto& b : net.led.chain()) {
        Block parsed = Block::from_bytes(b.to_bytes());
        CHECK(parsed == b);
    }
    Bytes trailing = net.led.chain()[1].to_bytes();
    trailing.push_back(7);
    CHECK_THROWS_AS(Block::from_bytes(trailing), DecodeError);
}
