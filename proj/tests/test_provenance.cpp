#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "flow_fixture.hpp"

using namespace rxgov;
using namespace rxgov::provenance;
using rxgov::testing::Flow;

namespace {

// Independent oracle: walk raw blocks and reconstruct the access trail from
// transaction bytes alone, without the contract execution engine.
std::vector<contracts::AccessEvent> scan_accesses(const std::vector<ledger::Block>& blocks,
                                                  uint64_t rx) {
    std::vector<contracts::AccessEvent> out;
    for (const auto& b : blocks) {
        for (size_t i = 0; i < b.tx_list.size(); ++i) {
            const auto& tx = b.tx_list[i];
            if (tx.instance_id != rx || !b.results[i].ok) continue;
            if (tx.method == contracts::method::kCreatePrescription) {
                out.push_back({tx.sender, contracts::kCreationItem, "create", b.height});
            } else if (tx.method == contracts::method::kRecordAccess) {
                auto p = contracts::RecordAccessPayload::parse(tx.payload);
                out.push_back({tx.sender, p.item, p.purpose, b.height});
            }
        }
    }
    return out;
}

struct ScannedRequest {
    uint64_t height = 0;
    ledger::Address requester;
    std::vector<uint8_t> items;
};

std::map<uint64_t, ScannedRequest> scan_requests(const std::vector<ledger::Block>& blocks,
                                                 uint64_t consent) {
    std::map<uint64_t, ScannedRequest> out;
    for (const auto& b : blocks)
        for (size_t i = 0; i < b.tx_list.size(); ++i) {
            const auto& tx = b.tx_list[i];
            if (tx.instance_id != consent || !b.results[i].ok) continue;
            if (tx.method != contracts::method::kRequestDelegation) continue;
            auto p = contracts::RequestDelegationPayload::parse(tx.payload);
            ByteReader r(b.results[i].output);
            out.emplace(r.u64(), ScannedRequest{b.height, tx.sender, p.items});
        }
    return out;
}

size_t scan_grant_count(const std::vector<ledger::Block>& blocks, uint64_t consent) {
    size_t n = 0;
    for (const auto& b : blocks)
        for (size_t i = 0; i < b.tx_list.size(); ++i) {
            const auto& tx = b.tx_list[i];
            if (tx.instance_id != consent || !b.results[i].ok) continue;
            if (tx.method != contracts::method::kSetConsent) continue;
            n += contracts::SetConsentPayload::parse(tx.payload).grants.size();
        }
    return n;
}

}  // namespace

TEST_CASE("access history equals both the contract trail and a raw scan") {
    Flow f(201);
    f.full_flow();

    auto history = access_history(f.led.genesis_info(), f.led.chain(), f.rx);
    auto oracle = scan_accesses(f.led.chain(), f.rx);
    CHECK(history == oracle);

    const auto& live =
        std::get<contracts::PrescriptionState>(f.led.get_state(f.rx).state).last_access;
    CHECK(history == live);

    REQUIRE(!history.empty());
    CHECK(history[0].item == contracts::kCreationItem);
    CHECK(history[0].accessor == f.doctor.address);
    for (size_t i = 1; i < history.size(); ++i)
        CHECK(history[i - 1].height <= history[i].height);
}

TEST_CASE("untouched prescriptions show only their creation") {
    Flow f(202);
    f.setup_instances();
    f.make_plaintexts();
    f.write_prescription();

    auto history = access_history(f.led.genesis_info(), f.led.chain(), f.rx);
    REQUIRE(history.size() == 1);
    CHECK(history[0].item == contracts::kCreationItem);
}

TEST_CASE("unknown or mismatched instances are refused") {
    Flow f(203);
    f.full_flow();
    CHECK_THROWS_AS(access_history(f.led.genesis_info(), f.led.chain(), 999), UnknownInstance);
    CHECK_THROWS_AS(access_history(f.led.genesis_info(), f.led.chain(), f.consent),
                    UnknownInstance);
    CHECK_THROWS_AS(lineage(f.led.genesis_info(), f.led.chain(), f.sales), UnknownInstance);
    CHECK_THROWS_AS(consent_history(f.led.genesis_info(), f.led.chain(), f.rx),
                    UnknownInstance);
    CHECK_THROWS_AS(
        compliance_report(f.led.genesis_info(), f.led.chain(), f.sales, f.control),
        UnknownInstance);
}

TEST_CASE("consent history lists every decision with request provenance") {
    Flow f(204);
    f.full_flow();

    auto history = consent_history(f.led.genesis_info(), f.led.chain(), f.consent);
    REQUIRE(history.size() == 4);

    auto requests = scan_requests(f.led.chain(), f.consent);
    REQUIRE(requests.size() == 4);
    for (const auto& d : history) {
        const auto& scanned = requests.at(d.request_id);
        CHECK(d.requester == scanned.requester);
        CHECK(d.requested == scanned.items);
        CHECK(d.request_height == scanned.height);
        CHECK(d.status != contracts::ConsentStatus::Pending);
        if (d.status == contracts::ConsentStatus::Granted) {
            CHECK(!d.granted.empty());
            CHECK(d.decision_height >= d.request_height);
        } else {
            CHECK(d.granted.empty());
        }
    }

    // The pharmacy's PI request was filtered, the regulator's DIA denied.
    CHECK(history[0].requested == std::vector<uint8_t>{1, 2});
    CHECK(history[0].granted == std::vector<uint8_t>{2});
    CHECK(history[3].status == contracts::ConsentStatus::Denied);

    size_t granted_total = 0;
    for (const auto& d : history) granted_total += d.granted.size();
    CHECK(granted_total == scan_grant_count(f.led.chain(), f.consent));
}

TEST_CASE("empty consent books give empty histories") {
    Flow f(205);
    f.setup_instances();
    CHECK(consent_history(f.led.genesis_info(), f.led.chain(), f.consent).empty());
}

TEST_CASE("lineage composes origin, accesses and consents") {
    Flow f(206);
    f.full_flow();

    auto record = lineage(f.led.genesis_info(), f.led.chain(), f.rx);
    CHECK(record.prescription_id == f.rx);
    CHECK(record.origin == f.doctor.address);
    CHECK(record.origin_height ==
          std::get<contracts::PrescriptionState>(f.led.get_state(f.rx).state).created_at);
    CHECK(record.accesses == access_history(f.led.genesis_info(), f.led.chain(), f.rx));
    CHECK(record.consents == consent_history(f.led.genesis_info(), f.led.chain(), f.consent));
}

TEST_CASE("compliance report mirrors the regulator workflow") {
    Flow f(207);
    f.full_flow();

    auto audit = compliance_report(f.led.genesis_info(), f.led.chain(), f.control, f.sales);
    auto live = stakeholder::regulator_verify_compliance(f.regulator, f.control, f.sales);
    CHECK(audit.supplied == live.supplied);
    CHECK(audit.sold == live.sold);
    CHECK(audit.sales_count == live.sales_count);
    CHECK(audit.consistent == live.consistent);
    CHECK(audit.consistent);
}

TEST_CASE("fold-derived state agrees with the live ledger for every instance") {
    Flow f(208);
    f.full_flow();

    auto folded = replay_instances(f.led.genesis_info(), f.led.chain());
    const auto& live = f.led.instances();
    REQUIRE(folded.size() == live.size());
    for (const auto& [id, inst] : live)
        CHECK(contracts::encode_instance(folded.at(id)) == contracts::encode_instance(inst));
}

TEST_CASE("identical seeds give byte-identical lineage records") {
    Flow a(209), b(209);
    a.full_flow();
    b.full_flow();
    Bytes ba = lineage_to_bytes(lineage(a.led.genesis_info(), a.led.chain(), a.rx));
    Bytes bb = lineage_to_bytes(lineage(b.led.genesis_info(), b.led.chain(), b.rx));
    CHECK(ba == bb);
}

TEST_CASE("lineage records round-trip through bytes and files") {
    Flow f(210);
    f.full_flow();
    auto record = lineage(f.led.genesis_info(), f.led.chain(), f.rx);

    CHECK(lineage_from_bytes(lineage_to_bytes(record)) == record);

    auto path = (std::filesystem::temp_directory_path() / "rxgov_lineage.bin").string();
    write_lineage_record(path, record);
    CHECK(read_lineage_record(path) == record);
    std::filesystem::remove(path);

    Bytes tampered = lineage_to_bytes(record);
    tampered.push_back(0);
    CHECK_THROWS_AS(lineage_from_bytes(tampered), DecodeError);

    auto text = lineage_report(record);
    CHECK(text.find("prescription") != std::string::npos);
    CHECK(text.find(f.doctor.address.hex()) != std::string::npos);
    CHECK(text.find("MED") != std::string::npos);
}

TEST_CASE("provenance works against exported chain files") {
    Flow f(211);
    f.full_flow();
    auto path = (std::filesystem::temp_directory_path() / "rxgov_prov_chain.txt").string();
    f.led.export_chain(path);

    auto cf = ledger::Ledger::load_chain(path);
    auto verdict = ledger::Ledger::verify_chain(cf.genesis, cf.blocks, &cf.head);
    REQUIRE(verdict.valid);

    CHECK(lineage(cf.genesis, cf.blocks, f.rx) ==
          lineage(f.led.genesis_info(), f.led.chain(), f.rx));
    std::filesystem::remove(path);
}
