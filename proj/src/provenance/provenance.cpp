#include "rxgov/provenance/provenance.hpp"

#include <fstream>
#include <sstream>

namespace rxgov::provenance {

using contracts::ContractInstance;
using contracts::Kind;
using ledger::Address;
using ledger::Block;
using ledger::GenesisInfo;

namespace {

constexpr const char* kRecordMagic = "rxgov/lineage/v1";

struct Fold {
    std::map<uint64_t, ContractInstance> instances;
    // consent instance -> request id -> height the request landed at
    std::map<uint64_t, std::map<uint64_t, uint64_t>> request_heights;
    std::map<uint64_t, uint64_t> instantiated_at;
};

Fold fold_chain(const GenesisInfo& genesis, const std::vector<Block>& blocks) {
    ledger::AccountTable accounts;
    for (const auto& acct : genesis.accounts)
        accounts.emplace(acct.address, ledger::AccountRecord{pre::PublicKey::from_bytes(acct.pk),
                                                             acct.role, acct.name, 0});

    Fold fold;
    uint64_t next_id = 1;
    for (const Block& block : blocks) {
        for (const auto& tx : block.tx_list) {
            contracts::ExecContext ctx{accounts, fold.instances, next_id, block.height};
            auto res = contracts::apply_transaction(ctx, tx);
            if (!res.ok) continue;
            if (tx.method == contracts::method::kInstantiate) {
                ByteReader r(res.output);
                fold.instantiated_at.emplace(r.u64(), block.height);
            } else if (tx.method == contracts::method::kRequestDelegation) {
                ByteReader r(res.output);
                fold.request_heights[tx.instance_id].emplace(r.u64(), block.height);
            }
        }
    }
    return fold;
}

const ContractInstance& instance_of_kind(const Fold& fold, uint64_t id, Kind kind) {
    auto it = fold.instances.find(id);
    if (it == fold.instances.end() || it->second.kind != kind)
        throw UnknownInstance("no " + contracts::kind_name(kind) + " instance " +
                              std::to_string(id));
    return it->second;
}

std::vector<ConsentDecision> decisions_of(const ContractInstance& inst, const Fold& fold) {
    const auto& state = std::get<contracts::ConsentState>(inst.state);
    auto heights = fold.request_heights.find(inst.id);

    std::vector<ConsentDecision> out;
    for (const auto& req : state.requests) {
        ConsentDecision d;
        d.request_id = req.request_id;
        d.requester = req.requester;
        d.requested = req.items;
        d.status = req.status;
        d.decision_height = req.decision_height;
        if (heights != fold.request_heights.end()) {
            auto h = heights->second.find(req.request_id);
            if (h != heights->second.end()) d.request_height = h->second;
        }
        for (const auto& [key, blob] : state.grants)
            if (key.first == req.request_id) d.granted.push_back(key.second);
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace

std::map<uint64_t, ContractInstance> replay_instances(const GenesisInfo& genesis,
                                                      const std::vector<Block>& blocks) {
    return fold_chain(genesis, blocks).instances;
}

std::vector<contracts::AccessEvent> access_history(const GenesisInfo& genesis,
                                                   const std::vector<Block>& blocks,
                                                   uint64_t prescription_id) {
    Fold fold = fold_chain(genesis, blocks);
    const auto& inst = instance_of_kind(fold, prescription_id, Kind::Prescription);
    return std::get<contracts::PrescriptionState>(inst.state).last_access;
}

std::vector<ConsentDecision> consent_history(const GenesisInfo& genesis,
                                             const std::vector<Block>& blocks,
                                             uint64_t consent_instance) {
    Fold fold = fold_chain(genesis, blocks);
    return decisions_of(instance_of_kind(fold, consent_instance, Kind::Consent), fold);
}

LineageRecord lineage(const GenesisInfo& genesis, const std::vector<Block>& blocks,
                      uint64_t prescription_id) {
    Fold fold = fold_chain(genesis, blocks);
    const auto& inst = instance_of_kind(fold, prescription_id, Kind::Prescription);
    const auto& state = std::get<contracts::PrescriptionState>(inst.state);

    LineageRecord record;
    record.prescription_id = prescription_id;
    record.origin = inst.sender;
    if (state.created) {
        record.origin_height = state.created_at;
    } else {
        auto it = fold.instantiated_at.find(prescription_id);
        record.origin_height = it == fold.instantiated_at.end() ? 0 : it->second;
    }
    record.accesses = state.last_access;

    // Every consent book kept by this prescription's patient, in id order.
    for (const auto& [id, other] : fold.instances)
        if (other.kind == Kind::Consent && other.recipient == inst.recipient)
            for (auto& d : decisions_of(other, fold)) record.consents.push_back(std::move(d));
    return record;
}

ComplianceSummary compliance_report(const GenesisInfo& genesis, const std::vector<Block>& blocks,
                                    uint64_t control_instance, uint64_t sales_instance) {
    Fold fold = fold_chain(genesis, blocks);
    const auto& control =
        instance_of_kind(fold, control_instance, Kind::MedicationControl);
    const auto& sales = instance_of_kind(fold, sales_instance, Kind::Sales);
    const auto& cs = std::get<contracts::MedicationControlState>(control.state);
    const auto& ss = std::get<contracts::SalesState>(sales.state);

    ComplianceSummary summary;
    summary.supplied = cs.supplied;
    summary.sold = cs.sold;
    summary.sales_count = ss.sales.size();
    summary.consistent =
        summary.sold <= summary.supplied && summary.sales_count == summary.sold;
    return summary;
}

std::string lineage_report(const LineageRecord& record) {
    std::ostringstream out;
    out << "prescription " << record.prescription_id << "\n";
    out << "origin: " << record.origin.hex() << " at height " << record.origin_height << "\n";
    out << "accesses (" << record.accesses.size() << "):\n";
    for (const auto& a : record.accesses)
        out << "  height " << a.height << "  " << a.accessor.hex() << "  "
            << contracts::item_name(a.item) << "  \"" << a.purpose << "\"\n";
    out << "consents (" << record.consents.size() << "):\n";
    for (const auto& c : record.consents) {
        out << "  request " << c.request_id << " by " << c.requester.hex() << " at height "
            << c.request_height << ": requested {";
        for (size_t i = 0; i < c.requested.size(); ++i)
            out << (i ? "," : "") << contracts::item_name(c.requested[i]);
        out << "} granted {";
        for (size_t i = 0; i < c.granted.size(); ++i)
            out << (i ? "," : "") << contracts::item_name(c.granted[i]);
        out << "} ";
        switch (c.status) {
            case contracts::ConsentStatus::Pending: out << "pending"; break;
            case contracts::ConsentStatus::Granted:
                out << "granted at height " << c.decision_height;
                break;
            case contracts::ConsentStatus::Denied:
                out << "denied at height " << c.decision_height;
                break;
        }
        out << "\n";
    }
    return out.str();
}

Bytes lineage_to_bytes(const LineageRecord& record) {
    ByteWriter w;
    w.str(kRecordMagic);
    w.u64(record.prescription_id);
    record.origin.write(w);
    w.u64(record.origin_height);
    w.u32(static_cast<uint32_t>(record.accesses.size()));
    for (const auto& a : record.accesses) {
        a.accessor.write(w);
        w.u8(a.item);
        w.str(a.purpose);
        w.u64(a.height);
    }
    w.u32(static_cast<uint32_t>(record.consents.size()));
    for (const auto& c : record.consents) {
        w.u64(c.request_id);
        c.requester.write(w);
        w.u32(static_cast<uint32_t>(c.requested.size()));
        for (uint8_t item : c.requested) w.u8(item);
        w.u32(static_cast<uint32_t>(c.granted.size()));
        for (uint8_t item : c.granted) w.u8(item);
        w.u8(static_cast<uint8_t>(c.status));
        w.u64(c.request_height);
        w.u64(c.decision_height);
    }
    return w.take();
}

LineageRecord lineage_from_bytes(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    if (r.str() != kRecordMagic) throw DecodeError("not a lineage record");
    LineageRecord record;
    record.prescription_id = r.u64();
    record.origin = Address::read(r);
    record.origin_height = r.u64();
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        contracts::AccessEvent a;
        a.accessor = Address::read(r);
        a.item = r.u8();
        a.purpose = r.str();
        a.height = r.u64();
        record.accesses.push_back(std::move(a));
    }
    n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        ConsentDecision c;
        c.request_id = r.u64();
        c.requester = Address::read(r);
        uint32_t k = r.u32();
        for (uint32_t j = 0; j < k; ++j) c.requested.push_back(r.u8());
        k = r.u32();
        for (uint32_t j = 0; j < k; ++j) c.granted.push_back(r.u8());
        uint8_t status = r.u8();
        if (status > 2) throw DecodeError("bad consent status");
        c.status = static_cast<contracts::ConsentStatus>(status);
        c.request_height = r.u64();
        c.decision_height = r.u64();
        record.consents.push_back(std::move(c));
    }
    r.expect_done();
    return record;
}

void write_lineage_record(const std::string& path, const LineageRecord& record) {
    Bytes bytes = lineage_to_bytes(record);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

LineageRecord read_lineage_record(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return lineage_from_bytes(bytes);
}

}  // namespace rxgov::provenance
