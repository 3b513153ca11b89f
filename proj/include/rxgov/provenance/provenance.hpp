#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rxgov/contracts/contracts.hpp"
#include "rxgov/ledger/ledger.hpp"

// Read-only audit layer: every answer is computed by folding over committed
// blocks, never by peeking at live contract state, so the same queries work
// against exported chain files. Callers are expected to verify the chain
// first; folding an unverified chain answers for whatever the bytes say.
namespace rxgov::provenance {

struct UnknownInstance : std::runtime_error {
    explicit UnknownInstance(const std::string& what) : std::runtime_error(what) {}
};

// One consent request with its outcome. `granted` lists the items that
// actually received delegation material (empty for denied or pending).
struct ConsentDecision {
    uint64_t request_id = 0;
    ledger::Address requester;
    std::vector<uint8_t> requested;
    std::vector<uint8_t> granted;
    contracts::ConsentStatus status = contracts::ConsentStatus::Pending;
    uint64_t request_height = 0;
    uint64_t decision_height = 0;  // 0 while pending

    bool operator==(const ConsentDecision&) const = default;
};

struct LineageRecord {
    uint64_t prescription_id = 0;
    ledger::Address origin;  // the prescribing doctor
    uint64_t origin_height = 0;
    std::vector<contracts::AccessEvent> accesses;
    std::vector<ConsentDecision> consents;  // every consent the patient decided

    bool operator==(const LineageRecord&) const = default;
};

struct ComplianceSummary {
    uint64_t supplied = 0;
    uint64_t sold = 0;
    uint64_t sales_count = 0;
    bool consistent = false;

    bool operator==(const ComplianceSummary&) const = default;
};

// Replays every committed transaction and returns the resulting instances.
std::map<uint64_t, contracts::ContractInstance> replay_instances(
    const ledger::GenesisInfo& genesis, const std::vector<ledger::Block>& blocks);

std::vector<contracts::AccessEvent> access_history(const ledger::GenesisInfo& genesis,
                                                   const std::vector<ledger::Block>& blocks,
                                                   uint64_t prescription_id);

std::vector<ConsentDecision> consent_history(const ledger::GenesisInfo& genesis,
                                             const std::vector<ledger::Block>& blocks,
                                             uint64_t consent_instance);

LineageRecord lineage(const ledger::GenesisInfo& genesis,
                      const std::vector<ledger::Block>& blocks, uint64_t prescription_id);

ComplianceSummary compliance_report(const ledger::GenesisInfo& genesis,
                                    const std::vector<ledger::Block>& blocks,
                                    uint64_t control_instance, uint64_t sales_instance);

// Human-readable multi-line report.
std::string lineage_report(const LineageRecord& record);

// Canonical binary encoding (fixed field order); byte-identical for equal
// records, so reports can be diffed across runs and machines.
Bytes lineage_to_bytes(const LineageRecord& record);
LineageRecord lineage_from_bytes(std::span<const uint8_t> bytes);
void write_lineage_record(const std::string& path, const LineageRecord& record);
LineageRecord read_lineage_record(const std::string& path);

}  // namespace rxgov::provenance
