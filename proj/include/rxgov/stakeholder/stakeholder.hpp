#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rxgov/contracts/contracts.hpp"
#include "rxgov/ledger/ledger.hpp"
#include "rxgov/pre/pre.hpp"

namespace rxgov::stakeholder {

// Workflow-level failure; `code` is machine-readable ("RoleMismatch",
// "NoGrant", "AlreadyDispensed", "TxRejected", or a contract error string).
struct WorkflowError : std::runtime_error {
    std::string code;
    WorkflowError(std::string c, const std::string& what)
        : std::runtime_error(c + ": " + what), code(std::move(c)) {}
};

// Which prescription items each role may ever be granted. Patient-side
// decisions intersect every request with this table.
struct PrivacyPolicy {
    std::map<Role, std::set<uint8_t>> allowed;

    static PrivacyPolicy standard();
    bool permits(Role role, uint8_t item) const;
    std::vector<uint8_t> filter(Role role, const std::vector<uint8_t>& requested) const;
};

// One participant: role, keys, ledger handle. The secret key stays inside
// this process; transactions carry only public material.
struct StakeholderContext {
    Role role;
    pre::KeyPair keys;
    ledger::Address address;
    ledger::Ledger* led = nullptr;
    pre::EntropySource* entropy = &pre::SystemEntropy::instance();

    static StakeholderContext enroll(ledger::Ledger& led, Role role, const std::string& name,
                                     pre::EntropySource& entropy);

    // Signs and submits one transaction, commits a block, and returns the
    // method result. Throws WorkflowError("TxRejected") if admission fails.
    ledger::TxResult call(uint64_t instance, const std::string& method, Bytes payload);

    // Admission only; pair with Ledger::commit for multi-tx blocks.
    ledger::SignedTransaction submit(uint64_t instance, const std::string& method, Bytes payload);
};

// Instantiates a contract of the given kind (mint used only for Reward).
uint64_t create_instance(StakeholderContext& ctx, contracts::Kind kind,
                         const ledger::Address& recipient, uint64_t mint = 0);

struct Decision {
    uint64_t request_id = 0;
    bool granted = false;
    std::vector<uint8_t> items;  // effective items when granted
};

struct DispenseOutcome {
    std::string medication_name;
    std::string dosage;
    uint64_t price = 0;
    uint64_t sold = 0;
    uint64_t available = 0;
};

struct ComplianceReport {
    uint64_t supplied = 0;
    uint64_t sold = 0;
    uint64_t sales_count = 0;
    bool consistent = false;
};

// Encrypts the three items separately under the patient key, instantiates a
// prescription naming the patient, and stores the ciphertexts on-chain.
uint64_t doctor_create_prescription(StakeholderContext& ctx, const pre::PublicKey& patient_pk,
                                    std::span<const uint8_t> pi, std::span<const uint8_t> med,
                                    std::span<const uint8_t> dia);

// Files a delegation request carrying the caller's public key.
uint64_t consumer_request_access(StakeholderContext& ctx, uint64_t consent_instance,
                                 std::vector<uint8_t> items);

// Decides every pending request: approved ids are filtered through the
// policy (empty effective set means denial), everything else is denied.
// Granted items each get a delegation key, encrypted under the requester
// key before it touches the chain.
std::vector<Decision> patient_handle_requests(StakeholderContext& ctx, uint64_t consent_instance,
                                              const std::set<uint64_t>& approve,
                                              const PrivacyPolicy& policy =
                                                  PrivacyPolicy::standard());

// Pulls the encrypted delegation key from the consent contract, runs the
// local proxy (re-encryption takes no secret key), decrypts the item, and
// logs the access on the prescription.
Bytes consumer_complete_access(StakeholderContext& ctx, uint64_t consent_instance,
                               uint64_t prescription_instance, uint64_t request_id, uint8_t item,
                               const std::string& purpose = "access");

// Records a sale and bumps the sold counter; each prescription dispenses
// at most once per sales contract. `med_plaintext` must begin with a
// "name;dosage;price" header line.
DispenseOutcome pharmacy_dispense(StakeholderContext& ctx, uint64_t sales_instance,
                                  uint64_t control_instance, uint64_t prescription_ref,
                                  std::span<const uint8_t> med_plaintext);

// Cross-checks the control counters against the sales list.
ComplianceReport regulator_verify_compliance(const StakeholderContext& ctx,
                                             uint64_t control_instance, uint64_t sales_instance);

// Files the patient's report, then pays the reward. Returns the patient's
// balance afterwards.
uint64_t patient_report_and_reward(StakeholderContext& patient, StakeholderContext& regulator,
                                   uint64_t report_instance, uint64_t reward_instance,
                                   const std::string& description, uint64_t amount);

}  // namespace rxgov::stakeholder
