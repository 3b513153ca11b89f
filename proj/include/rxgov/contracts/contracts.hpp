#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rxgov/codec.hpp"
#include "rxgov/ledger/types.hpp"
#include "rxgov/pre/pre.hpp"

// Six contract state machines. Each instance is bound at creation to a
// (sender, recipient) address pair and authorizes methods against those
// addresses. Handlers are pure (state, tx) -> (state', result): they
// validate everything first and mutate only on success.

namespace rxgov::contracts {

using ledger::Address;

enum class Kind : uint8_t {
    Prescription = 1,
    Consent = 2,
    Sales = 3,
    MedicationControl = 4,
    Report = 5,
    Reward = 6,
};

enum class Item : uint8_t {
    PI = 1,   // personal information
    MED = 2,  // medication and dosage
    DIA = 3,  // diagnosis
};

// Item code 0 marks the creation event in an access log; real accesses use
// the Item values above.
inline constexpr uint8_t kCreationItem = 0;

std::string kind_name(Kind k);
std::string item_name(uint8_t item);  // accepts kCreationItem
Item item_from_name(std::string_view s);

namespace method {
inline constexpr const char* kInstantiate = "instantiate";
inline constexpr const char* kCreatePrescription = "create_prescription";
inline constexpr const char* kRecordAccess = "record_access";
inline constexpr const char* kRequestDelegation = "request_delegation";
inline constexpr const char* kSetConsent = "set_consent";
inline constexpr const char* kSellMedication = "sell_medication";
inline constexpr const char* kSupplyMedications = "supply_medications";
inline constexpr const char* kUpdateMedicationsSold = "update_medications_sold";
inline constexpr const char* kCreateReport = "create_report";
inline constexpr const char* kSendReward = "send_reward";
// All dispatchable methods, in a stable order.
std::vector<std::string> all();
}  // namespace method

namespace errc {
inline constexpr const char* kUnauthorizedSender = "UnauthorizedSender";
inline constexpr const char* kUnknownAddress = "UnknownAddress";
inline constexpr const char* kUnknownMethod = "UnknownMethod";
inline constexpr const char* kUnknownInstance = "UnknownInstance";
inline constexpr const char* kWrongKind = "WrongKind";
inline constexpr const char* kMalformedPayload = "MalformedPayload";
inline constexpr const char* kAlreadyCreated = "AlreadyCreated";
inline constexpr const char* kNotCreated = "NotCreated";
inline constexpr const char* kUnknownItem = "UnknownItem";
inline constexpr const char* kPurposeTooLong = "PurposeTooLong";
inline constexpr const char* kEmptyItems = "EmptyItems";
inline constexpr const char* kUnknownRequest = "UnknownRequest";
inline constexpr const char* kAlreadyDecided = "AlreadyDecided";
inline constexpr const char* kGrantItemMismatch = "GrantItemMismatch";
inline constexpr const char* kZeroAmount = "ZeroAmount";
inline constexpr const char* kExceedsSupply = "ExceedsSupply";
inline constexpr const char* kDescriptionTooLong = "DescriptionTooLong";
inline constexpr const char* kInsufficientBalance = "InsufficientBalance";
}  // namespace errc

inline constexpr size_t kMaxPurposeBytes = 64;
inline constexpr size_t kMaxDescriptionBytes = 2048;
inline constexpr size_t kMaxNameBytes = 256;

// ---------------------------------------------------------------------------
// Per-kind state

struct AccessEvent {
    Address accessor;
    uint8_t item = kCreationItem;
    std::string purpose;
    uint64_t height = 0;
    bool operator==(const AccessEvent&) const = default;
};

struct PrescriptionState {
    bool created = false;
    uint64_t created_at = 0;
    Bytes c_pi;
    Bytes c_med;
    Bytes c_dia;
    std::vector<AccessEvent> last_access;
};

enum class ConsentStatus : uint8_t { Pending = 0, Granted = 1, Denied = 2 };

struct ConsentRequest {
    uint64_t request_id = 0;
    Address requester;
    Bytes requester_pk;
    std::vector<uint8_t> items;
    ConsentStatus status = ConsentStatus::Pending;
    uint64_t decision_height = 0;
};

struct ConsentState {
    uint64_t next_request_id = 1;
    std::vector<ConsentRequest> requests;
    std::map<std::pair<uint64_t, uint8_t>, Bytes> grants;  // (request_id, item) -> encrypted key
};

struct SaleRecord {
    std::string medication_name;
    std::string dosage;
    uint64_t price = 0;
    uint64_t prescription_ref = 0;
    uint64_t height = 0;
};

struct SalesState {
    std::vector<SaleRecord> sales;
};

struct MedicationControlState {
    uint64_t supplied = 0;
    uint64_t sold = 0;
    uint64_t available() const { return supplied - sold; }
};

struct ReportRecord {
    Address source;
    std::string description;
    uint64_t height = 0;
};

struct ReportState {
    std::vector<ReportRecord> reports;
};

struct TransferRecord {
    Address to;
    uint64_t amount = 0;
    uint64_t height = 0;
};

struct RewardState {
    uint64_t total_minted = 0;
    std::map<Address, uint64_t> balances;
    std::vector<TransferRecord> transfers;
};

using ContractState = std::variant<PrescriptionState, ConsentState, SalesState,
                                   MedicationControlState, ReportState, RewardState>;

struct ContractInstance {
    uint64_t id = 0;
    Kind kind = Kind::Prescription;
    Address sender;
    Address recipient;
    ContractState state;
};

// Canonical encoding used for state roots; covers every field of every kind.
Bytes encode_instance(const ContractInstance& inst);

// ---------------------------------------------------------------------------
// Method payloads

struct InstantiatePayload {
    Kind kind = Kind::Prescription;
    Address recipient;
    uint64_t mint = 0;  // initial token balance, Reward contracts only
    Bytes build() const;
    static InstantiatePayload parse(std::span<const uint8_t> payload);
};

struct CreatePrescriptionPayload {
    Bytes c_pi;
    Bytes c_med;
    Bytes c_dia;
    Bytes build() const;
    static CreatePrescriptionPayload parse(std::span<const uint8_t> payload);
};

struct RecordAccessPayload {
    uint8_t item = 0;
    std::string purpose;
    Bytes build() const;
    static RecordAccessPayload parse(std::span<const uint8_t> payload);
};

struct RequestDelegationPayload {
    Bytes requester_pk;
    std::vector<uint8_t> items;
    Bytes build() const;
    static RequestDelegationPayload parse(std::span<const uint8_t> payload);
};

struct SetConsentPayload {
    uint64_t request_id = 0;
    bool granted = false;
    std::vector<std::pair<uint8_t, Bytes>> grants;  // (item, encrypted delegation key)
    Bytes build() const;
    static SetConsentPayload parse(std::span<const uint8_t> payload);
};

struct SellMedicationPayload {
    std::string medication_name;
    std::string dosage;
    uint64_t price = 0;
    uint64_t prescription_ref = 0;
    Bytes build() const;
    static SellMedicationPayload parse(std::span<const uint8_t> payload);
};

struct AmountPayload {  // supply_medications / update_medications_sold
    uint64_t amount = 0;
    Bytes build() const;
    static AmountPayload parse(std::span<const uint8_t> payload);
};

struct CreateReportPayload {
    std::string description;
    Bytes build() const;
    static CreateReportPayload parse(std::span<const uint8_t> payload);
};

struct SendRewardPayload {
    Address to;
    uint64_t amount = 0;
    Bytes build() const;
    static SendRewardPayload parse(std::span<const uint8_t> payload);
};

// ---------------------------------------------------------------------------
// Dispatch

struct ExecContext {
    const ledger::AccountTable& accounts;
    std::map<uint64_t, ContractInstance>& instances;
    uint64_t& next_instance_id;
    uint64_t height;
};

// Applies one transaction. Assumes ledger-level checks (sender known,
// signature, nonce) already passed; reports contract-level failures in the
// result without touching state.
ledger::TxResult apply_transaction(ExecContext& ctx, const ledger::SignedTransaction& tx);

}  // namespace rxgov::contracts
