#include "rxgov/stakeholder/stakeholder.hpp"

#include <algorithm>
#include <charconv>

#include "rxgov/ledger/signature.hpp"

namespace rxgov::stakeholder {

namespace contracts = rxgov::contracts;
using contracts::errc::kWrongKind;
using ledger::Block;
using ledger::SignedTransaction;
using ledger::TxResult;

namespace {

const TxResult& result_of(const Block& block, const SignedTransaction& tx) {
    for (size_t i = 0; i < block.tx_list.size(); ++i)
        if (block.tx_list[i].sender == tx.sender && block.tx_list[i].nonce == tx.nonce)
            return block.results[i];
    throw WorkflowError("TxDropped", "submitted transaction missing from the produced block");
}

void require_ok(const TxResult& res, const std::string& op) {
    if (!res.ok) throw WorkflowError(res.error, op + " failed on-chain");
}

void require_role(const StakeholderContext& ctx, Role role, const std::string& op) {
    if (ctx.role != role)
        throw WorkflowError("RoleMismatch",
                            op + " requires role " + role_name(role) + ", context has " +
                                role_name(ctx.role));
}

template <typename State>
const State& state_as(const ledger::Ledger& led, uint64_t instance) {
    const auto& inst = led.get_state(instance);
    if (!std::holds_alternative<State>(inst.state))
        throw WorkflowError(kWrongKind, "instance " + std::to_string(instance) +
                                            " is a " + contracts::kind_name(inst.kind) +
                                            " contract");
    return std::get<State>(inst.state);
}

std::string item_ad(uint8_t item) { return "rxgov/item/" + contracts::item_name(item); }
std::string grant_ad(uint8_t item) { return "rxgov/grant/" + contracts::item_name(item); }

Bytes ad_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

uint64_t parse_u64_output(const TxResult& res) {
    ByteReader r(res.output);
    uint64_t v = r.u64();
    r.expect_done();
    return v;
}

}  // namespace

PrivacyPolicy PrivacyPolicy::standard() {
    PrivacyPolicy p;
    p.allowed[Role::Doctor] = {1, 2, 3};
    p.allowed[Role::Patient] = {1, 2, 3};
    p.allowed[Role::Pharmacy] = {2};
    p.allowed[Role::Regulator] = {2};
    return p;
}

bool PrivacyPolicy::permits(Role role, uint8_t item) const {
    auto it = allowed.find(role);
    return it != allowed.end() && it->second.count(item) != 0;
}

std::vector<uint8_t> PrivacyPolicy::filter(Role role,
                                           const std::vector<uint8_t>& requested) const {
    std::vector<uint8_t> out;
    for (uint8_t item : requested)
        if (permits(role, item)) out.push_back(item);
    return out;
}

StakeholderContext StakeholderContext::enroll(ledger::Ledger& led, Role role,
                                              const std::string& name,
                                              pre::EntropySource& entropy) {
    auto keys = pre::keygen(entropy);
    auto address = led.register_account(keys.pk, role, name);
    return StakeholderContext{role, std::move(keys), address, &led, &entropy};
}

SignedTransaction StakeholderContext::submit(uint64_t instance, const std::string& method,
                                             Bytes payload) {
    auto tx = ledger::make_transaction(keys.sk, address, led->next_nonce(address), instance,
                                       method, std::move(payload));
    auto res = led->submit(tx);
    if (!res.accepted())
        throw WorkflowError("TxRejected",
                            ledger::submit_status_name(res.status) + ": " + res.message);
    return tx;
}

TxResult StakeholderContext::call(uint64_t instance, const std::string& method, Bytes payload) {
    auto tx = submit(instance, method, std::move(payload));
    const Block& block = led->commit();
    return result_of(block, tx);
}

uint64_t create_instance(StakeholderContext& ctx, contracts::Kind kind,
                         const ledger::Address& recipient, uint64_t mint) {
    auto res = ctx.call(0, contracts::method::kInstantiate,
                        contracts::InstantiatePayload{kind, recipient, mint}.build());
    require_ok(res, "instantiate");
    return parse_u64_output(res);
}

uint64_t doctor_create_prescription(StakeholderContext& ctx, const pre::PublicKey& patient_pk,
                                    std::span<const uint8_t> pi, std::span<const uint8_t> med,
                                    std::span<const uint8_t> dia) {
    require_role(ctx, Role::Doctor, "doctor_create_prescription");

    contracts::CreatePrescriptionPayload p;
    p.c_pi = pre::encrypt(patient_pk, pi, ad_bytes(item_ad(1)), *ctx.entropy).to_bytes();
    p.c_med = pre::encrypt(patient_pk, med, ad_bytes(item_ad(2)), *ctx.entropy).to_bytes();
    p.c_dia = pre::encrypt(patient_pk, dia, ad_bytes(item_ad(3)), *ctx.entropy).to_bytes();

    uint64_t id = create_instance(ctx, contracts::Kind::Prescription,
                                  ledger::Address::from_public_key(patient_pk));
    require_ok(ctx.call(id, contracts::method::kCreatePrescription, p.build()),
               "create_prescription");
    return id;
}

uint64_t consumer_request_access(StakeholderContext& ctx, uint64_t consent_instance,
                                 std::vector<uint8_t> items) {
    if (ctx.role == Role::Patient)
        throw WorkflowError("RoleMismatch",
                            "consumer_request_access is for doctors, pharmacies and regulators");
    auto pk = ctx.keys.pk.to_bytes();
    auto res = ctx.call(consent_instance, contracts::method::kRequestDelegation,
                        contracts::RequestDelegationPayload{Bytes(pk.begin(), pk.end()),
                                                            std::move(items)}
                            .build());
    require_ok(res, "request_delegation");
    return parse_u64_output(res);
}

std::vector<Decision> patient_handle_requests(StakeholderContext& ctx, uint64_t consent_instance,
                                              const std::set<uint64_t>& approve,
                                              const PrivacyPolicy& policy) {
    require_role(ctx, Role::Patient, "patient_handle_requests");

    // Snapshot the pending queue: every decision below commits a block.
    auto pending = [&] {
        std::vector<contracts::ConsentRequest> out;
        for (const auto& req : state_as<contracts::ConsentState>(*ctx.led, consent_instance)
                                   .requests)
            if (req.status == contracts::ConsentStatus::Pending) out.push_back(req);
        return out;
    }();

    std::vector<Decision> decisions;
    for (const auto& req : pending) {
        Role requester_role = ctx.led->accounts().at(req.requester).role;
        std::vector<uint8_t> effective;
        if (approve.count(req.request_id) != 0)
            effective = policy.filter(requester_role, req.items);

        contracts::SetConsentPayload consent;
        consent.request_id = req.request_id;
        consent.granted = !effective.empty();
        if (consent.granted) {
            auto requester_pk = pre::PublicKey::from_bytes(req.requester_pk);
            for (uint8_t item : effective) {
                auto dk = pre::generate_delegation_key(ctx.keys.sk, requester_pk, *ctx.entropy);
                consent.grants.emplace_back(
                    item, pre::encrypt(requester_pk, dk.to_bytes(), ad_bytes(grant_ad(item)),
                                       *ctx.entropy)
                              .to_bytes());
            }
        }
        require_ok(ctx.call(consent_instance, contracts::method::kSetConsent, consent.build()),
                   "set_consent");
        decisions.push_back(Decision{req.request_id, consent.granted, std::move(effective)});
    }
    return decisions;
}

Bytes consumer_complete_access(StakeholderContext& ctx, uint64_t consent_instance,
                               uint64_t prescription_instance, uint64_t request_id, uint8_t item,
                               const std::string& purpose) {
    const auto& consent = state_as<contracts::ConsentState>(*ctx.led, consent_instance);
    auto grant = consent.grants.find({request_id, item});
    if (grant == consent.grants.end())
        throw WorkflowError("NoGrant", "no grant for request " + std::to_string(request_id) +
                                           " item " + contracts::item_name(item));

    auto dk_ct = pre::Ciphertext::from_bytes(grant->second);
    auto dk = pre::DelegationKey::from_bytes(pre::decrypt_original(ctx.keys.sk, dk_ct));

    const auto& rx_inst = ctx.led->get_state(prescription_instance);
    const auto& rx = state_as<contracts::PrescriptionState>(*ctx.led, prescription_instance);
    if (!rx.created)
        throw WorkflowError(contracts::errc::kNotCreated, "prescription not yet written");
    const Bytes* stored = item == 1   ? &rx.c_pi
                          : item == 2 ? &rx.c_med
                          : item == 3 ? &rx.c_dia
                                      : nullptr;
    if (stored == nullptr)
        throw WorkflowError(contracts::errc::kUnknownItem, "no such prescription item");

    auto ct = pre::Ciphertext::from_bytes(*stored);
    const auto& patient_pk = ctx.led->accounts().at(rx_inst.recipient).pk;
    if (!pre::verify_delegation_key(dk, patient_pk, ctx.keys.pk))
        throw pre::DelegationKeyInvalid("delegation key does not bind this patient and consumer");

    // Proxy step: re-encryption sees only public material.
    auto re = pre::reencrypt(dk, ct.capsule);
    Bytes plaintext = pre::decrypt_reencrypted(ctx.keys.sk, patient_pk, re, ct);

    require_ok(ctx.call(prescription_instance, contracts::method::kRecordAccess,
                        contracts::RecordAccessPayload{item, purpose}.build()),
               "record_access");
    return plaintext;
}

DispenseOutcome pharmacy_dispense(StakeholderContext& ctx, uint64_t sales_instance,
                                  uint64_t control_instance, uint64_t prescription_ref,
                                  std::span<const uint8_t> med_plaintext) {
    require_role(ctx, Role::Pharmacy, "pharmacy_dispense");

    const auto& sales = state_as<contracts::SalesState>(*ctx.led, sales_instance);
    bool seen = std::any_of(sales.sales.begin(), sales.sales.end(), [&](const auto& s) {
        return s.prescription_ref == prescription_ref;
    });
    if (seen)
        throw WorkflowError("AlreadyDispensed", "prescription " +
                                                    std::to_string(prescription_ref) +
                                                    " was already sold against");

    const auto& control =
        state_as<contracts::MedicationControlState>(*ctx.led, control_instance);
    if (control.available() == 0)
        throw WorkflowError(contracts::errc::kExceedsSupply, "no supplied stock left");

    // Header line "name;dosage;price"; anything after the first newline is
    // free-form medication detail.
    std::string_view text(reinterpret_cast<const char*>(med_plaintext.data()),
                          med_plaintext.size());
    std::string_view header = text.substr(0, text.find('\n'));
    size_t a = header.find(';');
    size_t b = a == std::string_view::npos ? a : header.find(';', a + 1);
    if (b == std::string_view::npos)
        throw WorkflowError("MalformedMedication",
                            "expected a name;dosage;price header line");
    contracts::SellMedicationPayload sale;
    sale.medication_name = std::string(header.substr(0, a));
    sale.dosage = std::string(header.substr(a + 1, b - a - 1));
    std::string_view price_text = header.substr(b + 1);
    auto [end, ec] = std::from_chars(price_text.data(), price_text.data() + price_text.size(),
                                     sale.price);
    if (ec != std::errc() || end != price_text.data() + price_text.size())
        throw WorkflowError("MalformedMedication", "price is not a number");
    sale.prescription_ref = prescription_ref;

    auto sell_tx = ctx.submit(sales_instance, contracts::method::kSellMedication, sale.build());
    auto sold_tx = ctx.submit(control_instance, contracts::method::kUpdateMedicationsSold,
                              contracts::AmountPayload{1}.build());
    const Block& block = ctx.led->commit();
    require_ok(result_of(block, sell_tx), "sell_medication");
    require_ok(result_of(block, sold_tx), "update_medications_sold");

    const auto& after = state_as<contracts::MedicationControlState>(*ctx.led, control_instance);
    return DispenseOutcome{sale.medication_name, sale.dosage, sale.price, after.sold,
                           after.available()};
}

ComplianceReport regulator_verify_compliance(const StakeholderContext& ctx,
                                             uint64_t control_instance, uint64_t sales_instance) {
    require_role(ctx, Role::Regulator, "regulator_verify_compliance");
    const auto& control =
        state_as<contracts::MedicationControlState>(*ctx.led, control_instance);
    const auto& sales = state_as<contracts::SalesState>(*ctx.led, sales_instance);

    ComplianceReport report;
    report.supplied = control.supplied;
    report.sold = control.sold;
    report.sales_count = sales.sales.size();
    report.consistent = report.sold <= report.supplied && report.sales_count == report.sold;
    return report;
}

uint64_t patient_report_and_reward(StakeholderContext& patient, StakeholderContext& regulator,
                                   uint64_t report_instance, uint64_t reward_instance,
                                   const std::string& description, uint64_t amount) {
    require_role(patient, Role::Patient, "patient_report_and_reward");
    require_role(regulator, Role::Regulator, "patient_report_and_reward");

    require_ok(patient.call(report_instance, contracts::method::kCreateReport,
                            contracts::CreateReportPayload{description}.build()),
               "create_report");
    require_ok(regulator.call(reward_instance, contracts::method::kSendReward,
                              contracts::SendRewardPayload{patient.address, amount}.build()),
               "send_reward");

    const auto& reward = state_as<contracts::RewardState>(*patient.led, reward_instance);
    auto it = reward.balances.find(patient.address);
    return it == reward.balances.end() ? 0 : it->second;
}

}  // namespace rxgov::stakeholder
