#include "rxgov/contracts/contracts.hpp"

#include <algorithm>
#include <set>

namespace rxgov::contracts {

using ledger::SignedTransaction;
using ledger::TxResult;

std::string kind_name(Kind k) {
    switch (k) {
        case Kind::Prescription: return "prescription";
        case Kind::Consent: return "consent";
        case Kind::Sales: return "sales";
        case Kind::MedicationControl: return "medication_control";
        case Kind::Report: return "report";
        case Kind::Reward: return "reward";
    }
    return "unknown";
}

std::string item_name(uint8_t item) {
    switch (item) {
        case kCreationItem: return "create";
        case static_cast<uint8_t>(Item::PI): return "PI";
        case static_cast<uint8_t>(Item::MED): return "MED";
        case static_cast<uint8_t>(Item::DIA): return "DIA";
    }
    return "unknown";
}

Item item_from_name(std::string_view s) {
    if (s == "PI") return Item::PI;
    if (s == "MED") return Item::MED;
    if (s == "DIA") return Item::DIA;
    throw std::invalid_argument("unknown item: " + std::string(s));
}

std::vector<std::string> method::all() {
    return {kInstantiate,      kCreatePrescription,    kRecordAccess, kRequestDelegation,
            kSetConsent,       kSellMedication,        kSupplyMedications,
            kUpdateMedicationsSold, kCreateReport,     kSendReward};
}

// ---------------------------------------------------------------------------
// Payload codecs

Bytes InstantiatePayload::build() const {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(kind));
    recipient.write(w);
    w.u64(mint);
    return w.take();
}

InstantiatePayload InstantiatePayload::parse(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    uint8_t kind_byte = r.u8();
    if (kind_byte < 1 || kind_byte > 6) throw DecodeError("bad contract kind");
    InstantiatePayload p;
    p.kind = static_cast<Kind>(kind_byte);
    p.recipient = Address::read(r);
    p.mint = r.u64();
    r.expect_done();
    return p;
}

Bytes CreatePrescriptionPayload::build() const {
    ByteWriter w;
    w.blob(c_pi);
    w.blob(c_med);
    w.blob(c_dia);
    return w.take();
}

CreatePrescriptionPayload CreatePrescriptionPayload::parse(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    CreatePrescriptionPayload p;
    p.c_pi = r.blob();
    p.c_med = r.blob();
    p.c_dia = r.blob();
    r.expect_done();
    return p;
}

Bytes RecordAccessPayload::build() const {
    ByteWriter w;
    w.u8(item);
    w.str(purpose);
    return w.take();
}

RecordAccessPayload RecordAccessPayload::parse(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    RecordAccessPayload p;
    p.item = r.u8();
    p.purpose = r.str();
    r.expect_done();
    return p;
}

Bytes RequestDelegationPayload::build() const {
    ByteWriter w;
    w.blob(requester_pk);
    w.u8(static_cast<uint8_t>(items.size()));
    for (uint8_t it : items) w.u8(it);
    return w.take();
}

RequestDelegationPayload RequestDelegationPayload::parse(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    RequestDelegationPayload p;
    p.requester_pk = r.blob();
    uint8_t n = r.u8();
    for (uint8_t i = 0; i < n; ++i) {
        uint8_t item = r.u8();
        if (item < 1 || item > 3) throw DecodeError("bad item code");
        p.items.push_back(item);
    }
    r.expect_done();
    return p;
}

Bytes SetConsentPayload::build() const {
    ByteWriter w;
    w.u64(request_id);
    w.u8(granted ? 1 : 2);
    w.u8(static_cast<uint8_t>(grants.size()));
    for (const auto& [item, blob] : grants) {
        w.u8(item);
        w.blob(blob);
    }
    return w.take();
}

SetConsentPayload SetConsentPayload::parse(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    SetConsentPayload p;
    p.request_id = r.u64();
    uint8_t decision = r.u8();
    if (decision != 1 && decision != 2) throw DecodeError("bad consent decision");
    p.granted = decision == 1;
    uint8_t n = r.u8();
    for (uint8_t i = 0; i < n; ++i) {
        uint8_t item = r.u8();
        if (item < 1 || item > 3) throw DecodeError("bad item code");
        p.grants.emplace_back(item, r.blob());
    }
    r.expect_done();
    return p;
}

Bytes SellMedicationPayload::build() const {
    ByteWriter w;
    w.str(medication_name);
    w.str(dosage);
    w.u64(price);
    w.u64(prescription_ref);
    return w.take();
}

SellMedicationPayload SellMedicationPayload::parse(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    SellMedicationPayload p;
    p.medication_name = r.str();
    p.dosage = r.str();
    p.price = r.u64();
    p.prescription_ref = r.u64();
    r.expect_done();
    return p;
}

Bytes AmountPayload::build() const {
    ByteWriter w;
    w.u64(amount);
    return w.take();
}

AmountPayload AmountPayload::parse(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    AmountPayload p;
    p.amount = r.u64();
    r.expect_done();
    return p;
}

Bytes CreateReportPayload::build() const {
    ByteWriter w;
    w.str(description);
    return w.take();
}

CreateReportPayload CreateReportPayload::parse(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    CreateReportPayload p;
    p.description = r.str();
    r.expect_done();
    return p;
}

Bytes SendRewardPayload::build() const {
    ByteWriter w;
    to.write(w);
    w.u64(amount);
    return w.take();
}

SendRewardPayload SendRewardPayload::parse(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    SendRewardPayload p;
    p.to = Address::read(r);
    p.amount = r.u64();
    r.expect_done();
    return p;
}

// ---------------------------------------------------------------------------
// State encoding

namespace {

void encode_state(ByteWriter& w, const PrescriptionState& s) {
    w.u8(s.created ? 1 : 0);
    w.u64(s.created_at);
    w.blob(s.c_pi);
    w.blob(s.c_med);
    w.blob(s.c_dia);
    w.u32(static_cast<uint32_t>(s.last_access.size()));
    for (const auto& ev : s.last_access) {
        ev.accessor.write(w);
        w.u8(ev.item);
        w.str(ev.purpose);
        w.u64(ev.height);
    }
}

void encode_state(ByteWriter& w, const ConsentState& s) {
    w.u64(s.next_request_id);
    w.u32(static_cast<uint32_t>(s.requests.size()));
    for (const auto& req : s.requests) {
        w.u64(req.request_id);
        req.requester.write(w);
        w.blob(req.requester_pk);
        w.u8(static_cast<uint8_t>(req.items.size()));
        for (uint8_t it : req.items) w.u8(it);
        w.u8(static_cast<uint8_t>(req.status));
        w.u64(req.decision_height);
    }
    w.u32(static_cast<uint32_t>(s.grants.size()));
    for (const auto& [key, blob] : s.grants) {
        w.u64(key.first);
        w.u8(key.second);
        w.blob(blob);
    }
}

void encode_state(ByteWriter& w, const SalesState& s) {
    w.u32(static_cast<uint32_t>(s.sales.size()));
    for (const auto& sale : s.sales) {
        w.str(sale.medication_name);
        w.str(sale.dosage);
        w.u64(sale.price);
        w.u64(sale.prescription_ref);
        w.u64(sale.height);
    }
}

void encode_state(ByteWriter& w, const MedicationControlState& s) {
    w.u64(s.supplied);
    w.u64(s.sold);
}

void encode_state(ByteWriter& w, const ReportState& s) {
    w.u32(static_cast<uint32_t>(s.reports.size()));
    for (const auto& rep : s.reports) {
        rep.source.write(w);
        w.str(rep.description);
        w.u64(rep.height);
    }
}

void encode_state(ByteWriter& w, const RewardState& s) {
    w.u64(s.total_minted);
    w.u32(static_cast<uint32_t>(s.balances.size()));
    for (const auto& [addr, amount] : s.balances) {
        addr.write(w);
        w.u64(amount);
    }
    w.u32(static_cast<uint32_t>(s.transfers.size()));
    for (const auto& tr : s.transfers) {
        tr.to.write(w);
        w.u64(tr.amount);
        w.u64(tr.height);
    }
}

}  // namespace

Bytes encode_instance(const ContractInstance& inst) {
    ByteWriter w;
    w.u64(inst.id);
    w.u8(static_cast<uint8_t>(inst.kind));
    inst.sender.write(w);
    inst.recipient.write(w);
    std::visit([&](const auto& state) { encode_state(w, state); }, inst.state);
    return w.take();
}

// ---------------------------------------------------------------------------
// Handlers

namespace {

TxResult fail(const char* code) { return TxResult{false, code, {}}; }

TxResult ok_result(Bytes output = {}) { return TxResult{true, "", std::move(output)}; }

Bytes u64_output(uint64_t v) {
    ByteWriter w;
    w.u64(v);
    return w.take();
}

bool valid_ciphertext(const Bytes& b) {
    try {
        return pre::Ciphertext::from_bytes(b).capsule.verify();
    } catch (const std::exception&) {
        return false;
    }
}

bool has_duplicates(const std::vector<uint8_t>& items) {
    std::set<uint8_t> seen(items.begin(), items.end());
    return seen.size() != items.size();
}

ContractState empty_state(Kind kind, const Address& minter, uint64_t mint) {
    switch (kind) {
        case Kind::Prescription: return PrescriptionState{};
        case Kind::Consent: return ConsentState{};
        case Kind::Sales: return SalesState{};
        case Kind::MedicationControl: return MedicationControlState{};
        case Kind::Report: return ReportState{};
        case Kind::Reward: {
            RewardState s;
            s.total_minted = mint;
            if (mint > 0) s.balances[minter] = mint;
            return s;
        }
    }
    throw std::logic_error("unreachable kind");
}

TxResult do_instantiate(ExecContext& ctx, const SignedTransaction& tx) {
    auto p = InstantiatePayload::parse(tx.payload);
    if (!ctx.accounts.count(p.recipient)) return fail(errc::kUnknownAddress);
    if (p.mint > 0 && p.kind != Kind::Reward) return fail(errc::kMalformedPayload);

    uint64_t id = ctx.next_instance_id++;
    ContractInstance inst;
    inst.id = id;
    inst.kind = p.kind;
    inst.sender = tx.sender;
    inst.recipient = p.recipient;
    inst.state = empty_state(p.kind, tx.sender, p.mint);
    ctx.instances.emplace(id, std::move(inst));
    return ok_result(u64_output(id));
}

TxResult do_create_prescription(ExecContext& ctx, ContractInstance& inst,
                                const SignedTransaction& tx) {
    if (inst.kind != Kind::Prescription) return fail(errc::kWrongKind);
    if (tx.sender != inst.sender) return fail(errc::kUnauthorizedSender);
    auto& state = std::get<PrescriptionState>(inst.state);
    if (state.created) return fail(errc::kAlreadyCreated);
    auto p = CreatePrescriptionPayload::parse(tx.payload);
    if (!valid_ciphertext(p.c_pi) || !valid_ciphertext(p.c_med) || !valid_ciphertext(p.c_dia))
        return fail(errc::kMalformedPayload);

    state.created = true;
    state.created_at = ctx.height;
    state.c_pi = std::move(p.c_pi);
    state.c_med = std::move(p.c_med);
    state.c_dia = std::move(p.c_dia);
    state.last_access.push_back(AccessEvent{tx.sender, kCreationItem, "create", ctx.height});
    return ok_result();
}

TxResult do_record_access(ExecContext& ctx, ContractInstance& inst, const SignedTransaction& tx) {
    if (inst.kind != Kind::Prescription) return fail(errc::kWrongKind);
    auto& state = std::get<PrescriptionState>(inst.state);
    if (!state.created) return fail(errc::kNotCreated);
    auto p = RecordAccessPayload::parse(tx.payload);
    if (p.item < 1 || p.item > 3) return fail(errc::kUnknownItem);
    if (p.purpose.size() > kMaxPurposeBytes) return fail(errc::kPurposeTooLong);

    state.last_access.push_back(AccessEvent{tx.sender, p.item, std::move(p.purpose), ctx.height});
    return ok_result();
}

TxResult do_request_delegation(ExecContext& ctx, ContractInstance& inst,
                               const SignedTransaction& tx) {
    if (inst.kind != Kind::Consent) return fail(errc::kWrongKind);
    auto& state = std::get<ConsentState>(inst.state);
    auto p = RequestDelegationPayload::parse(tx.payload);
    if (p.items.empty()) return fail(errc::kEmptyItems);
    if (has_duplicates(p.items)) return fail(errc::kMalformedPayload);
    try {
        pre::PublicKey::from_bytes(p.requester_pk);
    } catch (const pre::CryptoError&) {
        return fail(errc::kMalformedPayload);
    }

    (void)ctx;
    ConsentRequest req;
    req.request_id = state.next_request_id++;
    req.requester = tx.sender;
    req.requester_pk = std::move(p.requester_pk);
    req.items = std::move(p.items);
    state.requests.push_back(std::move(req));
    return ok_result(u64_output(state.requests.back().request_id));
}

TxResult do_set_consent(ExecContext& ctx, ContractInstance& inst, const SignedTransaction& tx) {
    if (inst.kind != Kind::Consent) return fail(errc::kWrongKind);
    if (tx.sender != inst.recipient) return fail(errc::kUnauthorizedSender);
    auto& state = std::get<ConsentState>(inst.state);
    auto p = SetConsentPayload::parse(tx.payload);

    auto it = std::find_if(state.requests.begin(), state.requests.end(),
                           [&](const ConsentRequest& r) { return r.request_id == p.request_id; });
    if (it == state.requests.end()) return fail(errc::kUnknownRequest);
    if (it->status != ConsentStatus::Pending) return fail(errc::kAlreadyDecided);

    if (p.granted) {
        if (p.grants.empty()) return fail(errc::kGrantItemMismatch);
        std::set<uint8_t> seen;
        for (const auto& [item, blob] : p.grants) {
            if (!seen.insert(item).second) return fail(errc::kGrantItemMismatch);
            if (std::find(it->items.begin(), it->items.end(), item) == it->items.end())
                return fail(errc::kGrantItemMismatch);
        }
    } else if (!p.grants.empty()) {
        return fail(errc::kGrantItemMismatch);
    }

    it->status = p.granted ? ConsentStatus::Granted : ConsentStatus::Denied;
    it->decision_height = ctx.height;
    for (auto& [item, blob] : p.grants)
        state.grants[{p.request_id, item}] = std::move(blob);
    return ok_result();
}

TxResult do_sell_medication(ExecContext& ctx, ContractInstance& inst,
                            const SignedTransaction& tx) {
    if (inst.kind != Kind::Sales) return fail(errc::kWrongKind);
    if (tx.sender != inst.sender) return fail(errc::kUnauthorizedSender);
    auto& state = std::get<SalesState>(inst.state);
    auto p = SellMedicationPayload::parse(tx.payload);
    if (p.medication_name.size() > kMaxNameBytes || p.dosage.size() > kMaxNameBytes)
        return fail(errc::kMalformedPayload);

    state.sales.push_back(SaleRecord{std::move(p.medication_name), std::move(p.dosage), p.price,
                                     p.prescription_ref, ctx.height});
    return ok_result();
}

TxResult do_supply_medications(ExecContext& ctx, ContractInstance& inst,
                               const SignedTransaction& tx) {
    if (inst.kind != Kind::MedicationControl) return fail(errc::kWrongKind);
    if (tx.sender != inst.sender) return fail(errc::kUnauthorizedSender);
    auto& state = std::get<MedicationControlState>(inst.state);
    auto p = AmountPayload::parse(tx.payload);
    if (p.amount == 0) return fail(errc::kZeroAmount);
    if (state.supplied + p.amount < state.supplied) return fail(errc::kMalformedPayload);

    state.supplied += p.amount;
    (void)ctx;
    return ok_result();
}

TxResult do_update_medications_sold(ExecContext& ctx, ContractInstance& inst,
                                    const SignedTransaction& tx) {
    if (inst.kind != Kind::MedicationControl) return fail(errc::kWrongKind);
    if (tx.sender != inst.recipient) return fail(errc::kUnauthorizedSender);
    auto& state = std::get<MedicationControlState>(inst.state);
    auto p = AmountPayload::parse(tx.payload);
    if (p.amount > state.supplied - state.sold) return fail(errc::kExceedsSupply);

    state.sold += p.amount;
    (void)ctx;
    return ok_result();
}

TxResult do_create_report(ExecContext& ctx, ContractInstance& inst, const SignedTransaction& tx) {
    if (inst.kind != Kind::Report) return fail(errc::kWrongKind);
    if (tx.sender != inst.sender) return fail(errc::kUnauthorizedSender);
    auto& state = std::get<ReportState>(inst.state);
    auto p = CreateReportPayload::parse(tx.payload);
    if (p.description.size() > kMaxDescriptionBytes) return fail(errc::kDescriptionTooLong);

    state.reports.push_back(ReportRecord{tx.sender, std::move(p.description), ctx.height});
    return ok_result();
}

TxResult do_send_reward(ExecContext& ctx, ContractInstance& inst, const SignedTransaction& tx) {
    if (inst.kind != Kind::Reward) return fail(errc::kWrongKind);
    if (tx.sender != inst.sender) return fail(errc::kUnauthorizedSender);
    auto& state = std::get<RewardState>(inst.state);
    auto p = SendRewardPayload::parse(tx.payload);
    auto it = state.balances.find(tx.sender);
    uint64_t balance = it == state.balances.end() ? 0 : it->second;
    if (balance < p.amount) return fail(errc::kInsufficientBalance);

    state.balances[tx.sender] = balance - p.amount;
    state.balances[p.to] += p.amount;
    state.transfers.push_back(TransferRecord{p.to, p.amount, ctx.height});
    return ok_result();
}

}  // namespace

TxResult apply_transaction(ExecContext& ctx, const SignedTransaction& tx) {
    try {
        if (tx.method == method::kInstantiate) return do_instantiate(ctx, tx);

        auto it = ctx.instances.find(tx.instance_id);
        if (it == ctx.instances.end()) return fail(errc::kUnknownInstance);
        ContractInstance& inst = it->second;

        if (tx.method == method::kCreatePrescription) return do_create_prescription(ctx, inst, tx);
        if (tx.method == method::kRecordAccess) return do_record_access(ctx, inst, tx);
        if (tx.method == method::kRequestDelegation) return do_request_delegation(ctx, inst, tx);
        if (tx.method == method::kSetConsent) return do_set_consent(ctx, inst, tx);
        if (tx.method == method::kSellMedication) return do_sell_medication(ctx, inst, tx);
        if (tx.method == method::kSupplyMedications) return do_supply_medications(ctx, inst, tx);
        if (tx.method == method::kUpdateMedicationsSold)
            return do_update_medications_sold(ctx, inst, tx);
        if (tx.method == method::kCreateReport) return do_create_report(ctx, inst, tx);
        if (tx.method == method::kSendReward) return do_send_reward(ctx, inst, tx);
        return fail(errc::kUnknownMethod);
    } catch (const DecodeError&) {
        return fail(errc::kMalformedPayload);
    }
}

}  // namespace rxgov::contracts
