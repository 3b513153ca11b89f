#pragma once

// Shared fixture driving all four roles through the complete workflow:
// prescription, consent, proxied access, dispensing, compliance, reward.
// Fully deterministic for a given seed.

#include <set>
#include <string>

#include "rxgov/ledger/ledger.hpp"
#include "rxgov/provenance/provenance.hpp"
#include "rxgov/rand.hpp"
#include "rxgov/stakeholder/stakeholder.hpp"

namespace rxgov::testing {

using stakeholder::StakeholderContext;

struct Flow {
    pre::SeededEntropy entropy;
    ledger::Ledger led;
    StakeholderContext doctor, patient, pharmacy, regulator;

    uint64_t consent = 0, sales = 0, control = 0, report = 0, reward = 0;
    uint64_t rx = 0;
    uint64_t pharm_req = 0, reg_req = 0, doc_req = 0, dia_req = 0;
    Bytes pi, med, dia;

    explicit Flow(uint64_t seed, ledger::LedgerConfig cfg = {})
        : entropy(seed),
          led(cfg),
          doctor(StakeholderContext::enroll(led, Role::Doctor, "doctor", entropy)),
          patient(StakeholderContext::enroll(led, Role::Patient, "patient", entropy)),
          pharmacy(StakeholderContext::enroll(led, Role::Pharmacy, "pharmacy", entropy)),
          regulator(StakeholderContext::enroll(led, Role::Regulator, "regulator", entropy)) {}

    StakeholderContext& by_role(Role r) {
        switch (r) {
            case Role::Doctor: return doctor;
            case Role::Patient: return patient;
            case Role::Pharmacy: return pharmacy;
            default: return regulator;
        }
    }

    void setup_instances(uint64_t mint = 1000) {
        consent = stakeholder::create_instance(patient, contracts::Kind::Consent,
                                               patient.address);
        sales = stakeholder::create_instance(pharmacy, contracts::Kind::Sales,
                                             regulator.address);
        control = stakeholder::create_instance(regulator, contracts::Kind::MedicationControl,
                                               pharmacy.address);
        report = stakeholder::create_instance(patient, contracts::Kind::Report,
                                              regulator.address);
        reward = stakeholder::create_instance(regulator, contracts::Kind::Reward,
                                              patient.address, mint);
    }

    void make_plaintexts(size_t pi_len = 635, size_t dia_len = 4096) {
        pi = random_bytes(entropy, pi_len);
        std::string header = "amoxicillin;500mg;1299\n";
        med = Bytes(header.begin(), header.end());
        Bytes extra = random_bytes(entropy, 256);
        med.insert(med.end(), extra.begin(), extra.end());
        dia = random_bytes(entropy, dia_len);
    }

    void write_prescription() {
        rx = stakeholder::doctor_create_prescription(doctor, patient.keys.pk, pi, med, dia);
    }

    void run_consents() {
        pharm_req = stakeholder::consumer_request_access(pharmacy, consent, {1, 2});
        reg_req = stakeholder::consumer_request_access(regulator, consent, {2});
        doc_req = stakeholder::consumer_request_access(doctor, consent, {1, 2, 3});
        dia_req = stakeholder::consumer_request_access(regulator, consent, {3});
        stakeholder::patient_handle_requests(patient, consent,
                                             {pharm_req, reg_req, doc_req, dia_req});
    }

    // The full demo; returns the patient's final reward balance.
    uint64_t full_flow() {
        setup_instances();
        make_plaintexts();
        write_prescription();
        run_consents();

        Bytes med_plain = stakeholder::consumer_complete_access(pharmacy, consent, rx,
                                                                pharm_req, 2, "dispense");
        stakeholder::consumer_complete_access(regulator, consent, rx, reg_req, 2, "audit");
        stakeholder::consumer_complete_access(doctor, consent, rx, doc_req, 1, "review");
        stakeholder::consumer_complete_access(doctor, consent, rx, doc_req, 2, "review");
        stakeholder::consumer_complete_access(doctor, consent, rx, doc_req, 3, "review");

        regulator.call(control, contracts::method::kSupplyMedications,
                       contracts::AmountPayload{100}.build());
        stakeholder::pharmacy_dispense(pharmacy, sales, control, rx, med_plain);

        return stakeholder::patient_report_and_reward(patient, regulator, report, reward,
                                                      "suspicious batch", 50);
    }
};

}  // namespace rxgov::testing
