#include "rxgov/harness/scenario.hpp"

#include <array>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "rxgov/rand.hpp"

namespace rxgov::harness {

namespace contracts = rxgov::contracts;
using json = nlohmann::json;
using stakeholder::StakeholderContext;
using stakeholder::WorkflowError;

namespace {

size_t line_of_offset(const std::string& text, size_t byte) {
    size_t line = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

contracts::Kind kind_from_name(const std::string& s) {
    if (s == "prescription") return contracts::Kind::Prescription;
    if (s == "consent") return contracts::Kind::Consent;
    if (s == "sales") return contracts::Kind::Sales;
    if (s == "medication_control") return contracts::Kind::MedicationControl;
    if (s == "report") return contracts::Kind::Report;
    if (s == "reward") return contracts::Kind::Reward;
    throw ScenarioError("unknown contract kind \"" + s + "\"");
}

uint8_t item_code(const std::string& s) {
    return static_cast<uint8_t>(contracts::item_from_name(s));
}

Step parse_step(const json& j, size_t index) {
    Step step;
    for (const auto& [key, value] : j.items()) {
        if (key == "actor") {
            step.actor = value.get<std::string>();
        } else if (key == "op") {
            step.op = value.get<std::string>();
        } else if (key == "label") {
            step.label = value.get<std::string>();
        } else if (key == "expect") {
            step.expect = value.get<std::string>();
        } else if (key == "items") {
            step.items = value.get<std::vector<std::string>>();
        } else if (key == "approve") {
            step.approve = value.get<std::vector<std::string>>();
        } else if (key == "expect_granted") {
            step.expect_granted =
                value.get<std::map<std::string, std::vector<std::string>>>();
        } else if (key == "expect_denied") {
            step.expect_denied = value.get<std::vector<std::string>>();
        } else if (value.is_string()) {
            step.params[key] = value.get<std::string>();
        } else if (value.is_boolean()) {
            step.numbers[key] = value.get<bool>() ? 1 : 0;
        } else if (value.is_number_unsigned() || value.is_number_integer()) {
            step.numbers[key] = value.get<uint64_t>();
        } else {
            throw ScenarioError("step " + std::to_string(index) + ": field \"" + key +
                                "\" has an unsupported type");
        }
    }
    if (step.op.empty())
        throw ScenarioError("step " + std::to_string(index) + ": missing \"op\"");
    return step;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(origin + ": parse error at line " +
                            std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
    }
    try {
        Scenario sc;
        sc.name = doc.value("name", "scenario");
        sc.seed = doc.at("seed").get<uint64_t>();
        sc.block_interval_ms = doc.value("block_interval_ms", uint64_t{6130});
        const auto& steps = doc.at("steps");
        if (!steps.is_array()) throw ScenarioError("\"steps\" must be an array");
        size_t index = 0;
        for (const auto& s : steps) sc.steps.push_back(parse_step(s, index++));
        return sc;
    } catch (const json::exception& e) {
        throw ScenarioError(origin + ": " + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

struct ScenarioRunner::Impl {
    Scenario scenario;
    pre::SeededEntropy entropy;
    ledger::Ledger led;
    std::map<std::string, StakeholderContext> actors;
    std::map<std::string, uint64_t> instances;
    std::map<std::string, uint64_t> requests;
    std::map<std::string, std::array<Bytes, 3>> plaintexts;  // rx label -> {pi, med, dia}

    explicit Impl(const Scenario& sc)
        : scenario(sc),
          entropy(sc.seed),
          led(ledger::LedgerConfig{sc.block_interval_ms, false}) {
        for (Role role : {Role::Doctor, Role::Patient, Role::Pharmacy, Role::Regulator})
            actors.emplace(role_name(role),
                           StakeholderContext::enroll(led, role, role_name(role), entropy));
    }

    StakeholderContext& actor(const Step& step) {
        auto it = actors.find(step.actor);
        if (it == actors.end())
            throw ScenarioError("unknown actor \"" + step.actor + "\" (use a role name)");
        return it->second;
    }

    const std::string& param(const Step& step, const std::string& key) {
        auto it = step.params.find(key);
        if (it == step.params.end())
            throw ScenarioError("op " + step.op + " needs field \"" + key + "\"");
        return it->second;
    }

    uint64_t number(const Step& step, const std::string& key) {
        auto it = step.numbers.find(key);
        if (it == step.numbers.end())
            throw ScenarioError("op " + step.op + " needs numeric field \"" + key + "\"");
        return it->second;
    }

    uint64_t instance(const std::string& label) {
        auto it = instances.find(label);
        if (it == instances.end()) throw ScenarioError("unknown instance label \"" + label + "\"");
        return it->second;
    }

    uint64_t request(const std::string& label) {
        auto it = requests.find(label);
        if (it == requests.end()) throw ScenarioError("unknown request label \"" + label + "\"");
        return it->second;
    }

    void check_ok(const ledger::TxResult& res, const std::string& what) {
        if (!res.ok) throw WorkflowError(res.error, what + " failed");
    }

    // Returns a human-readable detail string; assertion text on mismatch is
    // reported through ScenarioError.
    std::string exec(const Step& step) {
        if (step.op == "instantiate") {
            auto& recipient = actors.at(param(step, "recipient"));
            uint64_t mint = step.numbers.count("mint") ? step.numbers.at("mint") : 0;
            uint64_t id = stakeholder::create_instance(
                actor(step), kind_from_name(param(step, "kind")), recipient.address, mint);
            if (!step.label.empty()) instances[step.label] = id;
            return "instance " + std::to_string(id);
        }
        if (step.op == "create_prescription") {
            auto& patient = actors.at(param(step, "patient"));
            std::array<Bytes, 3> plain;
            plain[0] = random_bytes(entropy, number(step, "pi_size"));
            std::string header = param(step, "med_header") + "\n";
            plain[1] = Bytes(header.begin(), header.end());
            uint64_t extra =
                step.numbers.count("med_extra") ? step.numbers.at("med_extra") : 0;
            Bytes tail = random_bytes(entropy, extra);
            plain[1].insert(plain[1].end(), tail.begin(), tail.end());
            plain[2] = random_bytes(entropy, number(step, "dia_size"));

            uint64_t id = stakeholder::doctor_create_prescription(
                actor(step), patient.keys.pk, plain[0], plain[1], plain[2]);
            if (!step.label.empty()) {
                instances[step.label] = id;
                plaintexts[step.label] = std::move(plain);
            }
            return "prescription " + std::to_string(id);
        }
        if (step.op == "request_access") {
            std::vector<uint8_t> items;
            for (const auto& name : step.items) items.push_back(item_code(name));
            uint64_t id = stakeholder::consumer_request_access(
                actor(step), instance(param(step, "consent")), items);
            if (!step.label.empty()) requests[step.label] = id;
            return "request " + std::to_string(id);
        }
        if (step.op == "handle_requests") {
            std::set<uint64_t> approve;
            for (const auto& label : step.approve) approve.insert(request(label));
            auto decisions = stakeholder::patient_handle_requests(
                actor(step), instance(param(step, "consent")), approve);

            auto find = [&](uint64_t id) -> const stakeholder::Decision& {
                for (const auto& d : decisions)
                    if (d.request_id == id) return d;
                throw ScenarioError("no decision recorded for request " + std::to_string(id));
            };
            for (const auto& [label, names] : step.expect_granted) {
                const auto& d = find(request(label));
                std::vector<uint8_t> want;
                for (const auto& n : names) want.push_back(item_code(n));
                if (!d.granted || d.items != want)
                    throw ScenarioError("request \"" + label +
                                        "\" was not granted the expected items");
            }
            for (const auto& label : step.expect_denied)
                if (find(request(label)).granted)
                    throw ScenarioError("request \"" + label + "\" was granted, expected denial");
            return std::to_string(decisions.size()) + " decision(s)";
        }
        if (step.op == "complete_access") {
            const std::string& rx_label = param(step, "prescription");
            uint8_t item = item_code(param(step, "item"));
            std::string purpose =
                step.params.count("purpose") ? step.params.at("purpose") : "access";
            Bytes plain = stakeholder::consumer_complete_access(
                actor(step), instance(param(step, "consent")), instance(rx_label),
                request(param(step, "request")), item, purpose);
            auto known = plaintexts.find(rx_label);
            if (known != plaintexts.end() && plain != known->second[item - 1])
                throw ScenarioError("decrypted item differs from the original plaintext");
            return "read " + std::to_string(plain.size()) + " bytes";
        }
        if (step.op == "supply") {
            check_ok(actor(step).call(
                         instance(param(step, "control")), contracts::method::kSupplyMedications,
                         contracts::AmountPayload{number(step, "amount")}.build()),
                     "supply");
            return "supplied " + std::to_string(number(step, "amount"));
        }
        if (step.op == "dispense") {
            const std::string& rx_label = param(step, "prescription");
            auto known = plaintexts.find(rx_label);
            if (known == plaintexts.end())
                throw ScenarioError("no medication plaintext recorded for \"" + rx_label + "\"");
            auto outcome = stakeholder::pharmacy_dispense(
                actor(step), instance(param(step, "sales")), instance(param(step, "control")),
                instance(rx_label), known->second[1]);
            return outcome.medication_name + ", " + std::to_string(outcome.available) +
                   " unit(s) left";
        }
        if (step.op == "verify_compliance") {
            auto report = stakeholder::regulator_verify_compliance(
                actor(step), instance(param(step, "control")), instance(param(step, "sales")));
            if (step.numbers.count("expect_consistent") &&
                report.consistent != (step.numbers.at("expect_consistent") != 0))
                throw ScenarioError("compliance verdict " +
                                    std::string(report.consistent ? "true" : "false") +
                                    " does not match the expectation");
            return "supplied " + std::to_string(report.supplied) + ", sold " +
                   std::to_string(report.sold) + ", consistent " +
                   (report.consistent ? "true" : "false");
        }
        if (step.op == "report_reward") {
            auto& regulator = actors.at(role_name(Role::Regulator));
            uint64_t balance = stakeholder::patient_report_and_reward(
                actor(step), regulator, instance(param(step, "report")),
                instance(param(step, "reward")), param(step, "description"),
                number(step, "amount"));
            if (step.numbers.count("expect_balance") &&
                balance != step.numbers.at("expect_balance"))
                throw ScenarioError("patient balance " + std::to_string(balance) +
                                    " does not match the expectation");
            return "patient balance " + std::to_string(balance);
        }
        if (step.op == "verify_chain") {
            auto verdict = ledger::Ledger::verify_chain(led.genesis_info(), led.chain());
            if (!verdict.valid)
                throw ScenarioError("chain failed verification at height " +
                                    std::to_string(verdict.height) + ": " + verdict.reason);
            return "chain valid, " + std::to_string(led.chain().size()) + " block(s)";
        }
        throw ScenarioError("unknown op \"" + step.op + "\"");
    }
};

ScenarioRunner::ScenarioRunner(const Scenario& scenario)
    : impl_(std::make_unique<Impl>(scenario)) {}

ScenarioRunner::~ScenarioRunner() = default;

const ledger::Ledger& ScenarioRunner::chain() const { return impl_->led; }

uint64_t ScenarioRunner::instance(const std::string& label) const {
    return impl_->instance(label);
}

RunResult ScenarioRunner::run() {
    RunResult result;
    for (size_t i = 0; i < impl_->scenario.steps.size(); ++i) {
        const Step& step = impl_->scenario.steps[i];
        StepReport report{i, step.op, false, ""};
        try {
            std::string detail = impl_->exec(step);
            if (step.expect == "ok") {
                report.passed = true;
                report.detail = detail;
            } else {
                report.detail = "expected failure \"" + step.expect + "\" but the step succeeded";
            }
        } catch (const WorkflowError& e) {
            if (e.code == step.expect) {
                report.passed = true;
                report.detail = std::string("failed as expected: ") + e.what();
            } else {
                report.detail = e.what();
            }
        } catch (const ScenarioError& e) {
            report.detail = e.what();
        }
        result.steps.push_back(report);
        if (!report.passed) {
            result.failure = "step " + std::to_string(i) + " (" + step.op + "): " +
                             report.detail;
            result.passed = false;
            return result;
        }
    }
    result.passed = true;
    result.final_state_root = impl_->led.state_root();
    return result;
}

}  // namespace rxgov::harness
