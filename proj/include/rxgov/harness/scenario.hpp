#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rxgov/ledger/ledger.hpp"
#include "rxgov/stakeholder/stakeholder.hpp"

namespace rxgov::harness {

struct ScenarioError : std::runtime_error {
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

// One declarative step. `params` holds op-specific string fields, `numbers`
// the numeric ones; `expect` is "ok" (default) or the error code the step
// must fail with.
struct Step {
    std::string actor;
    std::string op;
    std::string label;
    std::string expect = "ok";
    std::map<std::string, std::string> params;
    std::map<std::string, uint64_t> numbers;
    std::vector<std::string> items;
    std::vector<std::string> approve;
    std::map<std::string, std::vector<std::string>> expect_granted;
    std::vector<std::string> expect_denied;
};

struct Scenario {
    std::string name;
    uint64_t seed = 0;
    uint64_t block_interval_ms = 6130;
    std::vector<Step> steps;
};

// Parses the JSON scenario format; parse failures carry a line number.
Scenario parse_scenario(const std::string& text, const std::string& origin);
Scenario load_scenario(const std::string& path);

struct StepReport {
    size_t index = 0;
    std::string op;
    bool passed = false;
    std::string detail;
};

struct RunResult {
    bool passed = false;
    std::vector<StepReport> steps;
    std::string failure;  // first mismatch, empty when passed
    ledger::Hash final_state_root{};
};

// Executes a scenario on a fresh ledger with four enrolled actors (doctor,
// patient, pharmacy, regulator), all entropy drawn from the scenario seed.
class ScenarioRunner {
  public:
    explicit ScenarioRunner(const Scenario& scenario);
    ~ScenarioRunner();

    RunResult run();

    const ledger::Ledger& chain() const;
    uint64_t instance(const std::string& label) const;  // throws ScenarioError

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rxgov::harness
