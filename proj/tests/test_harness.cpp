#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rxgov/harness/bench.hpp"
#include "rxgov/harness/scenario.hpp"
#include "rxgov/pre/entropy.hpp"

using namespace rxgov;
using harness::BenchRecord;
using harness::LatencyRecord;
using harness::Scenario;
using harness::ScenarioError;
using harness::ScenarioRunner;
using harness::Step;

namespace {

std::string scenario_path(const std::string& file) {
    return std::string(RXGOV_SCENARIO_DIR) + "/" + file;
}

Scenario parse(const std::string& text) { return harness::parse_scenario(text, "inline"); }

std::string error_of(const std::string& text) {
    try {
        harness::parse_scenario(text, "inline");
    } catch (const ScenarioError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("scenario parsing") {
    TEST_CASE("every field kind lands in its slot") {
        Scenario sc = parse(R"({
            "name": "demo",
            "seed": 9,
            "block_interval_ms": 250,
            "steps": [
                {"actor": "patient", "op": "instantiate", "kind": "consent",
                 "recipient": "patient", "mint": 7, "label": "c"},
                {"actor": "patient", "op": "handle_requests", "consent": "c",
                 "approve": ["a", "b"], "expect_granted": {"a": ["MED"]},
                 "expect_denied": ["b"]},
                {"actor": "pharmacy", "op": "request_access", "consent": "c",
                 "items": ["PI", "MED"], "label": "r", "expect": "TxRejected"},
                {"actor": "regulator", "op": "verify_compliance", "control": "k",
                 "sales": "s", "expect_consistent": true}
            ]
        })");

        CHECK(sc.name == "demo");
        CHECK(sc.seed == 9);
        CHECK(sc.block_interval_ms == 250);
        REQUIRE(sc.steps.size() == 4);

        const Step& inst = sc.steps[0];
        CHECK(inst.actor == "patient");
        CHECK(inst.op == "instantiate");
        CHECK(inst.label == "c");
        CHECK(inst.expect == "ok");
        CHECK(inst.params.at("kind") == "consent");
        CHECK(inst.params.at("recipient") == "patient");
        CHECK(inst.numbers.at("mint") == 7);

        const Step& handle = sc.steps[1];
        CHECK(handle.approve == std::vector<std::string>{"a", "b"});
        REQUIRE(handle.expect_granted.count("a") == 1);
        CHECK(handle.expect_granted.at("a") == std::vector<std::string>{"MED"});
        CHECK(handle.expect_denied == std::vector<std::string>{"b"});

        const Step& req = sc.steps[2];
        CHECK(req.items == std::vector<std::string>{"PI", "MED"});
        CHECK(req.expect == "TxRejected");

        CHECK(sc.steps[3].numbers.at("expect_consistent") == 1);
    }

    TEST_CASE("defaults apply when optional fields are absent") {
        Scenario sc = parse(R"({"seed": 1, "steps": [{"op": "verify_chain"}]})");
        CHECK(sc.name == "scenario");
        CHECK(sc.block_interval_ms == 6130);
        CHECK(sc.steps.at(0).actor.empty());
        CHECK(sc.steps.at(0).expect == "ok");
    }

    TEST_CASE("broken json reports the offending line") {
        std::string text = "{\n  \"seed\": 1,\n  \"steps\": [,]\n}\n";
        std::string msg = error_of(text);
        CHECK(msg.find("inline: parse error at line 3") != std::string::npos);
    }

    TEST_CASE("structural mistakes are named") {
        CHECK(error_of(R"({"seed": 1, "steps": 5})").find("steps") != std::string::npos);
        CHECK(error_of(R"({"steps": []})").find("seed") != std::string::npos);
        CHECK(error_of(R"({"seed": 1, "steps": [{"actor": "patient"}]})")
                  .find("missing \"op\"") != std::string::npos);
        CHECK(error_of(R"({"seed": 1, "steps": [{"op": "supply", "amount": 1.5}]})")
                  .find("unsupported type") != std::string::npos);
    }

    TEST_CASE("loading a missing file fails cleanly") {
        CHECK_THROWS_WITH_AS(harness::load_scenario("/nonexistent/path.json"),
                             doctest::Contains("cannot open"), ScenarioError);
    }
}

TEST_SUITE("scenario running") {
    TEST_CASE("the bundled demo flow passes and is reproducible") {
        Scenario sc = harness::load_scenario(scenario_path("demo_full_flow.json"));
        REQUIRE(sc.steps.size() == 23);

        ScenarioRunner first(sc);
        auto res1 = first.run();
        REQUIRE_MESSAGE(res1.passed, res1.failure);
        CHECK(res1.failure.empty());
        CHECK(res1.steps.size() == sc.steps.size());
        for (const auto& step : res1.steps) CHECK(step.passed);

        CHECK(first.instance("rx") == 6);
        CHECK(first.instance("consent") == 1);
        CHECK_THROWS_AS((void)first.instance("no-such-label"), ScenarioError);

        auto verdict =
            ledger::Ledger::verify_chain(first.chain().genesis_info(), first.chain().chain());
        CHECK(verdict.valid);

        ScenarioRunner second(sc);
        auto res2 = second.run();
        REQUIRE(res2.passed);
        CHECK(res1.final_state_root == res2.final_state_root);
    }

    TEST_CASE("the bundled violation scenario stops at the offending step") {
        Scenario sc = harness::load_scenario(scenario_path("pharmacy_pi_violation.json"));
        ScenarioRunner runner(sc);
        auto res = runner.run();

        CHECK_FALSE(res.passed);
        CHECK(res.failure.find("step 3") != std::string::npos);
        CHECK(res.failure.find("handle_requests") != std::string::npos);
        CHECK(res.failure.find("pharm_pi") != std::string::npos);
        REQUIRE(res.steps.size() == 4);
        CHECK_FALSE(res.steps.back().passed);
        for (size_t i = 0; i + 1 < res.steps.size(); ++i) CHECK(res.steps[i].passed);
    }

    TEST_CASE("a step failing with the declared code counts as passing") {
        Scenario sc = parse(R"({
            "seed": 3,
            "block_interval_ms": 100,
            "steps": [
                {"actor": "regulator", "op": "instantiate", "kind": "medication_control",
                 "recipient": "pharmacy", "label": "control"},
                {"actor": "pharmacy", "op": "supply", "control": "control", "amount": 5,
                 "expect": "UnauthorizedSender"}
            ]
        })");
        auto res = ScenarioRunner(sc).run();
        REQUIRE_MESSAGE(res.passed, res.failure);
        CHECK(res.steps.at(1).detail.find("UnauthorizedSender") != std::string::npos);
    }

    TEST_CASE("an undeclared failure is a mismatch") {
        Scenario sc = parse(R"({
            "seed": 3,
            "block_interval_ms": 100,
            "steps": [
                {"actor": "regulator", "op": "instantiate", "kind": "medication_control",
                 "recipient": "pharmacy", "label": "control"},
                {"actor": "pharmacy", "op": "supply", "control": "control", "amount": 5}
            ]
        })");
        auto res = ScenarioRunner(sc).run();
        CHECK_FALSE(res.passed);
        CHECK(res.failure.find("UnauthorizedSender") != std::string::npos);
    }

    TEST_CASE("a step expected to fail but succeeding is a mismatch") {
        Scenario sc = parse(R"({
            "seed": 3,
            "block_interval_ms": 100,
            "steps": [
                {"actor": "patient", "op": "instantiate", "kind": "consent",
                 "recipient": "patient", "label": "c", "expect": "UnauthorizedSender"}
            ]
        })");
        auto res = ScenarioRunner(sc).run();
        CHECK_FALSE(res.passed);
        CHECK(res.failure.find("expected") != std::string::npos);
    }

    TEST_CASE("unknown actors, ops, kinds, and labels are reported") {
        auto failure = [](const std::string& steps_json) {
            Scenario sc = parse(R"({"seed": 1, "block_interval_ms": 100, "steps": [)" +
                                steps_json + "]}");
            auto res = ScenarioRunner(sc).run();
            REQUIRE_FALSE(res.passed);
            return res.failure;
        };

        CHECK(failure(R"({"actor": "nurse", "op": "instantiate", "kind": "consent",
                          "recipient": "patient"})")
                  .find("unknown actor \"nurse\"") != std::string::npos);
        CHECK(failure(R"({"actor": "patient", "op": "bake"})").find("unknown op \"bake\"") !=
              std::string::npos);
        CHECK(failure(R"({"actor": "patient", "op": "instantiate", "kind": "escrow",
                          "recipient": "patient"})")
                  .find("unknown contract kind") != std::string::npos);
        CHECK(failure(R"({"actor": "regulator", "op": "supply", "control": "ghost",
                          "amount": 1})")
                  .find("unknown instance label \"ghost\"") != std::string::npos);
        CHECK(failure(R"({"actor": "regulator", "op": "supply", "control": "ghost"})")
                  .find("needs numeric field \"amount\"") != std::string::npos);
    }
}

namespace {

harness::SizeProfile micro_profile() {
    return harness::SizeProfile{"micro", {64, 128}, {64, 128}, {256, 512}, 3};
}

}  // namespace

TEST_SUITE("pre benchmark") {
    TEST_CASE("one record per operation, item, and iteration") {
        pre::SeededEntropy entropy(11);
        auto records = harness::bench_pre(micro_profile(), entropy);
        REQUIRE(records.size() == 3 * 3 * 4);

        std::map<std::pair<std::string, std::string>, size_t> counts;
        for (const auto& r : records) {
            counts[{r.operation, r.item}]++;
            CHECK(r.time_ms >= 0);
            CHECK(r.iteration < 3);
        }
        REQUIRE(counts.size() == 12);
        for (const auto& [key, n] : counts) CHECK(n == 3);

        // The four operations of one iteration act on the same plaintext.
        std::map<std::pair<std::string, uint64_t>, std::set<double>> sizes;
        for (const auto& r : records) sizes[{r.item, r.iteration}].insert(r.size_kb);
        for (const auto& [key, s] : sizes) CHECK(s.size() == 1);

        for (const auto& r : records) {
            double bytes = r.size_kb * 1024.0;
            if (r.item == "DIA") {
                CHECK(bytes >= 256);
                CHECK(bytes <= 512);
            } else {
                CHECK(bytes >= 64);
                CHECK(bytes <= 128);
            }
        }
    }

    TEST_CASE("identical seeds draw identical payload sizes") {
        pre::SeededEntropy e1(5), e2(5);
        auto a = harness::bench_pre(micro_profile(), e1);
        auto b = harness::bench_pre(micro_profile(), e2);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].operation == b[i].operation);
            CHECK(a[i].item == b[i].item);
            CHECK(a[i].iteration == b[i].iteration);
            CHECK(a[i].size_kb == b[i].size_kb);
        }
    }

    TEST_CASE("summaries aggregate per operation and item") {
        std::vector<BenchRecord> records{
            {"encrypt", "PI", 0.5, 1.0, std::nullopt, 0},
            {"encrypt", "PI", 0.5, 3.0, std::nullopt, 1},
            {"decrypt", "MED", 0.25, 2.0, std::nullopt, 0},
        };
        auto summaries = harness::summarize(records);
        REQUIRE(summaries.size() == 2);

        auto enc = std::find_if(summaries.begin(), summaries.end(),
                                [](const auto& s) { return s.operation == "encrypt"; });
        REQUIRE(enc != summaries.end());
        CHECK(enc->item == "PI");
        CHECK(enc->count == 2);
        CHECK(enc->min_ms == doctest::Approx(1.0));
        CHECK(enc->max_ms == doctest::Approx(3.0));
        CHECK(enc->avg_ms == doctest::Approx(2.0));
        CHECK(enc->std_ms == doctest::Approx(1.0));

        pre::SeededEntropy entropy(11);
        auto measured = harness::summarize(harness::bench_pre(micro_profile(), entropy));
        CHECK(measured.size() == 12);
        for (const auto& s : measured) {
            CHECK(s.count == 3);
            CHECK(s.min_ms <= s.avg_ms);
            CHECK(s.avg_ms <= s.max_ms);
            CHECK(std::isfinite(s.std_ms));
        }
    }

    TEST_CASE("the csv writer emits data and summary sections") {
        pre::SeededEntropy entropy(2);
        auto records = harness::bench_pre(micro_profile(), entropy);
        auto summaries = harness::summarize(records);

        std::ostringstream out;
        harness::write_bench_csv(out, records, summaries);
        std::istringstream in(out.str());

        std::string line;
        REQUIRE(std::getline(in, line));
        CHECK(line == "operation,item,size_kb,time_ms,peak_alloc_bytes,iteration");

        size_t data_rows = 0;
        while (std::getline(in, line) && !line.empty()) {
            CHECK(std::count(line.begin(), line.end(), ',') == 5);
            ++data_rows;
        }
        CHECK(data_rows == records.size());

        REQUIRE(std::getline(in, line));
        CHECK(line == "operation,item,count,min_ms,max_ms,avg_ms,std_ms");
        size_t summary_rows = 0;
        while (std::getline(in, line) && !line.empty()) ++summary_rows;
        CHECK(summary_rows == summaries.size());
    }
}

TEST_SUITE("ledger benchmark") {
    TEST_CASE("a zero interval commits every transaction immediately") {
        pre::SeededEntropy entropy(4);
        auto records = harness::bench_ledger(20, 0, entropy);
        REQUIRE(records.size() == 20);
        for (const auto& r : records) {
            CHECK(r.latency_ms == 0);
            CHECK(r.commit_ms == r.submit_ms);
        }
    }

    TEST_CASE("latency never exceeds one block interval") {
        pre::SeededEntropy entropy(4);
        auto records = harness::bench_ledger(40, 500, entropy);
        REQUIRE(records.size() == 40);
        uint64_t prev_submit = 0;
        for (const auto& r : records) {
            CHECK(r.submit_ms >= prev_submit);
            prev_submit = r.submit_ms;
            CHECK(r.commit_ms >= r.submit_ms);
            CHECK(r.commit_ms % 500 == 0);
            CHECK(r.latency_ms == r.commit_ms - r.submit_ms);
            CHECK(r.latency_ms <= 500);
        }
    }

    TEST_CASE("arrivals are reproducible for a seed") {
        pre::SeededEntropy e1(7), e2(7);
        auto a = harness::bench_ledger(60, 1000, e1);
        auto b = harness::bench_ledger(60, 1000, e2);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].tx_index == b[i].tx_index);
            CHECK(a[i].submit_ms == b[i].submit_ms);
            CHECK(a[i].commit_ms == b[i].commit_ms);
        }
    }

    TEST_CASE("uniform arrivals average near half an interval") {
        pre::SeededEntropy entropy(7);
        auto records = harness::bench_ledger(300, 6130, entropy);
        auto stats = harness::latency_stats(records);
        CHECK(stats.count == 300);
        CHECK(stats.max_ms <= 6130);
        double expectation = 6130.0 / 2;
        CHECK(stats.avg_ms > expectation * 0.85);
        CHECK(stats.avg_ms < expectation * 1.15);
        CHECK(stats.std_ms > 0);
    }

    TEST_CASE("latency statistics summarize the records") {
        std::vector<LatencyRecord> records{
            {0, 0, 2, 2},
            {1, 1, 5, 4},
            {2, 3, 9, 6},
        };
        auto stats = harness::latency_stats(records);
        CHECK(stats.count == 3);
        CHECK(stats.min_ms == doctest::Approx(2));
        CHECK(stats.max_ms == doctest::Approx(6));
        CHECK(stats.avg_ms == doctest::Approx(4));
        CHECK(stats.std_ms == doctest::Approx(std::sqrt(8.0 / 3)));
    }

    TEST_CASE("the latency csv has data and summary sections") {
        pre::SeededEntropy entropy(4);
        auto records = harness::bench_ledger(10, 250, entropy);
        auto stats = harness::latency_stats(records);

        std::ostringstream out;
        harness::write_latency_csv(out, records, stats);
        std::istringstream in(out.str());

        std::string line;
        REQUIRE(std::getline(in, line));
        CHECK(line == "tx_index,submit_ms,commit_ms,latency_ms");
        size_t rows = 0;
        while (std::getline(in, line) && !line.empty()) ++rows;
        CHECK(rows == records.size());
        REQUIRE(std::getline(in, line));
        CHECK(line == "count,min_ms,max_ms,avg_ms,std_ms");
    }
}
