#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <malloc.h>
#include <new>
#include <openssl/crypto.h>

#include "rxgov/harness/bench.hpp"
#include "rxgov/harness/scenario.hpp"
#include "rxgov/provenance/provenance.hpp"

// ---------------------------------------------------------------------------
// Allocation tracking. Outstanding bytes are counted through the global
// operator new/delete and the OpenSSL allocator, sized via
// malloc_usable_size so frees can be attributed without a side table.

namespace {

std::atomic<uint64_t> g_outstanding{0};
std::atomic<uint64_t> g_peak{0};
std::atomic<uint64_t> g_baseline{0};

void note_alloc(void* p) {
    if (p == nullptr) return;
    uint64_t cur = g_outstanding.fetch_add(malloc_usable_size(p)) + malloc_usable_size(p);
    uint64_t peak = g_peak.load();
    while (cur > peak && !g_peak.compare_exchange_weak(peak, cur)) {
    }
}

void note_free(void* p) {
    if (p == nullptr) return;
    g_outstanding.fetch_sub(malloc_usable_size(p));
}

void probe_reset() {
    g_baseline.store(g_outstanding.load());
    g_peak.store(g_outstanding.load());
}

std::optional<uint64_t> probe_peak() {
    uint64_t peak = g_peak.load();
    uint64_t base = g_baseline.load();
    return peak > base ? peak - base : 0;
}

void* tracked_malloc(size_t n, const char*, int) {
    void* p = std::malloc(n);
    note_alloc(p);
    return p;
}

void* tracked_realloc(void* p, size_t n, const char*, int) {
    note_free(p);
    void* q = std::realloc(p, n);
    note_alloc(q);
    return q;
}

void tracked_free(void* p, const char*, int) {
    note_free(p);
    std::free(p);
}

}  // namespace

// The global allocator is malloc-backed so news and frees pair up fine;
// the target disables -Wmismatched-new-delete for exactly this reason.
void* operator new(std::size_t n) {
    void* p = std::malloc(n);
    if (p == nullptr) throw std::bad_alloc();
    note_alloc(p);
    return p;
}

void* operator new[](std::size_t n) { return operator new(n); }

void operator delete(void* p) noexcept {
    note_free(p);
    std::free(p);
}

void operator delete[](void* p) noexcept { operator delete(p); }
void operator delete(void* p, std::size_t) noexcept { operator delete(p); }
void operator delete[](void* p, std::size_t) noexcept { operator delete(p); }

// ---------------------------------------------------------------------------

namespace {

using namespace rxgov;

std::string hex_of(std::span<const uint8_t> bytes) {
    return to_hex(Bytes(bytes.begin(), bytes.end()));
}

int cmd_keygen(std::optional<uint64_t> seed, const std::string& out_prefix) {
    pre::KeyPair kp = [&] {
        if (seed) {
            pre::SeededEntropy entropy(*seed);
            return pre::keygen(entropy);
        }
        return pre::keygen();
    }();
    std::string sk_hex = hex_of(kp.sk.to_bytes());
    std::string pk_hex = hex_of(kp.pk.to_bytes());
    std::string addr = ledger::Address::from_public_key(kp.pk).hex();

    if (out_prefix.empty()) {
        std::cout << "secret " << sk_hex << "\n";
        std::cout << "public " << pk_hex << "\n";
        std::cout << "address " << addr << "\n";
        return 0;
    }
    std::ofstream sk(out_prefix + ".sk", std::ios::trunc);
    std::ofstream pk(out_prefix + ".pk", std::ios::trunc);
    if (!sk || !pk) {
        std::cerr << "cannot write key files at prefix " << out_prefix << "\n";
        return 1;
    }
    sk << sk_hex << "\n";
    pk << pk_hex << "\n";
    std::cout << "wrote " << out_prefix << ".sk and " << out_prefix << ".pk (address " << addr
              << ")\n";
    return 0;
}

int cmd_run(const std::string& path, const std::string& chain_out, bool quiet) {
    harness::Scenario scenario;
    try {
        scenario = harness::load_scenario(path);
    } catch (const harness::ScenarioError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    harness::ScenarioRunner runner(scenario);
    auto result = runner.run();
    for (const auto& step : result.steps) {
        if (quiet && step.passed) continue;
        std::cout << "step " << step.index << " [" << step.op << "] "
                  << (step.passed ? "ok" : "FAILED") << ": " << step.detail << "\n";
    }

    if (!chain_out.empty()) {
        try {
            runner.chain().export_chain(chain_out);
            std::cout << "chain written to " << chain_out << "\n";
        } catch (const std::exception& e) {
            std::cerr << "chain export failed: " << e.what() << "\n";
        }
    }

    if (!result.passed) {
        std::cerr << scenario.name << ": " << result.failure << "\n";
        return 1;
    }
    std::cout << scenario.name << ": all " << result.steps.size()
              << " step(s) passed, state root " << to_hex(Bytes(result.final_state_root.begin(),
                                                                result.final_state_root.end()))
              << "\n";
    return 0;
}

int cmd_audit(const std::string& chain_path, uint64_t instance, const std::string& record_out) {
    ledger::ChainFile cf;
    try {
        cf = ledger::Ledger::load_chain(chain_path);
    } catch (const std::exception& e) {
        std::cerr << "cannot load chain: " << e.what() << "\n";
        return 2;
    }
    auto verdict = ledger::Ledger::verify_chain(cf.genesis, cf.blocks, &cf.head);
    if (!verdict.valid) {
        std::cerr << "chain invalid at height " << verdict.height << ": " << verdict.reason
                  << "\n";
        return 1;
    }
    try {
        auto record = provenance::lineage(cf.genesis, cf.blocks, instance);
        std::cout << provenance::lineage_report(record);
        if (!record_out.empty()) {
            provenance::write_lineage_record(record_out, record);
            std::cout << "record written to " << record_out << "\n";
        }
    } catch (const provenance::UnknownInstance& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_verify(const std::string& chain_path) {
    auto verdict = ledger::Ledger::verify_file(chain_path);
    if (verdict.valid) {
        std::cout << "valid\n";
        return 0;
    }
    std::cout << "invalid at height " << verdict.height << ": " << verdict.reason << "\n";
    return 1;
}

int cmd_bench_pre(const std::string& profile_name, uint64_t seed, const std::string& out_path) {
    harness::SizeProfile profile;
    if (profile_name == "reference" || profile_name == "paper") {
        profile = harness::reference_profile();
    } else if (profile_name == "quick") {
        profile = harness::quick_profile();
    } else {
        std::cerr << "unknown profile \"" << profile_name << "\" (use reference or quick)\n";
        return 2;
    }

    pre::SeededEntropy entropy(seed);
    auto records = harness::bench_pre(profile, entropy);
    auto summaries = harness::summarize(records);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::trunc);
        if (!file) {
            std::cerr << "cannot write " << out_path << "\n";
            return 1;
        }
        out = &file;
    }
    harness::write_bench_csv(*out, records, summaries);

    std::ostream& log = out_path.empty() ? std::cerr : std::cout;
    log << "profile " << profile.name << ", " << profile.iterations << " iteration(s)\n";
    log << "operation  item  avg_ms      max_ms\n";
    for (const auto& s : summaries)
        log << s.operation << (s.operation.size() < 8 ? "\t" : "") << "   " << s.item << "   "
            << s.avg_ms << "\t" << s.max_ms << "\n";

    struct Ref {
        const char* op;
        const char* item;
        double avg_ms;
    };
    static const Ref refs[] = {{"encrypt", "DIA", 6.98},
                               {"delegate", "DIA", 4.78},
                               {"reencrypt", "DIA", 2.43},
                               {"decrypt", "DIA", 8.67}};
    log << "reference desktop averages for comparison:\n";
    for (const auto& ref : refs) {
        for (const auto& s : summaries)
            if (s.operation == ref.op && s.item == ref.item)
                log << "  " << ref.op << " " << ref.item << ": measured " << s.avg_ms
                    << " ms, reference " << ref.avg_ms << " ms\n";
    }
    return 0;
}

int cmd_bench_ledger(uint64_t n_txs, uint64_t interval, uint64_t seed,
                     const std::string& out_path) {
    if (n_txs == 0) {
        std::cerr << "need at least one transaction\n";
        return 2;
    }
    pre::SeededEntropy entropy(seed);
    auto records = harness::bench_ledger(n_txs, interval, entropy);
    auto stats = harness::latency_stats(records);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::trunc);
        if (!file) {
            std::cerr << "cannot write " << out_path << "\n";
            return 1;
        }
        out = &file;
    }
    harness::write_latency_csv(*out, records, stats);

    std::ostream& log = out_path.empty() ? std::cerr : std::cout;
    log << n_txs << " tx(s), interval " << interval << " ms\n";
    log << "latency ms: min " << stats.min_ms << ", max " << stats.max_ms << ", avg "
        << stats.avg_ms << ", std " << stats.std_ms << "\n";
    if (interval > 0)
        log << "uniform-arrival expectation: avg near " << interval / 2.0 << " ms\n";
    log << "field measurement on a public testnet (300 txs): min 1500, max 6260, avg 2690, "
           "std 710 ms; consensus delay is not modeled here\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CRYPTO_set_mem_functions(tracked_malloc, tracked_realloc, tracked_free);
    harness::set_alloc_probe(probe_reset, probe_peak);

    CLI::App app{"e-prescription governance: scenario runner, audit and benchmarks"};
    app.require_subcommand(1);

    auto* keygen = app.add_subcommand("keygen", "generate a key pair");
    std::optional<uint64_t> kg_seed;
    std::string kg_out;
    keygen->add_option("--seed", kg_seed, "deterministic seed");
    keygen->add_option("--out", kg_out, "file prefix for <prefix>.sk / <prefix>.pk");

    auto* run = app.add_subcommand("run", "execute a scenario file");
    std::string run_path, run_chain;
    bool run_quiet = false;
    run->add_option("scenario", run_path, "scenario JSON file")->required();
    run->add_option("--chain-out", run_chain, "export the resulting chain");
    run->add_flag("--quiet", run_quiet, "print only failures");

    auto* audit = app.add_subcommand("audit", "lineage report from a chain file");
    std::string audit_chain, audit_record;
    uint64_t audit_instance = 0;
    audit->add_option("chain", audit_chain, "exported chain file")->required();
    audit->add_option("--instance", audit_instance, "prescription instance id")->required();
    audit->add_option("--record", audit_record, "write the machine-readable record here");

    auto* verify = app.add_subcommand("verify", "verify an exported chain file");
    std::string verify_chain;
    verify->add_option("chain", verify_chain, "exported chain file")->required();

    auto* bench_pre = app.add_subcommand("bench-pre", "time the re-encryption pipeline");
    std::string bp_profile = "reference", bp_out;
    uint64_t bp_seed = 7;
    bench_pre->add_option("--profile", bp_profile, "reference | quick");
    bench_pre->add_option("--seed", bp_seed, "payload seed");
    bench_pre->add_option("--out", bp_out, "CSV path (default stdout)");

    auto* bench_ledger = app.add_subcommand("bench-ledger", "simulated inclusion latency");
    uint64_t bl_txs = 300, bl_interval = 6130, bl_seed = 7;
    std::string bl_out;
    bench_ledger->add_option("--txs", bl_txs, "transaction count");
    bench_ledger->add_option("--interval", bl_interval, "block interval in ms");
    bench_ledger->add_option("--seed", bl_seed, "arrival seed");
    bench_ledger->add_option("--out", bl_out, "CSV path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (keygen->parsed()) return cmd_keygen(kg_seed, kg_out);
        if (run->parsed()) return cmd_run(run_path, run_chain, run_quiet);
        if (audit->parsed()) return cmd_audit(audit_chain, audit_instance, audit_record);
        if (verify->parsed()) return cmd_verify(verify_chain);
        if (bench_pre->parsed()) return cmd_bench_pre(bp_profile, bp_seed, bp_out);
        if (bench_ledger->parsed()) return cmd_bench_ledger(bl_txs, bl_interval, bl_seed, bl_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
