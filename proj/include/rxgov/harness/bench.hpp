#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rxgov/harness/profile.hpp"
#include "rxgov/pre/entropy.hpp"

namespace rxgov::harness {

// One timed operation execution.
struct BenchRecord {
    std::string operation;  // encrypt | delegate | reencrypt | decrypt
    std::string item;       // PI | MED | DIA
    double size_kb = 0;     // plaintext size, kB = 1024 bytes
    double time_ms = 0;
    std::optional<uint64_t> peak_alloc_bytes;  // empty when not measurable
    uint64_t iteration = 0;
};

struct OpSummary {
    std::string operation;
    std::string item;
    size_t count = 0;
    double min_ms = 0, max_ms = 0, avg_ms = 0, std_ms = 0;
};

// Optional allocation probe. When installed (the CLI hooks the global
// allocator), each timed section reports its peak outstanding allocation.
void set_alloc_probe(void (*reset)(), std::optional<uint64_t> (*peak)());

// Runs iterations × {PI, MED, DIA} × {encrypt, delegate, reencrypt,
// decrypt}, verifying each round trip. Deterministic for a given entropy.
std::vector<BenchRecord> bench_pre(const SizeProfile& profile, pre::EntropySource& entropy);

std::vector<OpSummary> summarize(const std::vector<BenchRecord>& records);

// Data section, blank line, then a summary section; both with headers.
void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records,
                     const std::vector<OpSummary>& summaries);

// Simulated inclusion latency: txs arrive at uniform offsets across ten
// block intervals; latency = containing block timestamp - arrival time.
struct LatencyRecord {
    uint64_t tx_index = 0;
    uint64_t submit_ms = 0;
    uint64_t commit_ms = 0;
    uint64_t latency_ms = 0;
};

struct LatencyStats {
    size_t count = 0;
    double min_ms = 0, max_ms = 0, avg_ms = 0, std_ms = 0;
};

std::vector<LatencyRecord> bench_ledger(size_t n_txs, uint64_t interval_ms,
                                        pre::EntropySource& entropy);

LatencyStats latency_stats(const std::vector<LatencyRecord>& records);

void write_latency_csv(std::ostream& out, const std::vector<LatencyRecord>& records,
                       const LatencyStats& stats);

}  // namespace rxgov::harness
