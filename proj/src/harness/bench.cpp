#include "rxgov/harness/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "rxgov/ledger/ledger.hpp"
#include "rxgov/ledger/signature.hpp"
#include "rxgov/pre/pre.hpp"
#include "rxgov/rand.hpp"

namespace rxgov::harness {

namespace {

void (*g_alloc_reset)() = nullptr;
std::optional<uint64_t> (*g_alloc_peak)() = nullptr;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Payload filler: one random 4 kB tile repeated. Cheap enough that payload
// construction never shadows the operation under test, still seed-dependent.
Bytes make_payload(pre::EntropySource& entropy, size_t n) {
    Bytes tile = random_bytes(entropy, std::min<size_t>(n, 4096));
    Bytes out;
    out.reserve(n);
    while (out.size() < n) {
        size_t take = std::min(tile.size(), n - out.size());
        out.insert(out.end(), tile.begin(), tile.begin() + static_cast<long>(take));
    }
    return out;
}

struct Timed {
    double ms;
    std::optional<uint64_t> peak;
};

template <typename F>
Timed timed(F&& f) {
    if (g_alloc_reset) g_alloc_reset();
    auto start = Clock::now();
    f();
    double ms = ms_since(start);
    return Timed{ms, g_alloc_peak ? g_alloc_peak() : std::nullopt};
}

}  // namespace

void set_alloc_probe(void (*reset)(), std::optional<uint64_t> (*peak)()) {
    g_alloc_reset = reset;
    g_alloc_peak = peak;
}

std::vector<BenchRecord> bench_pre(const SizeProfile& profile, pre::EntropySource& entropy) {
    auto patient = pre::keygen(entropy);
    auto consumer = pre::keygen(entropy);

    struct ItemSpec {
        const char* name;
        SizeRange range;
    };
    const ItemSpec items[] = {{"PI", profile.pi}, {"MED", profile.med}, {"DIA", profile.dia}};

    std::vector<BenchRecord> records;
    records.reserve(profile.iterations * 12);

    for (uint64_t iter = 0; iter < static_cast<uint64_t>(profile.iterations); ++iter) {
        for (const auto& item : items) {
            size_t n = uniform_u64(entropy, item.range.lo, item.range.hi);
            Bytes payload = make_payload(entropy, n);
            double size_kb = static_cast<double>(n) / 1024.0;

            auto push = [&](const char* op, const Timed& t) {
                records.push_back(BenchRecord{op, item.name, size_kb, t.ms, t.peak, iter});
            };

            pre::Ciphertext ct;
            push("encrypt", timed([&] { ct = pre::encrypt(patient.pk, payload, {}, entropy); }));

            pre::DelegationKey dk;
            push("delegate", timed([&] {
                     dk = pre::generate_delegation_key(patient.sk, consumer.pk, entropy);
                 }));

            pre::ReEncryption re;
            push("reencrypt", timed([&] { re = pre::reencrypt(dk, ct.capsule); }));

            Bytes plain;
            push("decrypt", timed([&] {
                     plain = pre::decrypt_reencrypted(consumer.sk, patient.pk, re, ct);
                 }));

            if (plain != payload)
                throw std::runtime_error("benchmark round trip produced a wrong plaintext");
        }
    }
    return records;
}

std::vector<OpSummary> summarize(const std::vector<BenchRecord>& records) {
    static const char* ops[] = {"encrypt", "delegate", "reencrypt", "decrypt"};
    static const char* items[] = {"PI", "MED", "DIA"};

    std::vector<OpSummary> out;
    for (const char* op : ops) {
        for (const char* item : items) {
            OpSummary s{op, item, 0, 0, 0, 0, 0};
            double sum = 0;
            for (const auto& r : records) {
                if (r.operation != op || r.item != item) continue;
                if (s.count == 0) {
                    s.min_ms = s.max_ms = r.time_ms;
                } else {
                    s.min_ms = std::min(s.min_ms, r.time_ms);
                    s.max_ms = std::max(s.max_ms, r.time_ms);
                }
                sum += r.time_ms;
                ++s.count;
            }
            if (s.count == 0) continue;
            s.avg_ms = sum / static_cast<double>(s.count);
            double var = 0;
            for (const auto& r : records)
                if (r.operation == op && r.item == item)
                    var += (r.time_ms - s.avg_ms) * (r.time_ms - s.avg_ms);
            s.std_ms = std::sqrt(var / static_cast<double>(s.count));
            out.push_back(std::move(s));
        }
    }
    return out;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records,
                     const std::vector<OpSummary>& summaries) {
    out << "operation,item,size_kb,time_ms,peak_alloc_bytes,iteration\n";
    for (const auto& r : records) {
        out << r.operation << ',' << r.item << ',' << r.size_kb << ',' << r.time_ms << ',';
        if (r.peak_alloc_bytes) out << *r.peak_alloc_bytes;
        out << ',' << r.iteration << '\n';
    }
    out << "\noperation,item,count,min_ms,max_ms,avg_ms,std_ms\n";
    for (const auto& s : summaries)
        out << s.operation << ',' << s.item << ',' << s.count << ',' << s.min_ms << ','
            << s.max_ms << ',' << s.avg_ms << ',' << s.std_ms << '\n';
}

std::vector<LatencyRecord> bench_ledger(size_t n_txs, uint64_t interval_ms,
                                        pre::EntropySource& entropy) {
    ledger::Ledger led(ledger::LedgerConfig{interval_ms, true});
    auto account = pre::keygen(entropy);
    auto addr = led.register_account(account.pk, Role::Patient, "bench");

    // Arrival times: uniform over ten intervals (degenerate all-zero when
    // the interval is zero, where every tx gets its own immediate block).
    std::vector<uint64_t> arrivals(n_txs);
    for (auto& t : arrivals)
        t = interval_ms == 0 ? 0 : uniform_u64(entropy, 0, interval_ms * 10 - 1);
    std::sort(arrivals.begin(), arrivals.end());

    contracts::InstantiatePayload ping{contracts::Kind::Consent, addr, 0};
    std::vector<LatencyRecord> records(n_txs);
    std::map<uint64_t, size_t> by_nonce;

    auto absorb = [&](const std::optional<ledger::Block>& block) {
        if (!block) return;
        for (const auto& tx : block->tx_list) {
            size_t idx = by_nonce.at(tx.nonce);
            records[idx].commit_ms = block->timestamp_ms;
            records[idx].latency_ms = block->timestamp_ms - records[idx].submit_ms;
        }
    };

    uint64_t boundary = interval_ms;
    for (size_t i = 0; i < n_txs; ++i) {
        if (interval_ms > 0)
            while (boundary <= arrivals[i]) {
                absorb(led.produce_block(boundary));
                boundary += interval_ms;
            }
        auto tx = ledger::make_transaction(account.sk, addr, led.next_nonce(addr), 0,
                                           contracts::method::kInstantiate, ping.build());
        auto res = led.submit(tx);
        if (!res.accepted()) throw std::runtime_error("bench tx rejected: " + res.message);
        by_nonce[tx.nonce] = i;
        records[i].tx_index = i;
        records[i].submit_ms = arrivals[i];
        if (interval_ms == 0) absorb(led.produce_block(arrivals[i]));
    }
    while (led.mempool_size() > 0) {
        absorb(led.produce_block(boundary));
        boundary += std::max<uint64_t>(interval_ms, 1);
    }
    return records;
}

LatencyStats latency_stats(const std::vector<LatencyRecord>& records) {
    LatencyStats s;
    s.count = records.size();
    if (records.empty()) return s;
    double sum = 0;
    s.min_ms = s.max_ms = static_cast<double>(records[0].latency_ms);
    for (const auto& r : records) {
        auto v = static_cast<double>(r.latency_ms);
        s.min_ms = std::min(s.min_ms, v);
        s.max_ms = std::max(s.max_ms, v);
        sum += v;
    }
    s.avg_ms = sum / static_cast<double>(s.count);
    double var = 0;
    for (const auto& r : records) {
        double d = static_cast<double>(r.latency_ms) - s.avg_ms;
        var += d * d;
    }
    s.std_ms = std::sqrt(var / static_cast<double>(s.count));
    return s;
}

void write_latency_csv(std::ostream& out, const std::vector<LatencyRecord>& records,
                       const LatencyStats& stats) {
    out << "tx_index,submit_ms,commit_ms,latency_ms\n";
    for (const auto& r : records)
        out << r.tx_index << ',' << r.submit_ms << ',' << r.commit_ms << ',' << r.latency_ms
            << '\n';
    out << "\ncount,min_ms,max_ms,avg_ms,std_ms\n";
    out << stats.count << ',' << stats.min_ms << ',' << stats.max_ms << ',' << stats.avg_ms
        << ',' << stats.std_ms << '\n';
}

}  // namespace rxgov::harness
