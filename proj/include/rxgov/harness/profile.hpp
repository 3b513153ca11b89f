#pragma once

#include <cstddef>
#include <string>

namespace rxgov::harness {

// Payload size ranges in bytes (1 kB = 1024 bytes) for the three
// prescription items: personal info, medication, diagnosis.
struct SizeRange {
    size_t lo;
    size_t hi;
};

struct SizeProfile {
    std::string name;
    SizeRange pi;
    SizeRange med;
    SizeRange dia;
    int iterations;
};

// Full-scale reference workload: PI 0.43-0.82 kB, MED 0.24-0.53 kB,
// DIA 2.18 kB-8.76 MB, 1000 iterations per operation.
inline SizeProfile reference_profile() {
    return SizeProfile{"reference", {441, 839}, {246, 542}, {2233, 9191157}, 1000};
}

// Fast variant for CI: diagnosis capped at 512 kB, 100 iterations.
inline SizeProfile quick_profile() {
    return SizeProfile{"quick", {441, 839}, {246, 542}, {2233, 512 * 1024}, 100};
}

}  // namespace rxgov::harness
