#pragma once

// Published throughput reference rows used as fixtures for the metric
// identity and tolerance checks (global batch size 32 runs). Rows with a
// timing split carry (compute throughput, compute fraction, effective
// throughput); `identity_consistent` is false for the one row whose printed
// numbers do not satisfy effective = compute x fraction.

namespace kbench::fixtures {

struct ThroughputRow {
    const char* benchmark;
    const char* system;
    double compute_throughput;  // inputs/s
    double compute_fraction;    // 0..1
    double effective_throughput;  // inputs/s
    bool identity_consistent;
};

inline constexpr ThroughputRow kThroughputRows[] = {
    {"resnet50", "archer2-cpu", 40.5, 0.989, 40.1, true},
    {"resnet50", "archer2-mi210", 293.2, 0.773, 226.6, true},
    {"resnet50", "cirrus-v100", 138.0, 0.973, 134.3, true},
    {"resnet50", "eidf-a100", 226.2, 0.794, 179.7, true},
    {"cosmoflow", "archer2-cpu", 14.9, 0.989, 14.8, true},
    {"cosmoflow", "archer2-mi210", 479.9, 0.151, 72.5, true},
    {"cosmoflow", "cirrus-v100", 112.2, 0.696, 78.1, true},
    {"cosmoflow", "eidf-a100", 117.9, 0.493, 58.1, true},
    {"deepcam", "archer2-cpu", 6.1, 0.987, 6.1, true},
    {"deepcam", "archer2-mi210", 26.4, 0.550, 14.5, true},
    {"deepcam", "cirrus-v100", 54.1, 0.541, 15.4, false},
    {"deepcam", "eidf-a100", 101.7, 0.135, 13.7, true},
};

// Accelerator rows published with effective throughput only (no timing
// split). Fixtures for the tolerance engine; not reproducible at desk scale.
struct EffectiveOnlyRow {
    const char* benchmark;
    const char* system;
    double effective_throughput;
};

inline constexpr EffectiveOnlyRow kEffectiveOnlyRows[] = {
    {"resnet50", "graphcore-pod64", 255.6},
    {"resnet50", "cerebras-cs2", 452.0},
    {"cosmoflow", "graphcore-pod64-half", 14.5},
};

}  // namespace kbench::fixtures
