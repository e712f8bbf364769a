#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kbench::perf {

// Per-epoch timing split of a training run: the I/O time (duration spent
// copying data to the device) and the remaining compute time, plus the
// number of input samples processed.
struct EpochTiming {
    EpochTiming(int epoch, double io_time, double compute_time, long long items);

    int epoch;
    double io_time;       // >= 0
    double compute_time;  // > 0
    long long items;      // > 0

    double total_time() const { return io_time + compute_time; }
};

// Input items processed per second of pure computation.
double compute_throughput(const EpochTiming& t);

// Computation time relative to the total time per epoch, in [0, 1].
double compute_fraction(const EpochTiming& t);

// Input items processed per second of total wall time. Equals
// compute_throughput * compute_fraction up to floating rounding.
double effective_throughput(const EpochTiming& t);

// Arithmetic mean of the per-epoch metrics.
struct PerfSummary {
    double mean_compute_throughput = 0;
    double mean_compute_fraction = 0;
    double mean_effective_throughput = 0;
    std::size_t epochs = 0;
};

PerfSummary aggregate_epochs(std::span<const EpochTiming> epochs);

enum class Direction { HigherIsBetter, LowerIsBetter, TwoSided };

std::string to_string(Direction direction);
Direction direction_from_string(const std::string& text);

// A performance variable extracted from run output: a regular expression
// with exactly one numeric capture group, an optional reference value, and a
// relative tolerance.
struct PerfVariable {
    std::string name;
    std::string pattern;
    std::string unit;
    std::optional<double> reference;
    double tolerance = 0.0;  // relative fraction, e.g. 0.05
    Direction direction = Direction::HigherIsBetter;

    void validate() const;  // throws PatternError

    bool operator==(const PerfVariable&) const = default;
};

struct PerfRecord {
    std::string variable;
    std::optional<double> measured;  // empty: pattern never matched
    std::string unit;
    std::optional<double> reference;
    double tolerance = 0.0;
    Direction direction = Direction::HigherIsBetter;
    bool pass = false;

    bool missing() const { return !measured.has_value(); }
};

// Direction-aware relative tolerance band: HigherIsBetter passes when
// measured >= reference * (1 - tol), LowerIsBetter when measured <=
// reference * (1 + tol), TwoSided when |measured - reference| <= tol * |reference|.
bool within_tolerance(double measured, double reference, double tolerance, Direction direction);

// Scans the log once per variable; the last match wins. A variable with no
// match yields a record with no measured value and pass=false. A variable
// with no reference records the measurement and passes.
std::vector<PerfRecord> extract_perf(std::string_view log_text,
                                     const std::vector<PerfVariable>& variables);

struct SanityResult {
    bool passed = true;
    std::string first_unmatched;  // pattern text, empty when passed
};

// Passes iff every pattern matches somewhere in the log. An empty pattern
// list passes vacuously.
SanityResult check_sanity(std::string_view log_text, const std::vector<std::string>& patterns);

}  // namespace kbench::perf
