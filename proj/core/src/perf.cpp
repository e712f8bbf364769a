#include "kbench/perf.hpp"

#include <cmath>
#include <regex>

#include "kbench/errors.hpp"

namespace kbench::perf {

EpochTiming::EpochTiming(int epoch, double io_time, double compute_time, long long items)
    : epoch(epoch), io_time(io_time), compute_time(compute_time), items(items) {
    if (!(io_time >= 0) || !std::isfinite(io_time))
        throw DomainError("io_time must be finite and >= 0");
    if (!(compute_time > 0) || !std::isfinite(compute_time))
        throw DomainError("compute_time must be finite and > 0");
    if (items <= 0) throw DomainError("items must be > 0");
}

double compute_throughput(const EpochTiming& t) {
    return static_cast<double>(t.items) / t.compute_time;
}

double compute_fraction(const EpochTiming& t) { return t.compute_time / t.total_time(); }

double effective_throughput(const EpochTiming& t) {
    return static_cast<double>(t.items) / t.total_time();
}

PerfSummary aggregate_epochs(std::span<const EpochTiming> epochs) {
    PerfSummary summary;
    summary.epochs = epochs.size();
    if (epochs.empty()) return summary;
    for (const auto& t : epochs) {
        summary.mean_compute_throughput += compute_throughput(t);
        summary.mean_compute_fraction += compute_fraction(t);
        summary.mean_effective_throughput += effective_throughput(t);
    }
    const auto n = static_cast<double>(epochs.size());
    summary.mean_compute_throughput /= n;
    summary.mean_compute_fraction /= n;
    summary.mean_effective_throughput /= n;
    return summary;
}

std::string to_string(Direction direction) {
    switch (direction) {
        case Direction::HigherIsBetter: return "higher_is_better";
        case Direction::LowerIsBetter: return "lower_is_better";
        case Direction::TwoSided: return "two_sided";
    }
    return "higher_is_better";
}

Direction direction_from_string(const std::string& text) {
    if (text == "higher_is_better") return Direction::HigherIsBetter;
    if (text == "lower_is_better") return Direction::LowerIsBetter;
    if (text == "two_sided") return Direction::TwoSided;
    throw ValidationError("unknown direction '" + text + "'");
}

namespace {

std::regex compile_pattern(const PerfVariable& variable) {
    try {
        std::regex re(variable.pattern, std::regex::ECMAScript);
        if (re.mark_count() != 1)
            throw PatternError("pattern for '" + variable.name + "' must have exactly one capture group, has " +
                               std::to_string(re.mark_count()));
        return re;
    } catch (const std::regex_error& e) {
        throw PatternError("invalid pattern for '" + variable.name + "': " + e.what());
    }
}

}  // namespace

void PerfVariable::validate() const {
    if (name.empty()) throw PatternError("perf variable without a name");
    if (tolerance < 0) throw PatternError("tolerance for '" + name + "' must be >= 0");
    (void)compile_pattern(*this);
}

bool within_tolerance(double measured, double reference, double tolerance, Direction direction) {
    switch (direction) {
        case Direction::HigherIsBetter:
            return measured >= reference * (1.0 - tolerance);
        case Direction::LowerIsBetter:
            return measured <= reference * (1.0 + tolerance);
        case Direction::TwoSided:
            return std::abs(measured - reference) <= tolerance * std::abs(reference);
    }
    return false;
}

std::vector<PerfRecord> extract_perf(std::string_view log_text,
                                     const std::vector<PerfVariable>& variables) {
    std::vector<PerfRecord> records;
    records.reserve(variables.size());
    for (const auto& variable : variables) {
        std::regex re = compile_pattern(variable);
        PerfRecord record;
        record.variable = variable.name;
        record.unit = variable.unit;
        record.reference = variable.reference;
        record.tolerance = variable.tolerance;
        record.direction = variable.direction;

        std::optional<double> value;
        auto begin = std::cregex_iterator(log_text.data(), log_text.data() + log_text.size(), re);
        for (auto it = begin; it != std::cregex_iterator(); ++it) {
            try {
                value = std::stod((*it)[1].str());
            } catch (const std::exception&) {
                // non-numeric capture: skip, keep scanning
            }
        }
        record.measured = value;
        if (!record.measured)
            record.pass = false;
        else if (!record.reference)
            record.pass = true;
        else
            record.pass = within_tolerance(*record.measured, *record.reference, record.tolerance,
                                           record.direction);
        records.push_back(std::move(record));
    }
    return records;
}

SanityResult check_sanity(std::string_view log_text, const std::vector<std::string>& patterns) {
    for (const auto& pattern : patterns) {
        std::regex re;
        try {
            re = std::regex(pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw PatternError("invalid sanity pattern '" + pattern + "': " + e.what());
        }
        if (!std::regex_search(log_text.begin(), log_text.end(), re))
            return {false, pattern};
    }
    return {true, {}};
}

}  // namespace kbench::perf
