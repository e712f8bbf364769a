#pragma once

#include <filesystem>
#include <string>

#include "kbench/document.hpp"
#include "kbench/testkit.hpp"

namespace kbench::report {

// Machine-readable perf report: a JSON array with one record per extracted
// performance variable (instance, variable, value, unit, reference,
// tolerance, direction, pass). Deterministic for a fixed suite outcome.
Document perf_report_document(const testkit::SuiteOutcome& outcome);
void write_perf_report(const testkit::SuiteOutcome& outcome, const std::filesystem::path& path);
Document load_perf_report(const std::filesystem::path& path);

// Human-readable views.
std::string render_perf_table(const Document& report);
std::string render_suite_summary(const testkit::SuiteOutcome& outcome);

}  // namespace kbench::report
