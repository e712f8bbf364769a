#include "kbench/report.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "kbench/errors.hpp"

namespace kbench::report {

Document perf_report_document(const testkit::SuiteOutcome& outcome) {
    Document records = Document::array();
    for (const auto& result : outcome.results) {
        for (const auto& record : result.perf_records) {
            Document entry = Document::object();
            entry["instance"] = result.instance_name;
            entry["variable"] = record.variable;
            entry["value"] = record.measured ? Document(*record.measured) : Document(nullptr);
            entry["unit"] = record.unit;
            entry["reference"] = record.reference ? Document(*record.reference) : Document(nullptr);
            entry["tolerance"] = record.tolerance;
            entry["direction"] = perf::to_string(record.direction);
            entry["pass"] = record.pass;
            records.push_back(std::move(entry));
        }
    }
    return records;
}

void write_perf_report(const testkit::SuiteOutcome& outcome, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InfrastructureError("cannot write perf report " + path.string());
    out << perf_report_document(outcome).dump(2) << "\n";
}

Document load_perf_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open perf report", path.string());
    try {
        Document doc;
        in >> doc;
        if (!doc.is_array()) throw ParseError("perf report must be a JSON array", path.string());
        return doc;
    } catch (const Document::exception& e) {
        throw ParseError(e.what(), path.string());
    }
}

namespace {

std::string format_number(const Document& value) {
    if (value.is_null()) return "-";
    std::ostringstream out;
    out << std::setprecision(10) << value.get<double>();
    return out.str();
}

}  // namespace

std::string render_perf_table(const Document& report) {
    std::vector<std::array<std::string, 6>> rows;
    rows.push_back({"instance", "variable", "value", "reference", "unit", "result"});
    for (const auto& entry : report) {
        rows.push_back({entry.value("instance", ""), entry.value("variable", ""),
                        format_number(entry.value("value", Document(nullptr))),
                        format_number(entry.value("reference", Document(nullptr))),
                        entry.value("unit", ""), entry.value("pass", false) ? "ok" : "FAIL"});
    }
    std::array<std::size_t, 6> widths{};
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());

    std::ostringstream out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            out << std::left << std::setw(static_cast<int>(widths[c]) + 2) << rows[r][c];
        out << "\n";
        if (r == 0) {
            for (std::size_t c = 0; c < widths.size(); ++c)
                out << std::string(widths[c], '-') << "  ";
            out << "\n";
        }
    }
    return out.str();
}

std::string render_suite_summary(const testkit::SuiteOutcome& outcome) {
    std::ostringstream out;
    std::size_t passed = 0;
    for (const auto& result : outcome.results) {
        out << "[" << std::left << std::setw(10) << testkit::to_string(result.status) << "] "
            << result.instance_name;
        if (!result.note.empty()) out << " (" << result.note << ")";
        out << "\n";
        if (result.status == testkit::TestStatus::Pass) ++passed;
    }
    for (const auto& [instance, message] : outcome.infra_errors)
        out << "[" << std::left << std::setw(10) << "InfraError"
            << "] " << instance << " (" << message << ")\n";
    out << passed << "/" << outcome.results.size() << " instances passed";
    if (!outcome.infra_errors.empty())
        out << ", " << outcome.infra_errors.size() << " infrastructure error(s)";
    out << "\n";
    return out.str();
}

}  // namespace kbench::report
