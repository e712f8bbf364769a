#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "kbench/document.hpp"
#include "kbench/run_id.hpp"

namespace kbench {

enum class WorkloadKind { Pod, Job, Other };

std::string to_string(WorkloadKind kind);

// A parsed workload manifest document (apiVersion/kind/metadata/spec), the
// unit submitted to a scheduler backend. Thin wrapper over the document
// tree; `kind` is read from the document's `kind` field on demand.
struct WorkloadManifest {
    Document doc = Document::object();

    WorkloadKind kind() const;        // throws ManifestError when `kind` is missing
    std::string kind_name() const;    // raw kind string ("" when missing)
    std::string api_version() const;  // "" when missing
    std::string name() const;         // metadata.name, "" when missing

    bool has_kind() const;

    bool operator==(const WorkloadManifest&) const = default;
};

WorkloadManifest load_manifest(const std::filesystem::path& path);

struct WorkloadInfo {
    WorkloadKind kind;
    std::string kind_name;
    int expected_completions;  // Pod: 1; Job: spec.completions or 1
    bool unrecognized;         // true for Other kinds (expectation came from config)
};

// Reads the workload's type and its completion expectation. For Jobs the
// `spec.completions` value is read, defaulting to 1 when absent. Kinds other
// than Pod/Job take `other_completions` (default 1) and are flagged so the
// caller can warn.
WorkloadInfo detect_workload(const WorkloadManifest& manifest,
                             std::optional<int> other_completions = std::nullopt);

// Appends {"rfm": id} to the labels of every metadata block in the document
// tree, including nested pod templates. Missing labels maps are created;
// existing labels are preserved. Pure: the input is not modified. Applying
// twice with the same id equals applying once.
WorkloadManifest inject_labels(const WorkloadManifest& manifest, const RunIdentifier& id);

// Appends "-<id>" to the top-level metadata.name so one manifest can be
// submitted by many parameterized instances without name conflicts.
// Idempotent for the same id.
WorkloadManifest suffix_resource_name(const WorkloadManifest& manifest, const RunIdentifier& id);

// Label key used to tie workload resources to a test run.
inline constexpr const char* kRunLabelKey = "rfm";

std::string label_selector_for(const RunIdentifier& id);  // "rfm=<id>"

}  // namespace kbench
