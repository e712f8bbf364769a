#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kbench/clock.hpp"
#include "kbench/config.hpp"
#include "kbench/document.hpp"
#include "kbench/k8s_client.hpp"
#include "kbench/manifest.hpp"
#include "kbench/perf.hpp"
#include "kbench/scheduler.hpp"

namespace kbench::testkit {

// Where the workload manifest comes from: a file path or an inline document.
// Exactly one variant is populated.
struct ManifestSource {
    std::optional<std::string> path;       // relative paths resolve against the suite file
    std::optional<Document> inline_doc;

    void validate() const;
    WorkloadManifest load(const std::filesystem::path& base_dir) const;
};

// A manifest mutation: set the node at `path` to `value`. Values may carry
// "{param}" placeholders; a value that is exactly one placeholder takes the
// parameter's type, otherwise placeholders interpolate into the string.
// "{{" and "}}" escape literal braces.
struct ManifestMutation {
    std::string path;
    Document value;

    bool operator==(const ManifestMutation&) const = default;
};

struct TestSpec {
    std::string name;
    std::vector<std::string> valid_systems{"*"};
    std::vector<std::string> valid_prog_environs{"*"};
    ManifestSource workload;
    std::map<std::string, std::vector<Document>> params;  // ordered by parameter name
    std::vector<ManifestMutation> mutations;
    std::optional<double> time_limit;  // seconds
    std::vector<std::string> sanity_patterns;
    std::vector<perf::PerfVariable> perf_variables;
    std::optional<std::string> namespace_;
    std::optional<std::string> context;
    std::optional<int> expected_completions;  // for unrecognized workload kinds

    void validate() const;
};

using ParamBinding = std::map<std::string, Document>;

struct TestInstance {
    TestSpec spec;
    ParamBinding binding;  // covers exactly the keys of spec.params
    std::string system_name;
    config::PartitionConfig partition;
    WorkloadManifest manifest;  // post parameter mutation
    std::optional<RunIdentifier> run_id;  // assigned at submit
    std::filesystem::path stage_dir;
    std::filesystem::path output_dir;

    // spec name plus the canonical binding encoding, e.g.
    // "ResNet50Test_num_gpus=4". Unique per (system, partition).
    std::string display_name() const;
    // "<system>:<partition>:<display_name>", unique per suite run.
    std::string qualified_name() const;
    std::filesystem::path log_path() const { return output_dir / "rfm_job.out"; }
};

enum class TestStatus { Pass, SanityFail, PerfFail, RunFail, TimedOut, Cancelled };

std::string to_string(TestStatus status);

struct TestResult {
    std::string instance_name;  // qualified
    TestStatus status = TestStatus::RunFail;
    std::vector<perf::PerfRecord> perf_records;
    sched::TerminationEvent termination{sched::TerminationKind::AllFinished, {}};
    sched::CleanupDecision cleanup{sched::CleanupAction::Retain, sched::CleanupReason::Failure};
    perf::SanityResult sanity;
    std::filesystem::path log_path;
    std::string note;  // submit failures and similar diagnostics
};

// Substitutes "{param}" placeholders through a document tree.
Document substitute_params(const Document& tmpl, const ParamBinding& binding);

// Full Cartesian product of the parameter value lists, one instance per
// combination, ordered lexicographically by parameter name then value-list
// order. Empty params yield a single instance with an empty binding.
std::vector<TestInstance> expand_parameters(const TestSpec& spec, const std::string& system_name,
                                            const config::PartitionConfig& partition,
                                            const WorkloadManifest& base_manifest);

// Applies mutations in order; the input manifest is not modified. Throws
// PathError when a mutation path cannot descend.
WorkloadManifest apply_parameter_mutations(const WorkloadManifest& manifest,
                                           const std::vector<ManifestMutation>& mutations);

struct SuiteFile {
    std::vector<TestSpec> tests;
    std::filesystem::path base_dir;

    static SuiteFile load(const std::filesystem::path& path);
    static SuiteFile parse(const Document& doc, const std::filesystem::path& base_dir,
                           const std::string& source_name = "<suite>");
};

struct PipelineOptions {
    std::filesystem::path output_root = "output";
    std::optional<std::string> cli_namespace;
    std::optional<std::string> cli_context;
    std::optional<double> default_time_limit;  // used when the test declares none
    k8s::EnvReader env = k8s::system_env();
};

// Drives one instance through setup -> submit -> wait -> sanity -> perf ->
// cleanup. Test-level failures are encoded in the result status; only broken
// machinery raises (InfrastructureError).
TestResult run_pipeline(TestInstance& instance, sched::SchedulerBackend& backend,
                        const PipelineOptions& options,
                        const sched::CancelToken* cancel = nullptr);

struct SuiteOptions {
    std::string filter = "*";  // "system:partition" selector
    std::size_t concurrency = 4;
    PipelineOptions pipeline;
};

struct SuiteOutcome {
    std::vector<TestResult> results;  // ordered by qualified instance name
    std::vector<std::pair<std::string, std::string>> infra_errors;  // (instance, message)
};

// Expands all matching instances for the given specs.
std::vector<TestInstance> plan_suite(const std::vector<TestSpec>& specs,
                                     const config::SiteConfig& cfg, const SuiteOptions& options,
                                     const std::filesystem::path& manifest_base_dir);

// Runs all matching instances with a bounded worker pool. Result order is
// stable by instance name regardless of completion order; per-instance
// infrastructure errors are aggregated without aborting other instances.
SuiteOutcome run_suite(const std::vector<TestSpec>& specs, const config::SiteConfig& cfg,
                       sched::BackendRegistry& registry, const SuiteOptions& options,
                       const std::filesystem::path& manifest_base_dir,
                       const sched::CancelToken* cancel = nullptr);

}  // namespace kbench::testkit
