#include "kbench/testkit.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "kbench/errors.hpp"
#include "kbench/k8s_backend.hpp"

namespace kbench::testkit {

void ManifestSource::validate() const {
    if (path.has_value() == inline_doc.has_value())
        throw ValidationError("workload needs exactly one of 'path' or 'inline'");
}

WorkloadManifest ManifestSource::load(const std::filesystem::path& base_dir) const {
    validate();
    if (inline_doc) {
        if (!inline_doc->is_object()) throw ManifestError("inline workload must be a mapping");
        return WorkloadManifest{*inline_doc};
    }
    std::filesystem::path p(*path);
    if (p.is_relative()) p = base_dir / p;
    return load_manifest(p);
}

void TestSpec::validate() const {
    if (name.empty()) throw ValidationError("test without a name");
    workload.validate();
    for (const auto& [param, values] : params)
        if (values.empty())
            throw ValidationError("parameter '" + param + "' has an empty value list", name);
    for (const auto& variable : perf_variables) variable.validate();
    if (time_limit && *time_limit <= 0)
        throw ValidationError("time_limit must be positive", name);
    if (expected_completions && *expected_completions <= 0)
        throw ValidationError("expected_completions must be positive", name);
}

namespace {

std::string render_value(const Document& value) {
    return value.is_string() ? value.get<std::string>() : value.dump();
}

std::string substitute_into_string(const std::string& text, const ParamBinding& binding,
                                   Document* whole_value) {
    // A string that is exactly "{param}" takes the parameter's type.
    if (text.size() > 2 && text.front() == '{' && text.back() == '}' &&
        text.find('{', 1) == std::string::npos && text.find('}') == text.size() - 1) {
        const std::string key = text.substr(1, text.size() - 2);
        auto it = binding.find(key);
        if (it != binding.end()) {
            if (whole_value != nullptr) *whole_value = it->second;
            return render_value(it->second);
        }
    }
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text.compare(i, 2, "{{") == 0) {
            out.push_back('{');
            i += 2;
        } else if (text.compare(i, 2, "}}") == 0) {
            out.push_back('}');
            i += 2;
        } else if (text[i] == '{') {
            auto close = text.find('}', i);
            if (close == std::string::npos)
                throw ValidationError("unterminated '{' in template '" + text + "'");
            const std::string key = text.substr(i + 1, close - i - 1);
            auto it = binding.find(key);
            if (it == binding.end())
                throw ValidationError("unknown parameter '" + key + "' in template '" + text + "'");
            out += render_value(it->second);
            i = close + 1;
        } else {
            out.push_back(text[i++]);
        }
    }
    return out;
}

}  // namespace

Document substitute_params(const Document& tmpl, const ParamBinding& binding) {
    if (tmpl.is_string()) {
        Document whole;
        std::string rendered = substitute_into_string(tmpl.get<std::string>(), binding, &whole);
        return whole.is_null() ? Document(rendered) : whole;
    }
    if (tmpl.is_array()) {
        Document out = Document::array();
        for (const auto& item : tmpl) out.push_back(substitute_params(item, binding));
        return out;
    }
    if (tmpl.is_object()) {
        Document out = Document::object();
        for (const auto& [key, value] : tmpl.items()) out[key] = substitute_params(value, binding);
        return out;
    }
    return tmpl;
}

std::string TestInstance::display_name() const {
    std::string out = spec.name;
    for (const auto& [param, value] : binding) out += "_" + param + "=" + render_value(value);
    return out;
}

std::string TestInstance::qualified_name() const {
    return system_name + ":" + partition.name + ":" + display_name();
}

std::string to_string(TestStatus status) {
    switch (status) {
        case TestStatus::Pass: return "Pass";
        case TestStatus::SanityFail: return "SanityFail";
        case TestStatus::PerfFail: return "PerfFail";
        case TestStatus::RunFail: return "RunFail";
        case TestStatus::TimedOut: return "TimedOut";
        case TestStatus::Cancelled: return "Cancelled";
    }
    return "RunFail";
}

WorkloadManifest apply_parameter_mutations(const WorkloadManifest& manifest,
                                           const std::vector<ManifestMutation>& mutations) {
    WorkloadManifest out = manifest;
    for (const auto& mutation : mutations)
        doc_set(out.doc, DocPath::parse(mutation.path), mutation.value);
    return out;
}

std::vector<TestInstance> expand_parameters(const TestSpec& spec, const std::string& system_name,
                                            const config::PartitionConfig& partition,
                                            const WorkloadManifest& base_manifest) {
    spec.validate();

    std::vector<std::pair<std::string, const std::vector<Document>*>> axes;
    for (const auto& [param, values] : spec.params) axes.emplace_back(param, &values);

    std::size_t total = 1;
    for (const auto& [param, values] : axes) total *= values->size();

    std::vector<TestInstance> instances;
    instances.reserve(total);
    std::vector<std::size_t> odometer(axes.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
        TestInstance instance;
        instance.spec = spec;
        instance.system_name = system_name;
        instance.partition = partition;
        for (std::size_t a = 0; a < axes.size(); ++a)
            instance.binding[axes[a].first] = (*axes[a].second)[odometer[a]];

        std::vector<ManifestMutation> resolved;
        resolved.reserve(spec.mutations.size());
        for (const auto& mutation : spec.mutations)
            resolved.push_back({mutation.path, substitute_params(mutation.value, instance.binding)});
        instance.manifest = apply_parameter_mutations(base_manifest, resolved);

        instances.push_back(std::move(instance));

        // Advance, last parameter fastest: (a=1,b=x), (a=1,b=y), (a=2,b=x)...
        for (std::size_t a = axes.size(); a-- > 0;) {
            if (++odometer[a] < axes[a].second->size()) break;
            odometer[a] = 0;
        }
    }
    return instances;
}

SuiteFile SuiteFile::parse(const Document& doc, const std::filesystem::path& base_dir,
                           const std::string& source_name) {
    if (!doc.is_object() || !doc.contains("tests") || !doc["tests"].is_array())
        throw ValidationError("suite file needs a top-level 'tests' list", source_name);

    SuiteFile suite;
    suite.base_dir = base_dir;
    std::set<std::string> names;
    for (std::size_t i = 0; i < doc["tests"].size(); ++i) {
        const Document& node = doc["tests"][i];
        const std::string location = source_name + ": tests[" + std::to_string(i) + "]";
        if (!node.is_object()) throw ValidationError("test must be a mapping", location);

        TestSpec spec;
        spec.name = node.value("name", "");
        if (spec.name.empty()) throw ValidationError("test without a name", location);
        if (!names.insert(spec.name).second)
            throw ValidationError("duplicate test name '" + spec.name + "'", location);

        auto string_list = [&](const char* key, std::vector<std::string> fallback) {
            auto it = node.find(key);
            if (it == node.end() || it->is_null()) return fallback;
            if (!it->is_array())
                throw ValidationError(std::string("'") + key + "' must be a list", location);
            std::vector<std::string> out;
            for (const auto& entry : *it) out.push_back(entry.get<std::string>());
            return out;
        };
        spec.valid_systems = string_list("valid_systems", {"*"});
        spec.valid_prog_environs = string_list("valid_prog_environs", {"*"});
        spec.sanity_patterns = string_list("sanity_patterns", {});

        auto workload = node.find("workload");
        if (workload == node.end() || !workload->is_object())
            throw ValidationError("test needs a 'workload' mapping", location);
        if (workload->contains("path")) spec.workload.path = (*workload)["path"].get<std::string>();
        if (workload->contains("inline")) spec.workload.inline_doc = (*workload)["inline"];
        spec.workload.validate();

        if (auto it = node.find("params"); it != node.end() && !it->is_null()) {
            if (!it->is_object()) throw ValidationError("'params' must be a mapping", location);
            for (const auto& [param, values] : it->items()) {
                if (!values.is_array())
                    throw ValidationError("parameter '" + param + "' must list its values", location);
                spec.params[param] = std::vector<Document>(values.begin(), values.end());
            }
        }

        if (auto it = node.find("mutations"); it != node.end() && !it->is_null()) {
            if (!it->is_array()) throw ValidationError("'mutations' must be a list", location);
            for (const auto& entry : *it) {
                if (!entry.is_object() || !entry.contains("path") || !entry.contains("value"))
                    throw ValidationError("mutation needs 'path' and 'value'", location);
                spec.mutations.push_back({entry["path"].get<std::string>(), entry["value"]});
            }
        }

        if (auto it = node.find("time_limit"); it != node.end() && !it->is_null())
            spec.time_limit = it->get<double>();
        if (auto it = node.find("namespace"); it != node.end() && !it->is_null())
            spec.namespace_ = it->get<std::string>();
        if (auto it = node.find("context"); it != node.end() && !it->is_null())
            spec.context = it->get<std::string>();
        if (auto it = node.find("expected_completions"); it != node.end() && !it->is_null())
            spec.expected_completions = it->get<int>();

        if (auto it = node.find("perf_variables"); it != node.end() && !it->is_null()) {
            if (!it->is_array()) throw ValidationError("'perf_variables' must be a list", location);
            for (const auto& entry : *it) {
                perf::PerfVariable variable;
                variable.name = entry.value("name", "");
                variable.pattern = entry.value("pattern", "");
                variable.unit = entry.value("unit", "");
                if (entry.contains("reference") && !entry["reference"].is_null())
                    variable.reference = entry["reference"].get<double>();
                variable.tolerance = entry.value("tolerance", 0.0);
                variable.direction =
                    perf::direction_from_string(entry.value("direction", "higher_is_better"));
                spec.perf_variables.push_back(std::move(variable));
            }
        }

        spec.validate();
        suite.tests.push_back(std::move(spec));
    }
    return suite;
}

SuiteFile SuiteFile::load(const std::filesystem::path& path) {
    return parse(load_document(path), path.parent_path(), path.string());
}

namespace {

bool environs_match(const TestSpec& spec, const config::PartitionConfig& partition) {
    for (const auto& wanted : spec.valid_prog_environs) {
        if (wanted == "*") return true;
        for (const auto& have : partition.environs)
            if (have == wanted) return true;
    }
    return false;
}

TestResult make_result(const TestInstance& instance, TestStatus status,
                       sched::TerminationEvent event, sched::CleanupDecision decision,
                       std::string note = {}) {
    TestResult result;
    result.instance_name = instance.qualified_name();
    result.status = status;
    result.termination = std::move(event);
    result.cleanup = decision;
    result.log_path = instance.log_path();
    result.note = std::move(note);
    return result;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return "";
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TestResult run_pipeline(TestInstance& instance, sched::SchedulerBackend& backend,
                        const PipelineOptions& options, const sched::CancelToken* cancel) {
    using sched::CleanupAction;
    using sched::CleanupReason;
    using sched::TerminationEvent;
    using sched::TerminationKind;

    auto cancelled_result = [&] {
        return make_result(instance, TestStatus::Cancelled,
                           TerminationEvent{TerminationKind::UserCancel, {}},
                           {CleanupAction::Delete, CleanupReason::Cancelled},
                           "cancelled before submit");
    };
    if (cancel != nullptr && cancel->requested()) return cancelled_result();

    // Stage 1: set up the stage and output directories.
    std::error_code ec;
    std::filesystem::create_directories(instance.stage_dir, ec);
    std::filesystem::create_directories(instance.output_dir, ec);
    if (ec) throw InfrastructureError("cannot create run directories: " + ec.message());
    save_document_yaml(instance.manifest.doc, instance.stage_dir / "manifest.yaml");
    std::ofstream(instance.log_path(), std::ios::trunc).flush();  // fresh sink per run

    // Namespace/context precedence: test > CLI > partition > default.
    const bool require_context = [&] {
        auto* k8s_backend = dynamic_cast<k8s::K8sBackend*>(&backend);
        return k8s_backend != nullptr && k8s_backend->uses_kubeconfig();
    }();
    k8s::NsCtxQuery query;
    query.test_namespace = instance.spec.namespace_;
    query.test_context = instance.spec.context;
    query.cli_namespace = options.cli_namespace;
    query.cli_context = options.cli_context;
    query.partition_namespace = instance.partition.namespace_;
    query.partition_context = instance.partition.context;
    const auto nsctx = k8s::resolve_namespace_context(query, options.env, require_context);

    sched::RunContext ctx;
    ctx.instance_name = instance.display_name();
    ctx.namespace_ = nsctx.namespace_;
    ctx.context = nsctx.context;
    ctx.output_file = instance.log_path().string();
    ctx.expected_completions = instance.spec.expected_completions;

    // Stage 2: submit.
    sched::JobHandle handle;
    try {
        handle = backend.submit(instance.manifest, ctx);
    } catch (const SubmitError& e) {
        std::ofstream(instance.log_path(), std::ios::app)
            << "[kbench] submit rejected: " << e.what() << "\n";
        return make_result(instance, TestStatus::RunFail,
                           TerminationEvent{TerminationKind::AllFinished, {}},
                           {CleanupAction::Retain, CleanupReason::Failure},
                           std::string("submit rejected: ") + e.what());
    }
    instance.run_id = handle.run_id;

    // Stage 3: wait, bounded by the time limit, interruptible by cancel.
    const std::optional<double> limit =
        instance.spec.time_limit ? instance.spec.time_limit : options.default_time_limit;
    TerminationEvent event;
    try {
        event = backend.wait(handle, limit, cancel);
    } catch (...) {
        // Broken machinery: still record a cleanup decision for the handle.
        try {
            backend.finalize(handle, TerminationEvent{TerminationKind::TimeLimit, {}});
        } catch (...) {
        }
        throw;
    }

    // Stage 4 & 5: sanity and performance over the captured output. These run
    // on every path; the termination kind decides how they count.
    const std::string log_text = read_file(instance.log_path());
    TestResult result = make_result(instance, TestStatus::Pass, event,
                                    {CleanupAction::Delete, CleanupReason::Success});
    result.sanity = perf::check_sanity(log_text, instance.spec.sanity_patterns);
    result.perf_records = perf::extract_perf(log_text, instance.spec.perf_variables);

    // Stage 6: cleanup delegation.
    result.cleanup = backend.finalize(handle, event);

    switch (result.cleanup.reason) {
        case CleanupReason::Cancelled:
            result.status = TestStatus::Cancelled;
            break;
        case CleanupReason::TimedOut:
            result.status = TestStatus::TimedOut;
            break;
        case CleanupReason::Failure:
            result.status = TestStatus::RunFail;
            break;
        case CleanupReason::Success: {
            bool perf_ok = true;
            for (const auto& record : result.perf_records) perf_ok = perf_ok && record.pass;
            if (!result.sanity.passed)
                result.status = TestStatus::SanityFail;
            else if (!perf_ok)
                result.status = TestStatus::PerfFail;
            else
                result.status = TestStatus::Pass;
            break;
        }
    }
    return result;
}

std::vector<TestInstance> plan_suite(const std::vector<TestSpec>& specs,
                                     const config::SiteConfig& cfg, const SuiteOptions& options,
                                     const std::filesystem::path& manifest_base_dir) {
    std::vector<TestInstance> instances;
    for (const auto& spec : specs) {
        spec.validate();
        WorkloadManifest base;
        bool base_loaded = false;

        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& selector : spec.valid_systems) {
            for (const auto& ref : config::select_partitions(cfg, selector)) {
                if (!config::selector_matches(options.filter, ref.system->name,
                                              ref.partition->name))
                    continue;
                if (!seen.insert({ref.system->name, ref.partition->name}).second) continue;
                if (!environs_match(spec, *ref.partition)) continue;
                if (!base_loaded) {
                    base = spec.workload.load(manifest_base_dir);
                    base_loaded = true;
                }
                auto expanded = expand_parameters(spec, ref.system->name, *ref.partition, base);
                for (auto& instance : expanded) {
                    instance.output_dir = options.pipeline.output_root / instance.system_name /
                                          instance.partition.name / instance.display_name();
                    instance.stage_dir = instance.output_dir / "stage";
                    instances.push_back(std::move(instance));
                }
            }
        }
    }
    std::sort(instances.begin(), instances.end(), [](const TestInstance& a, const TestInstance& b) {
        return a.qualified_name() < b.qualified_name();
    });
    for (std::size_t i = 1; i < instances.size(); ++i)
        if (instances[i].qualified_name() == instances[i - 1].qualified_name())
            throw ValidationError("duplicate instance name '" + instances[i].qualified_name() + "'");
    return instances;
}

SuiteOutcome run_suite(const std::vector<TestSpec>& specs, const config::SiteConfig& cfg,
                       sched::BackendRegistry& registry, const SuiteOptions& options,
                       const std::filesystem::path& manifest_base_dir,
                       const sched::CancelToken* cancel) {
    auto instances = plan_suite(specs, cfg, options, manifest_base_dir);

    SuiteOutcome outcome;
    outcome.results.resize(instances.size());
    std::vector<char> has_result(instances.size(), 0);
    std::mutex outcome_mutex;
    std::atomic<std::size_t> next{0};

    const std::size_t workers =
        std::max<std::size_t>(1, std::min(options.concurrency, instances.size()));

    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= instances.size()) return;
            TestInstance& instance = instances[i];
            try {
                auto backend = registry.get(instance.partition.scheduler);
                auto result = run_pipeline(instance, *backend, options.pipeline, cancel);
                std::lock_guard lock(outcome_mutex);
                outcome.results[i] = std::move(result);
                has_result[i] = 1;
            } catch (const std::exception& e) {
                std::lock_guard lock(outcome_mutex);
                outcome.infra_errors.emplace_back(instance.qualified_name(), e.what());
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    // Compact away slots that errored out; order stays name-sorted.
    SuiteOutcome final_outcome;
    final_outcome.infra_errors = std::move(outcome.infra_errors);
    for (std::size_t i = 0; i < instances.size(); ++i)
        if (has_result[i]) final_outcome.results.push_back(std::move(outcome.results[i]));
    std::sort(final_outcome.infra_errors.begin(), final_outcome.infra_errors.end());
    return final_outcome;
}

}  // namespace kbench::testkit
