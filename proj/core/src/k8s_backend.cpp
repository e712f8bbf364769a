#include "kbench/k8s_backend.hpp"

#include <fstream>

#include "kbench/errors.hpp"

namespace kbench::k8s {

NamespaceContext resolve_namespace_context(const NsCtxQuery& query, const EnvReader& env,
                                           bool require_context) {
    NamespaceContext out;
    out.namespace_ = query.test_namespace.value_or(
        query.cli_namespace.value_or(query.partition_namespace.value_or("default")));

    if (query.test_context)
        out.context = *query.test_context;
    else if (query.cli_context)
        out.context = *query.cli_context;
    else if (query.partition_context)
        out.context = *query.partition_context;
    else if (require_context) {
        auto path = env("KUBECONFIG");
        if (!path || path->empty())
            throw ConfigError("no context configured and KUBECONFIG is not set");
        out.context = Kubeconfig::load(*path).current_context;
        if (out.context.empty())
            throw ConfigError("kubeconfig " + *path + " has no current-context");
    }
    return out;
}

// --- LogWorker -------------------------------------------------------------

LogWorker::LogWorker(std::shared_ptr<KubeClient> client, std::string ns, std::string selector,
                     std::string sink_path, Clock& clock, double poll_interval)
    : client_(std::move(client)),
      ns_(std::move(ns)),
      selector_(std::move(selector)),
      sink_path_(std::move(sink_path)),
      clock_(clock),
      poll_interval_(poll_interval) {}

LogWorker::~LogWorker() { finish_and_join(); }

void LogWorker::start() {
    thread_ = std::thread([this] {
        std::ofstream sink(sink_path_, std::ios::app);
        run(sink);
    });
}

void LogWorker::finish_and_join() {
    if (joined_.exchange(true)) {
        if (thread_.joinable()) thread_.join();
        return;
    }
    finish_.store(true);
    if (thread_.joinable()) thread_.join();
}

void LogWorker::write_line(std::ostream& sink, const std::string& pod, const std::string& line) {
    if (streams_.size() > 1)
        sink << "[" << pod << "] " << line << "\n";
    else
        sink << line << "\n";
}

bool LogWorker::poll_once(std::ostream& sink) {
    std::vector<PodRecord> pods;
    try {
        pods = client_->list_pods(ns_, selector_);
    } catch (const ApiError& e) {
        sink << "[kbench] pod listing failed: " << e.what() << "\n";
        return false;
    }

    // Register every listed pod before fetching so the multi-pod prefix
    // decision is stable from the first written line.
    for (const auto& pod : pods) streams_.try_emplace(pod.name);

    for (const auto& pod : pods) {
        auto& stream = streams_[pod.name];
        if (stream.gone) continue;
        try {
            auto chunk = client_->get_pod_logs(ns_, pod.name, stream.cursor);
            stream.cursor = chunk.cursor;
            stream.partial += chunk.text;
            std::size_t pos;
            while ((pos = stream.partial.find('\n')) != std::string::npos) {
                write_line(sink, pod.name, stream.partial.substr(0, pos));
                stream.partial.erase(0, pos + 1);
            }
        } catch (const ApiError& e) {
            // An individual pod's log fetch failing is not fatal for the run.
            stream.gone = true;
            sink << "[kbench] log stream for pod '" << pod.name << "' ended: " << e.what() << "\n";
        }
    }

    if (pods.empty()) return false;  // nothing scheduled yet: keep idling
    for (const auto& pod : pods) {
        auto it = streams_.find(pod.name);
        const bool gone = it != streams_.end() && it->second.gone;
        if (!pod.terminal() && !gone) return false;
    }
    return true;
}

void LogWorker::run(std::ostream& sink) {
    for (;;) {
        const bool all_terminal = poll_once(sink);
        if (all_terminal) break;
        if (finish_.load()) {
            poll_once(sink);  // final drain
            break;
        }
        sink.flush();
        clock_.sleep_for(poll_interval_);
    }
    for (auto& [pod, stream] : streams_)
        if (!stream.partial.empty()) write_line(sink, pod, stream.partial);
    sink.flush();
}

// --- K8sBackend ------------------------------------------------------------

K8sBackend::K8sBackend(ApiEndpoint endpoint, Clock& clock, K8sBackendOptions options)
    : clock_(clock), options_(options), fixed_endpoint_(std::move(endpoint)) {}

K8sBackend::K8sBackend(Clock& clock, K8sBackendOptions options, EnvReader env)
    : clock_(clock), options_(options), env_(std::move(env)) {}

std::shared_ptr<KubeClient> K8sBackend::client_for(const std::string& context) {
    std::lock_guard lock(mutex_);
    auto it = clients_.find(context);
    if (it != clients_.end()) return it->second;
    ApiEndpoint endpoint =
        fixed_endpoint_ ? *fixed_endpoint_ : endpoint_from_kubeconfig_env(context, env_);
    auto client = std::make_shared<KubeClient>(std::move(endpoint), clock_, client_options_);
    clients_[context] = client;
    return client;
}

sched::JobHandle K8sBackend::submit(const WorkloadManifest& manifest,
                                    const sched::RunContext& ctx) {
    WorkloadInfo info;
    try {
        info = detect_workload(manifest, ctx.expected_completions.has_value()
                                             ? ctx.expected_completions
                                             : options_.other_kind_completions);
    } catch (const ManifestError& e) {
        throw SubmitError(e.what());
    }

    const RunIdentifier id = identifiers_.generate();
    WorkloadManifest prepared = suffix_resource_name(inject_labels(manifest, id), id);

    auto client = client_for(ctx.context);
    std::string created_name;
    try {
        created_name = client->create_resource(info.kind_name, ctx.namespace_, prepared.doc);
    } catch (const ApiError& e) {
        if (e.is_connection()) throw InfrastructureError(e.what());
        throw SubmitError(e.what());
    }

    auto run = std::make_shared<Run>();
    run->kind_name = info.kind_name;
    run->kind = info.kind;
    run->resource_name = created_name;
    run->ns = ctx.namespace_;
    run->expected_completions = info.expected_completions;
    run->output_file = ctx.output_file;
    run->client = client;
    run->cancel = std::make_shared<sched::CancelToken>();
    if (info.unrecognized && !ctx.output_file.empty()) {
        std::ofstream sink(ctx.output_file, std::ios::app);
        if (sink)
            sink << "[kbench] warning: unrecognized workload kind '" << info.kind_name
                 << "', expecting " << info.expected_completions << " completion(s)\n";
    }
    if (!ctx.output_file.empty()) {
        run->worker = std::make_unique<LogWorker>(client, ctx.namespace_, label_selector_for(id),
                                                  ctx.output_file, clock_,
                                                  options_.log_poll_interval);
        run->worker->start();
    }

    {
        std::lock_guard lock(mutex_);
        runs_[id.value] = run;
    }
    return sched::JobHandle{name(), id, info.kind_name + "/" + ctx.namespace_ + "/" + created_name,
                            run->cancel};
}

std::shared_ptr<K8sBackend::Run> K8sBackend::find_run(const RunIdentifier& id) const {
    std::lock_guard lock(mutex_);
    auto it = runs_.find(id.value);
    if (it == runs_.end()) throw InfrastructureError("unknown k8s run " + id.value);
    return it->second;
}

sched::TerminationEvent K8sBackend::wait(const sched::JobHandle& handle,
                                         std::optional<double> time_limit,
                                         const sched::CancelToken* external_cancel) {
    auto run = find_run(handle.run_id);
    const std::string selector = label_selector_for(handle.run_id);
    const double start = clock_.now();
    std::map<std::string, int> unknown_streak;

    auto stop_worker = [&run] {
        if (run->worker) run->worker->finish_and_join();
    };

    for (;;) {
        std::vector<PodRecord> pods;
        try {
            pods = run->client->list_pods(run->ns, selector);
        } catch (const ApiError& e) {
            stop_worker();
            throw InfrastructureError(std::string("lost contact with the API server: ") + e.what());
        }

        // Classify crash states: a pod stuck in Unknown for a grace window
        // counts as Failed.
        std::vector<sched::PodOutcome> outcomes;
        outcomes.reserve(pods.size());
        for (const auto& pod : pods) {
            sched::PodPhase phase = pod.phase;
            if (phase == sched::PodPhase::Unknown) {
                if (++unknown_streak[pod.name] > options_.unknown_grace_polls)
                    phase = sched::PodPhase::Failed;
            } else {
                unknown_streak[pod.name] = 0;
            }
            outcomes.push_back({pod.name, phase});
        }

        int succeeded = 0, failed = 0;
        bool all_terminal = !outcomes.empty();
        for (const auto& o : outcomes) {
            if (o.phase == sched::PodPhase::Succeeded) ++succeeded;
            else if (o.phase == sched::PodPhase::Failed) ++failed;
            else all_terminal = false;
        }

        // Tie-break within one poll: AllFinished > UserCancel > TimeLimit.
        if (all_terminal && (succeeded >= run->expected_completions || failed > 0)) {
            stop_worker();
            return {sched::TerminationKind::AllFinished, std::move(outcomes)};
        }
        const bool cancelled = run->cancel->requested() ||
                               (external_cancel != nullptr && external_cancel->requested());
        if (cancelled) {
            stop_worker();
            return {sched::TerminationKind::UserCancel, std::move(outcomes)};
        }
        if (time_limit && clock_.now() - start >= *time_limit) {
            stop_worker();
            return {sched::TerminationKind::TimeLimit, std::move(outcomes)};
        }
        clock_.sleep_for(options_.poll_interval);
    }
}

void K8sBackend::cancel(const sched::JobHandle& handle) {
    std::lock_guard lock(mutex_);
    auto it = runs_.find(handle.run_id.value);
    if (it == runs_.end()) return;  // completed and finalized: no-op
    it->second->cancel->request();
}

sched::CleanupDecision K8sBackend::finalize(const sched::JobHandle& handle,
                                            const sched::TerminationEvent& event) {
    auto run = find_run(handle.run_id);
    if (run->worker) run->worker->finish_and_join();

    const auto decision = sched::decide_cleanup(event, run->expected_completions);
    if (decision.action == sched::CleanupAction::Delete) {
        const std::string selector = label_selector_for(handle.run_id);
        try {
            run->client->delete_collection(run->ns, "Pod", selector);
            if (run->kind == WorkloadKind::Job)
                run->client->delete_collection(run->ns, "Job", selector);
        } catch (const ApiError& e) {
            // Reported, but the decision stands.
            if (!run->output_file.empty()) {
                std::ofstream sink(run->output_file, std::ios::app);
                if (sink) sink << "[kbench] cleanup error: " << e.what() << "\n";
            }
        }
    }

    std::lock_guard lock(mutex_);
    runs_.erase(handle.run_id.value);
    return decision;
}

std::pair<sched::TerminationEvent, sched::CleanupDecision> K8sBackend::await_and_finalize(
    const sched::JobHandle& handle, std::optional<double> time_limit,
    const sched::CancelToken* external_cancel) {
    auto event = wait(handle, time_limit, external_cancel);
    auto decision = finalize(handle, event);
    return {std::move(event), decision};
}

}  // namespace kbench::k8s
