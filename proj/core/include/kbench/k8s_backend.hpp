#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include "kbench/clock.hpp"
#include "kbench/k8s_client.hpp"
#include "kbench/scheduler.hpp"

namespace kbench::k8s {

struct NsCtxQuery {
    std::optional<std::string> test_namespace;
    std::optional<std::string> test_context;
    std::optional<std::string> cli_namespace;
    std::optional<std::string> cli_context;
    std::optional<std::string> partition_namespace;
    std::optional<std::string> partition_context;
};

struct NamespaceContext {
    std::string namespace_;  // "default" when nothing is set
    std::string context;     // "" means: use the kubeconfig current-context
};

// Precedence: test > CLI > partition > default. When no layer names a
// context and `require_context` is set, the current-context of the file
// named by $KUBECONFIG is used; a missing/unreadable kubeconfig is then a
// ConfigError. Backends bound to an explicit endpoint skip context
// resolution entirely (require_context = false).
NamespaceContext resolve_namespace_context(const NsCtxQuery& query, const EnvReader& env,
                                           bool require_context);

struct K8sBackendOptions {
    double poll_interval = 1.0;      // waiter poll period, seconds
    double log_poll_interval = 0.5;  // log worker poll period, seconds
    int unknown_grace_polls = 2;     // Unknown-phase polls before counting as Failed
    std::optional<int> other_kind_completions;  // default expectation for Other kinds
};

// Streams the logs of every pod matching one run's label selector into the
// instance's output file. Pods appearing later are picked up on subsequent
// polls; lines are prefixed with "[<pod-name>] " once more than one pod has
// been seen. Per-pod line order is preserved; interleaving across pods is
// unspecified.
class LogWorker {
public:
    LogWorker(std::shared_ptr<KubeClient> client, std::string ns, std::string selector,
              std::string sink_path, Clock& clock, double poll_interval);
    ~LogWorker();

    void start();

    // Requests completion, performs a final drain, and joins the thread.
    // After this returns no further lines are appended. Idempotent.
    void finish_and_join();

private:
    struct PodStream {
        std::size_t cursor = 0;
        std::string partial;  // trailing bytes until the newline arrives
        bool gone = false;    // log endpoint said NotFound (pod deleted)
    };

    void run(std::ostream& sink);
    bool poll_once(std::ostream& sink);  // fetches output; true when all pods are terminal
    void write_line(std::ostream& sink, const std::string& pod, const std::string& line);

    std::shared_ptr<KubeClient> client_;
    std::string ns_;
    std::string selector_;
    std::string sink_path_;
    Clock& clock_;
    double poll_interval_;

    std::map<std::string, PodStream> streams_;
    std::atomic<bool> finish_{false};
    std::atomic<bool> joined_{false};
    std::thread thread_;
};

// The Kubernetes scheduler backend: label-identifies workload resources,
// launches them, aggregates pod logs concurrently, waits for the three-way
// terminal event, and applies the asymmetric cleanup policy.
class K8sBackend final : public sched::SchedulerBackend {
public:
    // Fixed-endpoint mode (simulator or a known API server): kubeconfig and
    // context resolution are bypassed.
    K8sBackend(ApiEndpoint endpoint, Clock& clock, K8sBackendOptions options = {});

    // Kubeconfig mode: endpoints are resolved per context through the file
    // named by $KUBECONFIG (via `env`), cached per context name.
    K8sBackend(Clock& clock, K8sBackendOptions options, EnvReader env);

    std::string name() const override { return "k8s"; }
    sched::Capabilities capabilities() const override { return {true, true}; }
    bool uses_kubeconfig() const { return !fixed_endpoint_.has_value(); }

    sched::JobHandle submit(const WorkloadManifest& manifest,
                            const sched::RunContext& ctx) override;
    sched::TerminationEvent wait(const sched::JobHandle& handle, std::optional<double> time_limit,
                                 const sched::CancelToken* external_cancel = nullptr) override;
    void cancel(const sched::JobHandle& handle) override;
    sched::CleanupDecision finalize(const sched::JobHandle& handle,
                                    const sched::TerminationEvent& event) override;

    // wait + finalize in one step.
    std::pair<sched::TerminationEvent, sched::CleanupDecision> await_and_finalize(
        const sched::JobHandle& handle, std::optional<double> time_limit,
        const sched::CancelToken* external_cancel = nullptr);

    IdentifierPool& identifiers() { return identifiers_; }
    KubeClientOptions& client_options() { return client_options_; }

private:
    struct Run {
        std::string kind_name;       // "Pod", "Job", ...
        WorkloadKind kind;
        std::string resource_name;   // as created (suffixed with the run id)
        std::string ns;
        int expected_completions = 1;
        std::string output_file;
        std::shared_ptr<KubeClient> client;
        std::unique_ptr<LogWorker> worker;
        std::shared_ptr<sched::CancelToken> cancel;
    };

    std::shared_ptr<KubeClient> client_for(const std::string& context);
    std::shared_ptr<Run> find_run(const RunIdentifier& id) const;

    Clock& clock_;
    K8sBackendOptions options_;
    KubeClientOptions client_options_;
    std::optional<ApiEndpoint> fixed_endpoint_;
    EnvReader env_;
    IdentifierPool identifiers_;

    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<KubeClient>> clients_;  // by context
    std::map<std::string, std::shared_ptr<Run>> runs_;            // by run id
};

}  // namespace kbench::k8s
