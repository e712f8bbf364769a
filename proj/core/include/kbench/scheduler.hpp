#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kbench/manifest.hpp"
#include "kbench/run_id.hpp"

namespace kbench::sched {

// Cooperative cancellation signal, checked between pipeline stages and
// inside backend waits.
class CancelToken {
public:
    void request() { requested_.store(true, std::memory_order_release); }
    bool requested() const { return requested_.load(std::memory_order_acquire); }

private:
    std::atomic<bool> requested_{false};
};

enum class PodPhase { Pending, Running, Succeeded, Failed, Unknown };

std::string to_string(PodPhase phase);
PodPhase pod_phase_from_string(const std::string& text);

inline bool is_terminal(PodPhase phase) {
    return phase == PodPhase::Succeeded || phase == PodPhase::Failed;
}

enum class TerminationKind { AllFinished, TimeLimit, UserCancel };

std::string to_string(TerminationKind kind);

struct PodOutcome {
    std::string name;
    PodPhase phase;

    bool operator==(const PodOutcome&) const = default;
};

// The three-way outcome of waiting on a workload. For AllFinished every
// recorded phase is terminal (crash states have already been classified as
// Failed by the waiter).
struct TerminationEvent {
    TerminationKind kind;
    std::vector<PodOutcome> pod_outcomes;

    int succeeded_count() const;
    int failed_count() const;
    bool all_terminal() const;
};

enum class CleanupAction { Delete, Retain };
enum class CleanupReason { Success, Failure, Cancelled, TimedOut };

std::string to_string(CleanupAction action);
std::string to_string(CleanupReason reason);

struct CleanupDecision {
    CleanupAction action;
    CleanupReason reason;

    bool operator==(const CleanupDecision&) const = default;
};

// The cleanup policy: delete on success and on user cancel, retain on
// failure and on timeout so the workload can be inspected. Success requires
// at least `expected_completions` succeeded pods and no failed pod.
CleanupDecision decide_cleanup(const TerminationEvent& event, int expected_completions);

struct Capabilities {
    bool supports_containers = false;
    bool supports_completions = false;
};

// Everything a backend needs to know about the instance it runs, without
// depending on the test model.
struct RunContext {
    std::string instance_name;
    std::string namespace_ = "default";
    std::string context;                       // k8s context name, "" = backend default
    std::string output_file;                   // sink for captured workload logs
    std::optional<int> expected_completions;   // override for unrecognized kinds
};

struct JobHandle {
    std::string backend;
    RunIdentifier run_id;
    std::string token;  // backend-specific ("<kind>/<ns>/<name>", pid, ...)
    std::shared_ptr<CancelToken> cancel;
};

// Scheduler backend contract. One backend instance is shared by concurrent
// pipeline workers; operations must be safe under concurrent invocation for
// distinct handles.
class SchedulerBackend {
public:
    virtual ~SchedulerBackend() = default;

    virtual std::string name() const = 0;
    virtual Capabilities capabilities() const = 0;

    // Starts the workload asynchronously and returns immediately.
    virtual JobHandle submit(const WorkloadManifest& manifest, const RunContext& ctx) = 0;

    // Blocks until all pods finish, the time limit is reached, or cancel is
    // requested; ties observed in the same poll resolve in that order:
    // AllFinished > UserCancel > TimeLimit. Log capture for the workload is
    // complete by the time this returns.
    virtual TerminationEvent wait(const JobHandle& handle, std::optional<double> time_limit,
                                  const CancelToken* external_cancel = nullptr) = 0;

    // Raises the cancel signal observed by wait. Idempotent; a cancel after
    // completion is a no-op.
    virtual void cancel(const JobHandle& handle) = 0;

    // Applies the cleanup policy for the observed event and releases the
    // handle. Exactly one finalize per submitted workload.
    virtual CleanupDecision finalize(const JobHandle& handle, const TerminationEvent& event) = 0;
};

class BackendRegistry {
public:
    void add(std::shared_ptr<SchedulerBackend> backend);
    std::shared_ptr<SchedulerBackend> get(const std::string& name) const;  // NotFoundError
    std::set<std::string> names() const;

private:
    std::map<std::string, std::shared_ptr<SchedulerBackend>> backends_;
};

// Scheduler names this artifact ships backends for.
std::set<std::string> builtin_backend_names();

}  // namespace kbench::sched
