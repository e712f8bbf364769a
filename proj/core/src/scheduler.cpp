#include "kbench/scheduler.hpp"

#include "kbench/errors.hpp"

namespace kbench::sched {

std::string to_string(PodPhase phase) {
    switch (phase) {
        case PodPhase::Pending: return "Pending";
        case PodPhase::Running: return "Running";
        case PodPhase::Succeeded: return "Succeeded";
        case PodPhase::Failed: return "Failed";
        case PodPhase::Unknown: return "Unknown";
    }
    return "Unknown";
}

PodPhase pod_phase_from_string(const std::string& text) {
    if (text == "Pending") return PodPhase::Pending;
    if (text == "Running") return PodPhase::Running;
    if (text == "Succeeded") return PodPhase::Succeeded;
    if (text == "Failed") return PodPhase::Failed;
    return PodPhase::Unknown;
}

std::string to_string(TerminationKind kind) {
    switch (kind) {
        case TerminationKind::AllFinished: return "AllFinished";
        case TerminationKind::TimeLimit: return "TimeLimit";
        case TerminationKind::UserCancel: return "UserCancel";
    }
    return "AllFinished";
}

int TerminationEvent::succeeded_count() const {
    int n = 0;
    for (const auto& p : pod_outcomes)
        if (p.phase == PodPhase::Succeeded) ++n;
    return n;
}

int TerminationEvent::failed_count() const {
    int n = 0;
    for (const auto& p : pod_outcomes)
        if (p.phase == PodPhase::Failed) ++n;
    return n;
}

bool TerminationEvent::all_terminal() const {
    for (const auto& p : pod_outcomes)
        if (!is_terminal(p.phase)) return false;
    return !pod_outcomes.empty();
}

std::string to_string(CleanupAction action) {
    return action == CleanupAction::Delete ? "Delete" : "Retain";
}

std::string to_string(CleanupReason reason) {
    switch (reason) {
        case CleanupReason::Success: return "Success";
        case CleanupReason::Failure: return "Failure";
        case CleanupReason::Cancelled: return "Cancelled";
        case CleanupReason::TimedOut: return "TimedOut";
    }
    return "Failure";
}

CleanupDecision decide_cleanup(const TerminationEvent& event, int expected_completions) {
    switch (event.kind) {
        case TerminationKind::UserCancel:
            return {CleanupAction::Delete, CleanupReason::Cancelled};
        case TerminationKind::TimeLimit:
            return {CleanupAction::Retain, CleanupReason::TimedOut};
        case TerminationKind::AllFinished:
            break;
    }
    const bool success =
        event.failed_count() == 0 && event.succeeded_count() >= expected_completions;
    return success ? CleanupDecision{CleanupAction::Delete, CleanupReason::Success}
                   : CleanupDecision{CleanupAction::Retain, CleanupReason::Failure};
}

void BackendRegistry::add(std::shared_ptr<SchedulerBackend> backend) {
    const std::string name = backend->name();
    if (backends_.count(name))
        throw ValidationError("backend '" + name + "' already registered");
    backends_[name] = std::move(backend);
}

std::shared_ptr<SchedulerBackend> BackendRegistry::get(const std::string& name) const {
    auto it = backends_.find(name);
    if (it == backends_.end()) throw NotFoundError("no scheduler backend '" + name + "'");
    return it->second;
}

std::set<std::string> BackendRegistry::names() const {
    std::set<std::string> out;
    for (const auto& [name, backend] : backends_) out.insert(name);
    return out;
}

std::set<std::string> builtin_backend_names() { return {"k8s", "local"}; }

}  // namespace kbench::sched
