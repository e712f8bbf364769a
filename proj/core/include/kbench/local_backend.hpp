#pragma once

#include <map>
#include <mutex>

#include "kbench/clock.hpp"
#include "kbench/scheduler.hpp"

namespace kbench::sched {

struct LocalBackendOptions {
    double poll_interval = 0.05;  // seconds between waitpid polls
    double term_grace = 1.0;      // SIGTERM -> SIGKILL escalation window
};

// Desk-scale backend: interprets spec.containers[0].command/args as an argv
// vector and runs it as a subprocess, ignoring container images. stdout and
// stderr are redirected into the run's output file. Exit code 0 maps to the
// pod-equivalent phase Succeeded, nonzero to Failed.
class LocalBackend final : public SchedulerBackend {
public:
    explicit LocalBackend(Clock& clock, LocalBackendOptions options = {});

    std::string name() const override { return "local"; }
    Capabilities capabilities() const override { return {false, false}; }

    JobHandle submit(const WorkloadManifest& manifest, const RunContext& ctx) override;
    TerminationEvent wait(const JobHandle& handle, std::optional<double> time_limit,
                          const CancelToken* external_cancel = nullptr) override;
    void cancel(const JobHandle& handle) override;
    CleanupDecision finalize(const JobHandle& handle, const TerminationEvent& event) override;

    IdentifierPool& identifiers() { return identifiers_; }

private:
    struct Run {
        int pid = -1;
        std::string instance_name;
        std::shared_ptr<CancelToken> cancel;
        bool reaped = false;
        int exit_status = -1;
    };

    std::shared_ptr<Run> find_run(const RunIdentifier& id) const;

    Clock& clock_;
    LocalBackendOptions options_;
    IdentifierPool identifiers_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Run>> runs_;
};

}  // namespace kbench::sched
