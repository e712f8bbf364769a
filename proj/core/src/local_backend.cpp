#include "kbench/local_backend.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <vector>

#include "kbench/errors.hpp"

namespace kbench::sched {

namespace {

std::vector<std::string> argv_from_manifest(const WorkloadManifest& manifest) {
    std::vector<std::string> argv;
    const Document* command = doc_find(manifest.doc, DocPath::parse("spec.containers[0].command"));
    const Document* args = doc_find(manifest.doc, DocPath::parse("spec.containers[0].args"));
    auto append = [&argv](const Document* node) {
        if (node == nullptr || node->is_null()) return;
        if (!node->is_array()) throw SubmitError("containers[0].command/args must be lists");
        for (const auto& item : *node)
            argv.push_back(item.is_string() ? item.get<std::string>() : item.dump());
    };
    append(command);
    append(args);
    return argv;
}

}  // namespace

LocalBackend::LocalBackend(Clock& clock, LocalBackendOptions options)
    : clock_(clock), options_(options) {}

JobHandle LocalBackend::submit(const WorkloadManifest& manifest, const RunContext& ctx) {
    if (!manifest.has_kind()) throw SubmitError("manifest has no 'kind' field");
    auto argv = argv_from_manifest(manifest);
    if (argv.empty()) throw SubmitError("manifest has no containers[0].command to run");

    int out_fd = ::open(ctx.output_file.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (out_fd < 0)
        throw InfrastructureError("cannot open output file " + ctx.output_file + ": " +
                                  std::strerror(errno));

    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (auto& arg : argv) cargv.push_back(arg.data());
    cargv.push_back(nullptr);

    pid_t pid = ::fork();
    if (pid < 0) {
        ::close(out_fd);
        throw InfrastructureError(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::dup2(out_fd, STDOUT_FILENO);
        ::dup2(out_fd, STDERR_FILENO);
        ::close(out_fd);
        ::execvp(cargv[0], cargv.data());
        ::fprintf(stderr, "exec %s failed: %s\n", cargv[0], std::strerror(errno));
        ::_exit(127);
    }
    ::close(out_fd);

    auto run = std::make_shared<Run>();
    run->pid = pid;
    run->instance_name = ctx.instance_name;
    run->cancel = std::make_shared<CancelToken>();

    RunIdentifier id = identifiers_.generate();
    {
        std::lock_guard lock(mutex_);
        runs_[id.value] = run;
    }
    return JobHandle{name(), id, std::to_string(pid), run->cancel};
}

std::shared_ptr<LocalBackend::Run> LocalBackend::find_run(const RunIdentifier& id) const {
    std::lock_guard lock(mutex_);
    auto it = runs_.find(id.value);
    if (it == runs_.end()) throw InfrastructureError("unknown local run " + id.value);
    return it->second;
}

TerminationEvent LocalBackend::wait(const JobHandle& handle, std::optional<double> time_limit,
                                    const CancelToken* external_cancel) {
    auto run = find_run(handle.run_id);
    const double start = clock_.now();

    auto try_reap = [&run]() {
        if (run->reaped) return true;
        int status = 0;
        pid_t r = ::waitpid(run->pid, &status, WNOHANG);
        if (r == run->pid) {
            run->reaped = true;
            run->exit_status = status;
            return true;
        }
        return false;
    };

    auto terminate_child = [&] {
        if (try_reap()) return;
        ::kill(run->pid, SIGTERM);
        const double deadline = clock_.now() + options_.term_grace;
        while (!try_reap() && clock_.now() < deadline) clock_.sleep_for(options_.poll_interval);
        if (!run->reaped) {
            ::kill(run->pid, SIGKILL);
            int status = 0;
            ::waitpid(run->pid, &status, 0);
            run->reaped = true;
            run->exit_status = status;
        }
    };

    auto outcome = [&run]() -> std::vector<PodOutcome> {
        const bool ok = run->reaped && WIFEXITED(run->exit_status) &&
                        WEXITSTATUS(run->exit_status) == 0;
        return {{run->instance_name, ok ? PodPhase::Succeeded : PodPhase::Failed}};
    };

    for (;;) {
        if (try_reap()) return {TerminationKind::AllFinished, outcome()};
        const bool cancelled =
            run->cancel->requested() || (external_cancel != nullptr && external_cancel->requested());
        if (cancelled) {
            terminate_child();
            return {TerminationKind::UserCancel, outcome()};
        }
        if (time_limit && clock_.now() - start >= *time_limit) {
            terminate_child();
            return {TerminationKind::TimeLimit, outcome()};
        }
        clock_.sleep_for(options_.poll_interval);
    }
}

void LocalBackend::cancel(const JobHandle& handle) {
    std::shared_ptr<Run> run;
    {
        std::lock_guard lock(mutex_);
        auto it = runs_.find(handle.run_id.value);
        if (it == runs_.end()) return;  // already finalized: no-op
        run = it->second;
    }
    run->cancel->request();
}

CleanupDecision LocalBackend::finalize(const JobHandle& handle, const TerminationEvent& event) {
    auto decision = decide_cleanup(event, 1);
    std::lock_guard lock(mutex_);
    runs_.erase(handle.run_id.value);
    return decision;
}

}  // namespace kbench::sched
