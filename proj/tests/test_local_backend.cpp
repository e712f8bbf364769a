#include "kbench/local_backend.hpp"

#include <gtest/gtest.h>

#include <thread>

#include "kbench/errors.hpp"
#include "testutil.hpp"

using namespace kbench;
using namespace kbench::sched;

namespace {

Document command_manifest(std::vector<std::string> argv) {
    Document command = Document::array();
    for (auto& a : argv) command.push_back(a);
    return Document{{"apiVersion", "v1"},
                    {"kind", "Pod"},
                    {"metadata", {{"name", "local-run"}}},
                    {"spec", {{"containers", Document::array({{{"name", "main"},
                                                               {"command", command}}})}}}};
}

struct LocalFixture : ::testing::Test {
    SystemClock clock;
    LocalBackend backend{clock, {.poll_interval = 0.01, .term_grace = 0.2}};
    testutil::TempDir dir;

    RunContext ctx(const std::string& name) {
        RunContext c;
        c.instance_name = name;
        c.output_file = dir.file(name + ".out").string();
        return c;
    }
};

}  // namespace

TEST_F(LocalFixture, EchoSucceedsAndLogsCaptured) {
    auto handle = backend.submit(WorkloadManifest{command_manifest({"echo", "hi"})}, ctx("echo"));
    EXPECT_EQ(handle.backend, "local");
    EXPECT_TRUE(handle.run_id.valid());

    auto event = backend.wait(handle, 10.0);
    EXPECT_EQ(event.kind, TerminationKind::AllFinished);
    ASSERT_EQ(event.pod_outcomes.size(), 1u);
    EXPECT_EQ(event.pod_outcomes[0].phase, PodPhase::Succeeded);

    auto decision = backend.finalize(handle, event);
    EXPECT_EQ(decision, (CleanupDecision{CleanupAction::Delete, CleanupReason::Success}));
    EXPECT_NE(testutil::read_file(dir.file("echo.out")).find("hi"), std::string::npos);
}

TEST_F(LocalFixture, NonzeroExitMapsToFailed) {
    auto handle = backend.submit(
        WorkloadManifest{command_manifest({"sh", "-c", "echo boom >&2; exit 3"})}, ctx("fail"));
    auto event = backend.wait(handle, 10.0);
    EXPECT_EQ(event.kind, TerminationKind::AllFinished);
    EXPECT_EQ(event.pod_outcomes[0].phase, PodPhase::Failed);
    auto decision = backend.finalize(handle, event);
    EXPECT_EQ(decision, (CleanupDecision{CleanupAction::Retain, CleanupReason::Failure}));
    // stderr lands in the output file too.
    EXPECT_NE(testutil::read_file(dir.file("fail.out")).find("boom"), std::string::npos);
}

TEST_F(LocalFixture, MalformedManifestsRejectedAtSubmit) {
    Document no_kind = command_manifest({"echo", "hi"});
    no_kind.erase("kind");
    EXPECT_THROW(backend.submit(WorkloadManifest{no_kind}, ctx("nokind")), SubmitError);

    Document no_command = {{"kind", "Pod"}, {"spec", {{"containers", Document::array()}}}};
    EXPECT_THROW(backend.submit(WorkloadManifest{no_command}, ctx("nocmd")), SubmitError);
}

TEST_F(LocalFixture, TimeLimitTerminatesProcess) {
    auto handle = backend.submit(WorkloadManifest{command_manifest({"sleep", "30"})}, ctx("hang"));
    const auto start = std::chrono::steady_clock::now();
    auto event = backend.wait(handle, 0.2);
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    EXPECT_EQ(event.kind, TerminationKind::TimeLimit);
    EXPECT_LT(elapsed.count(), 5.0);
    auto decision = backend.finalize(handle, event);
    EXPECT_EQ(decision, (CleanupDecision{CleanupAction::Retain, CleanupReason::TimedOut}));
}

TEST_F(LocalFixture, CancelInterruptsWait) {
    auto handle = backend.submit(WorkloadManifest{command_manifest({"sleep", "30"})}, ctx("cancel"));
    std::thread canceller([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        backend.cancel(handle);
        backend.cancel(handle);  // idempotent
    });
    auto event = backend.wait(handle, 30.0);
    canceller.join();
    EXPECT_EQ(event.kind, TerminationKind::UserCancel);
    auto decision = backend.finalize(handle, event);
    EXPECT_EQ(decision, (CleanupDecision{CleanupAction::Delete, CleanupReason::Cancelled}));
    // Cancel after finalize is a no-op.
    EXPECT_NO_THROW(backend.cancel(handle));
}

TEST_F(LocalFixture, ExternalCancelSignalObserved) {
    auto handle = backend.submit(WorkloadManifest{command_manifest({"sleep", "30"})}, ctx("ext"));
    CancelToken token;
    token.request();
    auto event = backend.wait(handle, 30.0, &token);
    EXPECT_EQ(event.kind, TerminationKind::UserCancel);
    backend.finalize(handle, event);
}

// The cleanup policy table, as a pure function of the termination event.
TEST(DecideCleanup, PolicyTable) {
    const PodOutcome ok{"p", PodPhase::Succeeded};
    const PodOutcome bad{"p2", PodPhase::Failed};

    EXPECT_EQ(decide_cleanup({TerminationKind::AllFinished, {ok}}, 1),
              (CleanupDecision{CleanupAction::Delete, CleanupReason::Success}));
    EXPECT_EQ(decide_cleanup({TerminationKind::AllFinished, {ok, bad}}, 1),
              (CleanupDecision{CleanupAction::Retain, CleanupReason::Failure}));
    EXPECT_EQ(decide_cleanup({TerminationKind::UserCancel, {}}, 1),
              (CleanupDecision{CleanupAction::Delete, CleanupReason::Cancelled}));
    EXPECT_EQ(decide_cleanup({TerminationKind::TimeLimit, {}}, 1),
              (CleanupDecision{CleanupAction::Retain, CleanupReason::TimedOut}));
    // Job semantics: success needs the full completion count.
    EXPECT_EQ(decide_cleanup({TerminationKind::AllFinished, {ok}}, 2).reason,
              CleanupReason::Failure);
    EXPECT_EQ(decide_cleanup({TerminationKind::AllFinished, {ok, ok}}, 2).reason,
              CleanupReason::Success);
}

TEST(TerminationEvent, Helpers) {
    TerminationEvent event{TerminationKind::AllFinished,
                           {{"a", PodPhase::Succeeded}, {"b", PodPhase::Failed}}};
    EXPECT_EQ(event.succeeded_count(), 1);
    EXPECT_EQ(event.failed_count(), 1);
    EXPECT_TRUE(event.all_terminal());

    TerminationEvent running{TerminationKind::AllFinished, {{"a", PodPhase::Running}}};
    EXPECT_FALSE(running.all_terminal());
    TerminationEvent empty{TerminationKind::AllFinished, {}};
    EXPECT_FALSE(empty.all_terminal());
}

TEST(BackendRegistry, LookupAndDuplicates) {
    SystemClock clock;
    BackendRegistry registry;
    registry.add(std::make_shared<LocalBackend>(clock));
    EXPECT_EQ(registry.get("local")->name(), "local");
    EXPECT_EQ(registry.names(), std::set<std::string>{"local"});
    EXPECT_THROW(registry.get("k8s"), NotFoundError);
    EXPECT_THROW(registry.add(std::make_shared<LocalBackend>(clock)), ValidationError);
    EXPECT_FALSE(registry.get("local")->capabilities().supports_completions);
}
