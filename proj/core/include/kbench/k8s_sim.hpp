#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "kbench/clock.hpp"
#include "kbench/document.hpp"
#include "kbench/k8s_client.hpp"

namespace kbench::sim {

// One scripted pod lifecycle: an ordered timeline of phase transitions, log
// lines, and an optional self-delete, all at offsets (seconds) relative to
// pod creation. "{pod}" in a log line is replaced with the pod name.
struct PodScriptEvent {
    enum class Type { Phase, Log, SelfDelete };

    double at = 0.0;
    Type type = Type::Phase;
    sched::PodPhase phase = sched::PodPhase::Pending;
    std::string line;
};

struct PodScript {
    std::string match;  // glob over pod names: '*' and '?' wildcards
    std::vector<PodScriptEvent> timeline;
    bool hang = false;  // never reaches a terminal phase, waiter times out
    int exit_code = 1;  // container exit code reported for Failed pods

    void validate() const;  // offsets nondecreasing, phase order, terminality
};

struct FaultRule {
    enum class Op { Create, List, Logs, Delete, Any };
    enum class Action { Http500, Drop, Delay };

    Op op = Op::Any;
    int nth = 1;    // 1-based ordinal of the matching request to hit
    int count = 1;  // how many consecutive requests to affect
    Action action = Action::Http500;
    double delay = 0.0;  // seconds, for Action::Delay
};

struct Scenario {
    std::vector<std::string> namespaces = {"default"};
    std::vector<PodScript> pod_scripts;
    std::vector<FaultRule> faults;
    std::string token;  // static bearer token check; empty disables auth

    static Scenario parse(const Document& doc, const std::string& source_name = "<scenario>");
    static Scenario load(const std::filesystem::path& path);

    void validate() const;
};

bool glob_match(const std::string& pattern, const std::string& text);

// Live cluster state, the oracle for cleanup/retain assertions.
struct ClusterSnapshot {
    struct Resource {
        std::string kind;
        std::string name;
        std::string namespace_;
        std::map<std::string, std::string> labels;
        std::optional<sched::PodPhase> phase;  // pods only
    };

    std::vector<Resource> resources;

    std::vector<Resource> with_label(const std::string& key, const std::string& value) const;
    std::size_t count_kind(const std::string& kind) const;
};

// In-process mock Kubernetes API server covering exactly the verbs the
// client uses: create pod/job, list pods by label, fetch pod logs, delete
// collections. Pod lifecycles are pure functions of the scenario and the
// injected clock, so runs are deterministic under a fixed clock.
class SimServer {
public:
    SimServer(Scenario scenario, Clock& clock);
    ~SimServer();

    SimServer(const SimServer&) = delete;
    SimServer& operator=(const SimServer&) = delete;

    // Binds a loopback port and serves until stop(). Returns the endpoint.
    k8s::ApiEndpoint start(int port = 0);
    void stop();

    k8s::ApiEndpoint endpoint() const;

    ClusterSnapshot inspect_state() const;

    // Request counters, for retry/fault assertions.
    int request_count() const;
    int request_count(FaultRule::Op op) const;

    void reset(Scenario scenario);  // drops all resources, reinstalls scripts

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace kbench::sim
