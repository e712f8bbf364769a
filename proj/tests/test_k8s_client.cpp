#include "kbench/k8s_client.hpp"

#include <gtest/gtest.h>

#include "kbench/errors.hpp"
#include "kbench/k8s_sim.hpp"
#include "kbench/manifest.hpp"
#include "testutil.hpp"

using namespace kbench;
using namespace kbench::k8s;
using kbench::sim::FaultRule;
using kbench::sim::Scenario;
using kbench::sim::SimServer;

namespace {

Document pod_body(const std::string& name, const std::string& rfm) {
    Document doc = testutil::sample_pod_manifest(name);
    doc["metadata"]["labels"] = {{"rfm", rfm}};
    return doc;
}

struct ClientFixture : ::testing::Test {
    VirtualClock clock;
    Scenario scenario;
    std::unique_ptr<SimServer> sim;
    std::unique_ptr<KubeClient> client;

    void start(Scenario s = {}) {
        scenario = std::move(s);
        sim = std::make_unique<SimServer>(scenario, clock);
        auto endpoint = sim->start();
        client = std::make_unique<KubeClient>(endpoint, clock,
                                              KubeClientOptions{.max_retries = 3,
                                                                .backoff_base = 0.01});
    }
};

}  // namespace

TEST_F(ClientFixture, CreateEchoesName) {
    start();
    auto name = client->create_resource("Pod", "default", pod_body("pod-a", "id000001"));
    EXPECT_EQ(name, "pod-a");
}

TEST_F(ClientFixture, DuplicateCreateConflicts) {
    start();
    client->create_resource("Pod", "default", pod_body("pod-a", "id000001"));
    try {
        client->create_resource("Pod", "default", pod_body("pod-a", "id000001"));
        FAIL() << "expected Conflict";
    } catch (const ApiError& e) {
        EXPECT_TRUE(e.is_conflict());
        EXPECT_EQ(e.status(), 409);
    }
}

TEST_F(ClientFixture, UnknownNamespaceIsNotFound) {
    start(Scenario::parse(parse_document("namespaces: [default, ml-jobs]")));
    EXPECT_NO_THROW(client->create_resource("Pod", "ml-jobs", pod_body("pod-ns", "id000001")));
    try {
        client->create_resource("Pod", "nope", pod_body("pod-b", "id000002"));
        FAIL() << "expected NotFound";
    } catch (const ApiError& e) {
        EXPECT_TRUE(e.is_not_found());
    }
}

TEST_F(ClientFixture, ListPodsBySelector) {
    start();
    client->create_resource("Pod", "default", pod_body("pod-a", "id000001"));
    client->create_resource("Pod", "default", pod_body("pod-b", "id000001"));
    client->create_resource("Pod", "default", pod_body("pod-c", "id000002"));

    auto one = client->list_pods("default", "rfm=id000001");
    EXPECT_EQ(one.size(), 2u);
    for (const auto& pod : one) EXPECT_EQ(pod.labels.at("rfm"), "id000001");

    EXPECT_EQ(client->list_pods("default", "rfm=missing").size(), 0u);

    // Cross-query disjointness: each selector sees only its own pods.
    auto other = client->list_pods("default", "rfm=id000002");
    ASSERT_EQ(other.size(), 1u);
    EXPECT_EQ(other[0].name, "pod-c");
    for (const auto& pod : one) EXPECT_NE(pod.name, "pod-c");
}

TEST_F(ClientFixture, UnscriptedPodSucceedsImmediately) {
    start();
    client->create_resource("Pod", "default", pod_body("pod-a", "id000001"));
    auto pods = client->list_pods("default", "rfm=id000001");
    ASSERT_EQ(pods.size(), 1u);
    EXPECT_EQ(pods[0].phase, sched::PodPhase::Succeeded);
    EXPECT_TRUE(pods[0].terminal());
    ASSERT_EQ(pods[0].container_exit_codes.size(), 1u);
    EXPECT_EQ(pods[0].container_exit_codes[0], 0);
}

TEST_F(ClientFixture, ScriptedPhasesFollowTheClock) {
    start(Scenario::parse(parse_document(R"(
pods:
  - match: "pod-*"
    timeline:
      - {at: 1.0, phase: Running}
      - {at: 2.0, log: "Epoch 1 complete"}
      - {at: 3.0, phase: Succeeded}
)")));
    client->create_resource("Pod", "default", pod_body("pod-a", "id000001"));
    EXPECT_EQ(client->list_pods("default", "rfm=id000001")[0].phase, sched::PodPhase::Pending);
    clock.advance(1.5);
    EXPECT_EQ(client->list_pods("default", "rfm=id000001")[0].phase, sched::PodPhase::Running);
    clock.advance(2.0);
    auto pods = client->list_pods("default", "rfm=id000001");
    EXPECT_EQ(pods[0].phase, sched::PodPhase::Succeeded);
}

TEST_F(ClientFixture, LogCursorIsMonotonic) {
    start(Scenario::parse(parse_document(R"(
pods:
  - match: "pod-*"
    timeline:
      - {at: 0.0, phase: Running}
      - {at: 1.0, log: "L1"}
      - {at: 2.0, log: "L2"}
      - {at: 3.0, log: "L3"}
      - {at: 3.0, phase: Succeeded}
)")));
    client->create_resource("Pod", "default", pod_body("pod-a", "id000001"));
    clock.advance(1.0);
    auto chunk = client->get_pod_logs("default", "pod-a");
    EXPECT_EQ(chunk.text, "L1\n");

    // Repeat with the returned cursor and no new output: empty chunk.
    auto again = client->get_pod_logs("default", "pod-a", chunk.cursor);
    EXPECT_EQ(again.text, "");
    EXPECT_EQ(again.cursor, chunk.cursor);

    clock.advance(5.0);
    auto rest = client->get_pod_logs("default", "pod-a", chunk.cursor);
    EXPECT_EQ(rest.text, "L2\nL3\n");
    EXPECT_GT(rest.cursor, chunk.cursor);
}

TEST_F(ClientFixture, DeletedPodLogsAreNotFound) {
    start(Scenario::parse(parse_document(R"(
pods:
  - match: "pod-*"
    hang: true
    timeline:
      - {at: 0.0, phase: Running}
      - {at: 1.0, log: "before delete"}
      - {at: 2.0, delete: true}
)")));
    client->create_resource("Pod", "default", pod_body("pod-a", "id000001"));
    clock.advance(1.0);
    EXPECT_EQ(client->get_pod_logs("default", "pod-a").text, "before delete\n");
    clock.advance(2.0);
    try {
        client->get_pod_logs("default", "pod-a");
        FAIL() << "expected NotFound";
    } catch (const ApiError& e) {
        EXPECT_TRUE(e.is_not_found());
    }
    // And the pod is gone from listings.
    EXPECT_TRUE(client->list_pods("default", "rfm=id000001").empty());
}

TEST_F(ClientFixture, DeleteCollectionIsIdempotent) {
    start();
    client->create_resource("Pod", "default", pod_body("pod-a", "id000001"));
    client->create_resource("Pod", "default", pod_body("pod-b", "id000001"));
    client->create_resource("Pod", "default", pod_body("pod-c", "id000002"));

    EXPECT_EQ(client->delete_collection("default", "Pod", "rfm=id000001"), 2);
    EXPECT_EQ(client->delete_collection("default", "Pod", "rfm=id000001"), 0);

    // The other run's pod is untouched.
    EXPECT_EQ(client->list_pods("default", "rfm=id000002").size(), 1u);
    auto snapshot = sim->inspect_state();
    EXPECT_EQ(snapshot.with_label("rfm", "id000001").size(), 0u);
    EXPECT_EQ(snapshot.with_label("rfm", "id000002").size(), 1u);
}

TEST_F(ClientFixture, RetriesInjected500ThenSucceeds) {
    Scenario s;
    s.faults.push_back({FaultRule::Op::Create, 1, 1, FaultRule::Action::Http500, 0});
    start(std::move(s));
    auto name = client->create_resource("Pod", "default", pod_body("pod-a", "id000001"));
    EXPECT_EQ(name, "pod-a");
    // First create attempt got the 500, the retry carried it: two requests.
    EXPECT_EQ(sim->request_count(FaultRule::Op::Create), 2);
}

TEST_F(ClientFixture, RetriesDroppedConnection) {
    Scenario s;
    s.faults.push_back({FaultRule::Op::List, 1, 1, FaultRule::Action::Drop, 0});
    start(std::move(s));
    client->create_resource("Pod", "default", pod_body("pod-a", "id000001"));
    auto pods = client->list_pods("default", "rfm=id000001");
    EXPECT_EQ(pods.size(), 1u);
    EXPECT_EQ(sim->request_count(FaultRule::Op::List), 2);
}

TEST_F(ClientFixture, ExhaustedRetriesSurfaceConnectionError) {
    Scenario s;
    s.faults.push_back({FaultRule::Op::List, 1, 100, FaultRule::Action::Http500, 0});
    start(std::move(s));
    try {
        client->list_pods("default", "rfm=x");
        FAIL() << "expected connection-class ApiError";
    } catch (const ApiError& e) {
        EXPECT_TRUE(e.is_connection());
        EXPECT_EQ(e.status(), 0);
    }
    // 1 attempt + 3 retries.
    EXPECT_EQ(sim->request_count(FaultRule::Op::List), 4);
}

TEST_F(ClientFixture, UnreachableEndpointIsConnectionError) {
    KubeClient dead(ApiEndpoint{.base_url = "http://127.0.0.1:9", .verify_tls = false}, clock,
                    KubeClientOptions{.max_retries = 0, .backoff_base = 0.0, .timeout = 0.2});
    try {
        dead.create_resource("Pod", "default", pod_body("pod-a", "id1"));
        FAIL() << "expected connection error";
    } catch (const ApiError& e) {
        EXPECT_TRUE(e.is_connection());
    }
}

TEST_F(ClientFixture, StaticTokenEnforced) {
    Scenario s;
    s.token = "sekrit";
    start(std::move(s));

    // The endpoint handed out by the simulator carries the right token.
    EXPECT_NO_THROW(client->create_resource("Pod", "default", pod_body("pod-a", "id000001")));

    auto endpoint = sim->endpoint();
    endpoint.token = "wrong";
    KubeClient bad(endpoint, clock, KubeClientOptions{.max_retries = 0});
    try {
        bad.list_pods("default", "rfm=x");
        FAIL() << "expected Forbidden";
    } catch (const ApiError& e) {
        EXPECT_TRUE(e.is_forbidden());
    }
}

TEST_F(ClientFixture, UnsupportedKindHasNoRoute) {
    start();
    EXPECT_THROW(client->create_resource("IPUJob", "default", Document::object()), ApiError);
}

TEST_F(ClientFixture, ResetDropsStateAndCounters) {
    start();
    client->create_resource("Pod", "default", pod_body("pod-a", "id000001"));
    ASSERT_EQ(sim->inspect_state().resources.size(), 1u);
    sim->reset(Scenario{});
    EXPECT_TRUE(sim->inspect_state().resources.empty());
    EXPECT_EQ(sim->request_count(), 0);
    EXPECT_TRUE(client->list_pods("default", "rfm=id000001").empty());
}

TEST(Kubeconfig, ParsesStandardFields) {
    testutil::TempDir dir;
    auto path = testutil::write_file(dir.file("kubeconfig"), R"(
apiVersion: v1
kind: Config
current-context: c1
contexts:
  - name: c1
    context: {cluster: cl1, user: u1}
  - name: c2
    context: {cluster: cl2, user: u2}
clusters:
  - name: cl1
    cluster: {server: "https://one.example:6443"}
  - name: cl2
    cluster: {server: "http://two.example:8080"}
users:
  - name: u1
    user: {token: tok-1}
  - name: u2
    user: {}
)");
    auto cfg = Kubeconfig::load(path);
    EXPECT_EQ(cfg.current_context, "c1");

    auto ep1 = cfg.endpoint_for("");
    EXPECT_EQ(ep1.base_url, "https://one.example:6443");
    EXPECT_EQ(ep1.token, "tok-1");

    auto ep2 = cfg.endpoint_for("c2");
    EXPECT_EQ(ep2.base_url, "http://two.example:8080");
    EXPECT_TRUE(ep2.token.empty());

    EXPECT_THROW(cfg.endpoint_for("c3"), ConfigError);
}

TEST(Kubeconfig, MissingFileOrEnv) {
    EXPECT_THROW(Kubeconfig::load("/nonexistent/kubeconfig"), ConfigError);

    auto no_env = [](const std::string&) { return std::optional<std::string>{}; };
    EXPECT_THROW(endpoint_from_kubeconfig_env("", no_env), ConfigError);
}

TEST(Kubeconfig, EndpointFromEnv) {
    testutil::TempDir dir;
    auto path = testutil::write_file(dir.file("kubeconfig"), R"(
current-context: c1
contexts: [{name: c1, context: {cluster: cl, user: u}}]
clusters: [{name: cl, cluster: {server: "http://127.0.0.1:1234"}}]
users: [{name: u, user: {token: t}}]
)");
    auto env = [&path](const std::string& name) -> std::optional<std::string> {
        if (name == "KUBECONFIG") return path.string();
        return std::nullopt;
    };
    auto ep = endpoint_from_kubeconfig_env("", env);
    EXPECT_EQ(ep.base_url, "http://127.0.0.1:1234");
    EXPECT_EQ(ep.token, "t");
}
