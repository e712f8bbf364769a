#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kbench/clock.hpp"
#include "kbench/document.hpp"
#include "kbench/scheduler.hpp"

namespace kbench::k8s {

struct ApiEndpoint {
    std::string base_url;  // e.g. "https://apiserver:6443" or "http://127.0.0.1:41001"
    std::string token;     // bearer token, empty = none
    std::string default_namespace = "default";
    bool verify_tls = true;

    bool operator==(const ApiEndpoint&) const = default;
};

struct PodRecord {
    std::string name;
    std::string namespace_;
    std::map<std::string, std::string> labels;
    sched::PodPhase phase = sched::PodPhase::Pending;
    std::vector<std::optional<int>> container_exit_codes;

    bool terminal() const { return sched::is_terminal(phase); }
};

struct KubeClientOptions {
    int max_retries = 3;        // retries on connection-class errors
    double backoff_base = 0.1;  // seconds; doubles per retry
    double timeout = 10.0;      // per-request socket timeout, seconds
};

// Minimal Kubernetes REST client: create, list-by-label, fetch logs, delete
// collection. Pure request/response; the only client-side state is the log
// cursor the caller keeps. Safe to share across concurrent workers.
class KubeClient {
public:
    KubeClient(ApiEndpoint endpoint, Clock& clock, KubeClientOptions options = {});

    const ApiEndpoint& endpoint() const { return endpoint_; }

    // POST to the kind's collection path. Returns the created resource name.
    // Throws ApiError: 409 name conflict, 404 unknown namespace, 403
    // forbidden, status 0 after connection retries are exhausted.
    std::string create_resource(const std::string& kind, const std::string& ns,
                                const Document& body);

    // All pods matching "key=value". An empty result is valid.
    std::vector<PodRecord> list_pods(const std::string& ns, const std::string& label_selector);

    struct LogChunk {
        std::string text;    // bytes appended since the cursor
        std::size_t cursor;  // pass back to get only newer output
    };

    // Cursored log fetch; cursor is a byte offset into the pod's log stream.
    LogChunk get_pod_logs(const std::string& ns, const std::string& pod, std::size_t since = 0);

    // Deletes all resources of `kind` matching the selector; returns the
    // number deleted. Idempotent: a repeat call deletes nothing.
    int delete_collection(const std::string& ns, const std::string& kind,
                          const std::string& label_selector);

private:
    struct Response {
        int status;
        std::string body;
    };

    Response request(const std::string& method, const std::string& path,
                     const std::string& query, const std::string& body);
    [[noreturn]] void throw_api_error(const Response& resp, const std::string& what);
    std::string collection_path(const std::string& kind, const std::string& ns) const;

    ApiEndpoint endpoint_;
    Clock& clock_;
    KubeClientOptions options_;
};

PodRecord pod_record_from_document(const Document& pod);

// Kubeconfig subset: current-context, context -> (cluster, user), cluster
// server URLs, user tokens.
struct Kubeconfig {
    struct Context {
        std::string cluster;
        std::string user;
    };

    std::string current_context;
    std::map<std::string, Context> contexts;
    std::map<std::string, std::string> cluster_servers;
    std::map<std::string, std::string> user_tokens;

    static Kubeconfig load(const std::filesystem::path& path);  // throws ConfigError

    // Endpoint for a context name ("" = current-context).
    ApiEndpoint endpoint_for(const std::string& context_name) const;
};

using EnvReader = std::function<std::optional<std::string>(const std::string&)>;

EnvReader system_env();

// Resolves the endpoint through the kubeconfig named by $KUBECONFIG.
// Throws ConfigError when the variable is unset or the file is unreadable.
ApiEndpoint endpoint_from_kubeconfig_env(const std::string& context_name, const EnvReader& env);

}  // namespace kbench::k8s
