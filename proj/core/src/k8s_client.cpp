#include "kbench/k8s_client.hpp"

#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "kbench/errors.hpp"

namespace kbench::k8s {

namespace {

constexpr const char* kPodsPathPrefix = "/api/v1/namespaces/";
constexpr const char* kJobsPathPrefix = "/apis/batch/v1/namespaces/";

std::string status_reason(const std::string& body, int status) {
    // The API serves failures as a Status object; fall back to the code.
    try {
        Document doc = Document::parse(body);
        if (doc.is_object() && doc.contains("reason") && doc["reason"].is_string())
            return doc["reason"].get<std::string>();
        if (doc.is_object() && doc.contains("message") && doc["message"].is_string())
            return doc["message"].get<std::string>();
    } catch (const std::exception&) {
    }
    return "HTTP " + std::to_string(status);
}

}  // namespace

KubeClient::KubeClient(ApiEndpoint endpoint, Clock& clock, KubeClientOptions options)
    : endpoint_(std::move(endpoint)), clock_(clock), options_(options) {}

std::string KubeClient::collection_path(const std::string& kind, const std::string& ns) const {
    if (kind == "Pod") return kPodsPathPrefix + ns + "/pods";
    if (kind == "Job") return kJobsPathPrefix + ns + "/jobs";
    throw ApiError(400, "UnsupportedKind",
                   "no API route for kind '" + kind + "' (supported: Pod, Job)");
}

KubeClient::Response KubeClient::request(const std::string& method, const std::string& path,
                                         const std::string& query, const std::string& body) {
    const std::string target = query.empty() ? path : path + "?" + query;
    std::string last_error;

    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        if (attempt > 0)
            clock_.sleep_for(options_.backoff_base * static_cast<double>(1 << (attempt - 1)));

        // A fresh connection per request keeps the client free of shared
        // socket state under concurrent use.
        httplib::Client cli(endpoint_.base_url);
        cli.set_connection_timeout(std::chrono::duration<double>(options_.timeout));
        cli.set_read_timeout(std::chrono::duration<double>(options_.timeout));
        cli.enable_server_certificate_verification(endpoint_.verify_tls);
        httplib::Headers headers;
        if (!endpoint_.token.empty())
            headers.emplace("Authorization", "Bearer " + endpoint_.token);

        httplib::Result result;
        if (method == "GET")
            result = cli.Get(target, headers);
        else if (method == "POST")
            result = cli.Post(target, headers, body, "application/json");
        else if (method == "DELETE")
            result = cli.Delete(target, headers);
        else
            throw ApiError(0, "BadVerb", "unsupported method " + method);

        if (!result) {
            last_error = httplib::to_string(result.error());
            continue;  // transport error: retry
        }
        if (result->status >= 500) {
            last_error = "HTTP " + std::to_string(result->status);
            continue;  // server error: retry
        }
        return {result->status, result->body};
    }
    throw ApiError(0, "Connection",
                   method + " " + endpoint_.base_url + target + " failed after " +
                       std::to_string(options_.max_retries + 1) + " attempts: " + last_error);
}

void KubeClient::throw_api_error(const Response& resp, const std::string& what) {
    throw ApiError(resp.status, status_reason(resp.body, resp.status), what);
}

std::string KubeClient::create_resource(const std::string& kind, const std::string& ns,
                                        const Document& body) {
    auto resp = request("POST", collection_path(kind, ns), "", body.dump());
    if (resp.status != 200 && resp.status != 201)
        throw_api_error(resp, "create " + kind + " in namespace '" + ns + "'");
    try {
        Document created = Document::parse(resp.body);
        const Document* name = doc_find(created, DocPath::parse("metadata.name"));
        if (name != nullptr && name->is_string()) return name->get<std::string>();
    } catch (const std::exception&) {
    }
    throw ApiError(resp.status, "BadResponse", "create response carried no metadata.name");
}

PodRecord pod_record_from_document(const Document& pod) {
    PodRecord record;
    if (const Document* name = doc_find(pod, DocPath::parse("metadata.name"));
        name != nullptr && name->is_string())
        record.name = name->get<std::string>();
    if (const Document* ns = doc_find(pod, DocPath::parse("metadata.namespace"));
        ns != nullptr && ns->is_string())
        record.namespace_ = ns->get<std::string>();
    if (const Document* labels = doc_find(pod, DocPath::parse("metadata.labels"));
        labels != nullptr && labels->is_object())
        for (const auto& [key, value] : labels->items())
            record.labels[key] = value.is_string() ? value.get<std::string>() : value.dump();
    if (const Document* phase = doc_find(pod, DocPath::parse("status.phase"));
        phase != nullptr && phase->is_string())
        record.phase = sched::pod_phase_from_string(phase->get<std::string>());
    if (const Document* statuses = doc_find(pod, DocPath::parse("status.containerStatuses"));
        statuses != nullptr && statuses->is_array()) {
        for (const auto& status : *statuses) {
            const Document* code = doc_find(status, DocPath::parse("state.terminated.exitCode"));
            if (code != nullptr && code->is_number_integer())
                record.container_exit_codes.push_back(code->get<int>());
            else
                record.container_exit_codes.push_back(std::nullopt);
        }
    }
    return record;
}

std::vector<PodRecord> KubeClient::list_pods(const std::string& ns,
                                             const std::string& label_selector) {
    httplib::Params params{{"labelSelector", label_selector}};
    auto resp = request("GET", kPodsPathPrefix + ns + "/pods",
                        httplib::detail::params_to_query_str(params), "");
    if (resp.status != 200) throw_api_error(resp, "list pods in namespace '" + ns + "'");
    std::vector<PodRecord> records;
    try {
        Document list = Document::parse(resp.body);
        if (list.is_object() && list.contains("items") && list["items"].is_array())
            for (const auto& item : list["items"]) records.push_back(pod_record_from_document(item));
    } catch (const std::exception& e) {
        throw ApiError(resp.status, "BadResponse", std::string("unparseable pod list: ") + e.what());
    }
    return records;
}

KubeClient::LogChunk KubeClient::get_pod_logs(const std::string& ns, const std::string& pod,
                                              std::size_t since) {
    auto resp = request("GET", kPodsPathPrefix + ns + "/pods/" + pod + "/log", "", "");
    if (resp.status != 200) throw_api_error(resp, "logs for pod '" + pod + "'");
    // Cursor = byte offset into the full stream served by the endpoint.
    if (since >= resp.body.size()) return {"", resp.body.size()};
    return {resp.body.substr(since), resp.body.size()};
}

int KubeClient::delete_collection(const std::string& ns, const std::string& kind,
                                  const std::string& label_selector) {
    httplib::Params params{{"labelSelector", label_selector}};
    auto resp = request("DELETE", collection_path(kind, ns),
                        httplib::detail::params_to_query_str(params), "");
    if (resp.status != 200) throw_api_error(resp, "delete " + kind + " collection in '" + ns + "'");
    try {
        Document list = Document::parse(resp.body);
        if (list.is_object() && list.contains("items") && list["items"].is_array())
            return static_cast<int>(list["items"].size());
    } catch (const std::exception&) {
    }
    return 0;
}

Kubeconfig Kubeconfig::load(const std::filesystem::path& path) {
    Document doc;
    try {
        doc = load_document(path);
    } catch (const std::exception& e) {
        throw ConfigError("cannot read kubeconfig " + path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("kubeconfig is not a mapping: " + path.string());

    Kubeconfig cfg;
    cfg.current_context = doc.value("current-context", "");
    if (doc.contains("contexts") && doc["contexts"].is_array()) {
        for (const auto& entry : doc["contexts"]) {
            if (!entry.is_object() || !entry.contains("name")) continue;
            Context ctx;
            if (const Document* cluster = doc_find(entry, DocPath::parse("context.cluster"));
                cluster != nullptr && cluster->is_string())
                ctx.cluster = cluster->get<std::string>();
            if (const Document* user = doc_find(entry, DocPath::parse("context.user"));
                user != nullptr && user->is_string())
                ctx.user = user->get<std::string>();
            cfg.contexts[entry["name"].get<std::string>()] = ctx;
        }
    }
    if (doc.contains("clusters") && doc["clusters"].is_array()) {
        for (const auto& entry : doc["clusters"]) {
            if (!entry.is_object() || !entry.contains("name")) continue;
            if (const Document* server = doc_find(entry, DocPath::parse("cluster.server"));
                server != nullptr && server->is_string())
                cfg.cluster_servers[entry["name"].get<std::string>()] = server->get<std::string>();
        }
    }
    if (doc.contains("users") && doc["users"].is_array()) {
        for (const auto& entry : doc["users"]) {
            if (!entry.is_object() || !entry.contains("name")) continue;
            if (const Document* token = doc_find(entry, DocPath::parse("user.token"));
                token != nullptr && token->is_string())
                cfg.user_tokens[entry["name"].get<std::string>()] = token->get<std::string>();
        }
    }
    return cfg;
}

ApiEndpoint Kubeconfig::endpoint_for(const std::string& context_name) const {
    const std::string wanted = context_name.empty() ? current_context : context_name;
    if (wanted.empty()) throw ConfigError("kubeconfig has no current-context");
    auto ctx_it = contexts.find(wanted);
    if (ctx_it == contexts.end()) throw ConfigError("kubeconfig has no context '" + wanted + "'");
    auto server_it = cluster_servers.find(ctx_it->second.cluster);
    if (server_it == cluster_servers.end())
        throw ConfigError("kubeconfig context '" + wanted + "' names unknown cluster '" +
                          ctx_it->second.cluster + "'");
    ApiEndpoint ep;
    ep.base_url = server_it->second;
    if (auto user_it = user_tokens.find(ctx_it->second.user); user_it != user_tokens.end())
        ep.token = user_it->second;
    return ep;
}

EnvReader system_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        const char* value = std::getenv(name.c_str());
        if (value == nullptr) return std::nullopt;
        return std::string(value);
    };
}

ApiEndpoint endpoint_from_kubeconfig_env(const std::string& context_name, const EnvReader& env) {
    auto path = env("KUBECONFIG");
    if (!path || path->empty())
        throw ConfigError("KUBECONFIG is not set and no explicit API endpoint was configured");
    return Kubeconfig::load(*path).endpoint_for(context_name);
}

}  // namespace kbench::k8s
