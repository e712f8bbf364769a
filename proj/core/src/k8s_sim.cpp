#include "kbench/k8s_sim.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>

#include "kbench/errors.hpp"
#include "kbench/manifest.hpp"

namespace kbench::sim {

namespace {

int phase_rank(sched::PodPhase phase) {
    switch (phase) {
        case sched::PodPhase::Pending: return 0;
        case sched::PodPhase::Running: return 1;
        default: return 2;  // Succeeded / Failed / Unknown: end states of a script
    }
}

std::string substitute_pod(const std::string& line, const std::string& pod_name) {
    std::string out;
    out.reserve(line.size());
    std::size_t i = 0;
    while (i < line.size()) {
        if (line.compare(i, 5, "{pod}") == 0) {
            out += pod_name;
            i += 5;
        } else {
            out.push_back(line[i++]);
        }
    }
    return out;
}

}  // namespace

bool glob_match(const std::string& pattern, const std::string& text) {
    std::size_t p = 0, t = 0;
    std::size_t star_p = std::string::npos, star_t = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star_p = p++;
            star_t = t;
        } else if (star_p != std::string::npos) {
            p = star_p + 1;
            t = ++star_t;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

void PodScript::validate() const {
    if (match.empty()) throw ValidationError("pod script without a 'match' pattern");
    double last_at = 0.0;
    int last_rank = 0;
    bool ended = false;
    bool first = true;
    for (const auto& event : timeline) {
        if (!first && event.at < last_at)
            throw ValidationError("timeline offsets must be nondecreasing in script '" + match + "'");
        first = false;
        last_at = event.at;
        if (event.type == PodScriptEvent::Type::Phase) {
            if (ended)
                throw ValidationError("phase transition after end state in script '" + match + "'");
            const int rank = phase_rank(event.phase);
            if (rank < last_rank)
                throw ValidationError("phase order must follow Pending -> Running -> end in script '" +
                                      match + "'");
            last_rank = rank;
            if (rank == 2) ended = true;
        }
    }
    if (!ended && !hang)
        throw ValidationError("script '" + match +
                              "' never reaches an end phase; set 'hang: true' if intended");
}

Scenario Scenario::parse(const Document& doc, const std::string& source_name) {
    if (!doc.is_object()) throw ValidationError("scenario must be a mapping", source_name);
    Scenario scenario;
    if (auto it = doc.find("namespaces"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) throw ValidationError("'namespaces' must be a list", source_name);
        scenario.namespaces.clear();
        for (const auto& ns : *it) scenario.namespaces.push_back(ns.get<std::string>());
    }
    scenario.token = doc.value("token", "");
    if (auto it = doc.find("pods"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) throw ValidationError("'pods' must be a list", source_name);
        for (const auto& entry : *it) {
            PodScript script;
            script.match = entry.value("match", "");
            script.hang = entry.value("hang", false);
            script.exit_code = entry.value("exit_code", 1);
            if (auto tl = entry.find("timeline"); tl != entry.end() && tl->is_array()) {
                for (const auto& ev : *tl) {
                    PodScriptEvent event;
                    event.at = ev.value("at", 0.0);
                    if (ev.contains("phase")) {
                        event.type = PodScriptEvent::Type::Phase;
                        event.phase = sched::pod_phase_from_string(ev["phase"].get<std::string>());
                    } else if (ev.contains("log")) {
                        event.type = PodScriptEvent::Type::Log;
                        event.line = ev["log"].get<std::string>();
                    } else if (ev.contains("delete") && ev["delete"].get<bool>()) {
                        event.type = PodScriptEvent::Type::SelfDelete;
                    } else {
                        throw ValidationError("timeline event needs 'phase', 'log' or 'delete'",
                                              source_name);
                    }
                    script.timeline.push_back(std::move(event));
                }
            }
            scenario.pod_scripts.push_back(std::move(script));
        }
    }
    if (auto it = doc.find("faults"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) throw ValidationError("'faults' must be a list", source_name);
        for (const auto& entry : *it) {
            FaultRule rule;
            const std::string op = entry.value("op", "any");
            if (op == "create") rule.op = FaultRule::Op::Create;
            else if (op == "list") rule.op = FaultRule::Op::List;
            else if (op == "logs") rule.op = FaultRule::Op::Logs;
            else if (op == "delete") rule.op = FaultRule::Op::Delete;
            else if (op == "any") rule.op = FaultRule::Op::Any;
            else throw ValidationError("unknown fault op '" + op + "'", source_name);
            rule.nth = entry.value("nth", 1);
            rule.count = entry.value("count", 1);
            const std::string action = entry.value("action", "http500");
            if (action == "http500") rule.action = FaultRule::Action::Http500;
            else if (action == "drop") rule.action = FaultRule::Action::Drop;
            else if (action == "delay") rule.action = FaultRule::Action::Delay;
            else throw ValidationError("unknown fault action '" + action + "'", source_name);
            rule.delay = entry.value("delay", 0.0);
            scenario.faults.push_back(rule);
        }
    }
    scenario.validate();
    return scenario;
}

Scenario Scenario::load(const std::filesystem::path& path) {
    return parse(load_document(path), path.string());
}

void Scenario::validate() const {
    if (namespaces.empty()) throw ValidationError("scenario needs at least one namespace");
    for (const auto& script : pod_scripts) script.validate();
    for (const auto& rule : faults) {
        if (rule.nth < 1) throw ValidationError("fault 'nth' must be >= 1");
        if (rule.count < 1) throw ValidationError("fault 'count' must be >= 1");
        if (rule.delay < 0) throw ValidationError("fault 'delay' must be >= 0");
    }
}

std::vector<ClusterSnapshot::Resource> ClusterSnapshot::with_label(const std::string& key,
                                                                   const std::string& value) const {
    std::vector<Resource> out;
    for (const auto& r : resources) {
        auto it = r.labels.find(key);
        if (it != r.labels.end() && it->second == value) out.push_back(r);
    }
    return out;
}

std::size_t ClusterSnapshot::count_kind(const std::string& kind) const {
    return static_cast<std::size_t>(
        std::count_if(resources.begin(), resources.end(),
                      [&kind](const Resource& r) { return r.kind == kind; }));
}

// ---------------------------------------------------------------------------

struct SimServer::Impl {
    struct StoredPod {
        std::string name;
        std::string ns;
        std::map<std::string, std::string> labels;
        double created_at = 0.0;
        int script_index = -1;  // -1: unscripted, immediately Succeeded, no logs
        bool deleted = false;
    };

    struct StoredJob {
        std::string name;
        std::string ns;
        std::map<std::string, std::string> labels;
        bool deleted = false;
    };

    struct FaultState {
        FaultRule rule;
        int seen = 0;
    };

    Scenario scenario;
    Clock& clock;

    httplib::Server server;
    std::thread server_thread;
    int port = 0;
    bool started = false;

    mutable std::mutex mutex;
    std::vector<StoredPod> pods;
    std::vector<StoredJob> jobs;
    std::vector<FaultState> fault_states;
    int total_requests = 0;
    std::map<FaultRule::Op, int> op_counts;

    Impl(Scenario s, Clock& c) : scenario(std::move(s)), clock(c) {
        for (const auto& rule : scenario.faults) fault_states.push_back({rule, 0});
        install_routes();
    }

    // -- helpers ------------------------------------------------------------

    static void status_response(httplib::Response& res, int code, const std::string& reason,
                                const std::string& message) {
        Document status = {{"kind", "Status"}, {"apiVersion", "v1"},  {"status", "Failure"},
                           {"reason", reason}, {"message", message}, {"code", code}};
        res.status = code;
        res.set_content(status.dump(), "application/json");
    }

    bool known_namespace(const std::string& ns) const {
        return std::find(scenario.namespaces.begin(), scenario.namespaces.end(), ns) !=
               scenario.namespaces.end();
    }

    // Counts the request, checks auth, applies fault rules. Returns true
    // when the request was fully handled (auth failure or injected fault).
    bool intercept(FaultRule::Op op, const httplib::Request& req, httplib::Response& res) {
        double delay = 0.0;
        {
            std::lock_guard lock(mutex);
            ++total_requests;
            ++op_counts[op];
            if (!scenario.token.empty() &&
                req.get_header_value("Authorization") != "Bearer " + scenario.token) {
                status_response(res, 403, "Forbidden", "invalid or missing bearer token");
                return true;
            }
            for (auto& state : fault_states) {
                if (state.rule.op != FaultRule::Op::Any && state.rule.op != op) continue;
                ++state.seen;
                if (state.seen < state.rule.nth || state.seen >= state.rule.nth + state.rule.count)
                    continue;
                switch (state.rule.action) {
                    case FaultRule::Action::Http500:
                        status_response(res, 500, "InternalError", "injected fault");
                        return true;
                    case FaultRule::Action::Drop:
                        // Advertise a body, then abort mid-stream: the client
                        // sees a transport error, not an HTTP status.
                        res.status = 200;
                        res.set_content_provider(
                            64, "application/json",
                            [](std::size_t, std::size_t, httplib::DataSink&) { return false; });
                        return true;
                    case FaultRule::Action::Delay:
                        delay = std::max(delay, state.rule.delay);
                        break;
                }
            }
        }
        if (delay > 0) clock.sleep_for(delay);
        return false;
    }

    int match_script(const std::string& pod_name) const {
        int found = -1;
        for (std::size_t i = 0; i < scenario.pod_scripts.size(); ++i) {
            if (!glob_match(scenario.pod_scripts[i].match, pod_name)) continue;
            if (found >= 0)
                throw ValidationError("pod '" + pod_name + "' matches more than one script ('" +
                                      scenario.pod_scripts[found].match + "' and '" +
                                      scenario.pod_scripts[i].match + "')");
            found = static_cast<int>(i);
        }
        return found;
    }

    sched::PodPhase pod_phase(const StoredPod& pod, double t) const {
        if (pod.script_index < 0) return sched::PodPhase::Succeeded;
        const auto& script = scenario.pod_scripts[pod.script_index];
        sched::PodPhase phase = sched::PodPhase::Pending;
        const double elapsed = t - pod.created_at;
        for (const auto& event : script.timeline) {
            if (event.at > elapsed) break;
            if (event.type == PodScriptEvent::Type::Phase) phase = event.phase;
        }
        return phase;
    }

    bool pod_self_deleted(const StoredPod& pod, double t) const {
        if (pod.script_index < 0) return false;
        const auto& script = scenario.pod_scripts[pod.script_index];
        const double elapsed = t - pod.created_at;
        for (const auto& event : script.timeline)
            if (event.type == PodScriptEvent::Type::SelfDelete && event.at <= elapsed) return true;
        return false;
    }

    bool pod_visible(const StoredPod& pod, double t) const {
        return !pod.deleted && !pod_self_deleted(pod, t);
    }

    std::string pod_logs(const StoredPod& pod, double t) const {
        if (pod.script_index < 0) return "";
        const auto& script = scenario.pod_scripts[pod.script_index];
        const double elapsed = t - pod.created_at;
        std::string out;
        for (const auto& event : script.timeline) {
            if (event.at > elapsed) break;
            if (event.type == PodScriptEvent::Type::Log) {
                out += substitute_pod(event.line, pod.name);
                out.push_back('\n');
            }
        }
        return out;
    }

    Document pod_to_json(const StoredPod& pod, double t) const {
        Document out = {{"kind", "Pod"}, {"apiVersion", "v1"}};
        out["metadata"] = {{"name", pod.name}, {"namespace", pod.ns}};
        Document labels = Document::object();
        for (const auto& [key, value] : pod.labels) labels[key] = value;
        out["metadata"]["labels"] = std::move(labels);
        const auto phase = pod_phase(pod, t);
        out["status"] = {{"phase", sched::to_string(phase)}};
        if (sched::is_terminal(phase)) {
            const int exit_code = phase == sched::PodPhase::Succeeded
                                      ? 0
                                      : (pod.script_index >= 0
                                             ? scenario.pod_scripts[pod.script_index].exit_code
                                             : 1);
            out["status"]["containerStatuses"] = Document::array(
                {{{"name", "main"}, {"state", {{"terminated", {{"exitCode", exit_code}}}}}}});
        }
        return out;
    }

    static std::map<std::string, std::string> labels_from(const Document& metadata) {
        std::map<std::string, std::string> labels;
        if (metadata.is_object() && metadata.contains("labels") && metadata["labels"].is_object())
            for (const auto& [key, value] : metadata["labels"].items())
                labels[key] = value.is_string() ? value.get<std::string>() : value.dump();
        return labels;
    }

    static bool selector_matches(const std::string& selector,
                                 const std::map<std::string, std::string>& labels) {
        if (selector.empty()) return true;
        auto eq = selector.find('=');
        if (eq == std::string::npos) return false;
        const std::string key = selector.substr(0, eq);
        const std::string value = selector.substr(eq + 1);
        auto it = labels.find(key);
        return it != labels.end() && it->second == value;
    }

    // Registers one pod; the caller holds the lock. Throws on conflicts.
    void register_pod(const std::string& ns, const std::string& name,
                      std::map<std::string, std::string> labels, double t) {
        for (const auto& pod : pods)
            if (pod.ns == ns && pod.name == name && pod_visible(pod, t))
                throw ApiError(409, "AlreadyExists", "pod '" + name + "' already exists");
        StoredPod pod;
        pod.name = name;
        pod.ns = ns;
        pod.labels = std::move(labels);
        pod.created_at = t;
        pod.script_index = match_script(name);
        pods.push_back(std::move(pod));
    }

    // -- routes ---------------------------------------------------------------

    void install_routes() {
        using httplib::Request;
        using httplib::Response;

        server.Post(R"(/api/v1/namespaces/([^/]+)/pods)", [this](const Request& req, Response& res) {
            if (intercept(FaultRule::Op::Create, req, res)) return;
            handle_create_pod(req, res);
        });
        server.Post(R"(/apis/batch/v1/namespaces/([^/]+)/jobs)",
                    [this](const Request& req, Response& res) {
                        if (intercept(FaultRule::Op::Create, req, res)) return;
                        handle_create_job(req, res);
                    });
        server.Get(R"(/api/v1/namespaces/([^/]+)/pods)", [this](const Request& req, Response& res) {
            if (intercept(FaultRule::Op::List, req, res)) return;
            handle_list_pods(req, res);
        });
        server.Get(R"(/api/v1/namespaces/([^/]+)/pods/([^/]+)/log)",
                   [this](const Request& req, Response& res) {
                       if (intercept(FaultRule::Op::Logs, req, res)) return;
                       handle_pod_logs(req, res);
                   });
        server.Delete(R"(/api/v1/namespaces/([^/]+)/pods)",
                      [this](const Request& req, Response& res) {
                          if (intercept(FaultRule::Op::Delete, req, res)) return;
                          handle_delete_collection(req, res, "Pod");
                      });
        server.Delete(R"(/apis/batch/v1/namespaces/([^/]+)/jobs)",
                      [this](const Request& req, Response& res) {
                          if (intercept(FaultRule::Op::Delete, req, res)) return;
                          handle_delete_collection(req, res, "Job");
                      });
    }

    void handle_create_pod(const httplib::Request& req, httplib::Response& res) {
        const std::string ns = req.matches[1];
        std::lock_guard lock(mutex);
        if (!known_namespace(ns))
            return status_response(res, 404, "NotFound", "namespace '" + ns + "' not found");
        Document body;
        try {
            body = Document::parse(req.body);
        } catch (const std::exception& e) {
            return status_response(res, 400, "BadRequest", e.what());
        }
        const Document* name = doc_find(body, DocPath::parse("metadata.name"));
        if (name == nullptr || !name->is_string() || name->get<std::string>().empty())
            return status_response(res, 400, "Invalid", "pod needs metadata.name");
        const double t = clock.now();
        try {
            register_pod(ns, name->get<std::string>(),
                         labels_from(body.value("metadata", Document::object())), t);
        } catch (const ApiError& e) {
            return status_response(res, e.status(), e.reason(), e.what());
        } catch (const ValidationError& e) {
            return status_response(res, 500, "ScenarioError", e.what());
        }
        res.status = 201;
        res.set_content(pod_to_json(pods.back(), t).dump(), "application/json");
    }

    void handle_create_job(const httplib::Request& req, httplib::Response& res) {
        const std::string ns = req.matches[1];
        std::lock_guard lock(mutex);
        if (!known_namespace(ns))
            return status_response(res, 404, "NotFound", "namespace '" + ns + "' not found");
        Document body;
        try {
            body = Document::parse(req.body);
        } catch (const std::exception& e) {
            return status_response(res, 400, "BadRequest", e.what());
        }
        const Document* name_node = doc_find(body, DocPath::parse("metadata.name"));
        if (name_node == nullptr || !name_node->is_string() || name_node->get<std::string>().empty())
            return status_response(res, 400, "Invalid", "job needs metadata.name");
        const std::string name = name_node->get<std::string>();
        for (const auto& job : jobs)
            if (job.ns == ns && job.name == name && !job.deleted)
                return status_response(res, 409, "AlreadyExists", "job '" + name + "' already exists");

        int completions = 1;
        if (const Document* c = doc_find(body, DocPath::parse("spec.completions"));
            c != nullptr && !c->is_null()) {
            if (!c->is_number_integer() || c->get<long long>() <= 0)
                return status_response(res, 400, "Invalid", "spec.completions must be a positive integer");
            completions = c->get<int>();
        }

        // Materialize the pods up front, named <job>-<k>; no retry controller.
        auto pod_labels = labels_from(
            doc_find(body, DocPath::parse("spec.template.metadata")) != nullptr
                ? *doc_find(body, DocPath::parse("spec.template.metadata"))
                : Document::object());
        pod_labels["job-name"] = name;
        const double t = clock.now();
        try {
            for (int k = 1; k <= completions; ++k)
                register_pod(ns, name + "-" + std::to_string(k), pod_labels, t);
        } catch (const ApiError& e) {
            return status_response(res, e.status(), e.reason(), e.what());
        } catch (const ValidationError& e) {
            return status_response(res, 500, "ScenarioError", e.what());
        }

        StoredJob job;
        job.name = name;
        job.ns = ns;
        job.labels = labels_from(body.value("metadata", Document::object()));
        jobs.push_back(std::move(job));

        Document out = body;
        out["kind"] = "Job";
        res.status = 201;
        res.set_content(out.dump(), "application/json");
    }

    void handle_list_pods(const httplib::Request& req, httplib::Response& res) {
        const std::string ns = req.matches[1];
        const std::string selector = req.get_param_value("labelSelector");
        std::lock_guard lock(mutex);
        const double t = clock.now();
        Document items = Document::array();
        for (const auto& pod : pods)
            if (pod.ns == ns && pod_visible(pod, t) && selector_matches(selector, pod.labels))
                items.push_back(pod_to_json(pod, t));
        Document list = {{"kind", "PodList"}, {"apiVersion", "v1"}, {"items", std::move(items)}};
        res.status = 200;
        res.set_content(list.dump(), "application/json");
    }

    void handle_pod_logs(const httplib::Request& req, httplib::Response& res) {
        const std::string ns = req.matches[1];
        const std::string name = req.matches[2];
        std::lock_guard lock(mutex);
        const double t = clock.now();
        for (const auto& pod : pods) {
            if (pod.ns != ns || pod.name != name) continue;
            if (!pod_visible(pod, t)) break;
            res.status = 200;
            res.set_content(pod_logs(pod, t), "text/plain");
            return;
        }
        status_response(res, 404, "NotFound", "pod '" + name + "' not found");
    }

    void handle_delete_collection(const httplib::Request& req, httplib::Response& res,
                                  const std::string& kind) {
        const std::string ns = req.matches[1];
        const std::string selector = req.get_param_value("labelSelector");
        std::lock_guard lock(mutex);
        const double t = clock.now();
        Document items = Document::array();
        if (kind == "Pod") {
            for (auto& pod : pods) {
                if (pod.ns != ns || !pod_visible(pod, t) || !selector_matches(selector, pod.labels))
                    continue;
                items.push_back(pod_to_json(pod, t));
                pod.deleted = true;
            }
        } else {
            for (auto& job : jobs) {
                if (job.ns != ns || job.deleted || !selector_matches(selector, job.labels)) continue;
                Document j = {{"kind", "Job"}, {"apiVersion", "batch/v1"}};
                j["metadata"] = {{"name", job.name}, {"namespace", job.ns}};
                items.push_back(std::move(j));
                job.deleted = true;
            }
        }
        Document list = {{"kind", kind + "List"}, {"items", std::move(items)}};
        res.status = 200;
        res.set_content(list.dump(), "application/json");
    }
};

SimServer::SimServer(Scenario scenario, Clock& clock)
    : impl_(std::make_unique<Impl>(std::move(scenario), clock)) {}

SimServer::~SimServer() { stop(); }

k8s::ApiEndpoint SimServer::start(int port) {
    if (impl_->started) return endpoint();
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
        if (impl_->port <= 0) throw InfrastructureError("simulator could not bind a loopback port");
    } else {
        if (!impl_->server.bind_to_port("127.0.0.1", port))
            throw InfrastructureError("simulator could not bind port " + std::to_string(port));
        impl_->port = port;
    }
    impl_->server_thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    impl_->started = true;
    return endpoint();
}

void SimServer::stop() {
    if (!impl_->started) return;
    impl_->server.stop();
    if (impl_->server_thread.joinable()) impl_->server_thread.join();
    impl_->started = false;
}

k8s::ApiEndpoint SimServer::endpoint() const {
    k8s::ApiEndpoint ep;
    ep.base_url = "http://127.0.0.1:" + std::to_string(impl_->port);
    ep.token = impl_->scenario.token;
    ep.verify_tls = false;
    return ep;
}

ClusterSnapshot SimServer::inspect_state() const {
    std::lock_guard lock(impl_->mutex);
    const double t = impl_->clock.now();
    ClusterSnapshot snapshot;
    for (const auto& pod : impl_->pods) {
        if (!impl_->pod_visible(pod, t)) continue;
        snapshot.resources.push_back(
            {"Pod", pod.name, pod.ns, pod.labels, impl_->pod_phase(pod, t)});
    }
    for (const auto& job : impl_->jobs) {
        if (job.deleted) continue;
        snapshot.resources.push_back({"Job", job.name, job.ns, job.labels, std::nullopt});
    }
    return snapshot;
}

int SimServer::request_count() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->total_requests;
}

int SimServer::request_count(FaultRule::Op op) const {
    std::lock_guard lock(impl_->mutex);
    auto it = impl_->op_counts.find(op);
    return it == impl_->op_counts.end() ? 0 : it->second;
}

void SimServer::reset(Scenario scenario) {
    std::lock_guard lock(impl_->mutex);
    impl_->scenario = std::move(scenario);
    impl_->pods.clear();
    impl_->jobs.clear();
    impl_->fault_states.clear();
    for (const auto& rule : impl_->scenario.faults) impl_->fault_states.push_back({rule, 0});
    impl_->total_requests = 0;
    impl_->op_counts.clear();
}

}  // namespace kbench::sim
