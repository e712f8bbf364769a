#include "kbench/config.hpp"

#include <algorithm>

#include "kbench/errors.hpp"
#include "kbench/scheduler.hpp"

namespace kbench::config {

namespace {

std::string require_string(const Document& node, const std::string& key,
                           const std::string& location) {
    auto it = node.find(key);
    if (it == node.end() || !it->is_string() || it->get<std::string>().empty())
        throw ValidationError("missing or empty '" + key + "'", location);
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const Document& node, const std::string& key,
                                           const std::string& location) {
    auto it = node.find(key);
    if (it == node.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ValidationError("'" + key + "' must be a string", location);
    return it->get<std::string>();
}

PartitionConfig parse_partition(const Document& node, const std::set<std::string>& known,
                                const std::string& location) {
    if (!node.is_object()) throw ValidationError("partition must be a mapping", location);
    PartitionConfig part;
    part.name = require_string(node, "name", location);
    part.scheduler = require_string(node, "scheduler", location);
    if (!known.count(part.scheduler)) {
        std::string names;
        for (const auto& n : known) names += (names.empty() ? "" : ", ") + n;
        throw ValidationError("unknown scheduler '" + part.scheduler + "' (registered: " + names +
                                  ")",
                              location + " (partition '" + part.name + "')");
    }
    part.launcher = node.value("launcher", part.scheduler);
    part.namespace_ = optional_string(node, "namespace", location);
    part.context = optional_string(node, "context", location);
    if (auto it = node.find("environs"); it != node.end() && !it->is_null()) {
        if (!it->is_array()) throw ValidationError("'environs' must be a list", location);
        for (const auto& e : *it) {
            if (!e.is_string()) throw ValidationError("'environs' entries must be strings", location);
            part.environs.push_back(e.get<std::string>());
        }
    }
    return part;
}

}  // namespace

SiteConfig parse_site_config(const Document& doc, const std::set<std::string>& known_schedulers,
                             const std::string& source_name) {
    if (!doc.is_object()) throw ValidationError("site config must be a mapping", source_name);

    SiteConfig cfg;
    static const std::set<std::string> top_keys = {"systems", "environments", "logging"};
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!top_keys.count(key))
            cfg.warnings.push_back(source_name + ": unknown top-level key '" + key + "' ignored");
    }

    auto systems_it = doc.find("systems");
    if (systems_it == doc.end() || !systems_it->is_array() || systems_it->empty())
        throw ValidationError("at least one system is required", source_name);

    std::set<std::string> system_names;
    for (std::size_t i = 0; i < systems_it->size(); ++i) {
        const Document& sys_node = (*systems_it)[i];
        const std::string location = source_name + ": systems[" + std::to_string(i) + "]";
        if (!sys_node.is_object()) throw ValidationError("system must be a mapping", location);
        SystemConfig sys;
        sys.name = require_string(sys_node, "name", location);
        if (!system_names.insert(sys.name).second)
            throw ValidationError("duplicate system name '" + sys.name + "'", location);

        auto parts_it = sys_node.find("partitions");
        if (parts_it == sys_node.end() || !parts_it->is_array() || parts_it->empty())
            throw ValidationError("system '" + sys.name + "' has no partitions", location);
        std::set<std::string> partition_names;
        for (std::size_t j = 0; j < parts_it->size(); ++j) {
            auto part = parse_partition((*parts_it)[j], known_schedulers,
                                        location + ".partitions[" + std::to_string(j) + "]");
            if (!partition_names.insert(part.name).second)
                throw ValidationError("duplicate partition name '" + part.name + "' in system '" +
                                          sys.name + "'",
                                      location);
            sys.partitions.push_back(std::move(part));
        }
        cfg.systems.push_back(std::move(sys));
    }

    if (auto it = doc.find("environments"); it != doc.end() && !it->is_null()) {
        if (!it->is_array())
            throw ValidationError("'environments' must be a list", source_name);
        std::set<std::string> env_names;
        for (std::size_t i = 0; i < it->size(); ++i) {
            const Document& env_node = (*it)[i];
            const std::string location = source_name + ": environments[" + std::to_string(i) + "]";
            if (!env_node.is_object()) throw ValidationError("environment must be a mapping", location);
            EnvironmentConfig env;
            env.name = require_string(env_node, "name", location);
            if (!env_names.insert(env.name).second)
                throw ValidationError("duplicate environment name '" + env.name + "'", location);
            for (const auto& [key, value] : env_node.items())
                if (key != "name") env.values[key] = value;
            cfg.environments.push_back(std::move(env));
        }
    }

    if (auto it = doc.find("logging"); it != doc.end() && !it->is_null()) cfg.logging = *it;

    return cfg;
}

SiteConfig load_site_config(const std::filesystem::path& path,
                            const std::set<std::string>& known_schedulers) {
    return parse_site_config(load_document(path), known_schedulers, path.string());
}

SiteConfig load_site_config(const std::filesystem::path& path) {
    return load_site_config(path, sched::builtin_backend_names());
}

Document site_config_to_document(const SiteConfig& cfg) {
    Document doc = Document::object();
    Document systems = Document::array();
    for (const auto& sys : cfg.systems) {
        Document sys_node = Document::object();
        sys_node["name"] = sys.name;
        Document parts = Document::array();
        for (const auto& part : sys.partitions) {
            Document part_node = Document::object();
            part_node["name"] = part.name;
            part_node["scheduler"] = part.scheduler;
            part_node["launcher"] = part.launcher;
            if (part.namespace_) part_node["namespace"] = *part.namespace_;
            if (part.context) part_node["context"] = *part.context;
            if (!part.environs.empty()) part_node["environs"] = part.environs;
            parts.push_back(std::move(part_node));
        }
        sys_node["partitions"] = std::move(parts);
        systems.push_back(std::move(sys_node));
    }
    doc["systems"] = std::move(systems);
    if (!cfg.environments.empty()) {
        Document envs = Document::array();
        for (const auto& env : cfg.environments) {
            Document env_node = Document::object();
            env_node["name"] = env.name;
            for (const auto& [key, value] : env.values) env_node[key] = value;
            envs.push_back(std::move(env_node));
        }
        doc["environments"] = std::move(envs);
    }
    if (!cfg.logging.is_null() && !(cfg.logging.is_array() && cfg.logging.empty()))
        doc["logging"] = cfg.logging;
    return doc;
}

std::string serialize_site_config(const SiteConfig& cfg) {
    return document_to_yaml(site_config_to_document(cfg));
}

namespace {

std::pair<std::string, std::string> split_selector(const std::string& selector) {
    if (selector == "*") return {"*", "*"};
    auto colon = selector.find(':');
    if (colon == std::string::npos) return {selector, "*"};
    return {selector.substr(0, colon), selector.substr(colon + 1)};
}

}  // namespace

bool selector_matches(const std::string& selector, const std::string& system,
                      const std::string& partition) {
    auto [sys_sel, part_sel] = split_selector(selector);
    const bool sys_ok = sys_sel == "*" || sys_sel == system;
    const bool part_ok = part_sel == "*" || part_sel == partition;
    return sys_ok && part_ok;
}

const PartitionConfig& resolve_partition(const SiteConfig& cfg, const std::string& selector) {
    auto [sys_sel, part_sel] = split_selector(selector);
    for (const auto& sys : cfg.systems) {
        if (sys.name != sys_sel) continue;
        for (const auto& part : sys.partitions)
            if (part.name == part_sel) return part;
        throw NotFoundError("no partition '" + part_sel + "' in system '" + sys_sel + "'");
    }
    throw NotFoundError("no system '" + sys_sel + "'");
}

std::vector<PartitionRef> select_partitions(const SiteConfig& cfg, const std::string& selector) {
    std::vector<PartitionRef> out;
    for (const auto& sys : cfg.systems)
        for (const auto& part : sys.partitions)
            if (selector_matches(selector, sys.name, part.name)) out.push_back({&sys, &part});
    return out;
}

}  // namespace kbench::config
