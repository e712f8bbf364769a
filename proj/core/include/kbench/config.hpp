#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kbench/document.hpp"

namespace kbench::config {

struct PartitionConfig {
    std::string name;
    std::string scheduler;  // must name a registered backend ("k8s", "local")
    std::string launcher;
    std::optional<std::string> namespace_;
    std::optional<std::string> context;
    std::vector<std::string> environs;

    bool operator==(const PartitionConfig&) const = default;
};

struct SystemConfig {
    std::string name;
    std::vector<PartitionConfig> partitions;

    bool operator==(const SystemConfig&) const = default;
};

// Named opaque key-value set. The schema is deliberately minimal.
struct EnvironmentConfig {
    std::string name;
    std::map<std::string, Document> values;

    bool operator==(const EnvironmentConfig&) const = default;
};

struct SiteConfig {
    std::vector<SystemConfig> systems;
    std::vector<EnvironmentConfig> environments;
    Document logging = Document::array();  // opaque log-sink descriptors

    // Non-fatal findings from loading (unknown top-level keys). Not part of
    // the config's identity.
    std::vector<std::string> warnings;

    bool operator==(const SiteConfig& other) const {
        return systems == other.systems && environments == other.environments &&
               logging == other.logging;
    }
};

// Loads and validates a site configuration. `known_schedulers` is the set of
// registered backend names; a partition referencing anything else is rejected
// at load time. The overload without the set uses the built-in backends.
SiteConfig load_site_config(const std::filesystem::path& path,
                            const std::set<std::string>& known_schedulers);
SiteConfig load_site_config(const std::filesystem::path& path);

SiteConfig parse_site_config(const Document& doc, const std::set<std::string>& known_schedulers,
                             const std::string& source_name = "<config>");

Document site_config_to_document(const SiteConfig& cfg);
std::string serialize_site_config(const SiteConfig& cfg);  // YAML

// "system:partition" selectors. Either side may be "*"; a bare "*" matches
// everything. Used both for CLI filters and test valid_systems lists.
bool selector_matches(const std::string& selector, const std::string& system,
                      const std::string& partition);

// The unique partition named by a concrete "system:partition" selector.
// Throws NotFoundError when no such system or partition exists.
const PartitionConfig& resolve_partition(const SiteConfig& cfg, const std::string& selector);

struct PartitionRef {
    const SystemConfig* system;
    const PartitionConfig* partition;
};

// All partitions matched by a (possibly wildcarded) selector, in config order.
std::vector<PartitionRef> select_partitions(const SiteConfig& cfg, const std::string& selector);

}  // namespace kbench::config
