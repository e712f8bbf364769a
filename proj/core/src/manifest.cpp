#include "kbench/manifest.hpp"

#include "kbench/errors.hpp"

namespace kbench {

std::string to_string(WorkloadKind kind) {
    switch (kind) {
        case WorkloadKind::Pod: return "Pod";
        case WorkloadKind::Job: return "Job";
        case WorkloadKind::Other: return "Other";
    }
    return "Other";
}

bool WorkloadManifest::has_kind() const {
    auto it = doc.find("kind");
    return it != doc.end() && it->is_string() && !it->get<std::string>().empty();
}

std::string WorkloadManifest::kind_name() const {
    auto it = doc.find("kind");
    if (it == doc.end() || !it->is_string()) return "";
    return it->get<std::string>();
}

WorkloadKind WorkloadManifest::kind() const {
    if (!has_kind()) throw ManifestError("manifest has no 'kind' field");
    const std::string name = kind_name();
    if (name == "Pod") return WorkloadKind::Pod;
    if (name == "Job") return WorkloadKind::Job;
    return WorkloadKind::Other;
}

std::string WorkloadManifest::api_version() const {
    auto it = doc.find("apiVersion");
    if (it == doc.end() || !it->is_string()) return "";
    return it->get<std::string>();
}

std::string WorkloadManifest::name() const {
    const Document* name = doc_find(doc, DocPath::parse("metadata.name"));
    if (name == nullptr || !name->is_string()) return "";
    return name->get<std::string>();
}

WorkloadManifest load_manifest(const std::filesystem::path& path) {
    Document doc = load_document(path);
    if (!doc.is_object()) throw ManifestError("manifest must be a mapping: " + path.string());
    return WorkloadManifest{std::move(doc)};
}

WorkloadInfo detect_workload(const WorkloadManifest& manifest,
                             std::optional<int> other_completions) {
    WorkloadInfo info;
    info.kind = manifest.kind();  // throws ManifestError when kind missing
    info.kind_name = manifest.kind_name();
    info.unrecognized = false;
    switch (info.kind) {
        case WorkloadKind::Pod:
            info.expected_completions = 1;
            break;
        case WorkloadKind::Job: {
            info.expected_completions = 1;
            const Document* completions = doc_find(manifest.doc, DocPath::parse("spec.completions"));
            if (completions != nullptr && !completions->is_null()) {
                if (!completions->is_number_integer() || completions->get<long long>() <= 0)
                    throw ManifestError("spec.completions must be a positive integer");
                info.expected_completions = completions->get<int>();
            }
            break;
        }
        case WorkloadKind::Other:
            info.expected_completions = other_completions.value_or(1);
            info.unrecognized = true;
            break;
    }
    return info;
}

namespace {

void inject_into_tree(Document& node, const std::string& id) {
    if (node.is_array()) {
        for (auto& item : node) inject_into_tree(item, id);
        return;
    }
    if (!node.is_object()) return;
    for (auto& [key, value] : node.items()) {
        if (key == "metadata" && (value.is_object() || value.is_null())) {
            if (value.is_null()) value = Document::object();
            Document& labels = value["labels"];
            if (labels.is_null()) labels = Document::object();
            if (!labels.is_object())
                throw ManifestError("metadata.labels is not a mapping");
            labels[kRunLabelKey] = id;
            inject_into_tree(value, id);  // metadata blocks nested deeper still
        } else {
            inject_into_tree(value, id);
        }
    }
}

}  // namespace

WorkloadManifest inject_labels(const WorkloadManifest& manifest, const RunIdentifier& id) {
    WorkloadManifest out = manifest;
    inject_into_tree(out.doc, id.value);
    return out;
}

WorkloadManifest suffix_resource_name(const WorkloadManifest& manifest, const RunIdentifier& id) {
    WorkloadManifest out = manifest;
    const std::string suffix = "-" + id.value;
    const std::string current = out.name();
    if (current.size() >= suffix.size() &&
        current.compare(current.size() - suffix.size(), suffix.size(), suffix) == 0)
        return out;  // already renamed for this id
    doc_set(out.doc, DocPath::parse("metadata.name"),
            Document(current.empty() ? "workload" + suffix : current + suffix));
    return out;
}

std::string label_selector_for(const RunIdentifier& id) {
    return std::string(kRunLabelKey) + "=" + id.value;
}

}  // namespace kbench
