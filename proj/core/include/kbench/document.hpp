#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace kbench {

// All structured inputs (site config, test suites, workload manifests,
// simulator scenarios) are parsed into one document-tree type. Files are
// YAML on disk (JSON is a YAML subset and parses too); the in-memory tree
// and the Kubernetes wire format are JSON.
using Document = nlohmann::json;

// Parses YAML text. Scalars are typed conservatively: quoted scalars stay
// strings, plain `true`/`false` become booleans, integral and floating
// literals become numbers, `~`/`null`/empty become null.
Document parse_document(const std::string& text, const std::string& source_name = "<string>");

Document load_document(const std::filesystem::path& path);

// Emits YAML that reparses to an equal document (strings that look like
// numbers or keywords are quoted).
std::string document_to_yaml(const Document& doc);

void save_document_yaml(const Document& doc, const std::filesystem::path& path);

// Dotted path into a document tree, as used by manifest mutations:
//
//   spec.containers[0].resources.limits."nvidia.com/gpu"
//
// Segments are separated by dots; a segment is a bare key, a double-quoted
// key (for keys containing dots or slashes), or either followed by one or
// more [index] subscripts.
class DocPath {
public:
    using Segment = std::variant<std::string, std::size_t>;

    DocPath() = default;

    static DocPath parse(const std::string& text);  // throws PathError

    const std::vector<Segment>& segments() const { return segments_; }
    bool empty() const { return segments_.empty(); }
    std::string str() const;

private:
    std::vector<Segment> segments_;
};

// Returns the addressed node or nullptr when any step is absent.
const Document* doc_find(const Document& root, const DocPath& path);

// Sets the addressed node, creating intermediate objects for missing keys.
// Array subscripts must address an existing element or the one-past-the-end
// position (append). Descending through a scalar throws PathError.
void doc_set(Document& root, const DocPath& path, Document value);

}  // namespace kbench
