#include "kbench/document.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "kbench/errors.hpp"

namespace kbench {

namespace {

bool is_integer_literal(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

bool is_float_literal(const std::string& s) {
    if (s.empty()) return false;
    double value = 0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    return ec == std::errc() && ptr == end;
}

Document scalar_to_document(const YAML::Node& node) {
    const std::string& text = node.Scalar();
    // Tag "!" marks quoted scalars: always strings.
    if (node.Tag() == "!") return Document(text);
    if (text.empty() || text == "~" || text == "null" || text == "Null" || text == "NULL")
        return Document(nullptr);
    if (text == "true" || text == "True" || text == "TRUE") return Document(true);
    if (text == "false" || text == "False" || text == "FALSE") return Document(false);
    if (is_integer_literal(text)) {
        long long value = 0;
        auto first = text.data() + (text[0] == '+' ? 1 : 0);
        auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
        if (ec == std::errc() && ptr == text.data() + text.size()) return Document(value);
    }
    if (is_float_literal(text)) {
        try {
            return Document(std::stod(text));
        } catch (const std::exception&) {
        }
    }
    return Document(text);
}

Document node_to_document(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined:
            return Document(nullptr);
        case YAML::NodeType::Scalar:
            return scalar_to_document(node);
        case YAML::NodeType::Sequence: {
            Document arr = Document::array();
            for (const auto& item : node) arr.push_back(node_to_document(item));
            return arr;
        }
        case YAML::NodeType::Map: {
            Document obj = Document::object();
            for (const auto& kv : node) obj[kv.first.as<std::string>()] = node_to_document(kv.second);
            return obj;
        }
    }
    return Document(nullptr);
}

// A string scalar that would reparse as something else must be quoted.
bool needs_quoting(const std::string& s) {
    if (s.empty()) return true;
    if (s == "~" || s == "null" || s == "Null" || s == "NULL") return true;
    if (s == "true" || s == "True" || s == "TRUE" || s == "false" || s == "False" || s == "FALSE")
        return true;
    return is_integer_literal(s) || is_float_literal(s);
}

void emit_document(YAML::Emitter& out, const Document& doc) {
    switch (doc.type()) {
        case Document::value_t::null:
            out << YAML::Null;
            break;
        case Document::value_t::boolean:
            out << doc.get<bool>();
            break;
        case Document::value_t::number_integer:
            out << doc.get<long long>();
            break;
        case Document::value_t::number_unsigned:
            out << doc.get<unsigned long long>();
            break;
        case Document::value_t::number_float:
            out << doc.get<double>();
            break;
        case Document::value_t::string: {
            const auto& s = doc.get_ref<const std::string&>();
            if (needs_quoting(s)) out << YAML::DoubleQuoted;
            out << s;
            break;
        }
        case Document::value_t::array:
            out << YAML::BeginSeq;
            for (const auto& item : doc) emit_document(out, item);
            out << YAML::EndSeq;
            break;
        case Document::value_t::object:
            out << YAML::BeginMap;
            for (const auto& [key, value] : doc.items()) {
                out << YAML::Key;
                if (needs_quoting(key)) out << YAML::DoubleQuoted;
                out << key;
                out << YAML::Value;
                emit_document(out, value);
            }
            out << YAML::EndMap;
            break;
        default:
            out << YAML::Null;
            break;
    }
}

}  // namespace

Document parse_document(const std::string& text, const std::string& source_name) {
    try {
        return node_to_document(YAML::Load(text));
    } catch (const YAML::ParserException& e) {
        throw ParseError(e.msg, source_name, e.mark.line, e.mark.column);
    } catch (const YAML::Exception& e) {
        throw ParseError(e.msg, source_name, e.mark.line, e.mark.column);
    }
}

Document load_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file", path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_document(buf.str(), path.string());
}

std::string document_to_yaml(const Document& doc) {
    YAML::Emitter out;
    emit_document(out, doc);
    std::string text = out.c_str() ? out.c_str() : "";
    text.push_back('\n');
    return text;
}

void save_document_yaml(const Document& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InfrastructureError("cannot write " + path.string());
    out << document_to_yaml(doc);
}

DocPath DocPath::parse(const std::string& text) {
    DocPath path;
    std::size_t i = 0;
    const std::size_t n = text.size();
    if (text.empty()) throw PathError("empty document path");
    bool expect_segment = true;
    while (i < n) {
        if (expect_segment) {
            std::string key;
            if (text[i] == '"') {
                ++i;
                while (i < n && text[i] != '"') key.push_back(text[i++]);
                if (i == n) throw PathError("unterminated quoted key in path: " + text);
                ++i;  // closing quote
            } else {
                while (i < n && text[i] != '.' && text[i] != '[') key.push_back(text[i++]);
                if (key.empty()) throw PathError("empty key in path: " + text);
            }
            path.segments_.emplace_back(std::move(key));
            expect_segment = false;
        } else if (text[i] == '[') {
            ++i;
            std::size_t start = i;
            while (i < n && text[i] != ']') ++i;
            if (i == n) throw PathError("unterminated subscript in path: " + text);
            std::size_t index = 0;
            auto first = text.data() + start;
            auto last = text.data() + i;
            auto [ptr, ec] = std::from_chars(first, last, index);
            if (ec != std::errc() || ptr != last || first == last)
                throw PathError("invalid array index in path: " + text);
            path.segments_.emplace_back(index);
            ++i;  // closing bracket
        } else if (text[i] == '.') {
            ++i;
            expect_segment = true;
            if (i == n) throw PathError("trailing dot in path: " + text);
        } else {
            throw PathError("unexpected character '" + std::string(1, text[i]) + "' in path: " + text);
        }
    }
    if (expect_segment) throw PathError("empty document path");
    return path;
}

std::string DocPath::str() const {
    std::string out;
    for (const auto& seg : segments_) {
        if (std::holds_alternative<std::size_t>(seg)) {
            out += "[" + std::to_string(std::get<std::size_t>(seg)) + "]";
        } else {
            const auto& key = std::get<std::string>(seg);
            const bool quoted = key.find_first_of(".[]\"") != std::string::npos || key.empty();
            if (!out.empty()) out += ".";
            out += quoted ? "\"" + key + "\"" : key;
        }
    }
    return out;
}

const Document* doc_find(const Document& root, const DocPath& path) {
    const Document* node = &root;
    for (const auto& seg : path.segments()) {
        if (std::holds_alternative<std::string>(seg)) {
            const auto& key = std::get<std::string>(seg);
            if (!node->is_object()) return nullptr;
            auto it = node->find(key);
            if (it == node->end()) return nullptr;
            node = &*it;
        } else {
            std::size_t index = std::get<std::size_t>(seg);
            if (!node->is_array() || index >= node->size()) return nullptr;
            node = &(*node)[index];
        }
    }
    return node;
}

void doc_set(Document& root, const DocPath& path, Document value) {
    if (path.empty()) throw PathError("cannot set the document root");
    Document* node = &root;
    const auto& segs = path.segments();
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
        const auto& seg = segs[i];
        const bool next_is_index = std::holds_alternative<std::size_t>(segs[i + 1]);
        if (std::holds_alternative<std::string>(seg)) {
            const auto& key = std::get<std::string>(seg);
            if (node->is_null()) *node = Document::object();
            if (!node->is_object())
                throw PathError("cannot descend into non-object at '" + key + "' in " + path.str());
            Document& child = (*node)[key];
            if (child.is_null()) child = next_is_index ? Document::array() : Document::object();
            node = &child;
        } else {
            std::size_t index = std::get<std::size_t>(seg);
            if (node->is_null()) *node = Document::array();
            if (!node->is_array())
                throw PathError("cannot index non-array at [" + std::to_string(index) + "] in " +
                                path.str());
            if (index >= node->size())
                throw PathError("array index " + std::to_string(index) + " out of range in " +
                                path.str());
            node = &(*node)[index];
            if (node->is_null() && next_is_index) *node = Document::array();
            if (node->is_null() && !next_is_index) *node = Document::object();
        }
    }
    const auto& last = segs.back();
    if (std::holds_alternative<std::string>(last)) {
        const auto& key = std::get<std::string>(last);
        if (node->is_null()) *node = Document::object();
        if (!node->is_object())
            throw PathError("cannot set key '" + key + "' on non-object in " + path.str());
        (*node)[key] = std::move(value);
    } else {
        std::size_t index = std::get<std::size_t>(last);
        if (node->is_null()) *node = Document::array();
        if (!node->is_array())
            throw PathError("cannot set index [" + std::to_string(index) + "] on non-array in " +
                            path.str());
        if (index < node->size())
            (*node)[index] = std::move(value);
        else if (index == node->size())
            node->push_back(std::move(value));
        else
            throw PathError("array index " + std::to_string(index) + " out of range in " +
                            path.str());
    }
}

}  // namespace kbench
