#include "kbench/document.hpp"

#include <gtest/gtest.h>

#include "kbench/errors.hpp"

using namespace kbench;

TEST(ParseDocument, ScalarTyping) {
    auto doc = parse_document(R"(
count: 4
quoted: '4'
rate: 2.5
flag: true
off: false
nothing: null
tilde: ~
text: plain words
)");
    EXPECT_TRUE(doc["count"].is_number_integer());
    EXPECT_EQ(doc["count"], 4);
    EXPECT_TRUE(doc["quoted"].is_string());
    EXPECT_EQ(doc["quoted"], "4");
    EXPECT_DOUBLE_EQ(doc["rate"].get<double>(), 2.5);
    EXPECT_EQ(doc["flag"], true);
    EXPECT_EQ(doc["off"], false);
    EXPECT_TRUE(doc["nothing"].is_null());
    EXPECT_TRUE(doc["tilde"].is_null());
    EXPECT_EQ(doc["text"], "plain words");
}

TEST(ParseDocument, NestedStructure) {
    auto doc = parse_document(R"(
spec:
  containers:
    - name: main
      resources:
        limits:
          nvidia.com/gpu: '4'
)");
    const auto& limit = doc["spec"]["containers"][0]["resources"]["limits"]["nvidia.com/gpu"];
    EXPECT_TRUE(limit.is_string());
    EXPECT_EQ(limit, "4");
}

TEST(ParseDocument, MalformedReportsLocation) {
    try {
        parse_document("a: [1, 2\nb: 3", "bad.yaml");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.source(), "bad.yaml");
        EXPECT_GE(e.line(), 0);
    }
}

TEST(ParseDocument, JsonIsValidInput) {
    auto doc = parse_document(R"({"kind": "Pod", "metadata": {"name": "x"}})");
    EXPECT_EQ(doc["kind"], "Pod");
}

TEST(YamlRoundTrip, PreservesTypes) {
    Document doc = {
        {"string_number", "4"},
        {"number", 4},
        {"float", 1.5},
        {"flag", true},
        {"null_value", nullptr},
        {"list", {1, "two", 3.0}},
        {"nested", {{"true", "false"}, {"empty", ""}}},
    };
    auto reparsed = parse_document(document_to_yaml(doc));
    EXPECT_EQ(reparsed, doc);
}

TEST(DocPath, ParsesQuotedAndSubscripted) {
    auto path = DocPath::parse(R"(spec.containers[0].resources.limits."nvidia.com/gpu")");
    ASSERT_EQ(path.segments().size(), 6u);
    EXPECT_EQ(std::get<std::string>(path.segments()[0]), "spec");
    EXPECT_EQ(std::get<std::size_t>(path.segments()[2]), 0u);
    EXPECT_EQ(std::get<std::string>(path.segments()[5]), "nvidia.com/gpu");
    EXPECT_EQ(path.str(), R"(spec.containers[0].resources.limits."nvidia.com/gpu")");
}

TEST(DocPath, RejectsMalformed) {
    EXPECT_THROW(DocPath::parse(""), PathError);
    EXPECT_THROW(DocPath::parse("a..b"), PathError);
    EXPECT_THROW(DocPath::parse("a["), PathError);
    EXPECT_THROW(DocPath::parse("a[x]"), PathError);
    EXPECT_THROW(DocPath::parse("a."), PathError);
    EXPECT_THROW(DocPath::parse("\"unterminated"), PathError);
}

TEST(DocFind, ReturnsNullForMissing) {
    Document doc = {{"a", {{"b", 1}}}};
    EXPECT_NE(doc_find(doc, DocPath::parse("a.b")), nullptr);
    EXPECT_EQ(doc_find(doc, DocPath::parse("a.c")), nullptr);
    EXPECT_EQ(doc_find(doc, DocPath::parse("a.b.c")), nullptr);
    EXPECT_EQ(doc_find(doc, DocPath::parse("a[0]")), nullptr);
}

TEST(DocSet, CreatesIntermediateObjects) {
    Document doc = Document::object();
    doc_set(doc, DocPath::parse("metadata.labels.rfm"), "abc123xy");
    EXPECT_EQ(doc["metadata"]["labels"]["rfm"], "abc123xy");
}

TEST(DocSet, ReplacesExistingArrayElement) {
    Document doc = {{"args", {"--nproc_per_node=4", "train.py"}}};
    doc_set(doc, DocPath::parse("args[0]"), "--nproc_per_node=8");
    EXPECT_EQ(doc["args"][0], "--nproc_per_node=8");
    EXPECT_EQ(doc["args"][1], "train.py");
}

TEST(DocSet, AppendsAtOnePastEnd) {
    Document doc = {{"args", {"a"}}};
    doc_set(doc, DocPath::parse("args[1]"), "b");
    EXPECT_EQ(doc["args"].size(), 2u);
    EXPECT_EQ(doc["args"][1], "b");
    EXPECT_THROW(doc_set(doc, DocPath::parse("args[5]"), "x"), PathError);
}

TEST(DocSet, CannotDescendThroughScalar) {
    Document doc = {{"spec", "not-a-map"}};
    EXPECT_THROW(doc_set(doc, DocPath::parse("spec.containers[0].name"), "x"), PathError);
}

TEST(DocSet, QuotedKeyWithDots) {
    Document doc = Document::object();
    doc_set(doc, DocPath::parse(R"(limits."nvidia.com/gpu")"), 8);
    EXPECT_EQ(doc["limits"]["nvidia.com/gpu"], 8);
}
