#include "kbench/manifest.hpp"

#include <gtest/gtest.h>

#include <random>

#include "kbench/errors.hpp"
#include "manifest_fuzz.hpp"
#include "testutil.hpp"

using namespace kbench;
using fuzz::count_labeled_blocks;
using fuzz::count_metadata_blocks;
using fuzz::strip_rfm;

namespace {

const RunIdentifier kId{"abc123xy"};

}  // namespace

TEST(DetectWorkload, PodIsOneCompletion) {
    WorkloadManifest pod{testutil::sample_pod_manifest()};
    auto info = detect_workload(pod);
    EXPECT_EQ(info.kind, WorkloadKind::Pod);
    EXPECT_EQ(info.expected_completions, 1);
    EXPECT_FALSE(info.unrecognized);
}

TEST(DetectWorkload, JobReadsCompletions) {
    WorkloadManifest job{Document{{"apiVersion", "batch/v1"},
                                  {"kind", "Job"},
                                  {"metadata", {{"name", "train"}}},
                                  {"spec", {{"completions", 3}}}}};
    auto info = detect_workload(job);
    EXPECT_EQ(info.kind, WorkloadKind::Job);
    EXPECT_EQ(info.expected_completions, 3);
}

TEST(DetectWorkload, JobDefaultsToOneCompletion) {
    WorkloadManifest job{Document{
        {"apiVersion", "batch/v1"}, {"kind", "Job"}, {"metadata", {{"name", "train"}}}}};
    EXPECT_EQ(detect_workload(job).expected_completions, 1);
}

TEST(DetectWorkload, MissingKindRejected) {
    WorkloadManifest manifest{Document{{"metadata", {{"name", "x"}}}}};
    EXPECT_THROW(detect_workload(manifest), ManifestError);
    EXPECT_THROW(manifest.kind(), ManifestError);
    EXPECT_FALSE(manifest.has_kind());
}

TEST(DetectWorkload, InvalidCompletionsRejected) {
    WorkloadManifest job{
        Document{{"kind", "Job"}, {"spec", {{"completions", 0}}}}};
    EXPECT_THROW(detect_workload(job), ManifestError);
    WorkloadManifest fractional{
        Document{{"kind", "Job"}, {"spec", {{"completions", 2.5}}}}};
    EXPECT_THROW(detect_workload(fractional), ManifestError);
}

TEST(DetectWorkload, OtherKindTakesConfiguredExpectation) {
    WorkloadManifest ipu{Document{{"apiVersion", "graphcore.ai/v1"}, {"kind", "IPUJob"}}};
    auto info = detect_workload(ipu, 4);
    EXPECT_EQ(info.kind, WorkloadKind::Other);
    EXPECT_EQ(info.kind_name, "IPUJob");
    EXPECT_EQ(info.expected_completions, 4);
    EXPECT_TRUE(info.unrecognized);
    EXPECT_EQ(detect_workload(ipu).expected_completions, 1);
}

TEST(InjectLabels, AddsRfmToUnlabeledPod) {
    WorkloadManifest pod{testutil::sample_pod_manifest()};
    auto injected = inject_labels(pod, kId);

    Document expected = pod.doc;
    expected["metadata"]["labels"] = {{"rfm", kId.value}};
    EXPECT_EQ(injected.doc, expected);
    // Pure transformation: the input is untouched.
    EXPECT_FALSE(pod.doc["metadata"].contains("labels"));
}

TEST(InjectLabels, PreservesExistingLabels) {
    Document doc = testutil::sample_pod_manifest();
    doc["metadata"]["labels"] = {{"app", "x"}};
    auto injected = inject_labels(WorkloadManifest{doc}, kId);
    EXPECT_EQ(injected.doc["metadata"]["labels"]["app"], "x");
    EXPECT_EQ(injected.doc["metadata"]["labels"]["rfm"], kId.value);
}

TEST(InjectLabels, LabelsTemplateMetadataInsideJobs) {
    Document job = {{"apiVersion", "batch/v1"},
                    {"kind", "Job"},
                    {"metadata", {{"name", "train"}}},
                    {"spec",
                     {{"completions", 2},
                      {"template",
                       {{"metadata", {{"labels", {{"tier", "worker"}}}}},
                        {"spec", {{"containers", Document::array()}}}}}}}};
    auto injected = inject_labels(WorkloadManifest{job}, kId);
    EXPECT_EQ(count_labeled_blocks(injected.doc, kId.value), 2u);
    EXPECT_EQ(injected.doc["spec"]["template"]["metadata"]["labels"]["tier"], "worker");
    EXPECT_EQ(injected.doc["spec"]["template"]["metadata"]["labels"]["rfm"], kId.value);
    EXPECT_EQ(injected.doc["metadata"]["labels"]["rfm"], kId.value);
}

TEST(InjectLabels, IdempotentForSameId) {
    WorkloadManifest pod{testutil::sample_pod_manifest()};
    auto once = inject_labels(pod, kId);
    auto twice = inject_labels(once, kId);
    EXPECT_EQ(once.doc, twice.doc);
}

TEST(InjectLabels, ScalarMetadataSkipped) {
    Document doc = {{"kind", "Pod"}, {"metadata", "not-a-map"}, {"spec", Document::object()}};
    auto injected = inject_labels(WorkloadManifest{doc}, kId);
    EXPECT_EQ(injected.doc, doc);  // nothing to label
}

TEST(InjectLabels, NullMetadataBecomesLabeledBlock) {
    Document doc = {{"kind", "Pod"}, {"metadata", nullptr}};
    auto injected = inject_labels(WorkloadManifest{doc}, kId);
    EXPECT_EQ(injected.doc["metadata"]["labels"]["rfm"], kId.value);
}

TEST(InjectLabels, NonMapLabelsRejected) {
    Document doc = {{"kind", "Pod"}, {"metadata", {{"labels", "oops"}}}};
    EXPECT_THROW(inject_labels(WorkloadManifest{doc}, kId), ManifestError);
}

TEST(SuffixResourceName, AppendsRunId) {
    WorkloadManifest pod{testutil::sample_pod_manifest("ResNet50-Test")};
    auto renamed = suffix_resource_name(pod, kId);
    EXPECT_EQ(renamed.name(), "ResNet50-Test-abc123xy");
    // Idempotent for the same id.
    EXPECT_EQ(suffix_resource_name(renamed, kId).name(), "ResNet50-Test-abc123xy");
    // A different id still gets its own suffix.
    EXPECT_EQ(suffix_resource_name(renamed, RunIdentifier{"zz999zz9"}).name(),
              "ResNet50-Test-abc123xy-zz999zz9");
}

TEST(SuffixResourceName, NamelessManifestGetsGeneratedName) {
    WorkloadManifest manifest{Document{{"kind", "Pod"}}};
    EXPECT_EQ(suffix_resource_name(manifest, kId).name(), "workload-abc123xy");
}

TEST(LabelSelector, Format) { EXPECT_EQ(label_selector_for(kId), "rfm=abc123xy"); }

// ---------------------------------------------------------------------------
// Randomized manifests: every object-typed metadata block gets the label,
// planted labels survive, the injection is idempotent, and stripping the
// injected entries recovers the original tree.

TEST(InjectLabels, FuzzedManifestsHoldAllInvariants) {
    fuzz::ManifestFuzzer fuzzer(20240327);
    for (int i = 0; i < 200; ++i) {
        WorkloadManifest original{fuzzer.manifest()};
        auto injected = inject_labels(original, kId);

        const std::size_t blocks = count_metadata_blocks(original.doc);
        ASSERT_GE(blocks, 1u);
        EXPECT_EQ(count_labeled_blocks(injected.doc, kId.value), blocks) << injected.doc.dump(2);

        auto twice = inject_labels(injected, kId);
        EXPECT_EQ(twice.doc, injected.doc);

        Document stripped = injected.doc;
        strip_rfm(stripped);
        EXPECT_EQ(stripped, original.doc);
    }
}
