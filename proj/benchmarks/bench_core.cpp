#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "kbench/config.hpp"
#include "kbench/manifest.hpp"
#include "kbench/perf.hpp"
#include "kbench/run_id.hpp"
#include "kbench/testkit.hpp"

namespace {

using namespace kbench;

Document nested_manifest(int depth, int fanout) {
    Document doc = {{"kind", "Pod"}, {"metadata", {{"name", "bench"}}}};
    Document* node = &doc;
    for (int d = 0; d < depth; ++d) {
        Document level = {{"metadata", {{"labels", {{"app", "bench"}}}}}};
        Document children = Document::array();
        for (int f = 0; f < fanout; ++f)
            children.push_back(Document{{"metadata", Document::object()}, {"value", f}});
        level["children"] = std::move(children);
        (*node)["spec"] = std::move(level);
        node = &(*node)["spec"];
    }
    return doc;
}

void BM_InjectLabels(benchmark::State& state) {
    WorkloadManifest manifest{nested_manifest(static_cast<int>(state.range(0)), 4)};
    const RunIdentifier id{"bench01a"};
    for (auto _ : state) benchmark::DoNotOptimize(inject_labels(manifest, id));
}
BENCHMARK(BM_InjectLabels)->Arg(2)->Arg(8)->Arg(32);

void BM_SuffixResourceName(benchmark::State& state) {
    WorkloadManifest manifest{nested_manifest(4, 4)};
    const RunIdentifier id{"bench01a"};
    for (auto _ : state) benchmark::DoNotOptimize(suffix_resource_name(manifest, id));
}
BENCHMARK(BM_SuffixResourceName);

void BM_GenerateIdentifier(benchmark::State& state) {
    IdentifierPool pool(42);
    for (auto _ : state) benchmark::DoNotOptimize(pool.generate());
}
BENCHMARK(BM_GenerateIdentifier);

void BM_ExpandParameters(benchmark::State& state) {
    testkit::TestSpec spec;
    spec.name = "Bench";
    spec.workload.inline_doc = nested_manifest(2, 2);
    const int per_axis = static_cast<int>(state.range(0));
    for (const char* axis : {"a", "b", "c"})
        for (int v = 0; v < per_axis; ++v) spec.params[axis].push_back(Document(v));
    config::PartitionConfig partition{"p", "local", "local", std::nullopt, std::nullopt, {}};
    WorkloadManifest base{spec.workload.inline_doc.value()};
    for (auto _ : state)
        benchmark::DoNotOptimize(testkit::expand_parameters(spec, "sys", partition, base));
    state.SetItemsProcessed(state.iterations() * per_axis * per_axis * per_axis);
}
BENCHMARK(BM_ExpandParameters)->Arg(2)->Arg(4)->Arg(8);

void BM_ExtractPerf(benchmark::State& state) {
    std::mt19937 rng(7);
    std::ostringstream log;
    for (long i = 0; i < state.range(0); ++i) {
        if (i % 50 == 0)
            log << "throughput: " << 200.0 + (rng() % 100) << " inputs/s\n";
        else
            log << "step " << i << " loss " << (rng() % 1000) / 1000.0 << "\n";
    }
    const std::string text = log.str();
    perf::PerfVariable var{"throughput", R"(throughput: ([0-9.]+))", "inputs/s", 226.2, 0.05,
                           perf::Direction::HigherIsBetter};
    for (auto _ : state) benchmark::DoNotOptimize(perf::extract_perf(text, {var}));
    state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_ExtractPerf)->Arg(1000)->Arg(10000);

void BM_DocPathSet(benchmark::State& state) {
    Document doc = nested_manifest(4, 4);
    const auto path = DocPath::parse(R"(spec.children[2].resources.limits."nvidia.com/gpu")");
    for (auto _ : state) {
        Document copy = doc;
        doc_set(copy, path, 8);
        benchmark::DoNotOptimize(copy);
    }
}
BENCHMARK(BM_DocPathSet);

}  // namespace

BENCHMARK_MAIN();
