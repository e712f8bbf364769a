#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "kbench/document.hpp"
#include "kbench/perf.hpp"

namespace kbench::testutil {

class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        std::mt19937_64 rng{std::random_device{}()};
        for (;;) {
            auto candidate = base / ("kbench-test-" + std::to_string(rng()));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
    }

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path write_file(const std::filesystem::path& path,
                                        const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << text;
    return path;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Builds the epoch timing whose measured rates equal the given pair, for any
// positive sample count.
inline perf::EpochTiming timing_from_rates(double compute_throughput, double compute_fraction,
                                           long long items = 1000) {
    const double compute_time = static_cast<double>(items) / compute_throughput;
    const double total_time = compute_time / compute_fraction;
    return perf::EpochTiming(0, total_time - compute_time, compute_time, items);
}

// A Pod manifest shaped like a typical single-container GPU training pod.
inline Document sample_pod_manifest(const std::string& name = "ResNet50-Test") {
    return Document{
        {"apiVersion", "v1"},
        {"kind", "Pod"},
        {"metadata", {{"name", name}}},
        {"spec",
         {{"restartPolicy", "Never"},
          {"containers",
           Document::array(
               {{{"name", "resnet-test"},
                 {"image", "example/mlperf-suite"},
                 {"workingDir", "/workspace/ML/ResNet50/Torch"},
                 {"command", Document::array({"torchrun"})},
                 {"args", Document::array({"--nproc_per_node=4", "train.py",
                                           "-c /workspace/ML/ResNet50/Torch/config.yaml"})},
                 {"resources",
                  {{"limits", {{"cpu", 16}, {"memory", "32Gi"}, {"nvidia.com/gpu", "4"}}}}}}})},
          {"nodeSelector", {{"nvidia.com/gpu.product", "NVIDIA-A100-SXM4-40GB"}}}}}};
}

}  // namespace kbench::testutil
