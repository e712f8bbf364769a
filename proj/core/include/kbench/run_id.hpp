#pragma once

#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <unordered_set>

namespace kbench {

// 8-character random string over [a-z0-9] labeling every workload resource
// of one test run. Uniqueness is per suite run, enforced by regenerating on
// collision against the issued set.
struct RunIdentifier {
    static constexpr std::size_t kLength = 8;
    static constexpr const char* kAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";

    std::string value;

    bool valid() const;

    bool operator==(const RunIdentifier&) const = default;
    auto operator<=>(const RunIdentifier&) const = default;
};

// One uniform random draw from alphabet^8.
std::string random_identifier_value(std::mt19937& rng);

// Returns an identifier not in `existing`, drawing from `source` until a
// fresh value comes up. The default source is uniform random.
RunIdentifier generate_identifier(const std::unordered_set<std::string>& existing,
                                  const std::function<std::string()>& source);
RunIdentifier generate_identifier(const std::unordered_set<std::string>& existing);

// Thread-safe identifier allocator shared by all workloads of a suite run.
class IdentifierPool {
public:
    IdentifierPool();
    explicit IdentifierPool(std::uint32_t seed);

    RunIdentifier generate();
    RunIdentifier generate(const std::function<std::string()>& source);

    std::size_t issued_count() const;
    bool was_issued(const std::string& value) const;

private:
    mutable std::mutex mutex_;
    std::unordered_set<std::string> issued_;
    std::mt19937 rng_;
};

}  // namespace kbench
