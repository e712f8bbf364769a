#include "kbench/run_id.hpp"

#include <cstring>

namespace kbench {

bool RunIdentifier::valid() const {
    if (value.size() != kLength) return false;
    for (char c : value)
        if (std::strchr(kAlphabet, c) == nullptr || c == '\0') return false;
    return true;
}

std::string random_identifier_value(std::mt19937& rng) {
    static const std::size_t alphabet_size = std::strlen(RunIdentifier::kAlphabet);
    std::uniform_int_distribution<std::size_t> dist(0, alphabet_size - 1);
    std::string value(RunIdentifier::kLength, '\0');
    for (auto& c : value) c = RunIdentifier::kAlphabet[dist(rng)];
    return value;
}

RunIdentifier generate_identifier(const std::unordered_set<std::string>& existing,
                                  const std::function<std::string()>& source) {
    // alphabet^8 makes exhaustion unreachable; loop until a fresh draw.
    for (;;) {
        std::string candidate = source();
        if (!existing.count(candidate)) return RunIdentifier{std::move(candidate)};
    }
}

RunIdentifier generate_identifier(const std::unordered_set<std::string>& existing) {
    std::mt19937 rng{std::random_device{}()};
    return generate_identifier(existing, [&rng] { return random_identifier_value(rng); });
}

IdentifierPool::IdentifierPool() : rng_(std::random_device{}()) {}

IdentifierPool::IdentifierPool(std::uint32_t seed) : rng_(seed) {}

RunIdentifier IdentifierPool::generate() {
    std::lock_guard lock(mutex_);
    auto id = generate_identifier(issued_, [this] { return random_identifier_value(rng_); });
    issued_.insert(id.value);
    return id;
}

RunIdentifier IdentifierPool::generate(const std::function<std::string()>& source) {
    std::lock_guard lock(mutex_);
    auto id = generate_identifier(issued_, source);
    issued_.insert(id.value);
    return id;
}

std::size_t IdentifierPool::issued_count() const {
    std::lock_guard lock(mutex_);
    return issued_.size();
}

bool IdentifierPool::was_issued(const std::string& value) const {
    std::lock_guard lock(mutex_);
    return issued_.count(value) > 0;
}

}  // namespace kbench
