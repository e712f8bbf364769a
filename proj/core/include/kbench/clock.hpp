#pragma once

#include <atomic>
#include <chrono>
#include <mutex>

namespace kbench {

// Time source shared by backends and the cluster simulator. All waiting in
// the library goes through sleep_for so the whole lifecycle can be driven by
// a virtual clock in tests.
class Clock {
public:
    virtual ~Clock() = default;

    // Seconds since an arbitrary fixed origin. Monotonic.
    virtual double now() const = 0;

    virtual void sleep_for(double seconds) = 0;
};

class SystemClock final : public Clock {
public:
    SystemClock() : origin_(std::chrono::steady_clock::now()) {}

    double now() const override {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin_).count();
    }

    void sleep_for(double seconds) override;

private:
    std::chrono::steady_clock::time_point origin_;
};

// Auto-advancing virtual clock: sleep_for advances time and returns
// immediately, so timeout and polling behavior runs at memory speed. With
// several threads sleeping, time advances by the sum of their sleeps; only
// monotonicity is guaranteed.
class VirtualClock final : public Clock {
public:
    explicit VirtualClock(double start = 0.0) : now_(start) {}

    double now() const override {
        std::lock_guard lock(mutex_);
        return now_;
    }

    void sleep_for(double seconds) override { advance(seconds); }

    void advance(double seconds) {
        if (seconds <= 0) return;
        std::lock_guard lock(mutex_);
        now_ += seconds;
    }

private:
    mutable std::mutex mutex_;
    double now_;
};

}  // namespace kbench
