#include "kbench/clock.hpp"

#include <thread>

namespace kbench {

void SystemClock::sleep_for(double seconds) {
    if (seconds <= 0) return;
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

}  // namespace kbench
