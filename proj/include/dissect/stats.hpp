#pragma once

#include <atomic>
#include <cstdint>

namespace dissect {

// live/peak count of resident table entries (join tables, sorted half or
// quarter lists, heap slots), summed across everything alive in one run
class MemoryGauge {
public:
    void add(int64_t d) {
        int64_t cur = current_.fetch_add(d, std::memory_order_relaxed) + d;
        int64_t p = peak_.load(std::memory_order_relaxed);
        while (cur > p && !peak_.compare_exchange_weak(p, cur, std::memory_order_relaxed)) {}
    }
    int64_t current() const { return current_.load(std::memory_order_relaxed); }
    int64_t peak() const { return peak_.load(std::memory_order_relaxed); }
    void reset() { current_ = 0; peak_ = 0; }

private:
    std::atomic<int64_t> current_{0};
    std::atomic<int64_t> peak_{0};
};

struct RunStats {
    MemoryGauge gauge;
    std::atomic<uint64_t> emissions{0};       // root-level solutions reported
    std::atomic<uint64_t> bailouts{0};        // streams stopped by their emission cap
    std::atomic<uint64_t> table_inserts{0};
    std::atomic<uint64_t> probes{0};
    std::atomic<uint64_t> counter_overshoot{0};  // reservations beyond a shared cap
    uint64_t wall_time_ns = 0;

    void reset() {
        gauge.reset();
        emissions = 0;
        bailouts = 0;
        table_inserts = 0;
        probes = 0;
        counter_overshoot = 0;
        wall_time_ns = 0;
    }
};

}  // namespace dissect
