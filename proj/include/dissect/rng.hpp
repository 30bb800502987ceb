#pragma once

#include <dissect/ints.hpp>
#include <cstdint>

namespace dissect {

// Splitmix64-based generator. split(id) derives an independent child stream
// from the construction seed alone, so it is unaffected by draws made so far;
// identical (seed, id) always yields the identical stream.
class SplitRng {
public:
    explicit SplitRng(uint64_t seed) : base_(seed), state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // uniform in [0, bound); bound > 0
    uint64_t next_below(uint64_t bound) {
        uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
        for (;;) {
            uint64_t v = next_u64();
            if (v >= threshold) return v % bound;
        }
    }

    SplitRng split(uint64_t id) const {
        return SplitRng(mix(base_ ^ mix(0xb5297a4d3f84d5b5ull + id)));
    }

private:
    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    uint64_t base_;
    uint64_t state_;
};

// uniform in [0, bound); bound > 0
inline Int rand_below(SplitRng& rng, const Int& bound) {
    size_t bits = bit_length(bound);
    size_t words = (bits + 63) / 64;
    uint64_t top_mask = (bits % 64) ? ((uint64_t(1) << (bits % 64)) - 1) : ~uint64_t(0);
    for (;;) {
        Int v = 0;
        for (size_t w = 0; w < words; ++w) {
            uint64_t chunk = rng.next_u64();
            if (w + 1 == words) chunk &= top_mask;
            v |= from_u64(chunk) << (64 * w);
        }
        if (v < bound) return v;
    }
}

// uniform in [lo, hi] inclusive; requires lo <= hi
inline Int rand_range(SplitRng& rng, const Int& lo, const Int& hi) {
    return lo + rand_below(rng, hi - lo + 1);
}

}  // namespace dissect
