#pragma once

#include <dissect/instance.hpp>
#include <dissect/stats.hpp>

#include <memory>
#include <optional>

namespace dissect {

// Pull-style enumerator of modular subset-sum solutions. next() returns the
// next solution or nullopt once exhausted (permanently). A stream constructed
// twice from the same inputs yields the same sequence.
class SolutionStream {
public:
    virtual ~SolutionStream() = default;
    virtual std::optional<SolutionVector> next() = 0;
    uint64_t emitted() const { return emitted_; }
    bool cap_hit() const { return cap_hit_; }

protected:
    uint64_t emitted_ = 0;
    bool cap_hit_ = false;
};

struct StreamLimits {
    std::optional<uint64_t> cap;  // stop (cap_hit) after this many emissions
    MemoryGauge* gauge = nullptr;
};

// Exhaustive scan in lexicographic order of the 0/1 string. n <= 32.
std::unique_ptr<SolutionStream> brute_force_stream(const ModularInstance& inst, StreamLimits lim = {});

// Meet in the middle over two sorted half-lists; resident entries ~ 2^(n/2). n <= 64.
std::unique_ptr<SolutionStream> horowitz_sahni_stream(const ModularInstance& inst, StreamLimits lim = {});

// Four quarter lists plus two heaps streaming half-sums in sorted order;
// resident entries ~ 2^(n/4). n <= 64, delegates to the exhaustive scan below n = 4.
std::unique_ptr<SolutionStream> schroeppel_shamir_stream(const ModularInstance& inst, StreamLimits lim = {});

// --- word-sized fast path ---------------------------------------------------
// Operates on items pre-reduced mod M. Sound for the original items because
// reduction preserves residues. Requires n <= 64 and bitlen(M) <= 57 so that
// no intermediate sum can overflow 64 bits.

bool fits_u64_core(int n, const Int& modulus);

class QuarterTables;  // sorted quarter-sum lists, reusable across many scans

std::shared_ptr<QuarterTables> build_quarter_tables(std::vector<uint64_t> reduced, MemoryGauge* gauge);

std::unique_ptr<SolutionStream> ss_scan_u64(std::shared_ptr<QuarterTables> tables,
                                            uint64_t target, uint64_t modulus, StreamLimits lim = {});

std::unique_ptr<SolutionStream> brute_scan_u64(std::vector<uint64_t> reduced,
                                               uint64_t target, uint64_t modulus, StreamLimits lim = {});

}  // namespace dissect
