#pragma once

#include <dissect/ints.hpp>
#include <dissect/rng.hpp>

#include <optional>
#include <string>
#include <vector>

namespace dissect {

struct Instance {
    std::vector<Int> items;
    Int target = 0;
    int n() const { return int(items.size()); }
};

struct ModularInstance {
    std::vector<Int> items;
    Int target = 0;
    Int modulus = 1;
    int n() const { return int(items.size()); }
};

// 0/1 pick vector; index 0 is the first item and the leftmost character of
// the string form
class SolutionVector {
public:
    SolutionVector() = default;
    explicit SolutionVector(int n) : n_(n), hi_(n > 64 ? (size_t(n) + 63) / 64 - 1 : 0, 0) {}

    // bit i of mask corresponds to item i; n <= 64
    static SolutionVector from_mask(int n, uint64_t mask);

    int size() const { return n_; }
    bool get(int i) const {
        return (word(i / 64) >> (i % 64)) & 1;
    }
    void set(int i, bool v) {
        uint64_t& w = i < 64 ? lo_ : hi_[size_t(i / 64) - 1];
        if (v) w |= uint64_t(1) << (i % 64);
        else w &= ~(uint64_t(1) << (i % 64));
    }
    int count() const;
    uint64_t low_mask() const { return lo_; }  // bits 0..min(n,64)

    std::string str() const;
    static std::optional<SolutionVector> parse(const std::string& s);

    // a over items [0, a.n), b over [a.n, a.n + b.n)
    static SolutionVector concat(const SolutionVector& a, const SolutionVector& b);

    bool operator==(const SolutionVector& o) const { return n_ == o.n_ && lo_ == o.lo_ && hi_ == o.hi_; }
    bool operator<(const SolutionVector& o) const;

private:
    uint64_t word(size_t w) const { return w == 0 ? lo_ : hi_[w - 1]; }
    int n_ = 0;
    uint64_t lo_ = 0;                // bits 0..63
    std::vector<uint64_t> hi_;       // bits 64.., usually empty
};

// sum of selected items; x.size() must equal items.size()
Int selected_sum(const std::vector<Int>& items, const SolutionVector& x);

// --- plain-text instance format ------------------------------------------
// line 1: n, line 2: n space-separated non-negative integers, line 3: t.
// A planted witness rides along as a trailing "# witness <bits>" comment.

struct ParsedInstance {
    Instance inst;
    std::optional<SolutionVector> witness;
};

std::string render_instance(const Instance& inst, const std::optional<SolutionVector>& witness);
ParsedInstance parse_instance(const std::string& text);  // throws std::invalid_argument

// --- generators ------------------------------------------------------------

enum class InstanceKind { uniform, planted, all_equal, parity_no };

std::optional<InstanceKind> instance_kind_from(const std::string& s);
std::string to_string(InstanceKind k);

struct GeneratedInstance {
    Instance inst;
    std::optional<SolutionVector> witness;  // planted only
};

// uniform: items iid in [0, 2^bits), target uniform in [0, sum];
// planted:  uniform items, target = sum of a random nonempty subset;
// all_equal: a_i = 1, t = floor(n/2);
// parity_no: even items, odd target (never solvable)
GeneratedInstance generate_instance(InstanceKind kind, int n, int bits, SplitRng& rng);

}  // namespace dissect
