#pragma once

#include <dissect/instance.hpp>
#include <dissect/rng.hpp>

#include <optional>
#include <vector>

namespace dissect {

struct IsolationParams {
    Int p1 = 0;          // stage-1 prime, exactly 3n+1 bits
    int k1 = -1;         // stage-1 multiple guess in [0, n)
    int s = -1;          // stage-2 size guess in [0, n)
    Int p2 = 0;          // smallest prime >= 2^s
    std::vector<Int> r;  // stage-2 weights, each in [0, p2)
    Int u = 0;           // stage-2 offset in [0, p2)
    int k2 = -1;         // stage-2 multiple guess in [0, n)
};

struct NormalizeResult {
    enum class Kind { regular, trivial_yes, trivial_no };
    Kind kind = Kind::regular;
    Instance inst;            // canonical 0-item instance when trivial
    std::vector<int> kept;    // original index of each surviving item (regular)
    std::optional<SolutionVector> witness;  // over the original items (trivial_yes)
    int original_n = 0;
};

// drops items above the target; when log2(n*t) > 2^n the instance is cheaper
// to solve outright, so it is decided exhaustively and collapsed to a
// canonical trivial instance
NormalizeResult normalize(const Instance& inst);

struct Stage1Result {
    Int p1 = 0;
    std::vector<Instance> outputs;  // k1 = 0..n-1: items mod p1, target (t mod p1) + k1*p1
};

Stage1Result stage1(const Instance& inst, SplitRng& rng);

struct PreparedInstance {
    Instance inst;
    IsolationParams params;
};

// for each size guess s: weights r and offset u drawn below the pinned prime
// p2(s), then one lift per multiple guess k2; n^2 outputs, all integer
// arithmetic (items grow by (n*t+1)*r_i)
std::vector<PreparedInstance> stage2(const Instance& inst, SplitRng& rng);

struct PreprocessResult {
    NormalizeResult norm;
    Int p1 = 0;
    std::vector<PreparedInstance> outputs;  // (k1, s, k2) lexicographic, <= n^3
};

// normalize, then stage1, then stage2 on every stage-1 output
PreprocessResult preprocess(const Instance& inst, SplitRng& rng);

// smallest prime >= 2^s
Int pinned_stage2_prime(int s);

// zero-extends bits through an index map: out[kept[i]] = x[i]
SolutionVector inflate_through(const SolutionVector& x, const std::vector<int>& kept, int out_n);

}  // namespace dissect
