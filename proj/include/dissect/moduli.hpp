#pragma once

#include <dissect/curve.hpp>
#include <dissect/rng.hpp>

#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace dissect {

// true iff x is prime; deterministic below 2^64, Baillie-PSW plus 40
// Miller-Rabin rounds above (error under 2^-80)
bool is_prime(const Int& x);

struct SamplingExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// uniform prime from [lo, hi] by rejection; throws SamplingExhausted after
// 64 * bit_length(hi) failed draws
Int random_prime(const Int& lo, const Int& hi, SplitRng& rng);

struct PrimeSample {
    Int value;
    Int lo, hi;    // sampling interval
    int level;     // 1..k, or 0 for the root pad prime
};

struct ModulusAssignment {
    int n_top = 0;
    long b = 0;                       // M_root >= 2^b
    std::vector<PrimeSample> primes;  // p_1..p_k (level order)
    PrimeSample pad;                  // p_0
    std::vector<Int> level_products;  // prefix products of p_1..p_k
    Int mprime_root;                  // full product (1 for a single-leaf tree)
    Int m_root;                       // pad.value * mprime_root

    // inner modulus per internal node (the root entry is always present)
    std::unordered_map<const DissectNode*, Int> mprime;
    // outer modulus per node: m_root at the root, M'(parent) below
    std::unordered_map<const DissectNode*, Int> m;

    const Int& m_of(const DissectNode* v) const { return m.at(v); }
    const Int& mprime_of(const DissectNode* v) const { return mprime.at(v); }
};

// Draws one prime per distinct gamma level from [2^e_i, 2^(e_i+1)] with
// e_i = max(2, ceil(delta_i * n)), then a pad prime sized so that
// m_root >= 2^b. Deterministic in (tree, b, rng seed).
ModulusAssignment assign_moduli(const DissectionTree& tree, long b, const SplitRng& rng);

// analytical upper bound n^k / M'_root (capped at 1) on the probability that
// M'_root divides a fixed nonzero |Z| < 2^(z_bits); the bound does not depend
// on Z beyond that size cap
Rational divisor_hit_probability_estimate(const ModulusAssignment& a, long z_bits);

struct LatticeReport {
    bool window_ok = false;   // 2^floor(gamma*n) <= M'_v <= 2^k * 2^ceil(gamma*n)
    bool chain_ok = false;    // gamma_u <= gamma_v  implies  M'_u | M'_v
    bool parent_ok = false;   // M_v = M'(parent) below the root
    bool root_ok = false;     // M_root = p0 * M'_root >= 2^b
    bool all() const { return window_ok && chain_ok && parent_ok && root_ok; }
};

// The window check can fail legitimately at small n where the e_i >= 2 floor
// or ceiling slack dominates; the other three hold by construction.
LatticeReport check_lattice(const DissectionTree& tree, const ModulusAssignment& a);

}  // namespace dissect
