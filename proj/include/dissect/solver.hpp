#pragma once

#include <dissect/engine.hpp>
#include <dissect/isolate.hpp>

#include <optional>
#include <string>
#include <vector>

namespace dissect {

enum class SolveMode { decision, count_capped };

struct SolverConfig {
    Rational sigma = Rational(1, 7);
    int preprocess_rounds = 0;  // 0: default_rounds(n)
    long bailout_exponent = -1;  // c in the n^c cap multiplier; -1: levels + 1
    uint64_t seed = 0;
    int threads = 1;
    SolveMode mode = SolveMode::decision;
    uint64_t count_cap = 1024;
    // examine at most this many preprocessed instances per round (0: all n^3);
    // a resource ceiling only, soundness is unaffected
    uint64_t max_instances_per_round = 0;
};

struct SolveReport {
    bool witness_found = false;
    std::optional<SolutionVector> witness;   // over the original items
    std::vector<SolutionVector> solutions;   // count_capped: distinct verified, up to cap
    uint64_t rounds_used = 0;
    uint64_t instances_examined = 0;
    uint64_t emissions = 0;    // modular candidates seen
    uint64_t bailouts = 0;
    uint64_t counter_overshoot = 0;
    int64_t peak_table_entries = 0;
    uint64_t wall_time_ns = 0;
};

// exact check over the integers
bool verify(const Instance& inst, const SolutionVector& x);

int default_rounds(int n);  // ceil(4 ln n) + 4

// randomized preprocessing + planned dissection + integer verification;
// never reports a false witness
SolveReport solve(const Instance& inst, const SolverConfig& cfg = {});

// reference decision solvers at modulus n*t + 1; algorithm is one of
// "brute", "hs", "ss"
SolveReport solve_baseline(const Instance& inst, const std::string& algorithm);

}  // namespace dissect
