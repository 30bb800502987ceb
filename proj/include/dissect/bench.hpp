#pragma once

#include <dissect/instance.hpp>
#include <dissect/rational.hpp>

#include <string>

namespace dissect {

struct BenchRow {
    int n = 0;
    Rational sigma;
    double tau_predicted = 0.0;
    std::string algorithm;  // brute | hs | ss | dissect | dissect@pK
    uint64_t seed = 0;
    uint64_t wall_time_ns = 0;
    int64_t peak_table_entries = 0;
    uint64_t solutions_found = 0;
    uint64_t bailouts = 0;
    bool witness_found = false;
};

std::string bench_csv_header();
std::string to_csv(const BenchRow& row);

struct BenchCase {
    InstanceKind kind = InstanceKind::planted;
    int n = 16;
    int bits = 16;
    Rational sigma = Rational(1, 7);
    uint64_t seed = 0;
    std::string algorithm = "dissect";
    int threads = 1;
};

// one full enumeration on a freshly generated instance; times the streaming
// pass only. For "dissect" the root modulus exceeds both n*t and the item
// total, so every emission is an integer solution.
BenchRow run_bench_case(const BenchCase& bc);

}  // namespace dissect
