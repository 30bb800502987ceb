#include <dissect/bench.hpp>

#include <dissect/curve.hpp>
#include <dissect/engine.hpp>
#include <dissect/parallel.hpp>
#include <dissect/rng.hpp>
#include <dissect/solver.hpp>

#include <chrono>
#include <sstream>
#include <stdexcept>

namespace dissect {

std::string bench_csv_header() {
    return "n,sigma_num,sigma_den,tau_predicted,algorithm,seed,wall_time_ns,"
           "peak_table_entries,solutions_found,bailouts,witness_found";
}

std::string to_csv(const BenchRow& row) {
    std::ostringstream os;
    os << row.n << ',' << row.sigma.num() << ',' << row.sigma.den() << ',' << row.tau_predicted
       << ',' << row.algorithm << ',' << row.seed << ',' << row.wall_time_ns << ','
       << row.peak_table_entries << ',' << row.solutions_found << ',' << row.bailouts << ','
       << (row.witness_found ? 1 : 0);
    return os.str();
}

namespace {

Int baseline_modulus(const Instance& inst) {
    Int total = 0;
    for (const Int& a : inst.items) total += a;
    Int m = Int(inst.n()) * inst.target + 1;
    if (m <= total) m = total + 1;
    return m;
}

std::unique_ptr<SolutionStream> baseline_stream(const std::string& algorithm,
                                                const ModularInstance& mi, StreamLimits lim) {
    if (algorithm == "brute") return brute_force_stream(mi, lim);
    if (algorithm == "hs") return horowitz_sahni_stream(mi, lim);
    if (algorithm == "ss") return schroeppel_shamir_stream(mi, lim);
    throw std::invalid_argument("unknown algorithm: " + algorithm);
}

}  // namespace

BenchRow run_bench_case(const BenchCase& bc) {
    SplitRng rng(bc.seed);
    GeneratedInstance gen = generate_instance(bc.kind, bc.n, bc.bits, rng);
    const Instance& inst = gen.inst;

    BenchRow row;
    row.n = bc.n;
    row.sigma = bc.sigma;
    row.tau_predicted = tau(bc.sigma).to_double();
    row.algorithm = bc.algorithm;
    if (bc.algorithm == "dissect" && bc.threads > 1)
        row.algorithm = "dissect@p" + std::to_string(bc.threads);
    row.seed = bc.seed;

    RunStats stats;
    std::vector<SolutionVector> hits;
    auto begin = std::chrono::steady_clock::now();

    if (bc.algorithm == "dissect") {
        DissectionTree tree = plan_tree(bc.sigma, bc.n);
        Int total = 0;
        for (const Int& a : inst.items) total += a;
        Int lower = Int(inst.n()) * inst.target;
        if (total > lower) lower = total;
        int b = std::max<int>(bc.n, int(bit_length(lower)));
        ModulusAssignment assign = assign_moduli(tree, b, rng.split(1));
        ModularInstance mi{inst.items, inst.target, assign.m_root};

        BailoutPolicy policy;
        std::unique_ptr<SolutionStream> stream;
        ProcessorAllocation alloc;
        if (bc.threads > 1) {
            alloc = allocate(tree, assign, bc.threads);
            stream = parallel_generate(mi, tree, assign, policy, alloc, stats, bc.threads);
        } else {
            stream = generate_solutions(mi, tree, assign, policy, stats);
        }
        while (auto x = stream->next()) {
            row.solutions_found++;
            if (!row.witness_found && verify(inst, *x)) {
                row.witness_found = true;
                hits.push_back(*x);
            }
        }
    } else {
        Int m = baseline_modulus(inst);
        ModularInstance mi{inst.items, inst.target % m, m};
        auto stream = baseline_stream(bc.algorithm, mi, StreamLimits{std::nullopt, &stats.gauge});
        while (auto x = stream->next()) {
            row.solutions_found++;
            if (!row.witness_found && verify(inst, *x)) {
                row.witness_found = true;
                hits.push_back(*x);
            }
        }
    }

    auto end = std::chrono::steady_clock::now();
    row.wall_time_ns = uint64_t(std::chrono::duration_cast<std::chrono::nanoseconds>(end - begin).count());
    row.peak_table_entries = stats.gauge.peak();
    row.bailouts = stats.bailouts.load();
    return row;
}

}  // namespace dissect
