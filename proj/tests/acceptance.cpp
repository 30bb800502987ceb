// Acceptance gate: ten go/no-go checks with pinned tolerances, one line each.
// Exit code is the number of failed checks.

#include <dissect/bench.hpp>
#include <dissect/curve.hpp>
#include <dissect/engine.hpp>
#include <dissect/isolate.hpp>
#include <dissect/moduli.hpp>
#include <dissect/parallel.hpp>
#include <dissect/solver.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

using namespace dissect;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::set<std::string> drain(SolutionStream& s) {
    std::set<std::string> out;
    while (auto x = s.next()) out.insert(x->str());
    return out;
}

uint64_t median(std::vector<uint64_t> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

// ---- 1: exact curve anchors -------------------------------------------------

Outcome criterion_anchors() {
    struct Anchor {
        long p, q, tp, tq;
    };
    const Anchor anchors[] = {{1, 8, 19, 32}, {1, 7, 4, 7},    {1, 11, 7, 11},
                              {1, 16, 11, 16}, {1, 22, 16, 22}};
    for (const Anchor& a : anchors)
        if (tau(Rational(a.p, a.q)) != Rational(a.tp, a.tq))
            return {false, "tau(" + Rational(a.p, a.q).str() + ") off"};
    for (int i = 0; i <= 60; ++i) {
        Rational sigma = Rational(1, 4) + Rational(i, 80);  // [1/4, 1]
        if (sigma > Rational(1)) break;
        if (tau(sigma) != Rational(1, 2)) return {false, "tau not flat at " + sigma.str()};
    }
    return {true, "five exact anchors, flat 1/2 beyond 1/4"};
}

// ---- 2: recursive functional equals the closed curve ------------------------

Outcome criterion_recursion_identity() {
    for (int i = 1; i <= 200; ++i) {
        Rational sigma(i, 200);
        if (time_exponent_recursive(sigma) != tau(sigma))
            return {false, "mismatch at sigma=" + sigma.str()};
    }
    return {true, "exact on all 200 grid points"};
}

// ---- 3: monotonicity, fixpoints, recurrence ----------------------------------

Outcome criterion_curve_structure() {
    Rational prev(0);
    for (int i = 1; i <= 200; ++i) {
        Rational sigma(i, 200);
        Rational ratio = sigma / tau(sigma);
        if (!(ratio > prev)) return {false, "sigma/tau not strictly increasing at " + sigma.str()};
        prev = ratio;
    }
    for (long ell = 1; ell <= 8; ++ell) {
        Rational sigma(1, rho(ell + 1));
        if (sigma / tau(sigma) != Rational(1, rho(ell)))
            return {false, "fixpoint ell=" + std::to_string(ell)};
    }
    // the recurrence tau(sigma) * (2 - tau(sigma/tau(sigma))) = 1 - sigma holds
    // on (0, 1/4]; beyond 1/4 it provably breaks (checked below at 3/10), so
    // the exact window is pinned here rather than the looser documented one
    for (int i = 1; i <= 50; ++i) {
        Rational sigma(i, 200);
        Rational t = tau(sigma);
        if (t * (Rational(2) - tau(sigma / t)) != Rational(1) - sigma)
            return {false, "recurrence fails inside (0,1/4] at " + sigma.str()};
    }
    Rational bad(3, 10);
    Rational t = tau(bad);
    if (t * (Rational(2) - tau(bad / t)) == Rational(1) - bad)
        return {false, "expected counterexample at 3/10 vanished"};
    return {true, "increasing ratio, 8 fixpoints, recurrence exact on (0,1/4]"};
}

// ---- 4: oracle equivalence ---------------------------------------------------

Outcome criterion_oracles() {
    int done = 0;
    for (uint64_t seed = 0; seed < 510; ++seed) {
        SplitRng rng(seed * 257 + 11);
        int n = 4 + int(seed % 17);  // 4..20
        InstanceKind kind = InstanceKind(seed % 4);
        GeneratedInstance gen = generate_instance(kind, n, 9, rng);
        Int m;
        if (seed % 3 == 0) {
            m = 7 + seed % 97;  // small wrapping modulus
        } else {
            m = Int(n) * gen.inst.target + 1;
            for (const Int& a : gen.inst.items)
                if (m <= a) m = a + 1;
        }
        ModularInstance mi{gen.inst.items, gen.inst.target % m, m};
        auto ref = drain(*brute_force_stream(mi));
        if (drain(*horowitz_sahni_stream(mi)) != ref)
            return {false, "hs != brute at seed " + std::to_string(seed)};
        if (drain(*schroeppel_shamir_stream(mi)) != ref)
            return {false, "ss != brute at seed " + std::to_string(seed)};
        done++;
    }

    int engine_runs = 0;
    const Rational sigmas[] = {Rational(1, 5), Rational(1, 7), Rational(1, 8)};
    for (uint64_t seed = 0; seed < 30; ++seed) {
        for (const Rational& sigma : sigmas) {
            SplitRng rng(seed * 41 + 2);
            int n = 12 + int(seed % 8);  // 12..19
            GeneratedInstance gen = generate_instance(InstanceKind(seed % 4), n, 8, rng);
            DissectionTree tree = plan_tree(sigma, n);
            Int total = 0;
            for (const Int& a : gen.inst.items) total += a;
            long b = (seed % 2 == 0) ? std::max<long>(n, long(bit_length(total))) : 10;
            ModulusAssignment assign = assign_moduli(tree, b, rng.split(5));
            ModularInstance mi{gen.inst.items, gen.inst.target % assign.m_root, assign.m_root};
            BailoutPolicy policy;
            policy.c = 60;
            RunStats stats;
            auto stream = generate_solutions(mi, tree, assign, policy, stats);
            if (drain(*stream) != drain(*brute_force_stream(mi)))
                return {false, "dissection != brute at seed " + std::to_string(seed) +
                                   " sigma " + sigma.str()};
            engine_runs++;
        }
    }
    std::ostringstream os;
    os << done << " oracle instances, " << engine_runs << " uncapped dissection runs, all equal";
    return {true, os.str()};
}

// ---- 5: end-to-end decision quality -------------------------------------------

Outcome criterion_end_to_end() {
    const int ns[] = {20, 24, 28};
    const Rational sigmas[] = {Rational(1, 7), Rational(1, 8)};
    int yes_total = 0, yes_hits = 0;
    for (int n : ns)
        for (const Rational& sigma : sigmas)
            for (uint64_t seed = 0; seed < 20; ++seed) {
                SplitRng rng(seed * 1009 + uint64_t(n) * 13 + 1);
                GeneratedInstance gen = generate_instance(InstanceKind::planted, n, 12, rng);
                SolverConfig cfg;
                cfg.sigma = sigma;
                cfg.seed = seed;
                SolveReport rep = solve(gen.inst, cfg);
                yes_total++;
                if (rep.witness_found && verify(gen.inst, *rep.witness)) yes_hits++;
            }

    int no_total = 0, no_hits = 0;
    for (int n : ns)
        for (const Rational& sigma : sigmas)
            for (uint64_t seed = 0; seed < 20; ++seed) {
                SplitRng rng(seed * 2003 + uint64_t(n) * 7 + 5);
                GeneratedInstance gen = generate_instance(InstanceKind::parity_no, n, 12, rng);
                SolverConfig cfg;
                cfg.sigma = sigma;
                cfg.seed = seed;
                cfg.preprocess_rounds = 1;  // soundness is unconditional
                cfg.max_instances_per_round = uint64_t(2 * n);
                SolveReport rep = solve(gen.inst, cfg);
                no_total++;
                if (rep.witness_found) no_hits++;
            }

    std::ostringstream os;
    os << "planted " << yes_hits << "/" << yes_total << ", parity-no " << no_hits << "/"
       << no_total;
    bool pass = yes_hits * 10 >= yes_total * 9 && no_hits == 0;
    return {pass, os.str()};
}

// ---- 6 and 7: scaling of peak space and wall time ------------------------------

struct ScalingData {
    std::map<int, uint64_t> peak_median;
    std::map<int, uint64_t> time_median;
};

ScalingData measure_scaling() {
    auto run = [](int n, uint64_t seed) {
        BenchCase bc;
        bc.kind = InstanceKind::planted;
        bc.n = n;
        bc.bits = 16;
        bc.sigma = Rational(1, 7);
        bc.seed = seed;
        return run_bench_case(bc);
    };
    run(20, 0);  // warmup: allocator and code paths
    // interleave sizes and keep the fastest of three passes per case, so a
    // drifting clock rate biases every size the same way
    std::map<int, std::vector<uint64_t>> peaks, times;
    for (int rep = 0; rep < 3; ++rep) {
        for (int n : {16, 20, 24, 28}) {
            for (uint64_t seed = 0; seed < 5; ++seed) {
                BenchRow row = run(n, seed);
                uint64_t t = std::max<uint64_t>(1, row.wall_time_ns);
                uint64_t p = uint64_t(std::max<int64_t>(1, row.peak_table_entries));
                if (rep == 0) {
                    times[n].push_back(t);
                    peaks[n].push_back(p);
                } else {
                    times[n][seed] = std::min(times[n][seed], t);
                    peaks[n][seed] = p;  // deterministic, identical each pass
                }
            }
        }
    }
    ScalingData d;
    for (int n : {16, 20, 24, 28}) {
        d.peak_median[n] = median(peaks[n]);
        d.time_median[n] = median(times[n]);
    }
    return d;
}

Outcome criterion_space_scaling(const ScalingData& d) {
    std::ostringstream os;
    bool pass = true;
    const double bound = 4.0 * (1.0 / 7.0) + 1.0;
    for (int n : {16, 20, 24}) {
        double growth = std::log2(double(d.peak_median.at(n + 4))) -
                        std::log2(double(d.peak_median.at(n)));
        os << "n" << n << "->" << n + 4 << ": " << growth << " ";
        if (growth > bound) pass = false;
    }
    os << "(bound " << bound << ")";
    return {pass, os.str()};
}

Outcome criterion_time_scaling(const ScalingData& d) {
    std::ostringstream os;
    bool pass = true;
    const double bound = 4.0 * (4.0 / 7.0) + 1.0;  // log2 of the allowed ratio
    for (int n : {16, 20, 24}) {
        double growth =
            std::log2(double(d.time_median.at(n + 4))) - std::log2(double(d.time_median.at(n)));
        os << "n" << n << "->" << n + 4 << ": " << growth << " ";
        if (growth > bound) pass = false;
    }
    os << "(bound " << bound << ");";

    // at n=28 the dissection must succeed with strictly less peak space than
    // the half-list join
    BenchCase dis;
    dis.kind = InstanceKind::planted;
    dis.n = 28;
    dis.bits = 16;
    dis.sigma = Rational(1, 7);
    dis.seed = 1;
    BenchRow drow = run_bench_case(dis);
    BenchCase hs = dis;
    hs.algorithm = "hs";
    BenchRow hrow = run_bench_case(hs);
    os << " peak dissect " << drow.peak_table_entries << " vs hs " << hrow.peak_table_entries;
    if (!(drow.witness_found && hrow.witness_found)) {
        pass = false;
        os << " (a run missed its witness)";
    }
    if (drow.peak_table_entries >= hrow.peak_table_entries) pass = false;
    return {pass, os.str()};
}

// ---- 8: modulus lattice at scale ----------------------------------------------

Outcome criterion_lattice() {
    DissectionTree tree = plan_tree(Rational(1, 20), 360);
    int all_ok = 0;
    int z_hits = 0;
    // fixed adversarial value: dense in small odd prime factors
    Int z = 1;
    for (long p : {3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73})
        z *= p;
    z *= z;
    std::optional<ModulusAssignment> smallest;
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        ModulusAssignment a = assign_moduli(tree, 360, SplitRng(seed));
        if (check_lattice(tree, a).all()) all_ok++;
        if (z % a.mprime_root == 0) z_hits++;
        if (!smallest || a.mprime_root < smallest->mprime_root) smallest = std::move(a);
    }
    Rational bound =
        Rational(10) * divisor_hit_probability_estimate(*smallest, long(bit_length(z)));
    double allowed = bound.to_double() * 1000.0;
    std::ostringstream os;
    os << all_ok << "/1000 lattices ok, adversarial divisor hits " << z_hits << " (allowed "
       << allowed << ")";
    return {all_ok == 1000 && double(z_hits) <= allowed, os.str()};
}

// ---- 9: isolation on the all-equal instance ------------------------------------

Outcome criterion_isolation() {
    const int n = 12;
    Instance inst;
    inst.items.assign(n, Int(1));
    inst.target = 6;

    // all 924 six-element picks, as bit masks
    std::vector<uint32_t> picks;
    for (uint32_t mask = 0; mask < (1u << n); ++mask)
        if (__builtin_popcount(mask) == 6) picks.push_back(mask);

    int good_rounds = 0;
    const int rounds = 200;
    for (uint64_t round = 0; round < rounds; ++round) {
        SplitRng rng(round * 31 + 7);
        PreprocessResult pre = preprocess(inst, rng);
        if (pre.norm.kind != NormalizeResult::Kind::regular) return {false, "unexpected trivial"};

        bool any_small = false;
        // stage-1 targets with k1 >= 1 exceed the maximum possible sum (12),
        // so only k1 = 0 outputs can hold solutions; their solutions are the
        // six-element picks filtered by the stage-2 weight equation
        for (const PreparedInstance& pi : pre.outputs) {
            if (pi.params.k1 != 0) continue;
            if (pi.params.k2 != 0) continue;  // counts gathered per (s) below
            uint64_t w[12];
            for (int i = 0; i < n; ++i) w[i] = to_u64(pi.params.r[size_t(i)]);
            std::map<uint64_t, int> by_level;  // weight sum -> count
            for (uint32_t mask : picks) {
                uint64_t wsum = 0;
                for (int i = 0; i < n; ++i)
                    if ((mask >> i) & 1) wsum += w[i];
                by_level[wsum]++;
            }
            uint64_t u = to_u64(pi.params.u), p2 = to_u64(pi.params.p2);
            for (int k2 = 0; k2 < n; ++k2) {
                auto it = by_level.find(u + p2 * uint64_t(k2));
                int count = it == by_level.end() ? 0 : it->second;
                if (count >= 1 && count <= 10) any_small = true;
            }
        }
        if (any_small) good_rounds++;

        // spot cross-check: exhaustively solve one lifted output and compare
        if (round % 50 == 0) {
            const PreparedInstance& pi = pre.outputs[size_t(round % pre.outputs.size())];
            int direct = 0;
            for (uint32_t mask = 0; mask < (1u << n); ++mask) {
                Int sum = 0;
                for (int i = 0; i < n; ++i)
                    if ((mask >> i) & 1) sum += pi.inst.items[size_t(i)];
                if (sum == pi.inst.target) direct++;
            }
            int via_identity = 0;
            if (pi.params.k1 == 0) {
                for (uint32_t mask : picks) {
                    Int wsum = 0;
                    for (int i = 0; i < n; ++i)
                        if ((mask >> i) & 1) wsum += pi.params.r[size_t(i)];
                    if (wsum == pi.params.u + pi.params.p2 * pi.params.k2) via_identity++;
                }
            }
            if (direct != via_identity)
                return {false, "identity cross-check failed at round " + std::to_string(round)};
        }
    }
    std::ostringstream os;
    os << good_rounds << "/" << rounds << " rounds isolated some output to [1,10] (need >= "
       << rounds / 8 << ")";
    return {good_rounds * 8 >= rounds, os.str()};
}

// ---- 10: parallel equality and speedup ------------------------------------------

Outcome criterion_parallel() {
    BailoutPolicy policy;
    policy.c = 60;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        SplitRng rng(seed * 67 + 9);
        GeneratedInstance gen = generate_instance(InstanceKind::uniform, 21, 7, rng);
        DissectionTree tree = plan_tree(Rational(1, 7), 21);
        Int total = 0;
        for (const Int& a : gen.inst.items) total += a;
        ModulusAssignment assign =
            assign_moduli(tree, std::max<long>(21, long(bit_length(total))), rng.split(3));
        ModularInstance mi{gen.inst.items, gen.inst.target % assign.m_root, assign.m_root};
        RunStats stats;
        auto serial = generate_solutions(mi, tree, assign, policy, stats);
        auto expect = drain(*serial);
        for (int p : {2, 4, 8}) {
            ProcessorAllocation alloc = allocate(tree, assign, p);
            RunStats pstats;
            auto stream = parallel_generate(mi, tree, assign, policy, alloc, pstats, 2);
            if (drain(*stream) != expect)
                return {false, "set mismatch at seed " + std::to_string(seed) + " P=" +
                                   std::to_string(p)};
        }
    }

    // wall-time speedup on a planted n=28 run; needs physical cores to pass
    SplitRng rng(5);
    GeneratedInstance gen = generate_instance(InstanceKind::planted, 28, 16, rng);
    DissectionTree tree = plan_tree(Rational(1, 7), 28);
    Int total = 0;
    for (const Int& a : gen.inst.items) total += a;
    Int lower = Int(28) * gen.inst.target;
    if (total > lower) lower = total;
    ModulusAssignment assign = assign_moduli(tree, long(bit_length(lower)), rng.split(3));
    ModularInstance mi{gen.inst.items, gen.inst.target % assign.m_root, assign.m_root};
    BailoutPolicy def;

    auto run_once = [&](int p) {
        auto begin = std::chrono::steady_clock::now();
        RunStats stats;
        std::unique_ptr<SolutionStream> stream;
        ProcessorAllocation alloc;
        if (p == 1) {
            stream = generate_solutions(mi, tree, assign, def, stats);
        } else {
            alloc = allocate(tree, assign, p);
            stream = parallel_generate(mi, tree, assign, def, alloc, stats, p);
        }
        while (stream->next()) {
        }
        auto end = std::chrono::steady_clock::now();
        return uint64_t(std::chrono::duration_cast<std::chrono::nanoseconds>(end - begin).count());
    };

    std::ostringstream os;
    os << "set equality ok at P=2,4,8 over 20 seeds; speedup";
    bool pass = true;
    for (int p : {2, 4}) {
        std::vector<uint64_t> base, par;
        for (int rep = 0; rep < 3; ++rep) {
            base.push_back(run_once(1));
            par.push_back(run_once(p));
        }
        double speedup = double(median(base)) / double(median(par));
        os << " P" << p << "=" << speedup << "x(need " << 0.6 * p << ")";
        if (speedup < 0.6 * p) pass = false;
    }
    return {pass, os.str()};
}

}  // namespace

int main() {
    ScalingData scaling = measure_scaling();
    struct Row {
        const char* name;
        Outcome out;
    };
    std::vector<Row> rows;
    rows.push_back({"curve anchors", criterion_anchors()});
    rows.push_back({"recursion identity", criterion_recursion_identity()});
    rows.push_back({"curve structure", criterion_curve_structure()});
    rows.push_back({"oracle equivalence", criterion_oracles()});
    rows.push_back({"end-to-end decisions", criterion_end_to_end()});
    rows.push_back({"space scaling", criterion_space_scaling(scaling)});
    rows.push_back({"time scaling", criterion_time_scaling(scaling)});
    rows.push_back({"modulus lattice", criterion_lattice()});
    rows.push_back({"isolation", criterion_isolation()});
    rows.push_back({"parallel", criterion_parallel()});

    int failures = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        const Row& row = rows[i];
        std::cout << "criterion " << (i + 1) << " (" << row.name << "): "
                  << (row.out.pass ? "PASS" : "FAIL") << " [" << row.out.detail << "]\n";
        if (!row.out.pass) failures++;
    }
    std::cout << (rows.size() - size_t(failures)) << "/" << rows.size() << " criteria passed\n";
    return failures;
}
