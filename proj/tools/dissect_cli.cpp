#include <dissect/bench.hpp>
#include <dissect/curve.hpp>
#include <dissect/engine.hpp>
#include <dissect/instance.hpp>
#include <dissect/moduli.hpp>
#include <dissect/parallel.hpp>
#include <dissect/rational.hpp>
#include <dissect/rng.hpp>
#include <dissect/solver.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

using namespace dissect;

namespace {

uint64_t fallback_seed() {
    const char* env = std::getenv("DISSECT_SEED");
    if (!env || !*env) return 0;
    return std::stoull(env);
}

Rational parse_sigma(const std::string& s) {
    Rational sigma = Rational::parse(s);
    if (!(sigma > Rational(0)) || sigma > Rational(1))
        throw std::invalid_argument("sigma must lie in (0, 1]: " + s);
    return sigma;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void append_bench_row(const std::string& path, const BenchRow& row) {
    bool fresh = !std::ifstream(path).good();
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (fresh) out << bench_csv_header() << '\n';
    out << to_csv(row) << '\n';
}

// --- gen --------------------------------------------------------------------

struct GenArgs {
    int n = 16;
    int bits = 16;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string kind = "uniform";
};

int run_gen(const GenArgs& a) {
    auto kind = instance_kind_from(a.kind);
    if (!kind) throw std::invalid_argument("unknown kind: " + a.kind);
    SplitRng rng(a.seed_set ? a.seed : fallback_seed());
    GeneratedInstance gen = generate_instance(*kind, a.n, a.bits, rng);
    std::cout << render_instance(gen.inst, gen.witness);
    return 0;
}

// --- plan -------------------------------------------------------------------

struct PlanArgs {
    std::string sigma = "1/7";
    int n = 32;
    uint64_t seed = 0;
    bool seed_set = false;
};

int run_plan(const PlanArgs& a) {
    Rational sigma = parse_sigma(a.sigma);
    DissectionTree tree = plan_tree(sigma, a.n);

    std::cout << "path sigma tau alpha beta gamma n\n";
    for (const DissectNode* v : tree.nodes) {
        std::cout << (v->path.empty() ? "-" : v->path) << ' ' << v->sigma.str() << ' '
                  << v->tau.str() << ' ';
        if (v->leaf())
            std::cout << "- - ";
        else
            std::cout << v->alpha.str() << ' ' << v->beta.str() << ' ';
        std::cout << (v->path.empty() ? std::string("-") : v->gamma.str()) << ' ' << v->n << '\n';
    }

    long b = a.n;  // bitlength floor used for the displayed assignment
    ModulusAssignment assign = assign_moduli(tree, b, SplitRng(a.seed_set ? a.seed : fallback_seed()));
    std::cout << "\nmoduli (b=" << b << "):\n";
    for (size_t i = 0; i < assign.primes.size(); ++i) {
        std::cout << "level " << (i + 1) << ": delta=" << tree.deltas[i].str() << " prime_bits="
                  << bit_length(assign.primes[i].value) << '\n';
    }
    std::cout << "pad_bits=" << bit_length(assign.pad.value)
              << " mprime_root_bits=" << bit_length(assign.mprime_root)
              << " m_root_bits=" << bit_length(assign.m_root) << '\n';
    return 0;
}

// --- curve ------------------------------------------------------------------

int run_curve(int grid) {
    std::cout << "sigma,tau,tau_ss\n";
    for (int i = 1; i <= grid; ++i) {
        Rational sigma(i, 2L * grid);
        std::cout << sigma.str() << ',' << tau(sigma).str() << ','
                  << tau_schroeppel_shamir(sigma).str() << '\n';
    }
    return 0;
}

// --- solve ------------------------------------------------------------------

struct SolveArgs {
    std::string file;
    std::string sigma = "1/7";
    std::string algorithm = "dissect";
    uint64_t seed = 0;
    bool seed_set = false;
    int rounds = 0;
    int threads = 1;
    std::string stats_out;
};

int run_solve(const SolveArgs& a) {
    Rational sigma = parse_sigma(a.sigma);
    ParsedInstance parsed = parse_instance(read_file(a.file));
    const Instance& inst = parsed.inst;
    uint64_t seed = a.seed_set ? a.seed : fallback_seed();

    SolveReport report;
    if (a.algorithm == "dissect") {
        SolverConfig cfg;
        cfg.sigma = sigma;
        cfg.preprocess_rounds = a.rounds;
        cfg.seed = seed;
        cfg.threads = a.threads;
        report = solve(inst, cfg);
    } else {
        report = solve_baseline(inst, a.algorithm);
    }

    if (!a.stats_out.empty()) {
        BenchRow row;
        row.n = inst.n();
        row.sigma = sigma;
        row.tau_predicted = tau(sigma).to_double();
        row.algorithm = a.algorithm;
        if (a.algorithm == "dissect" && a.threads > 1)
            row.algorithm += "@p" + std::to_string(a.threads);
        row.seed = seed;
        row.wall_time_ns = report.wall_time_ns;
        row.peak_table_entries = report.peak_table_entries;
        row.solutions_found = report.emissions;
        row.bailouts = report.bailouts;
        row.witness_found = report.witness_found;
        append_bench_row(a.stats_out, row);
    }

    if (report.witness_found) {
        std::cout << report.witness->str() << '\n';
        return 0;
    }
    std::cout << "NO-WITNESS\n";
    return 1;
}

// --- bench ------------------------------------------------------------------

struct BenchArgs {
    std::string sigma_list = "1/7";
    std::string n_list = "16,20,24";
    int seeds = 3;
    std::string threads_grid = "1";
    std::string out;
};

int run_bench(const BenchArgs& a) {
    std::vector<Rational> sigmas;
    for (const auto& s : split_list(a.sigma_list)) sigmas.push_back(parse_sigma(s));
    std::vector<int> ns;
    for (const auto& s : split_list(a.n_list)) ns.push_back(std::stoi(s));
    std::vector<int> threads;
    for (const auto& s : split_list(a.threads_grid)) threads.push_back(std::stoi(s));
    if (sigmas.empty() || ns.empty() || threads.empty() || a.seeds < 1)
        throw std::invalid_argument("bench grids must be non-empty");

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!a.out.empty()) {
        file.open(a.out);
        if (!file) throw std::runtime_error("cannot write " + a.out);
        out = &file;
    }

    *out << bench_csv_header() << '\n';
    for (InstanceKind kind : {InstanceKind::planted, InstanceKind::parity_no})
        for (const Rational& sigma : sigmas)
            for (int n : ns)
                for (int seed = 0; seed < a.seeds; ++seed)
                    for (int p : threads) {
                        BenchCase bc;
                        bc.kind = kind;
                        bc.n = n;
                        bc.sigma = sigma;
                        bc.seed = uint64_t(seed);
                        bc.threads = p;
                        try {
                            *out << to_csv(run_bench_case(bc)) << '\n';
                        } catch (const AllocationInfeasible& e) {
                            std::cerr << "skip n=" << n << " sigma=" << sigma.str() << " p=" << p
                                      << ": " << e.what() << '\n';
                        }
                    }
    return 0;
}

// --- selftest ---------------------------------------------------------------

// closed form of the time exponent, written independently of curve.cpp; the
// fault hook perturbs one coefficient so the harness can prove the suite
// actually compares something
Rational tau_direct(const Rational& sigma, bool fault) {
    if (!(sigma < Rational(1, 4))) return Rational(1, 2);
    long ell = level(sigma);
    long coeff = rho(ell) - (fault ? 1 : 2);
    return Rational(1) - Rational(1, ell + 1) - Rational(coeff, ell + 1) * sigma;
}

bool suite_curve_identity(bool fault, std::string& detail) {
    struct Anchor {
        long p, q, tp, tq;
    };
    const Anchor anchors[] = {{1, 8, 19, 32}, {1, 7, 4, 7},   {1, 11, 7, 11},
                              {1, 16, 11, 16}, {1, 22, 16, 22}, {1, 4, 1, 2},
                              {1, 3, 1, 2},    {1, 2, 1, 2},   {1, 1, 1, 2}};
    for (const Anchor& an : anchors) {
        if (tau(Rational(an.p, an.q)) != Rational(an.tp, an.tq)) {
            detail = "anchor tau(" + Rational(an.p, an.q).str() + ")";
            return false;
        }
    }
    Rational prev_ratio(0);
    for (int i = 1; i <= 64; ++i) {
        Rational sigma(i, 64);
        Rational t = tau(sigma);
        if (time_exponent_recursive(sigma) != t) {
            detail = "recursive exponent at " + sigma.str();
            return false;
        }
        if (tau_direct(sigma, fault) != t) {
            detail = "closed form at " + sigma.str();
            return false;
        }
        Rational ratio = sigma / t;
        if (!(ratio > prev_ratio)) {
            detail = "sigma/tau not increasing at " + sigma.str();
            return false;
        }
        prev_ratio = ratio;
    }
    for (long ell = 1; ell <= 8; ++ell) {
        Rational sigma(1, rho(ell + 1));
        if (sigma / tau(sigma) != Rational(1, rho(ell))) {
            detail = "fixpoint ell=" + std::to_string(ell);
            return false;
        }
    }
    return true;
}

std::set<std::string> drain(SolutionStream& s) {
    std::set<std::string> out;
    while (auto x = s.next()) out.insert(x->str());
    return out;
}

bool suite_oracle_equivalence(std::string& detail) {
    const InstanceKind kinds[] = {InstanceKind::uniform, InstanceKind::planted,
                                  InstanceKind::all_equal, InstanceKind::parity_no};
    for (uint64_t seed = 0; seed < 32; ++seed) {
        SplitRng rng(seed * 1021 + 7);
        int n = 6 + int(seed % 8);
        GeneratedInstance gen = generate_instance(kinds[seed % 4], n, 10, rng);
        Int m = Int(n) * gen.inst.target + 1;
        for (const Int& a : gen.inst.items)
            if (m <= a) m = a + 1;
        ModularInstance mi{gen.inst.items, gen.inst.target % m, m};
        auto ref = drain(*brute_force_stream(mi));
        if (drain(*horowitz_sahni_stream(mi)) != ref) {
            detail = "hs vs brute, seed " + std::to_string(seed);
            return false;
        }
        if (drain(*schroeppel_shamir_stream(mi)) != ref) {
            detail = "ss vs brute, seed " + std::to_string(seed);
            return false;
        }
    }
    for (uint64_t seed = 0; seed < 6; ++seed) {
        SplitRng rng(seed);
        int n = 14;
        GeneratedInstance gen = generate_instance(InstanceKind::uniform, n, 8, rng);
        DissectionTree tree = plan_tree(Rational(1, 7), n);
        Int total = 0;
        for (const Int& a : gen.inst.items) total += a;
        Int lower = Int(n) * gen.inst.target;
        if (total > lower) lower = total;
        ModulusAssignment assign = assign_moduli(tree, std::max<long>(n, long(bit_length(lower))),
                                                 rng.split(1));
        ModularInstance mi{gen.inst.items, gen.inst.target % assign.m_root, assign.m_root};
        BailoutPolicy policy;
        policy.c = 60;
        RunStats stats;
        auto stream = generate_solutions(mi, tree, assign, policy, stats);
        if (drain(*stream) != drain(*brute_force_stream(mi))) {
            detail = "dissection vs brute, seed " + std::to_string(seed);
            return false;
        }
    }
    return true;
}

bool suite_modulus_lattice(std::string& detail) {
    DissectionTree tree = plan_tree(Rational(1, 8), 32);
    for (uint64_t seed = 0; seed < 50; ++seed) {
        ModulusAssignment a = assign_moduli(tree, 40, SplitRng(seed));
        if (!check_lattice(tree, a).all()) {
            detail = "lattice check, seed " + std::to_string(seed);
            return false;
        }
        ModulusAssignment b = assign_moduli(tree, 40, SplitRng(seed));
        if (a.m_root != b.m_root) {
            detail = "determinism, seed " + std::to_string(seed);
            return false;
        }
    }
    return true;
}

int run_selftest(const std::string& inject_fault) {
    bool fault_tau = inject_fault == "tau-coeff";
    if (!inject_fault.empty() && !fault_tau)
        throw std::invalid_argument("unknown fault: " + inject_fault);

    int failures = 0;
    auto report = [&](const std::string& name, bool pass, const std::string& detail) {
        std::cout << "suite " << name << ": " << (pass ? "PASS" : "FAIL");
        if (!pass) {
            std::cout << " (" << detail << ")";
            failures++;
        }
        std::cout << '\n';
    };

    std::string detail;
    report("curve-identity", suite_curve_identity(fault_tau, detail), detail);
    detail.clear();
    report("oracle-equivalence", suite_oracle_equivalence(detail), detail);
    detail.clear();
    report("modulus-lattice", suite_modulus_lattice(detail), detail);
    return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"worst-case subset sum with a tunable space budget"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* cgen = app.add_subcommand("gen", "generate an instance file on stdout");
    cgen->add_option("--n", gen.n, "item count")->check(CLI::PositiveNumber);
    cgen->add_option("--bits", gen.bits, "item bitlength")->check(CLI::PositiveNumber);
    auto* gseed = cgen->add_option("--seed", gen.seed, "rng seed");
    cgen->add_option("--kind", gen.kind, "uniform|planted|all-equal|parity-no");

    PlanArgs plan;
    auto* cplan = app.add_subcommand("plan", "print the dissection tree and a modulus assignment");
    cplan->add_option("--sigma", plan.sigma, "space budget as p/q");
    cplan->add_option("--n", plan.n, "item count")->check(CLI::PositiveNumber);
    auto* pseed = cplan->add_option("--seed", plan.seed, "rng seed");

    int grid = 64;
    auto* ccurve = app.add_subcommand("curve", "emit the tradeoff curve as CSV");
    ccurve->add_option("--grid", grid, "points on (0, 1/2]")->check(CLI::Range(2, 1 << 20));

    SolveArgs solve_args;
    auto* csolve = app.add_subcommand("solve", "decide an instance file");
    csolve->add_option("file", solve_args.file, "instance file")->required();
    csolve->add_option("--sigma", solve_args.sigma, "space budget as p/q");
    csolve->add_option("--algorithm", solve_args.algorithm, "dissect|brute|hs|ss");
    auto* sseed = csolve->add_option("--seed", solve_args.seed, "rng seed");
    csolve->add_option("--preprocess-rounds", solve_args.rounds, "isolation rounds, 0 = default")
        ->check(CLI::NonNegativeNumber);
    csolve->add_option("--threads", solve_args.threads, "worker count")->check(CLI::PositiveNumber);
    csolve->add_option("--stats-out", solve_args.stats_out, "append a bench CSV row here");

    BenchArgs bench;
    auto* cbench = app.add_subcommand("bench", "run the planted/parity-no grid");
    cbench->add_option("--sigma-list", bench.sigma_list, "comma-separated p/q budgets");
    cbench->add_option("--n-list", bench.n_list, "comma-separated item counts");
    cbench->add_option("--seeds", bench.seeds, "seeds 0..S-1")->check(CLI::PositiveNumber);
    cbench->add_option("--threads-grid", bench.threads_grid, "comma-separated worker counts");
    cbench->add_option("--out", bench.out, "output CSV path (default stdout)");

    std::string inject_fault;
    auto* cself = app.add_subcommand("selftest", "run the built-in suites");
    cself->add_option("--inject-fault", inject_fault, "test hook; 'tau-coeff' breaks a coefficient");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        gen.seed_set = gseed->count() > 0;
        plan.seed_set = pseed->count() > 0;
        solve_args.seed_set = sseed->count() > 0;
        if (cgen->parsed()) return run_gen(gen);
        if (cplan->parsed()) return run_plan(plan);
        if (ccurve->parsed()) return run_curve(grid);
        if (csolve->parsed()) return run_solve(solve_args);
        if (cbench->parsed()) return run_bench(bench);
        if (cself->parsed()) return run_selftest(inject_fault);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
