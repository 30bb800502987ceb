#include <dissect/instance.hpp>
#include <dissect/solver.hpp>

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace dissect;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(DISSECT_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string temp_path(const std::string& tag) {
    return "/tmp/dissect_cli_test_" + std::to_string(getpid()) + "_" + tag;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("gen emits a parseable instance and planted witnesses verify") {
    RunResult r = run_cli("gen --kind planted --n 12 --bits 10 --seed 3");
    CHECK(r.exit_code == 0);
    ParsedInstance parsed = parse_instance(r.out);
    CHECK(parsed.inst.n() == 12);
    REQUIRE(parsed.witness.has_value());
    CHECK(verify(parsed.inst, *parsed.witness));

    RunResult again = run_cli("gen --kind planted --n 12 --bits 10 --seed 3");
    CHECK(again.out == r.out);  // byte-stable per seed
    RunResult other = run_cli("gen --kind planted --n 12 --bits 10 --seed 4");
    CHECK(other.out != r.out);
}

TEST_CASE("gen kinds shape the instance") {
    RunResult parity = run_cli("gen --kind parity-no --n 8 --seed 1");
    ParsedInstance p = parse_instance(parity.out);
    CHECK(p.inst.target % 2 == 1);
    for (const Int& a : p.inst.items) CHECK(a % 2 == 0);

    RunResult all_eq = run_cli("gen --kind all-equal --n 12 --seed 0");
    ParsedInstance q = parse_instance(all_eq.out);
    CHECK(q.inst.target == 6);

    CHECK(run_cli("gen --kind bogus --n 4").exit_code == 2);
    CHECK(run_cli("gen --n 0").exit_code == 2);
}

TEST_CASE("plan prints the tree with exact rationals") {
    RunResult r = run_cli("plan --sigma 1/8 --n 32 --seed 5");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("19/32") != std::string::npos);
    CHECK(r.out.find("m_root_bits=") != std::string::npos);

    RunResult single = run_cli("plan --sigma 1/4 --n 16");
    CHECK(single.exit_code == 0);
    CHECK(single.out.find("1/2") != std::string::npos);

    CHECK(run_cli("plan --sigma 0.125 --n 16").exit_code == 2);
    CHECK(run_cli("plan --sigma 3/2 --n 16").exit_code == 2);
}

TEST_CASE("curve rows pin the crossover") {
    RunResult r = run_cli("curve --grid 4");
    CHECK(r.exit_code == 0);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "sigma,tau,tau_ss");
    bool meet = false, inside = false;
    while (std::getline(lines, line)) {
        if (line == "1/4,1/2,1/2") meet = true;
        if (line == "1/8,19/32,3/4") inside = true;
    }
    CHECK(meet);
    CHECK(inside);
}

TEST_CASE("solve round trips a planted instance") {
    std::string inst_path = temp_path("planted");
    RunResult gen = run_cli("gen --kind planted --n 18 --bits 10 --seed 11");
    REQUIRE(gen.exit_code == 0);
    write_file(inst_path, gen.out);

    RunResult r = run_cli("solve " + inst_path + " --sigma 1/7 --seed 2");
    CHECK(r.exit_code == 0);
    ParsedInstance parsed = parse_instance(gen.out);
    auto witness = SolutionVector::parse(r.out.substr(0, r.out.find('\n')));
    REQUIRE(witness.has_value());
    CHECK(verify(parsed.inst, *witness));
    std::remove(inst_path.c_str());
}

TEST_CASE("solve reports NO-WITNESS with exit 1") {
    std::string inst_path = temp_path("parity");
    RunResult gen = run_cli("gen --kind parity-no --n 14 --bits 8 --seed 2");
    write_file(inst_path, gen.out);
    RunResult r = run_cli("solve " + inst_path + " --sigma 1/7 --seed 1 --preprocess-rounds 1");
    CHECK(r.exit_code == 1);
    CHECK(r.out == "NO-WITNESS\n");
    std::remove(inst_path.c_str());
}

TEST_CASE("solve baselines and stats output") {
    std::string inst_path = temp_path("base");
    std::string stats_path = temp_path("stats.csv");
    RunResult gen = run_cli("gen --kind planted --n 14 --bits 8 --seed 6");
    write_file(inst_path, gen.out);

    for (const char* alg : {"brute", "hs", "ss"}) {
        RunResult r = run_cli("solve " + inst_path + " --algorithm " + std::string(alg) +
                              " --stats-out " + stats_path);
        CHECK(r.exit_code == 0);
    }
    std::string csv = read_file(stats_path);
    CHECK(csv.find("n,sigma_num,sigma_den,tau_predicted,algorithm,seed,wall_time_ns,"
                   "peak_table_entries,solutions_found,bailouts,witness_found") == 0);
    CHECK(csv.find(",brute,") != std::string::npos);
    CHECK(csv.find(",hs,") != std::string::npos);
    CHECK(csv.find(",ss,") != std::string::npos);
    std::remove(inst_path.c_str());
    std::remove(stats_path.c_str());
}

TEST_CASE("solve rejects malformed input with exit 2") {
    std::string bad_path = temp_path("bad");
    write_file(bad_path, "2\n1 2 3\n4\n");
    CHECK(run_cli("solve " + bad_path).exit_code == 2);
    CHECK(run_cli("solve /nonexistent/no/such/file").exit_code == 2);
    std::remove(bad_path.c_str());
}

TEST_CASE("bench grid emits one row per cell and is stable") {
    std::string out_a = temp_path("bench_a.csv");
    std::string out_b = temp_path("bench_b.csv");
    std::string args = "bench --sigma-list 1/7 --n-list 12,14 --seeds 2 --out ";
    CHECK(run_cli(args + out_a).exit_code == 0);
    CHECK(run_cli(args + out_b).exit_code == 0);

    std::string csv = read_file(out_a);
    int lines = 0;
    for (char ch : csv)
        if (ch == '\n') lines++;
    CHECK(lines == 1 + 2 * 2 * 2);  // header + kinds * n * seeds

    // stable apart from the timing column
    std::istringstream sa(csv), sb(read_file(out_b));
    std::string la, lb;
    while (std::getline(sa, la) && std::getline(sb, lb)) {
        auto strip_time = [](std::string s) {
            // wall_time_ns is column 7 of 11
            int col = 0;
            std::string out;
            for (char ch : s) {
                if (ch == ',') col++;
                if (col == 6 && ch != ',') continue;
                out.push_back(ch);
            }
            return out;
        };
        CHECK(strip_time(la) == strip_time(lb));
    }
    std::remove(out_a.c_str());
    std::remove(out_b.c_str());
}

TEST_CASE("selftest passes clean and fails under an injected fault") {
    RunResult ok = run_cli("selftest");
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("suite curve-identity: PASS") != std::string::npos);
    CHECK(ok.out.find("suite oracle-equivalence: PASS") != std::string::npos);
    CHECK(ok.out.find("suite modulus-lattice: PASS") != std::string::npos);

    RunResult bad = run_cli("selftest --inject-fault tau-coeff");
    CHECK(bad.exit_code == 1);
    CHECK(bad.out.find("suite curve-identity: FAIL") != std::string::npos);

    RunResult twice = run_cli("selftest");
    CHECK(twice.out == ok.out);
}

TEST_CASE("seed falls back to the environment") {
    RunResult a = run_cli("gen --kind uniform --n 10 --seed 77");
    setenv("DISSECT_SEED", "77", 1);
    RunResult b = run_cli("gen --kind uniform --n 10");
    unsetenv("DISSECT_SEED");
    RunResult c = run_cli("gen --kind uniform --n 10");
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);  // default seed 0 differs from 77
}

TEST_CASE("unknown flags exit with 2") {
    CHECK(run_cli("gen --frobnicate").exit_code == 2);
    CHECK(run_cli("nosuchcommand").exit_code == 2);
}
