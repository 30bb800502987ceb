#include <dissect/parallel.hpp>

#include <doctest.h>

#include <set>

using namespace dissect;

namespace {

std::multiset<std::string> drain_multi(SolutionStream& s) {
    std::multiset<std::string> out;
    while (auto x = s.next()) out.insert(x->str());
    return out;
}

std::vector<std::string> drain_seq(SolutionStream& s) {
    std::vector<std::string> out;
    while (auto x = s.next()) out.push_back(x->str());
    return out;
}

struct Setup {
    DissectionTree tree;
    ModulusAssignment assign;
    ModularInstance inst;
};

Setup make_setup(const Rational& sigma, int n, uint64_t seed, long b_extra = 0) {
    Setup s;
    SplitRng rng(seed);
    GeneratedInstance gen = generate_instance(InstanceKind::uniform, n, 7, rng);
    s.tree = plan_tree(sigma, n);
    Int total = 0;
    for (const Int& a : gen.inst.items) total += a;
    long b = std::max<long>(n, long(bit_length(total))) + b_extra;
    s.assign = assign_moduli(s.tree, b, rng.split(31));
    s.inst = ModularInstance{gen.inst.items, gen.inst.target % s.assign.m_root, s.assign.m_root};
    return s;
}

}  // namespace

TEST_CASE("one worker degenerates to the serial stream") {
    Setup s = make_setup(Rational(1, 7), 18, 3);
    BailoutPolicy policy;
    policy.c = 60;
    ProcessorAllocation alloc = allocate(s.tree, s.assign, 1);
    REQUIRE(alloc.tasks.size() == 1);
    // the single task holds the whole root loop
    const ShardRange& whole = alloc.tasks[0].plan.at(s.tree.root.get());
    CHECK(whole.begin == 0);
    CHECK(whole.end == to_u64(s.assign.mprime_root));

    RunStats serial_stats, par_stats;
    auto serial = generate_solutions(s.inst, s.tree, s.assign, policy, serial_stats);
    auto par = parallel_generate(s.inst, s.tree, s.assign, policy, alloc, par_stats, 1);
    CHECK(drain_seq(*serial) == drain_seq(*par));  // emission for emission
}

TEST_CASE("contiguous shards cover the root loop") {
    Setup s = make_setup(Rational(1, 7), 20, 5);
    uint64_t mprime = s.assign.mprime_root.get_ui();
    REQUIRE(mprime >= 64);  // one prime from [2^6, 2^7]
    ProcessorAllocation alloc = allocate(s.tree, s.assign, 4);
    REQUIRE(alloc.tasks.size() == 4);
    uint64_t covered = 0;
    uint64_t expect_begin = 0;
    for (const WorkerTask& task : alloc.tasks) {
        REQUIRE(task.plan.size() == 1);
        const ShardRange& r = task.plan.at(s.tree.root.get());
        CHECK(r.begin == expect_begin);
        CHECK(r.end > r.begin);
        expect_begin = r.end;
        covered += r.end - r.begin;
    }
    CHECK(covered == mprime);
    CHECK(expect_begin == mprime);
}

TEST_CASE("parallel emission sets match serial at P in 2,4,8") {
    BailoutPolicy policy;
    policy.c = 60;
    // n = 21 keeps P = 8 exactly at the 2^((2*4/7-1)*21) = 2^3 worker bound
    for (uint64_t seed = 0; seed < 6; ++seed) {
        Setup s = make_setup(Rational(1, 7), 21, seed * 3 + 1);
        RunStats base_stats;
        auto serial = generate_solutions(s.inst, s.tree, s.assign, policy, base_stats);
        auto expect = drain_multi(*serial);
        for (int p : {2, 4, 8}) {
            CAPTURE(seed);
            CAPTURE(p);
            ProcessorAllocation alloc = allocate(s.tree, s.assign, p);
            RunStats stats;
            auto stream = parallel_generate(s.inst, s.tree, s.assign, policy, alloc, stats, 2);
            CHECK(drain_multi(*stream) == expect);
        }
    }
}

TEST_CASE("redundant residue groups split the right branch") {
    // hunt for an assignment with M' = 55 = 11 * 5 so that P = 56 overflows
    // the loop while staying under the 2^((2*11/16-1)*16) = 64 worker bound
    DissectionTree tree = plan_tree(Rational(1, 16), 16);
    REQUIRE(tree.deltas.size() == 2);
    std::optional<uint64_t> found;
    for (uint64_t seed = 0; seed < 400 && !found; ++seed) {
        ModulusAssignment a = assign_moduli(tree, 16, SplitRng(seed));
        if (a.mprime_root == 55) found = seed;
    }
    REQUIRE(found.has_value());

    SplitRng rng(77);
    GeneratedInstance gen = generate_instance(InstanceKind::uniform, 16, 5, rng);
    ModulusAssignment assign = assign_moduli(tree, 16, SplitRng(*found));
    ModularInstance inst{gen.inst.items, gen.inst.target % assign.m_root, assign.m_root};

    ProcessorAllocation alloc = allocate(tree, assign, 56);
    CHECK(alloc.root->shards.size() == 55);
    CHECK(alloc.tasks.size() == 2);  // ceil(56/55) merged super-tasks
    CHECK_FALSE(alloc.counters->by_call.empty());
    for (const WorkerTask& task : alloc.tasks) {
        const ShardRange& root_range = task.plan.at(tree.root.get());
        CHECK(root_range.begin == 0);
        CHECK(root_range.end == 55);  // every group member walks the full loop
        CHECK(task.plan.count(tree.root->right.get()) == 1);
    }

    BailoutPolicy policy;
    policy.c = 60;
    RunStats serial_stats;
    auto serial = generate_solutions(inst, tree, assign, policy, serial_stats);
    auto expect = drain_multi(*serial);
    RunStats stats;
    auto stream = parallel_generate(inst, tree, assign, policy, alloc, stats, 2);
    CHECK(drain_multi(*stream) == expect);
}

TEST_CASE("shared counters keep capped totals within the threshold") {
    DissectionTree tree = plan_tree(Rational(1, 16), 16);
    std::optional<uint64_t> found;
    for (uint64_t seed = 0; seed < 400 && !found; ++seed) {
        ModulusAssignment a = assign_moduli(tree, 16, SplitRng(seed));
        if (a.mprime_root == 55) found = seed;
    }
    REQUIRE(found.has_value());
    ModulusAssignment assign = assign_moduli(tree, 16, SplitRng(*found));
    std::vector<Int> ones(16, 1);
    ModularInstance inst{ones, Int(8) % assign.m_root, assign.m_root};

    BailoutPolicy tight;
    tight.c = 1;
    RunStats serial_stats;
    auto serial = generate_solutions(inst, tree, assign, tight, serial_stats);
    uint64_t serial_total = drain_multi(*serial).size();

    ProcessorAllocation alloc = allocate(tree, assign, 56);
    RunStats stats;
    auto stream = parallel_generate(inst, tree, assign, tight, alloc, stats, 2);
    uint64_t par_total = drain_multi(*stream).size();
    Int root_cap = emission_threshold(*tree.root, tree, assign, tight);
    CHECK(Int(par_total) <= root_cap);
    CHECK(Int(serial_total) <= root_cap);
}

TEST_CASE("infeasible requests are refused") {
    Setup narrow = make_setup(Rational(1, 7), 14, 9);
    // (2*4/7 - 1) * 14 = 2, so no more than 4 workers can help
    CHECK_THROWS_AS(allocate(narrow.tree, narrow.assign, 17), AllocationInfeasible);
    CHECK_THROWS_AS(allocate(narrow.tree, narrow.assign, 5), AllocationInfeasible);
    ProcessorAllocation ok = allocate(narrow.tree, narrow.assign, 4);
    CHECK(ok.tasks.size() == 4);

    Setup leafy = make_setup(Rational(1, 4), 12, 2);
    REQUIRE(leafy.tree.root->leaf());
    CHECK_THROWS_AS(allocate(leafy.tree, leafy.assign, 2), AllocationInfeasible);
    ProcessorAllocation single = allocate(leafy.tree, leafy.assign, 1);
    CHECK(single.tasks.size() == 1);
}

TEST_CASE("parallel runs are repeatable") {
    Setup s = make_setup(Rational(1, 8), 18, 8);
    BailoutPolicy policy;
    ProcessorAllocation alloc = allocate(s.tree, s.assign, 3);
    RunStats stats_a, stats_b;
    auto a = parallel_generate(s.inst, s.tree, s.assign, policy, alloc, stats_a, 3);
    auto b = parallel_generate(s.inst, s.tree, s.assign, policy, alloc, stats_b, 3);
    CHECK(drain_multi(*a) == drain_multi(*b));
}
