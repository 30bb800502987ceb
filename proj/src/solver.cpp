#include <dissect/solver.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

namespace dissect {

bool verify(const Instance& inst, const SolutionVector& x) {
    if (x.size() != inst.n()) return false;
    return selected_sum(inst.items, x) == inst.target;
}

int default_rounds(int n) {
    if (n < 2) return 4;
    return int(std::ceil(4.0 * std::log(double(n)))) + 4;
}

namespace {

long ceil_log2(const Int& x) {  // smallest b >= 0 with 2^b >= x
    if (x <= 1) return 0;
    return bit_length(x - 1);
}

uint64_t now_ns() {
    return uint64_t(std::chrono::duration_cast<std::chrono::nanoseconds>(
                        std::chrono::steady_clock::now().time_since_epoch())
                        .count());
}

struct SharedState {
    std::mutex mu;
    std::optional<SolutionVector> witness;
    std::set<SolutionVector> found;
    std::atomic<bool> cancel{false};
    std::atomic<uint64_t> emissions{0}, bailouts{0}, overshoot{0}, examined{0};
    std::atomic<int64_t> peak{0};
    SolveMode mode = SolveMode::decision;
    uint64_t count_cap = 0;
};

void raise_peak(std::atomic<int64_t>& peak, int64_t v) {
    int64_t p = peak.load(std::memory_order_relaxed);
    while (v > p && !peak.compare_exchange_weak(p, v, std::memory_order_relaxed)) {}
}

// true once the global goal is reached
bool record_solution(SharedState& sh, SolutionVector x0) {
    std::lock_guard<std::mutex> lk(sh.mu);
    if (sh.mode == SolveMode::decision) {
        if (!sh.witness) sh.witness = std::move(x0);
        sh.cancel.store(true);
        return true;
    }
    sh.found.insert(std::move(x0));
    if (sh.found.size() >= sh.count_cap) {
        sh.cancel.store(true);
        return true;
    }
    return false;
}

// candidate verified against the lifted instance, then the original
bool accept_candidate(const Instance& original, const NormalizeResult& norm0,
                      const PreparedInstance& p, const SolutionVector& x1, SharedState& sh) {
    if (!verify(p.inst, x1)) return false;
    SolutionVector x0 = inflate_through(x1, norm0.kept, original.n());
    if (!verify(original, x0)) return false;
    return record_solution(sh, std::move(x0));
}

void examine_instance(const Instance& original, const NormalizeResult& norm0,
                      const PreparedInstance& p, const SolverConfig& cfg, SplitRng inst_rng,
                      SharedState& sh) {
    sh.examined.fetch_add(1, std::memory_order_relaxed);
    NormalizeResult norm2 = normalize(p.inst);
    if (norm2.kind == NormalizeResult::Kind::trivial_no) return;
    if (norm2.kind == NormalizeResult::Kind::trivial_yes) {
        accept_candidate(original, norm0, p, *norm2.witness, sh);
        return;
    }
    int n2 = norm2.inst.n();
    if (n2 == 0) return;  // the exhaustive guard catches empty instances first

    DissectionTree tree = plan_tree(cfg.sigma, n2);
    long b = std::max(long(n2), ceil_log2(Int(n2) * norm2.inst.target));
    ModulusAssignment assign = assign_moduli(tree, b, inst_rng);

    ModularInstance mi;
    mi.items = norm2.inst.items;
    mi.modulus = assign.m_root;
    mi.target = norm2.inst.target % assign.m_root;

    RunStats rs;
    BailoutPolicy pol;
    pol.c = cfg.bailout_exponent;
    auto stream = generate_solutions(mi, tree, assign, pol, rs, nullptr, nullptr, &sh.cancel);
    while (auto x2 = stream->next()) {
        SolutionVector x1 = inflate_through(*x2, norm2.kept, p.inst.n());
        if (accept_candidate(original, norm0, p, x1, sh)) break;
    }
    sh.emissions.fetch_add(rs.emissions.load(), std::memory_order_relaxed);
    sh.bailouts.fetch_add(rs.bailouts.load(), std::memory_order_relaxed);
    sh.overshoot.fetch_add(rs.counter_overshoot.load(), std::memory_order_relaxed);
    raise_peak(sh.peak, rs.gauge.peak());
}

}  // namespace

SolveReport solve(const Instance& inst, const SolverConfig& cfg) {
    uint64_t t0 = now_ns();
    SolveReport rep;
    int rounds = cfg.preprocess_rounds > 0 ? cfg.preprocess_rounds : default_rounds(inst.n());

    SharedState sh;
    sh.mode = cfg.mode;
    sh.count_cap = cfg.count_cap;

    SplitRng base(cfg.seed);
    for (int round = 0; round < rounds && !sh.cancel.load(); round++) {
        rep.rounds_used++;
        SplitRng round_rng = base.split(uint64_t(round));
        PreprocessResult pre = preprocess(inst, round_rng);

        if (pre.norm.kind == NormalizeResult::Kind::trivial_no) break;
        if (pre.norm.kind == NormalizeResult::Kind::trivial_yes) {
            record_solution(sh, *pre.norm.witness);
            break;
        }

        // outputs whose residue target or weight target exceeds every
        // reachable sum hold no solutions; skipping them saves a full
        // enumeration pass each
        Int red_total = 0;
        for (const Int& a : pre.norm.inst.items) red_total += a % pre.p1;
        Int t_red = pre.norm.inst.target % pre.p1;
        std::vector<size_t> order;
        order.reserve(pre.outputs.size());
        int last_k1 = -1, last_s = -1;
        Int rsum = 0;
        for (size_t i = 0; i < pre.outputs.size(); i++) {
            const IsolationParams& pp = pre.outputs[i].params;
            if (pp.k1 != last_k1 || pp.s != last_s) {
                last_k1 = pp.k1;
                last_s = pp.s;
                rsum = 0;
                for (const Int& w : pp.r) rsum += w;
            }
            if (t_red + Int(pp.k1) * pp.p1 > red_total) continue;
            if (pp.u + pp.p2 * Int(pp.k2) > rsum) continue;
            order.push_back(i);
        }
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            const IsolationParams& pa = pre.outputs[a].params;
            const IsolationParams& pb = pre.outputs[b].params;
            if (pa.s != pb.s) return pa.s < pb.s;
            if (pa.k2 != pb.k2) return pa.k2 < pb.k2;
            return pa.k1 < pb.k1;
        });
        if (cfg.max_instances_per_round > 0 && order.size() > cfg.max_instances_per_round)
            order.resize(cfg.max_instances_per_round);

        int threads = std::max(1, cfg.threads);
        std::atomic<size_t> cursor{0};
        auto work = [&]() {
            while (!sh.cancel.load(std::memory_order_relaxed)) {
                size_t i = cursor.fetch_add(1);
                if (i >= order.size()) return;
                size_t idx = order[i];
                examine_instance(inst, pre.norm, pre.outputs[idx], cfg,
                                 round_rng.split(1000003 + idx), sh);
            }
        };
        if (threads == 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < threads; w++) pool.emplace_back(work);
            for (auto& th : pool) th.join();
        }
    }

    rep.witness = sh.witness;
    rep.witness_found = sh.witness.has_value();
    if (cfg.mode == SolveMode::count_capped)
        rep.solutions.assign(sh.found.begin(), sh.found.end());
    rep.instances_examined = sh.examined.load();
    rep.emissions = sh.emissions.load();
    rep.bailouts = sh.bailouts.load();
    rep.counter_overshoot = sh.overshoot.load();
    rep.peak_table_entries = sh.peak.load();
    rep.wall_time_ns = now_ns() - t0;
    return rep;
}

SolveReport solve_baseline(const Instance& inst, const std::string& algorithm) {
    uint64_t t0 = now_ns();
    SolveReport rep;
    MemoryGauge gauge;

    ModularInstance mi;
    mi.items = inst.items;
    mi.modulus = Int(inst.n()) * inst.target + 1;
    mi.target = inst.target % mi.modulus;

    std::unique_ptr<SolutionStream> stream;
    StreamLimits lim{std::nullopt, &gauge};
    if (algorithm == "brute") stream = brute_force_stream(mi, lim);
    else if (algorithm == "hs") stream = horowitz_sahni_stream(mi, lim);
    else if (algorithm == "ss") stream = schroeppel_shamir_stream(mi, lim);
    else throw std::invalid_argument("unknown algorithm: " + algorithm);

    while (auto x = stream->next()) {
        rep.emissions++;
        if (verify(inst, *x)) {
            rep.witness = std::move(*x);
            rep.witness_found = true;
            break;
        }
    }
    rep.peak_table_entries = gauge.peak();
    rep.wall_time_ns = now_ns() - t0;
    return rep;
}

}  // namespace dissect
