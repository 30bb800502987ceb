#include <dissect/parallel.hpp>

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

namespace dissect {

namespace {

// Worker ceiling P <= 2^((2 tau - 1) n), exact: with (2 tau - 1) n = num/den,
// the test is P^den <= 2^num
void check_worker_bound(const DissectNode* v, int P) {
    if (P <= 1) return;
    Rational q = (v->tau * Rational(2) - Rational(1)) * Rational(Int(v->n));
    if (q.num() < 0) throw AllocationInfeasible("worker bound below one at " + (v->path.empty() ? std::string("the root") : v->path));
    Int lhs;
    mpz_pow_ui(lhs.get_mpz_t(), Int(P).get_mpz_t(), to_u64(q.den()));
    if (lhs > pow2(to_u64(q.num())))
        throw AllocationInfeasible("requested workers exceed the speedup bound at " +
                                   (v->path.empty() ? std::string("the root") : v->path));
}

std::vector<ShardRange> even_shards(uint64_t m, int p) {
    std::vector<ShardRange> out;
    uint64_t base = m / uint64_t(p), rem = m % uint64_t(p);
    uint64_t at = 0;
    for (int i = 0; i < p; i++) {
        uint64_t len = base + (uint64_t(i) < rem ? 1 : 0);
        out.push_back({at, at + len});
        at += len;
    }
    return out;
}

uint64_t loop_length(const DissectNode* v, const ModulusAssignment& assign) {
    const Int& mp = assign.mprime_of(v);
    if (bit_length(mp) > 63) throw AllocationInfeasible("residue loop too long to shard");
    return to_u64(mp);
}

std::unique_ptr<AllocationNode> build(const DissectNode* v, int P, const ModulusAssignment& assign,
                                      SharedCounters& counters,
                                      const std::vector<std::vector<uint64_t>>& prefixes,
                                      std::vector<WorkerTask>& sub_tasks) {
    check_worker_bound(v, P);
    auto an = std::make_unique<AllocationNode>();
    an->node = v;
    an->workers = P;
    if (v->leaf()) {
        if (P > 1) throw AllocationInfeasible("cannot split a leaf node across workers");
        an->shards = {{0, 1}};
        sub_tasks.push_back({});
        return an;
    }
    uint64_t m = loop_length(v, assign);
    // every worker set that reaches this node drives one shared counter per
    // ancestor residue choice
    for (const auto& pre : prefixes)
        counters.by_call.emplace(SharedCounters::Key(v, pre),
                                 std::make_shared<std::atomic<uint64_t>>(0));

    if (uint64_t(P) <= m) {
        an->shards = even_shards(m, P);
        for (const ShardRange& sr : an->shards) {
            WorkerTask t;
            t.plan[v] = sr;
            sub_tasks.push_back(std::move(t));
        }
        return an;
    }

    // redundant mode: each residue is handled by a worker group that runs the
    // left call in full and splits only the right branch
    int per = int((uint64_t(P) + m - 1) / m);
    an->per_shard_workers = per;
    for (uint64_t s = 0; s < m; s++) an->shards.push_back({s, s + 1});

    std::vector<std::vector<uint64_t>> child_prefixes;
    if (prefixes.size() * m > 1000000) throw AllocationInfeasible("shared-counter table would explode");
    for (const auto& pre : prefixes)
        for (uint64_t s = 0; s < m; s++) {
            auto p = pre;
            p.push_back(s);
            child_prefixes.push_back(std::move(p));
        }

    std::vector<WorkerTask> deeper;
    an->right = build(v->right.get(), per, assign, counters, child_prefixes, deeper);
    for (WorkerTask& t : deeper) {
        WorkerTask merged;
        merged.plan = std::move(t.plan);
        merged.plan[v] = ShardRange{0, m};  // the group walks the full loop
        sub_tasks.push_back(std::move(merged));
    }
    return an;
}

}  // namespace

ProcessorAllocation allocate(const DissectionTree& tree, const ModulusAssignment& assign, int P) {
    if (P < 1) throw std::invalid_argument("worker count must be positive");
    ProcessorAllocation pa;
    pa.requested = P;
    pa.counters = std::make_shared<SharedCounters>();
    std::vector<std::vector<uint64_t>> prefixes(1);  // the root call has an empty prefix
    pa.root = build(tree.root.get(), P, assign, *pa.counters, prefixes, pa.tasks);
    return pa;
}

namespace {

// pulls every task's emissions into a common queue under its own threads
class MergeStream final : public SolutionStream {
public:
    MergeStream(const ModularInstance& inst, const DissectionTree& tree,
                const ModulusAssignment& assign, const BailoutPolicy& policy,
                const ProcessorAllocation& alloc, RunStats& stats, int os_threads)
        : inst_(inst), tree_(tree), assign_(assign), policy_(policy), stats_(stats),
          counters_(alloc.counters) {
        for (const WorkerTask& t : alloc.tasks) plans_.push_back(t.plan);
        int n_threads = os_threads > 0 ? std::min<int>(os_threads, int(plans_.size()))
                                       : int(plans_.size());
        active_ = n_threads;
        for (int i = 0; i < n_threads; i++) pool_.emplace_back([this]() { run(); });
    }

    ~MergeStream() override {
        cancel_.store(true);
        for (auto& th : pool_) th.join();
    }

    std::optional<SolutionVector> next() override {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [this]() { return !q_.empty() || active_ == 0; });
        if (q_.empty()) return std::nullopt;
        SolutionVector x = std::move(q_.front());
        q_.pop_front();
        emitted_++;
        return x;
    }

private:
    void run() {
        while (!cancel_.load(std::memory_order_relaxed)) {
            size_t i = cursor_.fetch_add(1);
            if (i >= plans_.size()) break;
            auto stream = generate_solutions(inst_, tree_, assign_, policy_, stats_, &plans_[i],
                                             counters_.get(), &cancel_);
            while (auto x = stream->next()) {
                std::lock_guard<std::mutex> lk(mu_);
                q_.push_back(std::move(*x));
                cv_.notify_one();
            }
        }
        std::lock_guard<std::mutex> lk(mu_);
        active_--;
        cv_.notify_all();
    }

    ModularInstance inst_;
    const DissectionTree& tree_;
    const ModulusAssignment& assign_;
    BailoutPolicy policy_;
    RunStats& stats_;
    std::shared_ptr<SharedCounters> counters_;
    std::vector<ShardPlan> plans_;

    std::vector<std::thread> pool_;
    std::atomic<size_t> cursor_{0};
    std::atomic<bool> cancel_{false};
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<SolutionVector> q_;
    int active_ = 0;
};

}  // namespace

std::unique_ptr<SolutionStream> parallel_generate(const ModularInstance& inst,
                                                  const DissectionTree& tree,
                                                  const ModulusAssignment& assign,
                                                  const BailoutPolicy& policy,
                                                  const ProcessorAllocation& alloc, RunStats& stats,
                                                  int os_threads) {
    if (alloc.tasks.size() <= 1)
        return generate_solutions(inst, tree, assign, policy, stats);
    return std::make_unique<MergeStream>(inst, tree, assign, policy, alloc, stats, os_threads);
}

}  // namespace dissect
