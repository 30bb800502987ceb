#pragma once

#include <dissect/moduli.hpp>
#include <dissect/stats.hpp>
#include <dissect/streams.hpp>

#include <atomic>
#include <map>
#include <memory>

namespace dissect {

struct BailoutPolicy {
    // per-call emission caps are n_top^c * max(1, 2^n_v / M_v); c = -1 means
    // one more than the number of distinct prime levels
    long c = -1;
    bool paranoid = false;  // re-check every emission against its node target

    long effective_c(const DissectionTree& tree) const {
        return c >= 0 ? c : long(tree.gamma_levels.size()) + 1;
    }
};

// cap on solutions reported by one call at node v, never above 2^n_v
Int emission_threshold(const DissectNode& v, const DissectionTree& tree,
                       const ModulusAssignment& assign, const BailoutPolicy& policy);

struct ShardRange {
    uint64_t begin = 0, end = 0;
};

// restricts the residue loop at the given nodes (absent node: full range);
// used to split work across workers
using ShardPlan = std::map<const DissectNode*, ShardRange>;

// One counter per call that multiple workers drive together, keyed by the
// node and the chain of ancestor residue choices leading to the call.
// Workers reserve emission slots with fetch_add, so the cap is never
// exceeded even though the raw counter may drift past it.
struct SharedCounters {
    using Key = std::pair<const DissectNode*, std::vector<uint64_t>>;
    std::map<Key, std::shared_ptr<std::atomic<uint64_t>>> by_call;

    std::atomic<uint64_t>* find(const DissectNode* v, const std::vector<uint64_t>& path) const {
        auto it = by_call.find(Key(v, path));
        return it == by_call.end() ? nullptr : it->second.get();
    }
};

// Streams solutions of  sum(a_i x_i) = target (mod assign.m_root)  by the
// planned dissection. Requires inst.n() == tree.n_top and
// inst.modulus == assign.m_root; the target is reduced internally.
// Interior moduli must fit in 63 bits (throws std::logic_error otherwise).
std::unique_ptr<SolutionStream> generate_solutions(const ModularInstance& inst,
                                                   const DissectionTree& tree,
                                                   const ModulusAssignment& assign,
                                                   const BailoutPolicy& policy, RunStats& stats,
                                                   const ShardPlan* shards = nullptr,
                                                   SharedCounters* shared = nullptr,
                                                   std::atomic<bool>* cancel = nullptr);

}  // namespace dissect
