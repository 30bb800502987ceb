#pragma once

#include <dissect/engine.hpp>

#include <memory>
#include <stdexcept>
#include <vector>

namespace dissect {

struct AllocationInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// how workers divide the residue loop at one node
struct AllocationNode {
    const DissectNode* node = nullptr;
    int workers = 1;                  // processors assigned to this node
    std::vector<ShardRange> shards;   // contiguous, disjoint, cover [0, M'_v)
    int per_shard_workers = 1;        // > 1: every residue runs the left branch
                                      // redundantly and splits the right branch
    std::unique_ptr<AllocationNode> right;  // present when per_shard_workers > 1
};

struct WorkerTask {
    ShardPlan plan;
};

struct ProcessorAllocation {
    int requested = 1;
    std::unique_ptr<AllocationNode> root;
    std::vector<WorkerTask> tasks;  // flattened logical workers
    std::shared_ptr<SharedCounters> counters;
};

// Splits the residue loop into at most P contiguous shards; if P exceeds the
// loop length, ceil(P / M') workers share each residue and the right branch
// is split recursively. Throws AllocationInfeasible when P exceeds
// 2^((2 tau(sigma_v) - 1) n_v) at any level (checked exactly in rationals),
// or when a split would have to cross a leaf.
ProcessorAllocation allocate(const DissectionTree& tree, const ModulusAssignment& assign, int P);

// Runs the allocation's tasks on worker threads and merges their emissions
// (no cross-worker ordering). A one-task allocation degenerates to the serial
// stream, emission for emission. os_threads = 0 uses one thread per task.
std::unique_ptr<SolutionStream> parallel_generate(const ModularInstance& inst,
                                                  const DissectionTree& tree,
                                                  const ModulusAssignment& assign,
                                                  const BailoutPolicy& policy,
                                                  const ProcessorAllocation& alloc, RunStats& stats,
                                                  int os_threads = 0);

}  // namespace dissect
