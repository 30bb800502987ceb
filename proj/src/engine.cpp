#include <dissect/engine.hpp>

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace dissect {

Int emission_threshold(const DissectNode& v, const DissectionTree& tree,
                       const ModulusAssignment& assign, const BailoutPolicy& policy) {
    long c = policy.effective_c(tree);
    Int mult;
    mpz_ui_pow_ui(mult.get_mpz_t(), static_cast<unsigned long>(std::max(tree.n_top, 1)),
                  static_cast<unsigned long>(std::max(c, 0L)));
    Int per_call = ceil_div(pow2(v.n), assign.m_of(&v));
    if (per_call < 1) per_call = 1;
    Int thr = mult * per_call;
    Int cap = pow2(v.n);
    return thr < cap ? thr : cap;
}

namespace {

inline uint64_t add_mod(uint64_t a, uint64_t b, uint64_t m) {
    uint64_t s = a + b;  // both operands < m < 2^63
    return s >= m ? s - m : s;
}
inline uint64_t sub_mod(uint64_t a, uint64_t b, uint64_t m) {
    return a >= b ? a - b : a + (m - b);
}

Int mod_nonneg(const Int& a, const Int& m) {
    Int r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

uint64_t clamp_u64(const Int& x) {
    if (bit_length(x) > 64) return std::numeric_limits<uint64_t>::max();
    return low64(x);
}

struct NodeCache {
    bool built = false;
    uint64_t m_u64 = 0;       // m_v when it fits 63 bits, else 0
    uint64_t mprime_u64 = 0;  // internal nodes only
    uint64_t thr = 0;
    std::vector<uint64_t> red;              // items mod m_v
    std::shared_ptr<QuarterTables> tables;  // leaf fast path, n_v >= 9
};

struct EngineCtx {
    const DissectionTree* tree = nullptr;
    const ModulusAssignment* assign = nullptr;
    BailoutPolicy policy;
    RunStats* stats = nullptr;
    const ShardPlan* shards = nullptr;
    SharedCounters* shared = nullptr;
    std::atomic<bool>* cancel = nullptr;

    std::vector<Int> items;
    Int t_root;
    uint64_t t_shadow = 0;
    bool root_fast = false;  // total sum < m_root: integer-sum shadow keys suffice
    std::vector<uint64_t> shadow;  // items mod 2^64

    std::unordered_map<const DissectNode*, NodeCache> cache;

    bool cancelled() const { return cancel && cancel->load(std::memory_order_relaxed); }

    NodeCache& node_cache(const DissectNode* v) {
        NodeCache& nc = cache[v];
        if (nc.built) return nc;
        nc.thr = clamp_u64(emission_threshold(*v, *tree, *assign, policy));
        bool root = v->path.empty();
        const Int& m = assign->m_of(v);
        if (!root) {
            if (bit_length(m) > 63)
                throw std::logic_error("interior modulus does not fit 63 bits; instance too large to enumerate");
            nc.m_u64 = to_u64(m);
            nc.red.reserve(size_t(v->n));
            for (int i = v->first; i < v->last; i++)
                nc.red.push_back(to_u64(mod_nonneg(items[size_t(i)], m)));
            if (v->leaf() && v->n >= 9 && fits_u64_core(v->n, m))
                nc.tables = build_quarter_tables(nc.red, &stats->gauge);
        }
        if (!v->leaf()) {
            const Int& mp = assign->mprime_of(v);
            if (bit_length(mp) > 63)
                throw std::logic_error("residue loop bound does not fit 63 bits; instance too large to enumerate");
            nc.mprime_u64 = to_u64(mp);
        }
        nc.built = true;
        return nc;
    }

    ShardRange shard_of(const DissectNode* v, uint64_t mprime) const {
        if (shards) {
            auto it = shards->find(v);
            if (it != shards->end())
                return {std::min(it->second.begin, mprime), std::min(it->second.end, mprime)};
        }
        return {0, mprime};
    }
};

// resident table entries tracked against the run gauge
struct TableSlot {
    MemoryGauge* g = nullptr;
    int64_t held = 0;
    void set(int64_t v) {
        if (g && v != held) g->add(v - held);
        held = v;
    }
    ~TableSlot() { set(0); }
};

std::unique_ptr<SolutionStream> make_node_stream(const std::shared_ptr<EngineCtx>& ctx,
                                                 const DissectNode* u, uint64_t target,
                                                 std::vector<uint64_t> path);

// one call of the join procedure at an internal node: loop over split residues,
// build the left table, probe with right-branch emissions
class DissectStream final : public SolutionStream {
public:
    DissectStream(std::shared_ptr<EngineCtx> ctx, const DissectNode* v, Int target,
                  std::vector<uint64_t> path)
        : ctx_(std::move(ctx)), v_(v), path_(std::move(path)) {
        NodeCache& nc = ctx_->node_cache(v_);
        thr_ = nc.thr;
        root_ = v_->path.empty();
        mprime_ = nc.mprime_u64;
        m_u64_ = nc.m_u64;
        if (root_) {
            t_int_ = std::move(target);
            t_sh_ = low64(t_int_);
        } else {
            t_u64_ = to_u64(target);
        }
        ShardRange sr = ctx_->shard_of(v_, mprime_);
        s_ = sr.begin;
        s_end_ = sr.end;
        shared_ctr_ = ctx_->shared ? ctx_->shared->find(v_, path_) : nullptr;
        table_slot_.g = &ctx_->stats->gauge;
        nl_ = v_->left->n;
    }

    std::optional<SolutionVector> next() override {
        while (!done_) {
            if (ctx_->cancelled()) {
                done_ = true;
                break;
            }
            if (probing_) {
                while (cur_ != end_) {
                    const SolutionVector& y = cur_->second;
                    ++cur_;
                    if (root_ && !confirm_root(y)) continue;
                    if (ctx_->policy.paranoid) paranoid_check(y);
                    uint64_t slot = shared_ctr_ ? shared_ctr_->fetch_add(1) : local_ctr_++;
                    if (slot >= thr_) {
                        if (shared_ctr_ && slot > thr_) ctx_->stats->counter_overshoot.fetch_add(1);
                        bail();
                        return std::nullopt;
                    }
                    emitted_++;
                    if (root_) ctx_->stats->emissions.fetch_add(1, std::memory_order_relaxed);
                    return SolutionVector::concat(y, z_);
                }
                probing_ = false;
            }
            if (!table_ready_) {
                if (s_ >= s_end_) {
                    done_ = true;
                    break;
                }
                if (!build_table()) {  // cancelled mid-build
                    done_ = true;
                    break;
                }
                if (table_.empty()) {  // no left parts: the right branch can't join
                    release_table();
                    s_++;
                    continue;
                }
                right_ = make_node_stream(ctx_, v_->right.get(), right_target(), child_path());
                table_ready_ = true;
            }
            auto z = right_->next();
            if (!z) {
                if (right_->cap_hit()) ctx_->stats->bailouts.fetch_add(1);
                right_.reset();
                release_table();
                table_ready_ = false;
                s_++;
                continue;
            }
            ctx_->stats->probes.fetch_add(1, std::memory_order_relaxed);
            z_ = std::move(*z);
            have_z_sum_ = false;
            uint64_t key = probe_key();
            auto range = table_.equal_range(key);
            cur_ = range.first;
            end_ = range.second;
            probing_ = true;
        }
        return std::nullopt;
    }

private:
    std::vector<uint64_t> child_path() const {
        std::vector<uint64_t> p = path_;
        p.push_back(s_);
        return p;
    }

    uint64_t right_target() const {
        if (root_) {
            Int rt = mod_nonneg(t_int_ - Int(from_u64(s_)), ctx_->assign->mprime_of(v_));
            return to_u64(rt);
        }
        uint64_t tm = t_u64_ % mprime_;
        return sub_mod(tm, s_, mprime_);
    }

    // key of a left part y under this node's join table
    uint64_t left_key(const SolutionVector& y) const {
        const NodeCache& nc = ctx_->cache.at(v_);
        if (root_) {
            if (ctx_->root_fast) {
                uint64_t acc = 0;
                for (int i = 0; i < y.size(); i++)
                    if (y.get(i)) acc += ctx_->shadow[size_t(v_->first + i)];
                return acc;
            }
            Int sum = 0;
            for (int i = 0; i < y.size(); i++)
                if (y.get(i)) sum += ctx_->items[size_t(v_->first + i)];
            return low64(mod_nonneg(sum, ctx_->assign->m_of(v_)));
        }
        uint64_t acc = 0;
        for (int i = 0; i < y.size(); i++)
            if (y.get(i)) acc = add_mod(acc, nc.red[size_t(i)], m_u64_);
        return acc;
    }

    uint64_t probe_key() {
        const NodeCache& nc = ctx_->cache.at(v_);
        if (root_) {
            if (ctx_->root_fast) {
                uint64_t acc = 0;
                for (int j = 0; j < z_.size(); j++)
                    if (z_.get(j)) acc += ctx_->shadow[size_t(v_->first + nl_ + j)];
                return t_sh_ - acc;
            }
            z_sum_ = exact_sum(z_, nl_);
            have_z_sum_ = true;
            return low64(mod_nonneg(t_int_ - z_sum_, ctx_->assign->m_of(v_)));
        }
        uint64_t acc = 0;
        for (int j = 0; j < z_.size(); j++)
            if (z_.get(j)) acc = add_mod(acc, nc.red[size_t(nl_ + j)], m_u64_);
        return sub_mod(t_u64_, acc, m_u64_);
    }

    Int exact_sum(const SolutionVector& x, int offset) const {
        Int s = 0;
        for (int i = 0; i < x.size(); i++)
            if (x.get(i)) s += ctx_->items[size_t(v_->first + offset + i)];
        return s;
    }

    // shadow keys can collide mod 2^64; check the real congruence
    bool confirm_root(const SolutionVector& y) {
        if (!have_z_sum_) {
            z_sum_ = exact_sum(z_, nl_);
            have_z_sum_ = true;
        }
        Int lhs = exact_sum(y, 0) + z_sum_ - t_int_;
        return mod_nonneg(lhs, ctx_->assign->m_of(v_)) == 0;
    }

    void paranoid_check(const SolutionVector& y) const {
        if (root_) return;  // already confirmed exactly
        const NodeCache& nc = ctx_->cache.at(v_);
        uint64_t acc = 0;
        for (int i = 0; i < y.size(); i++)
            if (y.get(i)) acc = add_mod(acc, nc.red[size_t(i)], m_u64_);
        for (int j = 0; j < z_.size(); j++)
            if (z_.get(j)) acc = add_mod(acc, nc.red[size_t(nl_ + j)], m_u64_);
        if (acc != t_u64_) throw std::logic_error("emission failed its node congruence");
    }

    bool build_table() {
        auto left = make_node_stream(ctx_, v_->left.get(), s_, child_path());
        uint64_t pulled = 0;
        while (auto y = left->next()) {
            uint64_t key = left_key(*y);
            table_.emplace(key, std::move(*y));
            ctx_->stats->table_inserts.fetch_add(1, std::memory_order_relaxed);
            table_slot_.set(int64_t(table_.size()));
            if ((++pulled & 0xfff) == 0 && ctx_->cancelled()) return false;
        }
        if (left->cap_hit()) ctx_->stats->bailouts.fetch_add(1);
        return true;
    }

    void release_table() {
        table_.clear();
        table_slot_.set(0);
    }

    void bail() {
        done_ = true;
        cap_hit_ = true;
        ctx_->stats->bailouts.fetch_add(1);
    }

    std::shared_ptr<EngineCtx> ctx_;
    const DissectNode* v_;
    std::vector<uint64_t> path_;
    bool root_ = false;
    uint64_t thr_ = 0, mprime_ = 0, m_u64_ = 0;
    Int t_int_;
    uint64_t t_sh_ = 0, t_u64_ = 0;
    int nl_ = 0;

    std::atomic<uint64_t>* shared_ctr_ = nullptr;
    uint64_t local_ctr_ = 0;

    uint64_t s_ = 0, s_end_ = 0;
    bool done_ = false, table_ready_ = false, probing_ = false;
    std::unordered_multimap<uint64_t, SolutionVector> table_;
    TableSlot table_slot_;
    std::unique_ptr<SolutionStream> right_;
    SolutionVector z_;
    Int z_sum_;
    bool have_z_sum_ = false;
    std::unordered_multimap<uint64_t, SolutionVector>::iterator cur_, end_;
};

std::unique_ptr<SolutionStream> make_node_stream(const std::shared_ptr<EngineCtx>& ctx,
                                                 const DissectNode* u, uint64_t target,
                                                 std::vector<uint64_t> path) {
    if (!u->leaf()) return std::make_unique<DissectStream>(ctx, u, Int(from_u64(target)), std::move(path));
    NodeCache& nc = ctx->node_cache(u);
    StreamLimits lim{nc.thr, &ctx->stats->gauge};
    if (nc.tables) return ss_scan_u64(nc.tables, target, nc.m_u64, lim);
    if (nc.m_u64 != 0 && u->n <= 8) return brute_scan_u64(nc.red, target, nc.m_u64, lim);
    // wide modulus: fall back to the generic four-list stream on the slice
    ModularInstance mi;
    mi.items.assign(ctx->items.begin() + u->first, ctx->items.begin() + u->last);
    mi.target = from_u64(target);
    mi.modulus = ctx->assign->m_of(u);
    return schroeppel_shamir_stream(mi, lim);
}

// adapter for a single-leaf plan: one streaming pass at the root cap
class RootLeafStream final : public SolutionStream {
public:
    RootLeafStream(std::unique_ptr<SolutionStream> inner, RunStats* stats)
        : inner_(std::move(inner)), stats_(stats) {}

    std::optional<SolutionVector> next() override {
        auto r = inner_->next();
        cap_hit_ = inner_->cap_hit();
        if (r) {
            emitted_++;
            stats_->emissions.fetch_add(1, std::memory_order_relaxed);
        } else if (cap_hit_ && !counted_) {
            counted_ = true;
            stats_->bailouts.fetch_add(1);
        }
        return r;
    }

private:
    std::unique_ptr<SolutionStream> inner_;
    RunStats* stats_;
    bool counted_ = false;
};

}  // namespace

std::unique_ptr<SolutionStream> generate_solutions(const ModularInstance& inst,
                                                   const DissectionTree& tree,
                                                   const ModulusAssignment& assign,
                                                   const BailoutPolicy& policy, RunStats& stats,
                                                   const ShardPlan* shards, SharedCounters* shared,
                                                   std::atomic<bool>* cancel) {
    if (inst.n() != tree.n_top) throw std::invalid_argument("instance size does not match the plan");
    if (inst.modulus != assign.m_root) throw std::invalid_argument("instance modulus must equal the assigned root modulus");

    auto ctx = std::make_shared<EngineCtx>();
    ctx->tree = &tree;
    ctx->assign = &assign;
    ctx->policy = policy;
    ctx->stats = &stats;
    ctx->shards = shards;
    ctx->shared = shared;
    ctx->cancel = cancel;
    ctx->items = inst.items;
    ctx->t_root = mod_nonneg(inst.target, assign.m_root);
    ctx->t_shadow = low64(ctx->t_root);
    Int total = 0;
    for (const Int& a : ctx->items) total += a;
    ctx->root_fast = total < assign.m_root;
    ctx->shadow.reserve(ctx->items.size());
    for (const Int& a : ctx->items) ctx->shadow.push_back(low64(a));

    const DissectNode* root = tree.root.get();
    if (root->leaf()) {
        NodeCache& nc = ctx->node_cache(root);
        ModularInstance mi{ctx->items, ctx->t_root, assign.m_root};
        auto inner = schroeppel_shamir_stream(mi, {nc.thr, &stats.gauge});
        // keep the context alive alongside the stream
        struct Holder final : SolutionStream {
            std::shared_ptr<EngineCtx> ctx;
            std::unique_ptr<SolutionStream> s;
            std::optional<SolutionVector> next() override {
                auto r = s->next();
                emitted_ = s->emitted();
                cap_hit_ = s->cap_hit();
                return r;
            }
        };
        auto h = std::make_unique<Holder>();
        h->ctx = ctx;
        h->s = std::make_unique<RootLeafStream>(std::move(inner), &stats);
        return h;
    }
    return std::make_unique<DissectStream>(ctx, root, ctx->t_root, std::vector<uint64_t>{});
}

}  // namespace dissect
