#include <dissect/streams.hpp>

#include <algorithm>
#include <bit>
#include <queue>
#include <stdexcept>
#include <vector>

namespace dissect {

namespace {

// tracks one resident quantity against a gauge; releases on destruction
struct GaugeSlot {
    MemoryGauge* g = nullptr;
    int64_t held = 0;

    GaugeSlot() = default;
    explicit GaugeSlot(MemoryGauge* gauge) : g(gauge) {}
    GaugeSlot(const GaugeSlot&) = delete;
    GaugeSlot& operator=(const GaugeSlot&) = delete;
    GaugeSlot(GaugeSlot&& o) noexcept : g(o.g), held(o.held) { o.g = nullptr; o.held = 0; }
    GaugeSlot& operator=(GaugeSlot&& o) noexcept {
        if (this != &o) {
            set(0);
            g = o.g;
            held = o.held;
            o.g = nullptr;
            o.held = 0;
        }
        return *this;
    }
    ~GaugeSlot() { set(0); }

    void set(int64_t v) {
        if (g && v != held) g->add(v - held);
        held = v;
    }
};

template <class Sum>
struct Entry {
    Sum sum;
    uint64_t mask;  // item-indexed within its slice
};

// all 2^k subset sums of items[0..k), sorted by (sum, mask)
template <class Sum>
std::vector<Entry<Sum>> subset_list(const Sum* items, int k) {
    if (k < 0 || k > 32) throw std::invalid_argument("subset_list: slice too large");
    size_t m = size_t(1) << k;
    std::vector<Entry<Sum>> out(m);
    out[0] = {Sum(0), 0};
    for (size_t x = 1; x < m; x++) {
        size_t prev = x & (x - 1);
        out[x].sum = out[prev].sum + items[std::countr_zero(x)];
        out[x].mask = x;
    }
    std::sort(out.begin(), out.end(), [](const Entry<Sum>& a, const Entry<Sum>& b) {
        if (a.sum != b.sum) return a.sum < b.sum;
        return a.mask < b.mask;
    });
    return out;
}

template <class Sum>
struct Group {
    Sum value{};
    std::vector<uint64_t> masks;
};

// walks a sorted list as maximal runs of equal sums
template <class Sum>
class ArraySource {
public:
    ArraySource(const std::vector<Entry<Sum>>* list, bool ascending, int shift)
        : list_(list), asc_(ascending), shift_(shift) {}

    void reset() { pos_ = asc_ ? 0 : list_->size(); }

    bool next(Group<Sum>& out) {
        out.masks.clear();
        if (asc_) {
            if (pos_ == list_->size()) return false;
            out.value = (*list_)[pos_].sum;
            while (pos_ < list_->size() && (*list_)[pos_].sum == out.value)
                out.masks.push_back((*list_)[pos_++].mask << shift_);
        } else {
            if (pos_ == 0) return false;
            out.value = (*list_)[pos_ - 1].sum;
            while (pos_ > 0 && (*list_)[pos_ - 1].sum == out.value) {
                out.masks.push_back((*list_)[pos_ - 1].mask << shift_);
                pos_--;
            }
        }
        return true;
    }

private:
    const std::vector<Entry<Sum>>* list_;
    bool asc_;
    int shift_;  // applied to stored masks on output
    size_t pos_ = 0;
};

// streams pairwise sums of two sorted quarter lists in sorted order via a
// heap holding at most |Q1| entries (one per left index)
template <class Sum>
class HeapSource {
public:
    HeapSource(const std::vector<Entry<Sum>>* q1, const std::vector<Entry<Sum>>* q2,
               int q2shift, bool ascending, MemoryGauge* gauge)
        : q1_(q1), q2_(q2), shift_(q2shift), asc_(ascending), slot_(gauge) {}

    void reset() {
        heap_.clear();
        heap_.reserve(q1_->size());
        uint32_t j0 = asc_ ? 0 : uint32_t(q2_->size() - 1);
        for (uint32_t i = 0; i < q1_->size(); i++)
            heap_.push_back({(*q1_)[i].sum + (*q2_)[j0].sum, i, j0});
        std::make_heap(heap_.begin(), heap_.end(), [this](const Ent& a, const Ent& b) { return later(a, b); });
        slot_.set(int64_t(heap_.size()));
    }

    bool next(Group<Sum>& out) {
        out.masks.clear();
        if (heap_.empty()) return false;
        out.value = heap_.front().key;
        while (!heap_.empty() && heap_.front().key == out.value) {
            Ent e = heap_.front();
            std::pop_heap(heap_.begin(), heap_.end(), [this](const Ent& a, const Ent& b) { return later(a, b); });
            heap_.pop_back();
            out.masks.push_back((*q1_)[e.i].mask | ((*q2_)[e.j].mask << shift_));
            bool more = asc_ ? e.j + 1 < q2_->size() : e.j > 0;
            if (more) {
                uint32_t j = asc_ ? e.j + 1 : e.j - 1;
                heap_.push_back({(*q1_)[e.i].sum + (*q2_)[j].sum, e.i, j});
                std::push_heap(heap_.begin(), heap_.end(), [this](const Ent& a, const Ent& b) { return later(a, b); });
            }
        }
        slot_.set(int64_t(heap_.size()));
        return true;
    }

private:
    struct Ent {
        Sum key;
        uint32_t i, j;
    };
    // strict-weak "a comes later than b" so the heap pops the right extreme
    // with deterministic (i, j) tie-breaking
    bool later(const Ent& a, const Ent& b) const {
        if (a.key != b.key) return asc_ ? a.key > b.key : a.key < b.key;
        if (a.i != b.i) return a.i > b.i;
        return a.j > b.j;
    }

    const std::vector<Entry<Sum>>* q1_;
    const std::vector<Entry<Sum>>* q2_;
    int shift_;
    bool asc_;
    std::vector<Ent> heap_;
    GaugeSlot slot_;
};

// meets an ascending left-half source against a descending right-half source
// once per integer target t + j*M
template <class Sum, class LSrc, class RSrc>
class TwoSidedScan final : public SolutionStream {
public:
    TwoSidedScan(LSrc l, RSrc r, Sum total, Sum t0, Sum step, int nl, int n, StreamLimits lim)
        : l_(std::move(l)), r_(std::move(r)), total_(std::move(total)), t0_(std::move(t0)),
          step_(std::move(step)), nl_(nl), n_(n), cap_(lim.cap),
          lslot_(lim.gauge), rslot_(lim.gauge) {}

    std::optional<SolutionVector> next() override {
        while (!done_) {
            if (cap_ && emitted_ == *cap_) {
                cap_hit_ = true;
                done_ = true;
                break;
            }
            switch (phase_) {
                case Phase::start_target: {
                    if (!have_target_) {
                        target_ = t0_;
                        have_target_ = true;
                    } else {
                        target_ += step_;
                    }
                    if (target_ > total_) {
                        done_ = true;
                        break;
                    }
                    l_.reset();
                    r_.reset();
                    if (!pull_left() || !pull_right()) {
                        done_ = true;  // a half-list is never empty, but stay safe
                        break;
                    }
                    phase_ = Phase::compare;
                    break;
                }
                case Phase::compare: {
                    Sum s = lg_.value + rg_.value;
                    if (s == target_) {
                        li_ = ri_ = 0;
                        phase_ = Phase::emit;
                    } else if (s < target_) {
                        if (!pull_left()) phase_ = Phase::start_target;
                    } else {
                        if (!pull_right()) phase_ = Phase::start_target;
                    }
                    break;
                }
                case Phase::emit: {
                    if (li_ == lg_.masks.size()) {
                        // cross product exhausted; both sides must move
                        bool more = pull_left() && pull_right();
                        phase_ = more ? Phase::compare : Phase::start_target;
                        break;
                    }
                    uint64_t full = lg_.masks[li_] | (rg_.masks[ri_] << nl_);
                    if (++ri_ == rg_.masks.size()) {
                        ri_ = 0;
                        li_++;
                    }
                    emitted_++;
                    return SolutionVector::from_mask(n_, full);
                }
            }
        }
        return std::nullopt;
    }

private:
    bool pull_left() {
        bool ok = l_.next(lg_);
        lslot_.set(int64_t(lg_.masks.size()));
        return ok;
    }
    bool pull_right() {
        bool ok = r_.next(rg_);
        rslot_.set(int64_t(rg_.masks.size()));
        return ok;
    }

    enum class Phase { start_target, compare, emit };

    LSrc l_;
    RSrc r_;
    Sum total_, t0_, step_;
    int nl_, n_;
    std::optional<uint64_t> cap_;
    GaugeSlot lslot_, rslot_;

    Phase phase_ = Phase::start_target;
    bool have_target_ = false;
    bool done_ = false;
    Sum target_{};
    Group<Sum> lg_, rg_;
    size_t li_ = 0, ri_ = 0;
};

// lexicographic mask walk with an incremental modular sum
template <class Sum>
class BruteScan final : public SolutionStream {
public:
    // weights[j] is the item shown at string position n-1-j (so counting the
    // mask upward walks the strings in lexicographic order)
    BruteScan(std::vector<Sum> items, Sum target, Sum modulus, StreamLimits lim)
        : t_(std::move(target)), m_(std::move(modulus)), cap_(lim.cap) {
        n_ = int(items.size());
        for (int j = 0; j < n_; j++) weights_.push_back(items[size_t(n_ - 1 - j)] % m_);
        sum_ = Sum(0);
    }

    std::optional<SolutionVector> next() override {
        while (!done_) {
            if (cap_ && emitted_ == *cap_) {
                cap_hit_ = true;
                done_ = true;
                break;
            }
            if (!started_) {
                started_ = true;
            } else if (n_ < 64 && mask_ + 1 == (uint64_t(1) << n_)) {
                done_ = true;
                break;
            } else {
                uint64_t next_mask = mask_ + 1;
                int hi = std::countr_zero(next_mask);  // bits below hi flip 1 -> 0
                for (int b = 0; b < hi; b++) mod_sub(weights_[size_t(b)]);
                mod_add(weights_[size_t(hi)]);
                mask_ = next_mask;
            }
            if (sum_ == t_) {
                emitted_++;
                uint64_t item_mask = 0;  // reverse bit j -> item n-1-j
                for (int j = 0; j < n_; j++)
                    if ((mask_ >> j) & 1) item_mask |= uint64_t(1) << (n_ - 1 - j);
                return SolutionVector::from_mask(n_, item_mask);
            }
        }
        return std::nullopt;
    }

private:
    void mod_add(const Sum& w) {
        sum_ += w;
        if (sum_ >= m_) sum_ -= m_;
    }
    void mod_sub(const Sum& w) {
        if (sum_ < w) sum_ += m_;
        sum_ -= w;
    }

    std::vector<Sum> weights_;
    Sum t_, m_;
    std::optional<uint64_t> cap_;
    int n_;
    Sum sum_;
    uint64_t mask_ = 0;
    bool started_ = false, done_ = false;
};

struct Halves {
    int nl, nr, q1, q2, q3, q4;
};

Halves split4(int n) {
    Halves h;
    h.nl = n / 2;
    h.nr = n - h.nl;
    h.q1 = h.nl / 2;
    h.q2 = h.nl - h.q1;
    h.q3 = h.nr / 2;
    h.q4 = h.nr - h.q3;
    return h;
}

template <class Sum>
std::vector<Sum> reduced_items(const ModularInstance& inst);

template <>
std::vector<uint64_t> reduced_items<uint64_t>(const ModularInstance& inst) {
    uint64_t m = to_u64(inst.modulus);
    std::vector<uint64_t> r;
    r.reserve(size_t(inst.n()));
    for (const Int& a : inst.items) {
        Int q = a % inst.modulus;
        r.push_back(to_u64(q) % m);
    }
    return r;
}

template <>
std::vector<Int> reduced_items<Int>(const ModularInstance& inst) {
    std::vector<Int> r;
    r.reserve(size_t(inst.n()));
    for (const Int& a : inst.items) r.push_back(a % inst.modulus);
    return r;
}

template <class Sum>
Sum reduced_target(const ModularInstance& inst);

template <>
uint64_t reduced_target<uint64_t>(const ModularInstance& inst) {
    return to_u64(inst.target % inst.modulus);
}
template <>
Int reduced_target<Int>(const ModularInstance& inst) {
    return inst.target % inst.modulus;
}

template <class Sum>
Sum step_of(const ModularInstance& inst);

template <>
uint64_t step_of<uint64_t>(const ModularInstance& inst) {
    return to_u64(inst.modulus);
}
template <>
Int step_of<Int>(const ModularInstance& inst) {
    return inst.modulus;
}

// owns the two sorted half-lists for a meet-in-the-middle stream
template <class Sum>
class HsStream final : public SolutionStream {
public:
    HsStream(const ModularInstance& inst, StreamLimits lim) : slot_(lim.gauge) {
        auto red = reduced_items<Sum>(inst);
        int n = inst.n();
        int nl = n / 2;
        left_ = subset_list<Sum>(red.data(), nl);
        right_ = subset_list<Sum>(red.data() + nl, n - nl);
        slot_.set(int64_t(left_.size() + right_.size()));
        Sum total(0);
        for (const Sum& x : red) total += x;
        scan_.emplace(ArraySource<Sum>(&left_, true, 0), ArraySource<Sum>(&right_, false, 0),
                      std::move(total), reduced_target<Sum>(inst), step_of<Sum>(inst), nl, n, lim);
    }

    std::optional<SolutionVector> next() override {
        auto r = scan_->next();
        emitted_ = scan_->emitted();
        cap_hit_ = scan_->cap_hit();
        return r;
    }

private:
    std::vector<Entry<Sum>> left_, right_;
    GaugeSlot slot_;
    std::optional<TwoSidedScan<Sum, ArraySource<Sum>, ArraySource<Sum>>> scan_;
};

// owns its quarter lists (mpz flavor); the u64 flavor shares QuarterTables
template <class Sum>
class SsStream final : public SolutionStream {
public:
    SsStream(const ModularInstance& inst, StreamLimits lim) : slot_(lim.gauge) {
        auto red = reduced_items<Sum>(inst);
        int n = inst.n();
        h_ = split4(n);
        a1_ = subset_list<Sum>(red.data(), h_.q1);
        a2_ = subset_list<Sum>(red.data() + h_.q1, h_.q2);
        b1_ = subset_list<Sum>(red.data() + h_.nl, h_.q3);
        b2_ = subset_list<Sum>(red.data() + h_.nl + h_.q3, h_.q4);
        slot_.set(int64_t(a1_.size() + a2_.size() + b1_.size() + b2_.size()));
        Sum total(0);
        for (const Sum& x : red) total += x;
        scan_.emplace(HeapSource<Sum>(&a1_, &a2_, h_.q1, true, lim.gauge),
                      HeapSource<Sum>(&b1_, &b2_, h_.q3, false, lim.gauge),
                      std::move(total), reduced_target<Sum>(inst), step_of<Sum>(inst), h_.nl, n, lim);
    }

    std::optional<SolutionVector> next() override {
        auto r = scan_->next();
        emitted_ = scan_->emitted();
        cap_hit_ = scan_->cap_hit();
        return r;
    }

private:
    Halves h_{};
    std::vector<Entry<Sum>> a1_, a2_, b1_, b2_;
    GaugeSlot slot_;
    std::optional<TwoSidedScan<Sum, HeapSource<Sum>, HeapSource<Sum>>> scan_;
};

}  // namespace

// sorted quarter lists over reduced items, shared across scans with varying targets
class QuarterTables {
public:
    QuarterTables(std::vector<uint64_t> reduced, MemoryGauge* gauge) : gauge_(gauge), slot_(gauge) {
        n_ = int(reduced.size());
        h_ = split4(n_);
        a1_ = subset_list<uint64_t>(reduced.data(), h_.q1);
        a2_ = subset_list<uint64_t>(reduced.data() + h_.q1, h_.q2);
        b1_ = subset_list<uint64_t>(reduced.data() + h_.nl, h_.q3);
        b2_ = subset_list<uint64_t>(reduced.data() + h_.nl + h_.q3, h_.q4);
        slot_.set(int64_t(a1_.size() + a2_.size() + b1_.size() + b2_.size()));
        total_ = 0;
        for (uint64_t x : reduced) total_ += x;
    }

    int n() const { return n_; }
    uint64_t total() const { return total_; }

    int n_;
    Halves h_;
    std::vector<Entry<uint64_t>> a1_, a2_, b1_, b2_;
    uint64_t total_;
    MemoryGauge* gauge_;

private:
    GaugeSlot slot_;
};

namespace {

// scan over shared tables; keeps the tables alive for its lifetime
class SsScanU64 final : public SolutionStream {
public:
    SsScanU64(std::shared_ptr<QuarterTables> t, uint64_t target, uint64_t modulus, StreamLimits lim)
        : tables_(std::move(t)),
          scan_(HeapSource<uint64_t>(&tables_->a1_, &tables_->a2_, tables_->h_.q1, true, lim.gauge),
                HeapSource<uint64_t>(&tables_->b1_, &tables_->b2_, tables_->h_.q3, false, lim.gauge),
                tables_->total(), target % modulus, modulus, tables_->h_.nl, tables_->n(), lim) {}

    std::optional<SolutionVector> next() override {
        auto r = scan_.next();
        emitted_ = scan_.emitted();
        cap_hit_ = scan_.cap_hit();
        return r;
    }

private:
    std::shared_ptr<QuarterTables> tables_;
    TwoSidedScan<uint64_t, HeapSource<uint64_t>, HeapSource<uint64_t>> scan_;
};

}  // namespace

bool fits_u64_core(int n, const Int& modulus) {
    return n <= 64 && modulus >= 1 && bit_length(modulus) <= 57;
}

// --- public factories --------------------------------------------------------

std::unique_ptr<SolutionStream> brute_force_stream(const ModularInstance& inst, StreamLimits lim) {
    if (inst.n() > 32) throw std::invalid_argument("brute force is limited to n <= 32");
    if (inst.modulus < 1) throw std::invalid_argument("modulus must be positive");
    if (fits_u64_core(inst.n(), inst.modulus))
        return std::make_unique<BruteScan<uint64_t>>(reduced_items<uint64_t>(inst),
                                                     reduced_target<uint64_t>(inst),
                                                     to_u64(inst.modulus), lim);
    return std::make_unique<BruteScan<Int>>(reduced_items<Int>(inst), reduced_target<Int>(inst),
                                            inst.modulus, lim);
}

std::unique_ptr<SolutionStream> brute_scan_u64(std::vector<uint64_t> reduced, uint64_t target,
                                               uint64_t modulus, StreamLimits lim) {
    if (reduced.size() > 63) throw std::invalid_argument("brute_scan_u64: n too large");
    return std::make_unique<BruteScan<uint64_t>>(std::move(reduced), target % modulus, modulus, lim);
}

std::unique_ptr<SolutionStream> horowitz_sahni_stream(const ModularInstance& inst, StreamLimits lim) {
    if (inst.n() > 64) throw std::invalid_argument("meet in the middle is limited to n <= 64");
    if (inst.modulus < 1) throw std::invalid_argument("modulus must be positive");
    if (fits_u64_core(inst.n(), inst.modulus)) return std::make_unique<HsStream<uint64_t>>(inst, lim);
    return std::make_unique<HsStream<Int>>(inst, lim);
}

std::unique_ptr<SolutionStream> schroeppel_shamir_stream(const ModularInstance& inst, StreamLimits lim) {
    if (inst.n() > 64) throw std::invalid_argument("four-list enumeration is limited to n <= 64");
    if (inst.modulus < 1) throw std::invalid_argument("modulus must be positive");
    if (inst.n() < 4) return brute_force_stream(inst, lim);
    if (fits_u64_core(inst.n(), inst.modulus)) return std::make_unique<SsStream<uint64_t>>(inst, lim);
    return std::make_unique<SsStream<Int>>(inst, lim);
}

std::shared_ptr<QuarterTables> build_quarter_tables(std::vector<uint64_t> reduced, MemoryGauge* gauge) {
    return std::make_shared<QuarterTables>(std::move(reduced), gauge);
}

std::unique_ptr<SolutionStream> ss_scan_u64(std::shared_ptr<QuarterTables> tables, uint64_t target,
                                            uint64_t modulus, StreamLimits lim) {
    if (tables->n() < 4) throw std::invalid_argument("ss_scan_u64 needs n >= 4");
    return std::make_unique<SsScanU64>(std::move(tables), target, modulus, lim);
}

}  // namespace dissect
