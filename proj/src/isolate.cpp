#include <dissect/isolate.hpp>

#include <dissect/moduli.hpp>

#include <stdexcept>

namespace dissect {

namespace {

Instance canonical_yes() { return Instance{{}, 0}; }
Instance canonical_no() { return Instance{{}, 1}; }

// log2(n*t) > 2^n, evaluated without materializing 2^(2^n) where possible
bool cheaper_exhaustively(int n, const Int& t) {
    if (n == 0) return true;
    if (n > 61) return false;  // would need n*t beyond 2^(2^62) bits
    Int nt = Int(n) * t;
    if (nt == 0) return false;
    long k = 1L << n;
    long bl = bit_length(nt);  // floor(log2) + 1
    if (bl > k + 1) return true;
    if (bl < k + 1) return false;
    return nt != pow2(k);  // boundary: log2(nt) == k is not strictly greater
}

}  // namespace

NormalizeResult normalize(const Instance& inst) {
    NormalizeResult r;
    r.original_n = inst.n();
    if (inst.target == 0) {  // the empty pick always works
        r.kind = NormalizeResult::Kind::trivial_yes;
        r.inst = canonical_yes();
        r.witness = SolutionVector(inst.n());
        return r;
    }
    if (cheaper_exhaustively(inst.n(), inst.target)) {
        int n = inst.n();
        if (n > 30) throw std::logic_error("exhaustive guard fired at an unreasonable size");
        for (uint64_t mask = 0; mask < (uint64_t(1) << n); mask++) {
            Int sum = 0;
            for (int i = 0; i < n; i++)
                if ((mask >> i) & 1) sum += inst.items[size_t(i)];
            if (sum == inst.target) {
                r.kind = NormalizeResult::Kind::trivial_yes;
                r.inst = canonical_yes();
                r.witness = SolutionVector::from_mask(n, mask);
                return r;
            }
        }
        r.kind = NormalizeResult::Kind::trivial_no;
        r.inst = canonical_no();
        return r;
    }
    r.kind = NormalizeResult::Kind::regular;
    r.inst.target = inst.target;
    for (int i = 0; i < inst.n(); i++) {
        if (inst.items[size_t(i)] <= inst.target) {
            r.inst.items.push_back(inst.items[size_t(i)]);
            r.kept.push_back(i);
        }
    }
    if (r.inst.items.empty()) {  // every item exceeds the positive target
        r.kind = NormalizeResult::Kind::trivial_no;
        r.inst = canonical_no();
        r.kept.clear();
    }
    return r;
}

Stage1Result stage1(const Instance& inst, SplitRng& rng) {
    int n = inst.n();
    Stage1Result out;
    if (n == 0) return out;
    Int lo = pow2(3 * n);  // exactly 3n+1 bits
    Int hi = pow2(3 * n + 1) - 1;
    out.p1 = random_prime(lo, hi, rng);
    Int t_red = inst.target % out.p1;
    std::vector<Int> red;
    red.reserve(size_t(n));
    for (const Int& a : inst.items) red.push_back(a % out.p1);
    for (int k = 0; k < n; k++) {
        Instance o;
        o.items = red;
        o.target = t_red + Int(k) * out.p1;
        out.outputs.push_back(std::move(o));
    }
    return out;
}

Int pinned_stage2_prime(int s) {
    if (s < 0) throw std::invalid_argument("negative size guess");
    Int x = pow2(s);
    while (!is_prime(x)) x += 1;
    return x;
}

std::vector<PreparedInstance> stage2(const Instance& inst, SplitRng& rng) {
    int n = inst.n();
    std::vector<PreparedInstance> out;
    Int radix = Int(n) * inst.target + 1;  // lifts live in base nt+1: layers cannot mix
    for (int s = 0; s < n; s++) {
        Int p2 = pinned_stage2_prime(s);
        std::vector<Int> r;
        r.reserve(size_t(n));
        for (int i = 0; i < n; i++) r.push_back(rand_below(rng, p2));
        Int u = rand_below(rng, p2);
        std::vector<Int> lifted;
        lifted.reserve(size_t(n));
        for (int i = 0; i < n; i++) lifted.push_back(inst.items[size_t(i)] + radix * r[size_t(i)]);
        for (int k = 0; k < n; k++) {
            PreparedInstance p;
            p.inst.items = lifted;
            p.inst.target = inst.target + radix * (u + p2 * Int(k));
            p.params.s = s;
            p.params.p2 = p2;
            p.params.r = r;
            p.params.u = u;
            p.params.k2 = k;
            out.push_back(std::move(p));
        }
    }
    return out;
}

PreprocessResult preprocess(const Instance& inst, SplitRng& rng) {
    PreprocessResult res;
    res.norm = normalize(inst);
    if (res.norm.kind != NormalizeResult::Kind::regular) return res;

    const Instance& base = res.norm.inst;
    int n = base.n();
    Stage1Result s1 = stage1(base, rng);
    res.p1 = s1.p1;
    for (int k1 = 0; k1 < int(s1.outputs.size()); k1++) {
        const Instance& mid = s1.outputs[size_t(k1)];
        size_t mid_bits = bit_length(Int(n) * mid.target);
        for (PreparedInstance& p : stage2(mid, rng)) {
            p.params.p1 = s1.p1;
            p.params.k1 = k1;
            if (bit_length(p.inst.target) > size_t(3 * n + 2) + mid_bits)
                throw std::logic_error("stage-2 target outgrew its structural bound");
            res.outputs.push_back(std::move(p));
        }
    }
    return res;
}

SolutionVector inflate_through(const SolutionVector& x, const std::vector<int>& kept, int out_n) {
    if (x.size() != int(kept.size())) throw std::invalid_argument("inflate_through: length mismatch");
    SolutionVector out(out_n);
    for (int i = 0; i < x.size(); i++)
        if (x.get(i)) out.set(kept[size_t(i)], true);
    return out;
}

}  // namespace dissect
