#include <dissect/moduli.hpp>

#include <algorithm>

namespace dissect {

namespace {

uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
    return (unsigned __int128)a * b % m;
}

uint64_t powmod_u64(uint64_t base, uint64_t exp, uint64_t m) {
    uint64_t r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod_u64(r, base, m);
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    return r;
}

// deterministic for all 64-bit inputs with this witness set
bool miller_rabin_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

}  // namespace

bool is_prime(const Int& x) {
    if (x < 2) return false;
    if (fits_u64(x)) return miller_rabin_u64(to_u64(x));
    return mpz_probab_prime_p(x.get_mpz_t(), 40) > 0;
}

Int random_prime(const Int& lo, const Int& hi, SplitRng& rng) {
    if (lo < 2 || hi < lo) throw std::domain_error("random_prime needs 2 <= lo <= hi");
    long attempts = 64 * (long)bit_length(hi);
    for (long i = 0; i < attempts; ++i) {
        Int c = rand_range(rng, lo, hi);
        if (is_prime(c)) return c;
    }
    throw SamplingExhausted("no prime found in [" + lo.get_str() + ", " + hi.get_str() + "]");
}

ModulusAssignment assign_moduli(const DissectionTree& tree, long b, const SplitRng& rng) {
    if (b < 1) throw std::domain_error("assign_moduli needs b >= 1");
    ModulusAssignment a;
    a.n_top = tree.n_top;
    a.b = b;

    Int product = 1;
    for (size_t i = 0; i < tree.deltas.size(); ++i) {
        Rational dn = tree.deltas[i] * Rational(tree.n_top);
        long e = std::max(2L, dn.ceil().get_si());
        PrimeSample s;
        s.lo = pow2(e);
        s.hi = pow2(e + 1);
        s.level = int(i) + 1;
        SplitRng child = rng.split(i + 1);
        s.value = random_prime(s.lo, s.hi, child);
        product *= s.value;
        a.primes.push_back(s);
        a.level_products.push_back(product);
    }
    a.mprime_root = product;

    // pad prime: smallest interval [X, 2X] whose low end already pushes the
    // product past 2^b
    Int x = std::max(Int(4), ceil_div(pow2(b), a.mprime_root));
    a.pad.lo = x;
    a.pad.hi = 2 * x;
    a.pad.level = 0;
    SplitRng child = rng.split(0);
    a.pad.value = random_prime(a.pad.lo, a.pad.hi, child);
    a.m_root = a.pad.value * a.mprime_root;

    for (const DissectNode* v : tree.nodes) {
        bool root = v->path.empty();
        if (!v->leaf() || root) {
            if (root) {
                a.mprime[v] = a.mprime_root;
            } else {
                auto it = std::find(tree.gamma_levels.begin(), tree.gamma_levels.end(), v->gamma);
                if (it == tree.gamma_levels.end())
                    throw std::logic_error("internal node gamma missing from levels");
                a.mprime[v] = a.level_products[size_t(it - tree.gamma_levels.begin())];
            }
        }
    }
    // outer modulus: walk the tree top-down
    for (const DissectNode* v : tree.nodes) {
        if (v->path.empty()) {
            a.m[v] = a.m_root;
        }
        if (!v->leaf()) {
            a.m[v->left.get()] = a.mprime.at(v);
            a.m[v->right.get()] = a.mprime.at(v);
        }
    }
    return a;
}

Rational divisor_hit_probability_estimate(const ModulusAssignment& a, long z_bits) {
    if (z_bits < 1) throw std::domain_error("z_bits must be positive");
    Int nk = 1;
    for (size_t i = 0; i < a.primes.size(); ++i) nk *= a.n_top;
    if (nk >= a.mprime_root) return Rational(1);
    return Rational(nk, a.mprime_root);
}

LatticeReport check_lattice(const DissectionTree& tree, const ModulusAssignment& a) {
    LatticeReport r;
    size_t k = tree.deltas.size();

    r.window_ok = true;
    for (const PrimeSample& s : a.primes)
        if (s.value < s.lo || s.value > s.hi || !is_prime(s.value)) r.window_ok = false;
    if (a.pad.value < a.pad.lo || a.pad.value > a.pad.hi) r.window_ok = false;
    for (const DissectNode* v : tree.nodes) {
        if (v->leaf()) continue;  // non-root leaves carry no M'
        const Int& mp = a.mprime.at(v);
        Int lo = 1, hi = 1;  // product of the windows for this node's levels
        for (size_t i = 0; i < k; ++i) {
            if (!(tree.gamma_levels[i] <= v->gamma)) break;  // levels ascend
            lo *= a.primes[i].lo;
            hi *= a.primes[i].hi;
        }
        if (mp < lo || mp > hi) r.window_ok = false;
    }

    r.chain_ok = true;
    for (const DissectNode* u : tree.nodes) {
        if (u->leaf()) continue;
        for (const DissectNode* v : tree.nodes) {
            if (v->leaf()) continue;
            if (u->gamma <= v->gamma && a.mprime.at(v) % a.mprime.at(u) != 0) r.chain_ok = false;
        }
    }

    r.parent_ok = true;
    for (const DissectNode* v : tree.nodes) {
        if (!v->leaf()) {
            if (a.m.at(v->left.get()) != a.mprime.at(v)) r.parent_ok = false;
            if (a.m.at(v->right.get()) != a.mprime.at(v)) r.parent_ok = false;
        }
    }

    r.root_ok = a.m_root == a.pad.value * a.mprime_root && a.m_root >= pow2(a.b) &&
                is_prime(a.pad.value);
    return r;
}

}  // namespace dissect
