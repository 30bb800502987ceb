#pragma once

#include <gmpxx.h>
#include <cstdint>
#include <stdexcept>

namespace dissect {

using Int = mpz_class;

// number of bits in |x|; 0 for x == 0
inline size_t bit_length(const Int& x) {
    if (x == 0) return 0;
    return mpz_sizeinbase(x.get_mpz_t(), 2);
}

inline Int pow2(unsigned long k) {
    Int r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, k);
    return r;
}

inline Int ceil_div(const Int& a, const Int& b) {
    Int q;
    mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline bool fits_u64(const Int& x) {
    return x >= 0 && bit_length(x) <= 64;
}

// x mod 2^64 for x >= 0
inline uint64_t low64(const Int& x) {
    Int r;
    mpz_fdiv_r_2exp(r.get_mpz_t(), x.get_mpz_t(), 64);
    uint64_t lo = mpz_getlimbn(r.get_mpz_t(), 0);
    if (GMP_LIMB_BITS < 64 && mpz_size(r.get_mpz_t()) > 1)
        lo |= uint64_t(mpz_getlimbn(r.get_mpz_t(), 1)) << 32;
    return lo;
}

inline uint64_t to_u64(const Int& x) {
    if (!fits_u64(x)) throw std::overflow_error("value does not fit in 64 bits");
    return low64(x);
}

inline Int from_u64(uint64_t v) {
    Int r;
    mpz_import(r.get_mpz_t(), 1, -1, sizeof(v), 0, 0, &v);
    return r;
}

}  // namespace dissect
