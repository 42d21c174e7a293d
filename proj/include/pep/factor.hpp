#pragma once

// Integer factorization helpers used to find place supports: trial division
// for desk-scale inputs, Miller-Rabin + Pollard rho for the occasional large
// cofactor.

#include <gmpxx.h>

#include <algorithm>
#include <map>
#include <vector>

namespace pep {

inline bool is_probable_prime(const mpz_class& n) {
    return mpz_probab_prime_p(n.get_mpz_t(), 40) != 0;
}

namespace detail {

inline mpz_class pollard_rho(const mpz_class& n, unsigned long c) {
    mpz_class x = 2, y = 2, d = 1, t;
    while (d == 1) {
        x = (x * x + c) % n;
        y = (y * y + c) % n;
        y = (y * y + c) % n;
        t = x - y;
        if (t == 0) return 0;  // cycle without factor; retry with other c
        mpz_gcd(d.get_mpz_t(), t.get_mpz_t(), n.get_mpz_t());
    }
    return d == n ? 0 : d;
}

inline void factor_into(const mpz_class& n, std::map<mpz_class, unsigned>& out) {
    if (n == 1) return;
    if (is_probable_prime(n)) {
        ++out[n];
        return;
    }
    for (unsigned long c = 1;; ++c) {
        mpz_class d = pollard_rho(n, c);
        if (d != 0) {
            factor_into(d, out);
            factor_into(n / d, out);
            return;
        }
    }
}

}  // namespace detail

// Factorization of |n| into prime powers; n must be nonzero.
inline std::map<mpz_class, unsigned> factorize(mpz_class n) {
    std::map<mpz_class, unsigned> out;
    if (n < 0) n = -n;
    if (n <= 1) return out;
    for (long p : {2L, 3L, 5L, 7L, 11L, 13L, 17L, 19L, 23L, 29L, 31L, 37L}) {
        while (n % p == 0) {
            ++out[mpz_class(p)];
            n /= p;
        }
    }
    mpz_class p = 41;
    while (n > 1 && p * p <= n && p < 100000) {
        while (n % p == 0) {
            ++out[p];
            n /= p;
        }
        p += 2;
    }
    if (n > 1) detail::factor_into(n, out);
    return out;
}

// p-adic valuation of a nonzero rational.
inline long padic_valuation(const mpq_class& x, const mpz_class& p) {
    long v = 0;
    mpz_class num = x.get_num(), den = x.get_den();
    while (num % p == 0) {
        num /= p;
        ++v;
    }
    while (den % p == 0) {
        den /= p;
        --v;
    }
    return v;
}

}  // namespace pep
