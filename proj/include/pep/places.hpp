#pragma once

// Places of Q and quadratic fields with absolute values normalized so the
// product formula holds exactly: ||x||_v = |N_{K_v/Q_p}(x)|_p at finite v
// and |sigma(x)|^{[K_v:R]} at archimedean v.
//
// Finite-place valuations are exact integers. Split places are told apart
// by Hensel-lifted roots of x^2 - d (or of the minimal polynomial of
// (1+sqrt d)/2 when p = 2 and d = 1 mod 4, to absorb the index divisor).

#include <gmpxx.h>

#include <algorithm>
#include <climits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pep/errors.hpp"
#include "pep/factor.hpp"
#include "pep/field.hpp"
#include "pep/real.hpp"

namespace pep {

enum class PlaceKind { Archimedean, Finite };

struct Place {
    PlaceKind kind = PlaceKind::Finite;
    // archimedean data
    int embedding = 0;        // 0: sqrt(d) -> +sqrt(d); 1: -> -sqrt(d)
    bool complex_pair = false;
    // finite data
    mpz_class p = 0;
    int ram_e = 1;
    int res_f = 1;
    mpz_class root_label = -1;  // split places: residue of the root mod p
    bool theta_basis = false;   // p = 2, d = 1 mod 8: coordinates over (1, (1+sqrt d)/2)

    bool is_finite() const { return kind == PlaceKind::Finite; }
    int local_degree() const {
        if (kind == PlaceKind::Archimedean) return complex_pair ? 2 : 1;
        return ram_e * res_f;
    }

    friend bool operator==(const Place& x, const Place& y) {
        if (x.kind != y.kind) return false;
        if (x.kind == PlaceKind::Archimedean) return x.embedding == y.embedding && x.complex_pair == y.complex_pair;
        return x.p == y.p && x.root_label == y.root_label;
    }
    friend bool operator<(const Place& x, const Place& y) {
        if (x.kind != y.kind) return x.kind == PlaceKind::Archimedean;
        if (x.kind == PlaceKind::Archimedean) return x.embedding < y.embedding;
        if (x.p != y.p) return x.p < y.p;
        return x.root_label < y.root_label;
    }

    std::string str() const {
        if (kind == PlaceKind::Archimedean)
            return complex_pair ? "v_inf(C)" : (embedding == 0 ? "v_inf" : "v_inf'");
        std::string s = "v_" + p.get_str();
        if (root_label >= 0) s += "(" + root_label.get_str() + ")";
        return s;
    }
};

inline std::vector<Place> archimedean_places(const FieldDescriptor& f) {
    std::vector<Place> out;
    Place v;
    v.kind = PlaceKind::Archimedean;
    if (f.is_rational()) {
        out.push_back(v);
    } else if (f.is_imaginary_quadratic()) {
        v.complex_pair = true;
        out.push_back(v);
    } else {
        out.push_back(v);
        v.embedding = 1;
        out.push_back(v);
    }
    return out;
}

namespace detail {

// Tonelli-Shanks square root of a mod odd prime p; a must be a QR.
inline mpz_class sqrt_mod_p(const mpz_class& a, const mpz_class& p) {
    mpz_class q = p - 1;
    unsigned long s = 0;
    while (q % 2 == 0) {
        q /= 2;
        ++s;
    }
    mpz_class r;
    if (s == 1) {
        mpz_class e = (p + 1) / 4;
        mpz_powm(r.get_mpz_t(), a.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
        return r;
    }
    mpz_class z = 2;
    while (mpz_legendre(z.get_mpz_t(), p.get_mpz_t()) != -1) ++z;
    mpz_class c, t, e;
    unsigned long m = s;
    mpz_powm(c.get_mpz_t(), z.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
    mpz_powm(t.get_mpz_t(), a.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
    e = (q + 1) / 2;
    mpz_powm(r.get_mpz_t(), a.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
    while (t != 1) {
        mpz_class t2 = t;
        unsigned long i = 0;
        while (t2 != 1) {
            t2 = t2 * t2 % p;
            ++i;
        }
        mpz_class b = c;
        for (unsigned long j = 0; j + i + 1 < m; ++j) b = b * b % p;
        m = i;
        c = b * b % p;
        t = t * c % p;
        r = r * b % p;
    }
    return r;
}

}  // namespace detail

// Splitting type of p in Q(sqrt d) (p prime). The mod-p factorization of
// x^2 - d decides it for odd p; d mod 8 decides p = 2.
inline std::vector<Place> places_above(const mpz_class& p, const FieldDescriptor& f) {
    if (!is_probable_prime(p)) throw std::invalid_argument("places_above: p not prime");
    std::vector<Place> out;
    Place v;
    v.kind = PlaceKind::Finite;
    v.p = p;
    if (f.is_rational()) {
        out.push_back(v);
        return out;
    }
    mpz_class d(f.d);
    if (p == 2) {
        long dmod4 = mpz_class(((d % 4) + 4) % 4).get_si();
        if (dmod4 == 2 || dmod4 == 3) {
            v.ram_e = 2;
            out.push_back(v);
        } else {
            long dmod8 = mpz_class(((d % 8) + 8) % 8).get_si();
            if (dmod8 == 1) {
                // split; roots of y^2 - y + (1-d)/4 mod 2 are 0 and 1
                v.theta_basis = true;
                v.root_label = 0;
                out.push_back(v);
                v.root_label = 1;
                out.push_back(v);
            } else {  // d = 5 mod 8: inert
                v.res_f = 2;
                out.push_back(v);
            }
        }
        return out;
    }
    mpz_class dm = d % p;
    if (dm < 0) dm += p;
    if (dm == 0) {
        v.ram_e = 2;
        out.push_back(v);
        return out;
    }
    if (mpz_legendre(dm.get_mpz_t(), p.get_mpz_t()) == 1) {
        mpz_class t = detail::sqrt_mod_p(dm, p);
        mpz_class t2 = p - t;
        v.root_label = std::min(t, t2);
        out.push_back(v);
        v.root_label = std::max(t, t2);
        out.push_back(v);
    } else {
        v.res_f = 2;
        out.push_back(v);
    }
    return out;
}

namespace detail {

// Valuation of x at a split place: p-power content plus the Hensel depth of
// the labeled root against the element's coordinates.
inline long split_valuation(const FieldElement& x, const Place& v) {
    const mpz_class& p = v.p;
    // coordinates over (1, sqrt d), or (1, theta) with theta = (1+sqrt d)/2
    mpq_class u0 = x.a(), u1 = x.b();
    if (v.theta_basis) {
        u0 = x.a() - x.b();
        u1 = 2 * x.b();
    }
    long s0 = u0 == 0 ? LONG_MAX : padic_valuation(u0, p);
    long s1 = u1 == 0 ? LONG_MAX : padic_valuation(u1, p);
    long s = std::min(s0, s1);
    mpz_class pw;
    mpz_pow_ui(pw.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(s >= 0 ? s : -s));
    mpq_class scale = s >= 0 ? mpq_class(pw) : mpq_class(1) / mpq_class(pw);
    mpq_class a = u0 / scale, b = u1 / scale;  // p-integral, at least one a p-unit

    // the Hensel loop cannot run past v_p(N) of the scaled element
    FieldElement prim(x.field(), v.theta_basis ? a + b / 2 : a, v.theta_basis ? b / 2 : b);
    long bound = padic_valuation(prim.norm(), p);

    // root polynomial f(y) = y^2 + c1 y + c0
    mpz_class c0, c1;
    if (v.theta_basis) {
        c1 = -1;
        c0 = mpz_class(1 - x.field().d) / 4;
    } else {
        c1 = 0;
        c0 = -mpz_class(x.field().d);
    }
    mpz_class pk = p;
    mpz_class t = v.root_label;
    long w = 0;
    for (long k = 1; k <= bound; ++k) {
        auto residue = [&](const mpq_class& q) {
            mpz_class num = q.get_num() % pk, den = q.get_den() % pk, inv;
            if (num < 0) num += pk;
            if (den < 0) den += pk;
            mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), pk.get_mpz_t());
            return mpz_class(num * inv % pk);
        };
        if ((residue(a) + residue(b) * t) % pk != 0) break;
        w = k;
        mpz_class pk1 = pk * p;
        mpz_class ft = (t * t + c1 * t + c0) % pk1;
        mpz_class dft = (2 * t + c1) % pk1;
        if (dft < 0) dft += pk1;
        mpz_class inv;
        mpz_invert(inv.get_mpz_t(), dft.get_mpz_t(), pk1.get_mpz_t());
        t = (t - ft * inv) % pk1;
        if (t < 0) t += pk1;
        pk = pk1;
    }
    return s + w;
}

}  // namespace detail

// Exact valuation of nonzero x at a finite place (in uniformizer units, so
// valuation(p, v) = ram_e).
inline long valuation(const FieldElement& x, const Place& v) {
    if (x.is_zero()) throw std::invalid_argument("valuation of zero");
    if (!v.is_finite()) throw std::invalid_argument("valuation at archimedean place");
    if (x.field().is_rational()) return padic_valuation(x.a(), v.p);
    if (v.ram_e == 2) return padic_valuation(x.norm(), v.p);      // ramified
    if (v.res_f == 2) return padic_valuation(x.norm(), v.p) / 2;  // inert
    return detail::split_valuation(x, v);
}

// log ||x||_v with the product-formula normalization.
inline Real normalized_log_abs(const FieldElement& x, const Place& v) {
    if (x.is_zero()) throw std::invalid_argument("normalized_log_abs of zero");
    if (v.is_finite()) {
        long val = valuation(x, v);
        return Real(-static_cast<long>(v.res_f) * val) * Real::log_of(v.p);
    }
    if (v.complex_pair) return Real::log_of(x.norm());  // |sigma(x)|^2 = N(x)
    return x.abs_embedding(v.embedding).log();
}

// All finite places where x has nonzero valuation, with the valuations.
inline std::vector<std::pair<Place, long>> support(const FieldElement& x) {
    if (x.is_zero()) throw std::invalid_argument("support of zero");
    std::set<mpz_class> cand;
    if (x.field().is_rational()) {
        for (auto& [p, e] : factorize(x.a().get_num())) cand.insert(p);
        for (auto& [p, e] : factorize(x.a().get_den())) cand.insert(p);
    } else {
        mpz_class q = lcm(x.a().get_den(), x.b().get_den());
        mpq_class A = x.a() * q, B = x.b() * q;
        mpz_class normnum = A.get_num() * A.get_num() - mpz_class(x.field().d) * B.get_num() * B.get_num();
        for (auto& [p, e] : factorize(q)) cand.insert(p);
        if (normnum != 0)
            for (auto& [p, e] : factorize(normnum)) cand.insert(p);
    }
    std::vector<std::pair<Place, long>> out;
    for (const auto& p : cand)
        for (const auto& v : places_above(p, x.field())) {
            long val = valuation(x, v);
            if (val != 0) out.emplace_back(v, val);
        }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

// Ordered finite place set together with log||x||_v entries, finite entries
// exact multiples of log p.
struct ValuationVector {
    std::vector<Place> places;
    std::vector<Real> logs;
};

inline ValuationVector log_absolute_values(const FieldElement& x, const std::vector<Place>& S) {
    ValuationVector out;
    out.places = S;
    for (const auto& v : S) out.logs.push_back(normalized_log_abs(x, v));
    return out;
}

// Sum of log||x||_v over the archimedean places and the support; zero for
// every nonzero x by the product formula (tested, not assumed).
inline Real product_formula_defect(const FieldElement& x) {
    Real s;
    for (const auto& v : archimedean_places(x.field())) s += normalized_log_abs(x, v);
    for (const auto& [v, val] : support(x)) s += Real(-static_cast<long>(v.res_f) * val) * Real::log_of(v.p);
    return s;
}

}  // namespace pep
