#pragma once

// Multiplicative structure of finitely generated subgroups of K*:
// relation lattices (products that are roots of unity), exact independence
// testing, and a canonical basis (torsion generator kept separate) for the
// group generated by a list of elements.
//
// No fundamental units are ever computed. The finite-place valuation matrix
// reduces everything to the unit group; over Q and imaginary quadratic
// fields units are torsion, and over real quadratic fields a subtractive
// Euclid on unit logs (exact elements, numerics only steer the step sizes;
// every torsion claim is confirmed symbolically) finds a generator of the
// unit part. Termination: a non-torsion unit of a real quadratic field has
// |log| at least log((1+sqrt 5)/2).

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <map>
#include <optional>
#include <vector>

#include "pep/errors.hpp"
#include "pep/field.hpp"
#include "pep/intmatrix.hpp"
#include "pep/lattice.hpp"
#include "pep/places.hpp"

namespace pep {

// prod gens[i]^{alpha[i]}, exactly.
inline FieldElement value_power(const std::vector<FieldElement>& gens, const ZVec& alpha) {
    assert(gens.size() == alpha.size());
    FieldDescriptor f = gens.empty() ? FieldDescriptor::rational() : gens[0].field();
    FieldElement acc = FieldElement::one(f);
    for (size_t i = 0; i < gens.size(); ++i) {
        if (alpha[i] == 0) continue;
        if (!alpha[i].fits_slong_p()) throw CapError("multiplicative exponent too large");
        acc = acc * gens[i].pow(alpha[i].get_si());
    }
    return acc;
}

struct MultiplicativeRelationLattice {
    size_t ambient = 0;
    Lattice relations;  // {alpha : prod gens^alpha is a root of unity}
    std::vector<std::pair<ZVec, int>> basis_torsion;  // basis relation, torsion order of its value

    bool trivial() const { return relations.rank() == 0; }
};

namespace detail {

// Sorted union of the finite supports of all gens.
inline std::vector<Place> support_union(const std::vector<FieldElement>& gens) {
    std::vector<Place> out;
    for (const auto& g : gens)
        for (const auto& [v, val] : support(g))
            if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    std::sort(out.begin(), out.end());
    return out;
}

inline IntMatrix valuation_matrix(const std::vector<FieldElement>& gens, const std::vector<Place>& F) {
    IntMatrix m(gens.size(), F.size());
    for (size_t i = 0; i < gens.size(); ++i)
        for (size_t j = 0; j < F.size(); ++j) m.at(i, j) = valuation(gens[i], F[j]);
    return m;
}

struct TrackedUnit {
    FieldElement value;
    ZVec exponents;  // over the original generator list
};

inline double unit_log(const FieldElement& u) { return u.abs_embedding(0).log().to_double(); }

// gcd of two units modulo torsion, tracking exponent vectors. Returns the
// generator of <x, y> up to torsion (torsion value if both were torsion).
inline TrackedUnit unit_euclid_pair(TrackedUnit x, TrackedUnit y) {
    auto torsion = [](const TrackedUnit& t) { return torsion_order(t.value).has_value(); };
    while (!torsion(x) && !torsion(y)) {
        double lx = unit_log(x.value), ly = unit_log(y.value);
        if (std::fabs(lx) < std::fabs(ly)) std::swap(x, y), std::swap(lx, ly);
        long k = std::lround(lx / ly);
        if (k == 0) k = lx * ly > 0 ? 1 : -1;
        TrackedUnit nx;
        nx.value = x.value * y.value.pow(-k);
        nx.exponents = x.exponents;
        for (size_t i = 0; i < nx.exponents.size(); ++i) nx.exponents[i] -= mpz_class(k) * y.exponents[i];
        x = nx;
    }
    return torsion(x) ? y : x;
}

// Generator of the non-torsion part of the unit subgroup spanned by the
// given units; nullopt if all are torsion.
inline std::optional<TrackedUnit> unit_part(const std::vector<TrackedUnit>& units) {
    std::optional<TrackedUnit> acc;
    for (const auto& u : units) {
        if (torsion_order(u.value)) continue;
        acc = acc ? unit_euclid_pair(*acc, u) : u;
    }
    if (acc && torsion_order(acc->value)) return std::nullopt;
    return acc;
}

// Exponent a with x = (torsion) * g^a, for x in <g> * torsion. The numeric
// guess is confirmed symbolically; neighbours are scanned to absorb any
// rounding slack.
inline long unit_exponent_on(const FieldElement& x, const FieldElement& g) {
    double guess = unit_log(x) / unit_log(g);
    long g0 = std::lround(guess);
    for (long delta : {0L, 1L, -1L, 2L, -2L, 3L, -3L}) {
        long a = g0 + delta;
        if (torsion_order(x * g.pow(-a))) return a;
    }
    throw std::logic_error("unit_exponent_on: element outside the cyclic unit group");
}

}  // namespace detail

// Exact relation lattice {alpha : prod gens^alpha is a root of unity}.
// Kernel of the finite-place valuation matrix, cut down to the torsion
// relations of the resulting units; every basis relation is confirmed
// symbolically.
inline MultiplicativeRelationLattice multiplicative_relations(const std::vector<FieldElement>& gens) {
    for (const auto& g : gens)
        if (g.is_zero()) throw std::invalid_argument("multiplicative_relations: zero element");
    MultiplicativeRelationLattice out;
    out.ambient = gens.size();
    if (gens.empty()) {
        out.relations = Lattice(0);
        return out;
    }
    FieldDescriptor f = gens[0].field();
    std::vector<Place> F = detail::support_union(gens);
    IntMatrix vm = detail::valuation_matrix(gens, F);
    IntMatrix k0 = right_kernel(vm.transpose());  // {alpha : alpha . Vm = 0}, rows
    Lattice rel(gens.size());
    if (k0.rows() > 0) {
        if (!f.is_real_quadratic()) {
            // units are torsion here, so the whole kernel is the relation lattice
            rel = Lattice::from_basis(k0);
        } else {
            std::vector<detail::TrackedUnit> units;
            for (size_t i = 0; i < k0.rows(); ++i) {
                detail::TrackedUnit u;
                u.exponents = k0.row(i);
                u.value = value_power(gens, u.exponents);
                units.push_back(u);
            }
            auto gu = detail::unit_part(units);
            if (!gu) {
                rel = Lattice::from_basis(k0);
            } else {
                // relations = kernel of (unit coords) -> exponent along gu
                IntMatrix a(1, units.size());
                for (size_t i = 0; i < units.size(); ++i)
                    a.at(0, i) = detail::unit_exponent_on(units[i].value, gu->value);
                IntMatrix ker = right_kernel(a);
                std::vector<ZVec> rows;
                for (size_t i = 0; i < ker.rows(); ++i) {
                    ZVec alpha(gens.size(), mpz_class(0));
                    for (size_t j = 0; j < units.size(); ++j)
                        for (size_t c = 0; c < gens.size(); ++c) alpha[c] += ker.at(i, j) * units[j].exponents[c];
                    rows.push_back(alpha);
                }
                rel = Lattice::from_rows(gens.size(), rows);
            }
        }
    }
    out.relations = rel;
    for (size_t i = 0; i < rel.basis().rows(); ++i) {
        ZVec rho = rel.basis().row(i);
        auto ord = torsion_order(value_power(gens, rho));
        if (!ord) throw std::logic_error("relation basis element is not torsion");
        out.basis_torsion.emplace_back(rho, *ord);
    }
    return out;
}

inline bool multiplicatively_independent(const std::vector<FieldElement>& gens) {
    return multiplicative_relations(gens).trivial();
}

// {alpha : prod gens^alpha = 1} exactly (torsion relations refined by the
// congruence that kills the torsion value).
inline Lattice exact_one_relations(const std::vector<FieldElement>& gens) {
    MultiplicativeRelationLattice rel = multiplicative_relations(gens);
    size_t m = rel.relations.rank();
    if (m == 0) return Lattice(gens.size());
    // torsion values of the basis relations generate a cyclic group; express
    // each in a common generator and solve the congruence.
    FieldDescriptor f = gens[0].field();
    FieldElement zt = FieldElement::one(f);
    int E = 1;
    std::vector<FieldElement> zvals;
    for (auto& [rho, ord] : rel.basis_torsion) {
        zvals.push_back(value_power(gens, rho));
        E = std::lcm(E, ord);
    }
    zt = canonical_root_of_unity(f, E);
    std::vector<long> dlog(m);
    for (size_t i = 0; i < m; ++i) {
        bool found = false;
        for (long k = 0; k < E; ++k)
            if (zt.pow(k) == zvals[i]) {
                dlog[i] = k;
                found = true;
                break;
            }
        if (!found) throw std::logic_error("torsion value outside expected cyclic group");
    }
    // lambda . dlog = 0 mod E
    IntMatrix c(1, m + 1);
    for (size_t i = 0; i < m; ++i) c.at(0, i) = dlog[i];
    c.at(0, m) = E;
    IntMatrix ker = right_kernel(c);
    std::vector<ZVec> rows;
    for (size_t i = 0; i < ker.rows(); ++i) {
        ZVec alpha(gens.size(), mpz_class(0));
        for (size_t j = 0; j < m; ++j)
            for (size_t cc = 0; cc < gens.size(); ++cc)
                alpha[cc] += ker.at(i, j) * rel.basis_torsion[j].first[cc];
        rows.push_back(alpha);
    }
    return Lattice::from_rows(gens.size(), rows);
}

// Canonical multiplicative basis of the group generated by `gens`:
// one torsion generator (canonical primitive root of unity of the torsion
// order) plus independent elements mu realizing the HNF basis of the
// valuation lattice, with the unit direction (real quadratic only) last.
struct CanonicalMultiplicativeBasis {
    FieldDescriptor field;
    int torsion_order_E = 1;
    FieldElement zeta;                 // meaningful when E > 1
    std::vector<FieldElement> mu;      // multiplicatively independent
    std::vector<long> gen_torsion;     // gens[j] = zeta^{gen_torsion[j]} * prod mu^{gen_mu[j]}
    std::vector<ZVec> gen_mu;
};

inline CanonicalMultiplicativeBasis canonical_multiplicative_basis(const FieldDescriptor& f,
                                                                   const std::vector<FieldElement>& gens) {
    CanonicalMultiplicativeBasis out;
    out.field = f;
    out.zeta = FieldElement::one(f);
    if (gens.empty()) return out;

    MultiplicativeRelationLattice rel = multiplicative_relations(gens);

    // torsion subgroup: fold the basis-relation values into one generator
    FieldElement tor_gen = FieldElement::one(f);
    int tor_ord = 1;
    for (auto& [rho, ord] : rel.basis_torsion) {
        int want = std::lcm(tor_ord, ord);
        if (want == tor_ord) continue;  // subgroups of a cyclic group are unique per order
        FieldElement z = value_power(gens, rho);
        bool found = false;
        for (int a = 0; a < tor_ord && !found; ++a)
            for (int b = 0; b < ord && !found; ++b) {
                FieldElement cand = tor_gen.pow(a) * z.pow(b);
                auto o = torsion_order(cand);
                if (o && *o == want) {
                    tor_gen = cand;
                    found = true;
                }
            }
        assert(found);
        tor_ord = want;
    }
    out.torsion_order_E = tor_ord;
    if (tor_ord > 1) out.zeta = canonical_root_of_unity(f, tor_ord);

    // free part: HNF basis of the valuation lattice, realized in the group
    std::vector<Place> F = detail::support_union(gens);
    IntMatrix vm = detail::valuation_matrix(gens, F);
    Lattice wlat = Lattice::from_basis(vm);

    // unit direction (real quadratic only)
    std::optional<detail::TrackedUnit> ustar;
    if (f.is_real_quadratic()) {
        IntMatrix k0 = right_kernel(vm.transpose());
        std::vector<detail::TrackedUnit> units;
        for (size_t i = 0; i < k0.rows(); ++i) {
            detail::TrackedUnit u;
            u.exponents = k0.row(i);
            u.value = value_power(gens, u.exponents);
            units.push_back(u);
        }
        ustar = detail::unit_part(units);
        if (ustar) {
            if (ustar->value.cmp_abs_embedding(1, 0) < 0) {  // |sigma| < 1: invert
                ustar->value = ustar->value.inverse();
                for (auto& e : ustar->exponents) e = -e;
            }
            if (tor_ord % 2 == 0 && ustar->value.embedding_sign(0) < 0)
                ustar->value = -ustar->value;  // -1 is in the group
        }
    }

    // lifts of the HNF valuation rows
    std::vector<FieldElement> lifts;
    for (size_t i = 0; i < wlat.rank(); ++i) {
        ZVec w = wlat.basis().row(i);
        auto alpha = solve_integer(vm.transpose(), w);
        assert(alpha && "valuation lattice row must be realizable");
        FieldElement x = value_power(gens, *alpha);
        if (ustar) {
            // window-reduce |sigma(x)| into [1, |sigma(u*)|)
            long k = std::lround(detail::unit_log(x) / detail::unit_log(ustar->value));
            x = x * ustar->value.pow(-k);
            while (x.cmp_abs_embedding(1, 0) < 0) x = x * ustar->value;
            while ((x / ustar->value).cmp_abs_embedding(1, 0) >= 0) x = x / ustar->value;
        }
        // canonical associate within the group's own torsion: a positive
        // rational wins, then positivity at the real embedding, then the
        // lexicographically least (a, b)
        std::vector<FieldElement> cands;
        for (int k = 0; k < tor_ord; ++k) cands.push_back(x * tor_gen.pow(k));
        auto rank_of_cand = [&](const FieldElement& c) {
            if (c.is_rational_value() && c.a() > 0) return 0;
            if (!f.is_imaginary_quadratic() && c.embedding_sign(0) > 0) return 1;
            return 2;
        };
        FieldElement best = cands[0];
        for (const auto& cand : cands) {
            int rc = rank_of_cand(cand), rb = rank_of_cand(best);
            if (rc < rb ||
                (rc == rb && (cand.a() < best.a() || (cand.a() == best.a() && cand.b() < best.b()))))
                best = cand;
        }
        lifts.push_back(best);
    }

    out.mu = lifts;
    if (ustar) out.mu.push_back(ustar->value);

    // decompose every generator over (zeta, mu)
    for (const auto& g : gens) {
        ZVec w(F.size());
        for (size_t j = 0; j < F.size(); ++j) w[j] = valuation(g, F[j]);
        auto y = wlat.coordinates(w);
        assert(y && "generator valuation must lie in the valuation lattice");
        FieldElement res = g;
        ZVec exps;
        for (size_t i = 0; i < lifts.size(); ++i) {
            if ((*y)[i] != 0) res = res * lifts[i].pow(mpz_class(-(*y)[i]));
            exps.push_back((*y)[i]);
        }
        if (ustar) {
            long a = torsion_order(res) ? 0 : detail::unit_exponent_on(res, ustar->value);
            if (a != 0) res = res * ustar->value.pow(-a);
            exps.push_back(mpz_class(a));
        }
        auto ord = torsion_order(res);
        if (!ord) throw std::logic_error("generator decomposition left a non-torsion residue");
        long t = -1;
        for (long k = 0; k < tor_ord; ++k)
            if (out.zeta.pow(k) == res) {
                t = k;
                break;
            }
        if (t < 0) throw std::logic_error("torsion residue outside the torsion subgroup");
        out.gen_torsion.push_back(t);
        out.gen_mu.push_back(exps);
    }
    return out;
}

}  // namespace pep
