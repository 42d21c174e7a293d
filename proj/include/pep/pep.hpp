#pragma once

// Vectors of purely exponential polynomials: finite sums of terms
// a * lambda_1^{l_1(n)} ... lambda_k^{l_k(n)} with integer linear forms l,
// shared base tuple across components.
//
// Canonical form: characters are rewritten over a canonical multiplicative
// basis of the group generated by the per-variable character steps (one
// torsion generator, stored first, plus independent mu's realizing the HNF
// basis of the valuation lattice). Equal characters merge, zero terms and
// unused bases drop. This collapses presentations like (sqrt2)^{2n} vs 2^n
// and 2^{n-m}6^m vs 2^n 3^m onto one object.

#include <algorithm>
#include <cassert>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pep/errors.hpp"
#include "pep/field.hpp"
#include "pep/intmatrix.hpp"
#include "pep/lattice.hpp"
#include "pep/multiplicative.hpp"

namespace pep {

inline constexpr size_t kMaxTermsPerComponent = 12;  // 2^e subset searches stay desk-scale
inline constexpr long kMaxFirstReductionCosets = 10000;

struct PepTerm {
    FieldElement coeff;
    IntMatrix exponents;  // k x r over the owning base tuple
};

struct PepPolynomial {
    std::vector<PepTerm> terms;
};

inline int compare_matrices(const IntMatrix& x, const IntMatrix& y) {
    if (x.rows() != y.rows()) return x.rows() < y.rows() ? -1 : 1;
    if (x.cols() != y.cols()) return x.cols() < y.cols() ? -1 : 1;
    for (size_t i = 0; i < x.rows(); ++i)
        for (size_t j = 0; j < x.cols(); ++j) {
            int c = cmp(x.at(i, j), y.at(i, j));
            if (c) return c < 0 ? -1 : 1;
        }
    return 0;
}

class PepVector {
public:
    FieldDescriptor field;
    std::vector<FieldElement> bases;
    size_t variables = 0;
    std::vector<PepPolynomial> components;

    // canonical-form metadata
    bool canonical = false;
    int torsion_E = 1;  // order of bases[0] when it is the torsion generator

    bool has_torsion_base() const { return canonical && torsion_E > 1; }
    size_t mu_begin() const { return has_torsion_base() ? 1 : 0; }
    size_t base_count() const { return bases.size(); }
    size_t component_count() const { return components.size(); }

    void validate() const {
        for (const auto& b : bases) {
            if (b.is_zero()) throw std::invalid_argument("zero base");
            if (b.field() != field) throw std::invalid_argument("base field mismatch");
        }
        for (const auto& c : components)
            for (const auto& t : c.terms) {
                if (t.coeff.field() != field) throw std::invalid_argument("coefficient field mismatch");
                if (t.exponents.rows() != bases.size() || t.exponents.cols() != variables)
                    throw std::invalid_argument("exponent matrix shape mismatch");
            }
    }

    friend bool operator==(const PepVector& x, const PepVector& y) {
        if (!(x.field == y.field) || x.variables != y.variables || x.bases.size() != y.bases.size() ||
            x.components.size() != y.components.size())
            return false;
        for (size_t i = 0; i < x.bases.size(); ++i)
            if (x.bases[i] != y.bases[i]) return false;
        for (size_t i = 0; i < x.components.size(); ++i) {
            if (x.components[i].terms.size() != y.components[i].terms.size()) return false;
            for (size_t j = 0; j < x.components[i].terms.size(); ++j) {
                const auto& a = x.components[i].terms[j];
                const auto& b = y.components[i].terms[j];
                if (a.coeff != b.coeff || compare_matrices(a.exponents, b.exponents) != 0) return false;
            }
        }
        return true;
    }
};

inline PepVector make_pep_vector(FieldDescriptor field, std::vector<FieldElement> bases, size_t variables,
                                 std::vector<PepPolynomial> components) {
    PepVector f;
    f.field = field;
    f.bases = std::move(bases);
    f.variables = variables;
    f.components = std::move(components);
    f.validate();
    return f;
}

// Single term built from base exponent rows given as initializer data.
inline PepTerm term_of(const FieldElement& coeff, const std::vector<std::vector<long>>& rows) {
    PepTerm t;
    t.coeff = coeff;
    IntMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j) m.at(i, j) = rows[i][j];
    t.exponents = m;
    return t;
}

// ---- evaluation -----------------------------------------------------------

inline FieldElement evaluate_character(const PepVector& f, const IntMatrix& A, const ZVec& n) {
    FieldElement v = FieldElement::one(f.field);
    for (size_t i = 0; i < f.bases.size(); ++i) {
        mpz_class e(0);
        for (size_t j = 0; j < f.variables; ++j) e += A.at(i, j) * n[j];
        if (e == 0) continue;
        if (f.canonical && i == 0 && f.torsion_E > 1) {
            mpz_class em = e % f.torsion_E;
            if (em < 0) em += f.torsion_E;
            v = v * f.bases[i].pow(em.get_si());
        } else {
            v = v * f.bases[i].pow(e);
        }
    }
    return v;
}

inline std::vector<FieldElement> evaluate(const PepVector& f, const ZVec& n) {
    if (n.size() != f.variables) throw std::invalid_argument("evaluate: wrong point length");
    std::vector<FieldElement> out;
    out.reserve(f.components.size());
    for (const auto& c : f.components) {
        FieldElement s = FieldElement::zero(f.field);
        for (const auto& t : c.terms) s = s + t.coeff * evaluate_character(f, t.exponents, n);
        out.push_back(s);
    }
    return out;
}

// ---- canonicalization ------------------------------------------------------

namespace detail {

inline void merge_terms(PepVector& f) {
    for (auto& comp : f.components) {
        std::sort(comp.terms.begin(), comp.terms.end(), [](const PepTerm& a, const PepTerm& b) {
            int c = compare_matrices(a.exponents, b.exponents);
            if (c) return c < 0;
            if (a.coeff.a() != b.coeff.a()) return a.coeff.a() < b.coeff.a();
            return a.coeff.b() < b.coeff.b();
        });
        std::vector<PepTerm> merged;
        for (auto& t : comp.terms) {
            if (!merged.empty() && compare_matrices(merged.back().exponents, t.exponents) == 0)
                merged.back().coeff = merged.back().coeff + t.coeff;
            else
                merged.push_back(t);
        }
        std::vector<PepTerm> alive;
        for (auto& t : merged)
            if (!t.coeff.is_zero()) alive.push_back(t);
        comp.terms = alive;
    }
}

inline PepVector canonicalize_once(const PepVector& in) {
    PepVector f = in;
    merge_terms(f);

    // per-variable steps of every character
    std::vector<FieldElement> steps;
    std::map<std::string, size_t> step_index;  // exact element key -> index
    auto key_of = [](const FieldElement& x) { return x.str(); };
    // step index per (component, term, variable)
    std::vector<std::vector<std::vector<size_t>>> term_steps(f.components.size());
    for (size_t ci = 0; ci < f.components.size(); ++ci) {
        term_steps[ci].resize(f.components[ci].terms.size());
        for (size_t ti = 0; ti < f.components[ci].terms.size(); ++ti) {
            const auto& t = f.components[ci].terms[ti];
            for (size_t v = 0; v < f.variables; ++v) {
                FieldElement s = FieldElement::one(f.field);
                for (size_t b = 0; b < f.bases.size(); ++b)
                    if (t.exponents.at(b, v) != 0) s = s * f.bases[b].pow(t.exponents.at(b, v));
                auto it = step_index.find(key_of(s));
                size_t idx;
                if (it == step_index.end()) {
                    idx = steps.size();
                    step_index[key_of(s)] = idx;
                    steps.push_back(s);
                } else {
                    idx = it->second;
                }
                term_steps[ci][ti].push_back(idx);
            }
        }
    }

    // trivial steps (value 1) carry no base
    std::vector<FieldElement> gens;
    std::vector<long> gen_of_step(steps.size(), -1);
    for (size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].is_one()) continue;
        gen_of_step[i] = static_cast<long>(gens.size());
        gens.push_back(steps[i]);
    }

    CanonicalMultiplicativeBasis cb = canonical_multiplicative_basis(f.field, gens);
    bool has_zeta = cb.torsion_order_E > 1;

    PepVector out;
    out.field = f.field;
    out.variables = f.variables;
    out.canonical = true;
    out.torsion_E = cb.torsion_order_E;
    if (has_zeta) out.bases.push_back(cb.zeta);
    for (const auto& m : cb.mu) out.bases.push_back(m);
    size_t k = out.bases.size();

    for (size_t ci = 0; ci < f.components.size(); ++ci) {
        PepPolynomial comp;
        for (size_t ti = 0; ti < f.components[ci].terms.size(); ++ti) {
            PepTerm t;
            t.coeff = f.components[ci].terms[ti].coeff;
            t.exponents = IntMatrix(k, f.variables);
            for (size_t v = 0; v < f.variables; ++v) {
                long si = gen_of_step[term_steps[ci][ti][v]];
                if (si < 0) continue;  // step value 1
                if (has_zeta) {
                    long e = cb.gen_torsion[si] % cb.torsion_order_E;
                    t.exponents.at(0, v) = e;
                }
                for (size_t m = 0; m < cb.mu.size(); ++m)
                    t.exponents.at((has_zeta ? 1 : 0) + m, v) = cb.gen_mu[si][m];
            }
            comp.terms.push_back(t);
        }
        out.components.push_back(comp);
    }
    merge_terms(out);

    // drop unused base rows (convention: every base appears in some
    // non-constant exponent)
    std::vector<bool> used(k, false);
    for (const auto& comp : out.components)
        for (const auto& t : comp.terms)
            for (size_t b = 0; b < k; ++b)
                for (size_t v = 0; v < out.variables; ++v)
                    if (t.exponents.at(b, v) != 0) used[b] = true;
    std::vector<size_t> keep;
    for (size_t b = 0; b < k; ++b)
        if (used[b]) keep.push_back(b);
    if (keep.size() != k) {
        std::vector<FieldElement> nb;
        for (size_t b : keep) nb.push_back(out.bases[b]);
        for (auto& comp : out.components)
            for (auto& t : comp.terms) {
                IntMatrix m(keep.size(), out.variables);
                for (size_t i = 0; i < keep.size(); ++i)
                    for (size_t v = 0; v < out.variables; ++v) m.at(i, v) = t.exponents.at(keep[i], v);
                t.exponents = m;
            }
        bool zeta_kept = has_zeta && !keep.empty() && keep[0] == 0;
        out.bases = nb;
        if (!zeta_kept) out.torsion_E = 1;
    } else if (!has_zeta) {
        out.torsion_E = 1;
    }
    merge_terms(out);
    return out;
}

}  // namespace detail

// Canonical form; idempotent, evaluation-preserving.
inline PepVector canonicalize(const PepVector& in) {
    in.validate();
    PepVector cur = in;
    for (int iter = 0; iter < 6; ++iter) {
        PepVector next = detail::canonicalize_once(cur);
        if (next == cur && cur.canonical) return cur;
        cur = next;
    }
    throw std::logic_error("canonicalize did not reach a fixpoint");
}

inline bool is_identically_zero(const PepVector& f) {
    PepVector c = f.canonical ? f : canonicalize(f);
    for (const auto& comp : c.components)
        if (!comp.terms.empty()) return false;
    return true;
}

// Distinct characters appearing across all components of a canonical f.
inline std::vector<IntMatrix> characters_of(const PepVector& f) {
    assert(f.canonical);
    std::vector<IntMatrix> out;
    for (const auto& comp : f.components)
        for (const auto& t : comp.terms) {
            bool seen = false;
            for (const auto& m : out)
                if (compare_matrices(m, t.exponents) == 0) seen = true;
            if (!seen) out.push_back(t.exponents);
        }
    std::sort(out.begin(), out.end(), [](const IntMatrix& a, const IntMatrix& b) {
        return compare_matrices(a, b) < 0;
    });
    return out;
}

// ---- union, polynomial images, restriction --------------------------------

// Image-union construction: (f1(x)+f2(y))/2 + (-1)^z (f1(x)-f2(y))/2 in
// r1 + r2 + 1 variables.
inline PepVector pep_union(const PepVector& f1, const PepVector& f2) {
    if (!(f1.field == f2.field)) throw std::invalid_argument("union: field mismatch");
    if (f1.components.size() != f2.components.size())
        throw std::invalid_argument("union: component count mismatch");
    size_t k1 = f1.bases.size(), k2 = f2.bases.size();
    size_t r1 = f1.variables, r2 = f2.variables;
    PepVector g;
    g.field = f1.field;
    g.variables = r1 + r2 + 1;
    g.bases = f1.bases;
    for (const auto& b : f2.bases) g.bases.push_back(b);
    g.bases.push_back(FieldElement(g.field, -1));
    size_t k = k1 + k2 + 1;
    mpq_class half(1, 2);
    auto lift1 = [&](const PepTerm& t, bool with_sign) {
        PepTerm u;
        u.coeff = t.coeff * FieldElement(g.field, half);
        u.exponents = IntMatrix(k, g.variables);
        for (size_t i = 0; i < k1; ++i)
            for (size_t j = 0; j < r1; ++j) u.exponents.at(i, j) = t.exponents.at(i, j);
        if (with_sign) u.exponents.at(k - 1, g.variables - 1) = 1;
        return u;
    };
    auto lift2 = [&](const PepTerm& t, bool with_sign) {
        PepTerm u;
        u.coeff = t.coeff * FieldElement(g.field, with_sign ? -half : half);
        u.exponents = IntMatrix(k, g.variables);
        for (size_t i = 0; i < k2; ++i)
            for (size_t j = 0; j < r2; ++j) u.exponents.at(k1 + i, r1 + j) = t.exponents.at(i, j);
        if (with_sign) u.exponents.at(k - 1, g.variables - 1) = 1;
        return u;
    };
    for (size_t ci = 0; ci < f1.components.size(); ++ci) {
        PepPolynomial comp;
        for (const auto& t : f1.components[ci].terms) {
            comp.terms.push_back(lift1(t, false));
            comp.terms.push_back(lift1(t, true));
        }
        for (const auto& t : f2.components[ci].terms) {
            comp.terms.push_back(lift2(t, false));
            comp.terms.push_back(lift2(t, true));
        }
        g.components.push_back(comp);
    }
    return canonicalize(g);
}

// Polynomial map with field coefficients: each output is a sum of
// coeff * prod inputs^exps.
struct PolynomialMap {
    size_t inputs = 0;
    struct Monomial {
        FieldElement coeff;
        std::vector<long> exps;
    };
    std::vector<std::vector<Monomial>> outputs;
};

namespace detail {

inline PepPolynomial poly_mul(const PepPolynomial& a, const PepPolynomial& b) {
    PepPolynomial out;
    for (const auto& x : a.terms)
        for (const auto& y : b.terms) {
            PepTerm t;
            t.coeff = x.coeff * y.coeff;
            t.exponents = IntMatrix(x.exponents.rows(), x.exponents.cols());
            for (size_t i = 0; i < t.exponents.rows(); ++i)
                for (size_t j = 0; j < t.exponents.cols(); ++j)
                    t.exponents.at(i, j) = x.exponents.at(i, j) + y.exponents.at(i, j);
            out.terms.push_back(t);
        }
    return out;
}

}  // namespace detail

inline PepVector compose_polynomial_map(const PepVector& f, const PolynomialMap& P) {
    if (P.inputs != f.components.size()) throw std::invalid_argument("compose: arity mismatch");
    PepVector c = f.canonical ? f : canonicalize(f);
    size_t k = c.bases.size();
    PepPolynomial one;
    {
        PepTerm t;
        t.coeff = FieldElement::one(c.field);
        t.exponents = IntMatrix(k, c.variables);
        one.terms.push_back(t);
    }
    PepVector g;
    g.field = c.field;
    g.variables = c.variables;
    g.bases = c.bases;
    for (const auto& output : P.outputs) {
        PepPolynomial comp;
        for (const auto& mono : output) {
            PepPolynomial acc = one;
            acc.terms[0].coeff = mono.coeff.embedded_into(c.field);
            for (size_t j = 0; j < mono.exps.size(); ++j) {
                if (mono.exps[j] < 0) throw std::invalid_argument("compose: negative exponent");
                for (long e = 0; e < mono.exps[j]; ++e) acc = detail::poly_mul(acc, c.components[j]);
            }
            for (const auto& t : acc.terms) comp.terms.push_back(t);
        }
        g.components.push_back(comp);
    }
    return canonicalize(g);
}

// f restricted to the coset (offset + row-span of basis), as a PEP in
// rank(C) variables: n = offset + B^T m.
inline PepVector restrict_to_coset(const PepVector& f, const Coset& C) {
    if (C.ambient_rank() != f.variables) throw std::invalid_argument("restrict: ambient mismatch");
    PepVector c = f.canonical ? f : canonicalize(f);
    size_t q = C.lattice.rank();
    const IntMatrix& B = C.lattice.basis();
    PepVector g;
    g.field = c.field;
    g.variables = q;
    g.bases = c.bases;
    for (const auto& comp : c.components) {
        PepPolynomial nc;
        for (const auto& t : comp.terms) {
            PepTerm u;
            u.coeff = t.coeff * evaluate_character(c, t.exponents, C.offset);
            u.exponents = IntMatrix(c.bases.size(), q);
            for (size_t i = 0; i < c.bases.size(); ++i)
                for (size_t j = 0; j < q; ++j) {
                    mpz_class s(0);
                    for (size_t v = 0; v < c.variables; ++v) s += t.exponents.at(i, v) * B.at(j, v);
                    u.exponents.at(i, j) = s;
                }
            nc.terms.push_back(u);
        }
        g.components.push_back(nc);
    }
    return canonicalize(g);
}

// ---- degeneracy ------------------------------------------------------------

// Per component: partition of term indices into (T1 non-degenerate part,
// T2 vanishing part) at a point.
struct DegeneracyType {
    std::vector<std::pair<std::vector<size_t>, std::vector<size_t>>> parts;  // (T1, T2)

    bool nondegenerate() const {
        for (const auto& [t1, t2] : parts)
            if (!t2.empty()) return false;
        return true;
    }
    std::string key() const {
        std::string s;
        for (const auto& [t1, t2] : parts) {
            s += "|";
            for (auto i : t1) s += std::to_string(i) + ",";
            s += ";";
            for (auto i : t2) s += std::to_string(i) + ",";
        }
        return s;
    }
};

inline DegeneracyType degeneracy_type(const PepVector& f, const ZVec& n) {
    PepVector c = f.canonical ? f : canonicalize(f);
    DegeneracyType out;
    for (const auto& comp : c.components) {
        size_t e = comp.terms.size();
        if (e > kMaxTermsPerComponent) throw CapError("component has too many terms for subset search");
        std::vector<FieldElement> vals;
        for (const auto& t : comp.terms) vals.push_back(t.coeff * evaluate_character(c, t.exponents, n));
        size_t full = (size_t(1) << e);
        std::vector<FieldElement> sum(full, FieldElement::zero(c.field));
        std::vector<bool> zero(full, false), anyzerosub(full, false);
        for (size_t m = 1; m < full; ++m) {
            size_t low = m & (~m + 1);
            size_t li = 0;
            while (!((m >> li) & 1)) ++li;
            sum[m] = sum[m ^ low] + vals[li];
            zero[m] = sum[m].is_zero();
        }
        for (size_t m = 1; m < full; ++m) {
            anyzerosub[m] = zero[m];
            for (size_t i = 0; i < e && !anyzerosub[m]; ++i)
                if ((m >> i) & 1) anyzerosub[m] = anyzerosub[m ^ (size_t(1) << i)];
        }
        // choose T2 with sum zero and complement free of vanishing subsums;
        // maximize |T1| then lexicographically least sorted T1
        std::optional<size_t> best_t2;
        auto t1_indices = [&](size_t t2mask) {
            std::vector<size_t> t1;
            for (size_t i = 0; i < e; ++i)
                if (!((t2mask >> i) & 1)) t1.push_back(i);
            return t1;
        };
        for (size_t t2 = 0; t2 < full; ++t2) {
            if (t2 != 0 && !zero[t2]) continue;
            size_t t1 = (full - 1) ^ t2;
            if (t1 != 0 && anyzerosub[t1]) continue;
            if (!best_t2) {
                best_t2 = t2;
                continue;
            }
            auto a = t1_indices(t2), b = t1_indices(*best_t2);
            if (a.size() > b.size() || (a.size() == b.size() && a < b)) best_t2 = t2;
        }
        assert(best_t2.has_value());
        std::vector<size_t> t2v;
        for (size_t i = 0; i < e; ++i)
            if ((*best_t2 >> i) & 1) t2v.push_back(i);
        out.parts.emplace_back(t1_indices(*best_t2), t2v);
    }
    return out;
}

inline bool is_nondegenerate_at(const PepVector& f, const ZVec& n) {
    return degeneracy_type(f, n).nondegenerate();
}

// ---- padding (two-component experiment) ------------------------------------

inline PepVector pad_with_independent_base(const PepVector& f, const FieldElement& alpha) {
    PepVector c = f.canonical ? f : canonicalize(f);
    std::vector<FieldElement> test = c.bases;
    test.push_back(alpha.embedded_into(c.field));
    MultiplicativeRelationLattice rel = multiplicative_relations(test);
    for (size_t i = 0; i < rel.relations.basis().rows(); ++i)
        if (rel.relations.basis().at(i, test.size() - 1) != 0)
            throw std::invalid_argument("pad: alpha is multiplicatively dependent on the bases");
    PepVector g;
    g.field = c.field;
    g.variables = c.variables + 1;
    g.bases = test;
    size_t k = g.bases.size();
    for (const auto& comp : c.components) {
        PepPolynomial nc;
        for (const auto& t : comp.terms) {
            PepTerm u;
            u.coeff = t.coeff;
            u.exponents = IntMatrix(k, g.variables);
            for (size_t i = 0; i < c.bases.size(); ++i)
                for (size_t j = 0; j < c.variables; ++j) u.exponents.at(i, j) = t.exponents.at(i, j);
            nc.terms.push_back(u);
        }
        g.components.push_back(nc);
    }
    PepPolynomial extra;
    PepTerm t;
    t.coeff = FieldElement::one(g.field);
    t.exponents = IntMatrix(k, g.variables);
    t.exponents.at(k - 1, g.variables - 1) = 1;
    extra.terms.push_back(t);
    g.components.push_back(extra);
    return canonicalize(g);
}

// ---- convenience builders ---------------------------------------------------

// Single-component PEP from (coeff, per-base exponent rows) data.
inline PepVector pep_from_terms(const FieldDescriptor& field, const std::vector<FieldElement>& bases,
                                size_t variables,
                                const std::vector<std::pair<FieldElement, std::vector<std::vector<long>>>>& terms) {
    PepPolynomial comp;
    for (const auto& [c, rows] : terms) comp.terms.push_back(term_of(c, rows));
    return make_pep_vector(field, bases, variables, {comp});
}

}  // namespace pep
