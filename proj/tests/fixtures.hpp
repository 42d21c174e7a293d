#pragma once

// Shared fixtures for the test suites: the small PEP vectors that exercise
// every structural corner (torsion bases, quadratic fields, dependent bases,
// multiple variables).

#include "pep/matrixgroups.hpp"
#include "pep/pep.hpp"

namespace fixtures {

using namespace pep;

inline FieldDescriptor Q() { return FieldDescriptor::rational(); }

inline FieldElement q(long num, long den = 1) { return FieldElement::rational(mpq_class(num, den)); }

// f(n) = 2^n
inline PepVector two_pow() {
    return pep_from_terms(Q(), {q(2)}, 1, {{q(1), {{1}}}});
}

// f(n) = c * 2^n
inline PepVector scaled_two_pow(long c) {
    return pep_from_terms(Q(), {q(2)}, 1, {{q(c), {{1}}}});
}

// f(n) = 2^n + (-2)^n
inline PepVector two_pow_plus_minus_two_pow() {
    return pep_from_terms(Q(), {q(2), q(-2)}, 1,
                          {{q(1), {{1}, {0}}}, {q(1), {{0}, {1}}}});
}

// f(n) = (-1)^n + 2^n
inline PepVector sign_plus_two_pow() {
    return pep_from_terms(Q(), {q(-1), q(2)}, 1,
                          {{q(1), {{1}, {0}}}, {q(1), {{0}, {1}}}});
}

// f(n, m) = 2^n 3^m
inline PepVector two_three_grid() {
    return pep_from_terms(Q(), {q(2), q(3)}, 2, {{q(1), {{1, 0}, {0, 1}}}});
}

// f(n1, n2) = 2^{n1 - n2}
inline PepVector two_pow_difference() {
    return pep_from_terms(Q(), {q(2)}, 2, {{q(1), {{1, -1}}}});
}

// f(n) = 2^n + 3^n
inline PepVector two_plus_three_pow() {
    return pep_from_terms(Q(), {q(2), q(3)}, 1,
                          {{q(1), {{1}, {0}}}, {q(1), {{0}, {1}}}});
}

// f(n) = 5^n + 7^n
inline PepVector five_plus_seven_pow() {
    return pep_from_terms(Q(), {q(5), q(7)}, 1,
                          {{q(1), {{1}, {0}}}, {q(1), {{0}, {1}}}});
}

// f(a, b) = 2^a - 2^b + 3^{a-b}
inline PepVector twisted_pair() {
    return pep_from_terms(Q(), {q(2), q(3)}, 2,
                          {{q(1), {{1, 0}, {0, 0}}},
                           {q(-1), {{0, 1}, {0, 0}}},
                           {q(1), {{0, 0}, {1, -1}}}});
}

// f(m, n, k) = w^m 2^n + w^k 2^n over Q(sqrt(-3)), w a primitive cube root
inline PepVector omega_vector() {
    FieldDescriptor K = FieldDescriptor::quadratic(-3);
    FieldElement w(K, mpq_class(-1, 2), mpq_class(1, 2));
    FieldElement two(K, 2);
    PepPolynomial comp;
    comp.terms.push_back(term_of(FieldElement::one(K), {{1, 0, 0}, {0, 1, 0}}));
    comp.terms.push_back(term_of(FieldElement::one(K), {{0, 0, 1}, {0, 1, 0}}));
    return make_pep_vector(K, {w, two}, 3, {comp});
}

// diag(2, 1/2) as a BG generator; the associated PEP has components
// (2^a, 0, 0, 2^-a)
inline PepVector diag_two_pep() {
    auto D = MatrixOverField::diagonal(Q(), {q(2), q(1, 2)});
    return bg_to_pep(make_bg_spec({D}));
}

// diag generators 2,1/2 and 3,1/3: rank-2 diagonal PEP
inline PepVector diag_rank2_pep() {
    auto D1 = MatrixOverField::diagonal(Q(), {q(2), q(1, 2)});
    auto D2 = MatrixOverField::diagonal(Q(), {q(3), q(1, 3)});
    return bg_to_pep(make_bg_spec({D1, D2}));
}

inline ZVec zv(std::initializer_list<long> xs) { return zvec(xs); }

}  // namespace fixtures
