#pragma once

// Reduction theory for PEP vectors: the two reductions that turn any PEP
// image into a finite union of images of reduced vectors, stabilizers,
// exact PEP rank, and monomial-on-cosets detection for semigroup images.

#include <algorithm>
#include <cassert>
#include <optional>
#include <vector>

#include "pep/lattice.hpp"
#include "pep/multiplicative.hpp"
#include "pep/pep.hpp"

namespace pep {

// Reduced: multiplicatively independent bases and exponent forms spanning
// the full dual space of Q^r.
inline bool is_reduced(const PepVector& f) {
    PepVector c = f.canonical ? f : canonicalize(f);
    if (c.torsion_E > 1) return false;
    if (!c.bases.empty() && !multiplicatively_independent(c.bases)) return false;
    std::vector<std::vector<mpz_class>> rows;
    for (const auto& A : characters_of(c))
        for (size_t i = 0; i < A.rows(); ++i) rows.push_back(A.row(i));
    if (c.variables == 0) return true;
    if (rows.empty()) return false;
    return rank_of(IntMatrix::from_rows(rows)) == c.variables;
}

struct FirstReductionPiece {
    Coset coset;      // a + E Z^r
    PepVector piece;  // evaluation: piece(m) = f(E m + a); independent bases
};

// First reduction: split Z^r into the E^r cosets mod the torsion exponent E
// and rewrite each restriction on the torsion-free bases mu^E.
inline std::vector<FirstReductionPiece> first_reduction(const PepVector& f) {
    PepVector c = f.canonical ? f : canonicalize(f);
    long E = c.torsion_E;
    std::vector<FirstReductionPiece> out;
    if (E <= 1) {
        FirstReductionPiece p;
        p.coset = Coset::full(c.variables);
        p.piece = c;
        out.push_back(p);
        return out;
    }
    double total = std::pow(static_cast<double>(E), static_cast<double>(c.variables));
    if (total > static_cast<double>(kMaxFirstReductionCosets))
        throw CapError("first_reduction: E^r exceeds the coset cap");

    IntMatrix scaled = IntMatrix::identity(c.variables);
    for (size_t i = 0; i < c.variables; ++i) scaled.at(i, i) = E;
    Lattice elat = Lattice::from_basis(scaled);

    size_t k = c.bases.size();
    std::vector<long> a(c.variables, 0);
    while (true) {
        ZVec av;
        for (long x : a) av.emplace_back(x);
        PepVector piece;
        piece.field = c.field;
        piece.variables = c.variables;
        for (size_t b = 1; b < k; ++b) piece.bases.push_back(c.bases[b]);  // drop zeta
        for (const auto& comp : c.components) {
            PepPolynomial nc;
            for (const auto& t : comp.terms) {
                PepTerm u;
                u.coeff = t.coeff * evaluate_character(c, t.exponents, av);
                u.exponents = IntMatrix(k - 1, c.variables);
                for (size_t i = 1; i < k; ++i)
                    for (size_t j = 0; j < c.variables; ++j)
                        u.exponents.at(i - 1, j) = mpz_class(E) * t.exponents.at(i, j);
                nc.terms.push_back(u);
            }
            piece.components.push_back(nc);
        }
        FirstReductionPiece p;
        p.coset = Coset(av, elat);
        p.piece = canonicalize(piece);
        assert(p.piece.torsion_E == 1 && "first reduction must remove all torsion");
        out.push_back(p);

        size_t i = 0;
        for (; i < c.variables; ++i) {
            if (++a[i] < E) break;
            a[i] = 0;
        }
        if (i == c.variables) break;
    }
    return out;
}

struct SecondReduction {
    IntMatrix projection;  // (r - q) x r; f(n) = reduced(projection * n)
    PepVector reduced;
};

// Second reduction: factor out H, the common kernel of all exponent
// matrices (saturated), leaving a reduced vector in r - q variables.
inline SecondReduction second_reduction(const PepVector& f) {
    PepVector c = f.canonical ? f : canonicalize(f);
    if (c.torsion_E > 1) throw std::invalid_argument("second_reduction needs independent bases");
    size_t r = c.variables;
    std::vector<std::vector<mpz_class>> rows;
    for (const auto& A : characters_of(c))
        for (size_t i = 0; i < A.rows(); ++i) rows.push_back(A.row(i));
    Lattice H = rows.empty() ? Lattice::full(r) : kernel_lattice(IntMatrix::from_rows(rows));
    size_t q = H.rank();
    SecondReduction out;
    if (q == 0) {
        out.projection = IntMatrix::identity(r);
        out.reduced = c;
        return out;
    }
    UnimodularCompletion comp = unimodular_completion(H.basis());
    assert(comp.rank == q);
    // n = P^T y with the first q rows of P spanning H; drop the dead block.
    const IntMatrix& P = comp.P;
    const IntMatrix& Pinv = comp.Pinv;
    out.projection = IntMatrix(r - q, r);
    for (size_t i = 0; i < r - q; ++i)
        for (size_t j = 0; j < r; ++j) out.projection.at(i, j) = Pinv.at(j, q + i);

    PepVector g;
    g.field = c.field;
    g.variables = r - q;
    g.bases = c.bases;
    for (const auto& compnt : c.components) {
        PepPolynomial nc;
        for (const auto& t : compnt.terms) {
            PepTerm u;
            u.coeff = t.coeff;
            u.exponents = IntMatrix(c.bases.size(), r - q);
            for (size_t b = 0; b < c.bases.size(); ++b)
                for (size_t y = 0; y < r - q; ++y) {
                    mpz_class s(0);
                    for (size_t j = 0; j < r; ++j) s += t.exponents.at(b, j) * P.at(q + y, j);
                    u.exponents.at(b, y) = s;
                }
            nc.terms.push_back(u);
        }
        g.components.push_back(nc);
    }
    out.reduced = canonicalize(g);
    return out;
}

// Affine projection coset -> Z^{r_i}: n -> Q (n - offset) / modulus.
struct ProjectionMap {
    ZVec offset;
    long modulus = 1;
    IntMatrix Q;

    ZVec apply(const ZVec& n) const {
        ZVec m = n - offset;
        for (auto& x : m) {
            assert(x % modulus == 0);
            x /= modulus;
        }
        return Q.apply(m);
    }
};

struct ReducedDecomposition {
    struct Piece {
        Coset coset;
        PepVector reduced;
        ProjectionMap proj;
    };
    std::vector<Piece> pieces;
};

// Both reductions composed: cosets partition Z^r, each piece evaluates to f
// through its projection, every piece is reduced.
inline ReducedDecomposition reduced_decomposition(const PepVector& f) {
    PepVector c = f.canonical ? f : canonicalize(f);
    ReducedDecomposition out;
    long E = std::max(1, c.torsion_E);
    for (auto& fr : first_reduction(c)) {
        SecondReduction sr = second_reduction(fr.piece);
        ReducedDecomposition::Piece p;
        p.coset = fr.coset;
        p.reduced = sr.reduced;
        p.proj.offset = fr.coset.offset;
        p.proj.modulus = E;
        p.proj.Q = sr.projection;
        out.pieces.push_back(p);
    }
    return out;
}

// Maximal sublattice of M - M under which f restricted to M is invariant.
// For canonical f on Z^r this is {k : chi(k) = 1 for every character}:
// the common kernel of the mu-rows refined by the torsion congruences.
inline Lattice stabilizer(const PepVector& f, const Coset& M) {
    PepVector base = f.canonical ? f : canonicalize(f);
    bool full = M.lattice.is_full();
    PepVector c = full ? base : restrict_to_coset(base, M);
    size_t r = c.variables;
    std::vector<IntMatrix> chars = characters_of(c);
    size_t mu0 = c.torsion_E > 1 ? 1 : 0;
    std::vector<std::vector<mpz_class>> eqrows;
    size_t extras = 0;  // slack columns for the mod-E congruences
    if (c.torsion_E > 1)
        for (const auto& A : chars) {
            bool nz = false;
            for (size_t j = 0; j < r; ++j)
                if (A.at(0, j) != 0) nz = true;
            if (nz) ++extras;
        }
    size_t cols = r + extras;
    size_t slack = r;
    for (const auto& A : chars) {
        for (size_t i = mu0; i < A.rows(); ++i) {
            std::vector<mpz_class> row(cols, mpz_class(0));
            for (size_t j = 0; j < r; ++j) row[j] = A.at(i, j);
            eqrows.push_back(row);
        }
        if (c.torsion_E > 1) {
            bool nz = false;
            for (size_t j = 0; j < r; ++j)
                if (A.at(0, j) != 0) nz = true;
            if (nz) {
                std::vector<mpz_class> row(cols, mpz_class(0));
                for (size_t j = 0; j < r; ++j) row[j] = A.at(0, j);
                row[slack++] = c.torsion_E;
                eqrows.push_back(row);
            }
        }
    }
    Lattice K;
    if (eqrows.empty()) {
        K = Lattice::full(r);
    } else {
        Lattice ker = kernel_lattice(IntMatrix::from_rows(eqrows));
        std::vector<ZVec> rows;
        for (size_t i = 0; i < ker.rank(); ++i) {
            ZVec full_row = ker.basis().row(i);
            rows.emplace_back(full_row.begin(), full_row.begin() + r);
        }
        K = Lattice::from_rows(r, rows);
    }
    if (full) return K;
    // map the parameter-space stabilizer back through n = offset + B^T m
    const IntMatrix& B = M.lattice.basis();
    std::vector<ZVec> rows;
    for (size_t i = 0; i < K.rank(); ++i) {
        ZVec v(M.ambient_rank(), mpz_class(0));
        for (size_t j = 0; j < K.basis().cols(); ++j)
            for (size_t cidx = 0; cidx < M.ambient_rank(); ++cidx)
                v[cidx] += K.basis().at(i, j) * B.at(j, cidx);
        rows.push_back(v);
    }
    return Lattice::from_rows(M.ambient_rank(), rows);
}

inline Lattice stabilizer(const PepVector& f) { return stabilizer(f, Coset::full(f.variables)); }

// Rank of the PEP set: maximal variable count over a reduced decomposition.
inline size_t pep_rank(const PepVector& f) {
    size_t r = 0;
    for (const auto& p : reduced_decomposition(f).pieces) r = std::max(r, p.reduced.variables);
    return r;
}

// Semigroup-image certificate: when every first-reduction piece of a single
// component collapses to one purely exponential monomial, the image is a
// finite union of translates of a finitely generated multiplicative group.
inline std::optional<std::vector<FirstReductionPiece>> monomial_on_cosets(const PepVector& f) {
    if (f.components.size() != 1) throw std::invalid_argument("monomial_on_cosets needs s = 1");
    auto pieces = first_reduction(f.canonical ? f : canonicalize(f));
    for (const auto& p : pieces)
        if (p.piece.components[0].terms.size() != 1) return std::nullopt;
    return pieces;
}

}  // namespace pep
