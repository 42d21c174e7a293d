#pragma once

// Matrices over the supported fields and their bridge to PEP sets:
// semisimplicity via exact minimal polynomials, Jordan decomposition by
// Newton iteration on the squarefree part, BG parametrizations as PEP
// vectors, unipotent power membership, the SL2(Z) divisor-counting baseline,
// free-word growth and sparseness ratios.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <thread>
#include <unordered_map>
#include <vector>

#include "pep/counting.hpp"
#include "pep/field.hpp"
#include "pep/heightnorm.hpp"
#include "pep/pep.hpp"
#include "pep/reduction.hpp"

namespace pep {

class MatrixOverField {
public:
    MatrixOverField() : field_(FieldDescriptor::rational()), n_(0) {}
    MatrixOverField(FieldDescriptor f, size_t n)
        : field_(f), n_(n), e_(n * n, FieldElement::zero(f)) {}

    static MatrixOverField identity(FieldDescriptor f, size_t n) {
        MatrixOverField m(f, n);
        for (size_t i = 0; i < n; ++i) m.at(i, i) = FieldElement::one(f);
        return m;
    }
    static MatrixOverField from_rows(FieldDescriptor f, const std::vector<std::vector<FieldElement>>& rows) {
        MatrixOverField m(f, rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
            assert(rows[i].size() == rows.size());
            for (size_t j = 0; j < rows.size(); ++j) m.at(i, j) = rows[i][j].embedded_into(f);
        }
        return m;
    }
    static MatrixOverField from_longs(FieldDescriptor f, const std::vector<std::vector<long>>& rows) {
        MatrixOverField m(f, rows.size());
        for (size_t i = 0; i < rows.size(); ++i)
            for (size_t j = 0; j < rows.size(); ++j) m.at(i, j) = FieldElement(f, rows[i][j]);
        return m;
    }
    static MatrixOverField diagonal(FieldDescriptor f, const std::vector<FieldElement>& d) {
        MatrixOverField m(f, d.size());
        for (size_t i = 0; i < d.size(); ++i) m.at(i, i) = d[i].embedded_into(f);
        return m;
    }

    const FieldDescriptor& field() const { return field_; }
    size_t dim() const { return n_; }
    FieldElement& at(size_t i, size_t j) { return e_[i * n_ + j]; }
    const FieldElement& at(size_t i, size_t j) const { return e_[i * n_ + j]; }
    const std::vector<FieldElement>& entries() const { return e_; }

    MatrixOverField embedded_into(const FieldDescriptor& f) const {
        MatrixOverField m(f, n_);
        for (size_t i = 0; i < e_.size(); ++i) m.e_[i] = e_[i].embedded_into(f);
        return m;
    }

    friend MatrixOverField operator*(const MatrixOverField& a, const MatrixOverField& b) {
        assert(a.n_ == b.n_ && a.field_ == b.field_);
        MatrixOverField c(a.field_, a.n_);
        // fused accumulation into existing storage; mpq stays canonical
        mpq_class t, u;
        for (size_t i = 0; i < a.n_; ++i)
            for (size_t k = 0; k < a.n_; ++k) {
                const FieldElement& x = a.at(i, k);
                if (x.is_zero()) continue;
                for (size_t j = 0; j < a.n_; ++j) {
                    const FieldElement& y = b.at(k, j);
                    if (y.is_zero()) continue;
                    c.at(i, j).acc_mul(x, y, t, u);
                }
            }
        return c;
    }
    friend MatrixOverField operator+(const MatrixOverField& a, const MatrixOverField& b) {
        MatrixOverField c(a.field_, a.n_);
        for (size_t i = 0; i < a.e_.size(); ++i) c.e_[i] = a.e_[i] + b.e_[i];
        return c;
    }
    friend MatrixOverField operator-(const MatrixOverField& a, const MatrixOverField& b) {
        MatrixOverField c(a.field_, a.n_);
        for (size_t i = 0; i < a.e_.size(); ++i) c.e_[i] = a.e_[i] - b.e_[i];
        return c;
    }
    MatrixOverField scaled(const FieldElement& s) const {
        MatrixOverField c(field_, n_);
        for (size_t i = 0; i < e_.size(); ++i) c.e_[i] = e_[i] * s;
        return c;
    }
    friend bool operator==(const MatrixOverField& a, const MatrixOverField& b) {
        return a.field_ == b.field_ && a.n_ == b.n_ && a.e_ == b.e_;
    }

    FieldElement det() const {
        MatrixOverField m = *this;
        FieldElement d = FieldElement::one(field_);
        for (size_t c = 0; c < n_; ++c) {
            size_t piv = c;
            while (piv < n_ && m.at(piv, c).is_zero()) ++piv;
            if (piv == n_) return FieldElement::zero(field_);
            if (piv != c) {
                for (size_t j = 0; j < n_; ++j) std::swap(m.at(piv, j), m.at(c, j));
                d = -d;
            }
            d = d * m.at(c, c);
            FieldElement inv = m.at(c, c).inverse();
            for (size_t i = c + 1; i < n_; ++i) {
                if (m.at(i, c).is_zero()) continue;
                FieldElement q = m.at(i, c) * inv;
                for (size_t j = c; j < n_; ++j) m.at(i, j) = m.at(i, j) - q * m.at(c, j);
            }
        }
        return d;
    }

    MatrixOverField inverse() const {
        MatrixOverField m = *this, inv = identity(field_, n_);
        for (size_t c = 0; c < n_; ++c) {
            size_t piv = c;
            while (piv < n_ && m.at(piv, c).is_zero()) ++piv;
            if (piv == n_) throw std::invalid_argument("matrix not invertible");
            if (piv != c)
                for (size_t j = 0; j < n_; ++j) {
                    std::swap(m.at(piv, j), m.at(c, j));
                    std::swap(inv.at(piv, j), inv.at(c, j));
                }
            FieldElement pinv = m.at(c, c).inverse();
            for (size_t j = 0; j < n_; ++j) {
                m.at(c, j) = m.at(c, j) * pinv;
                inv.at(c, j) = inv.at(c, j) * pinv;
            }
            for (size_t i = 0; i < n_; ++i) {
                if (i == c || m.at(i, c).is_zero()) continue;
                FieldElement q = m.at(i, c);
                for (size_t j = 0; j < n_; ++j) {
                    m.at(i, j) = m.at(i, j) - q * m.at(c, j);
                    inv.at(i, j) = inv.at(i, j) - q * inv.at(c, j);
                }
            }
        }
        return inv;
    }

    MatrixOverField pow(long e) const {
        MatrixOverField base = e >= 0 ? *this : inverse();
        unsigned long k = e >= 0 ? static_cast<unsigned long>(e) : static_cast<unsigned long>(-(e + 1)) + 1;
        MatrixOverField acc = identity(field_, n_);
        while (k) {
            if (k & 1) acc = acc * base;
            base = base * base;
            k >>= 1;
        }
        return acc;
    }

    size_t hash() const { return FieldElementVecHash{}(e_); }

private:
    FieldDescriptor field_;
    size_t n_;
    std::vector<FieldElement> e_;
};

inline Real matrix_height(const MatrixOverField& m) { return affine_height(m.entries()); }

// Cheap upper bound on h_aff of the entries in doubles (box sizing only).
inline double matrix_height_upper(const MatrixOverField& m) {
    double arch = 0, den = 0;
    for (const auto& x : m.entries()) {
        if (x.is_zero()) continue;
        double av = std::fabs(x.a().get_d()), bv = std::fabs(x.b().get_d());
        double mag = av + bv * std::sqrt(std::fabs(static_cast<double>(x.field().d))) + 1;
        arch = std::max(arch, std::log(mag));
        den += std::log(x.a().get_den().get_d()) + std::log(x.b().get_den().get_d());
    }
    return arch + den + 1e-9;
}

// ---- minimal polynomial and Jordan decomposition -----------------------------

struct FPoly {
    std::vector<FieldElement> c;  // low-to-high

    void normalize() {
        while (!c.empty() && c.back().is_zero()) c.pop_back();
    }
    long degree() const { return static_cast<long>(c.size()) - 1; }
    bool is_zero() const { return c.empty(); }
};

namespace detail {

inline FPoly poly_derivative(const FPoly& p) {
    FPoly d;
    for (size_t i = 1; i < p.c.size(); ++i)
        d.c.push_back(p.c[i] * FieldElement(p.c[i].field(), mpq_class(static_cast<long>(i))));
    d.normalize();
    return d;
}

inline FPoly poly_divmod(FPoly a, const FPoly& b, FPoly* quotient = nullptr) {
    assert(!b.is_zero());
    FPoly q;
    long qdeg = std::max<long>(0, a.degree() - b.degree() + 1);
    q.c.assign(qdeg, FieldElement::zero(b.c[0].field()));
    FieldElement lead = b.c.back().inverse();
    a.normalize();
    while (!a.is_zero() && a.degree() >= b.degree()) {
        FieldElement f = a.c.back() * lead;
        long shift = a.degree() - b.degree();
        q.c[shift] = q.c[shift] + f;
        for (size_t i = 0; i < b.c.size(); ++i) a.c[shift + i] = a.c[shift + i] - f * b.c[i];
        a.normalize();
    }
    if (quotient) {
        q.normalize();
        *quotient = q;
    }
    return a;
}

inline FPoly poly_gcd(FPoly a, FPoly b) {
    a.normalize();
    b.normalize();
    while (!b.is_zero()) {
        FPoly r = poly_divmod(a, b);
        a = b;
        b = r;
    }
    if (!a.is_zero()) {
        FieldElement lead = a.c.back().inverse();
        for (auto& x : a.c) x = x * lead;
    }
    return a;
}

inline MatrixOverField poly_eval(const FPoly& p, const MatrixOverField& m) {
    MatrixOverField acc(m.field(), m.dim());
    MatrixOverField pw = MatrixOverField::identity(m.field(), m.dim());
    for (size_t i = 0; i < p.c.size(); ++i) {
        if (!p.c[i].is_zero()) acc = acc + pw.scaled(p.c[i]);
        pw = pw * m;
    }
    return acc;
}

inline bool matrix_is_zero(const MatrixOverField& m) {
    for (const auto& e : m.entries())
        if (!e.is_zero()) return false;
    return true;
}

}  // namespace detail

// Exact minimal polynomial via incremental linear dependence of the powers.
inline FPoly minimal_polynomial(const MatrixOverField& m) {
    size_t n = m.dim(), dim = n * n;
    FieldDescriptor f = m.field();
    std::vector<std::vector<FieldElement>> basis;  // row-reduced span of the powers
    std::vector<std::vector<FieldElement>> combo;  // expression of each basis row in powers
    std::vector<size_t> pivots;
    MatrixOverField pw = MatrixOverField::identity(f, n);
    for (size_t k = 0;; ++k) {
        std::vector<FieldElement> v(pw.entries());
        std::vector<FieldElement> cmb(k + 1, FieldElement::zero(f));
        cmb[k] = FieldElement::one(f);
        for (size_t b = 0; b < basis.size(); ++b) {
            const auto& piv = pivots[b];
            if (v[piv].is_zero()) continue;
            FieldElement q = v[piv];
            for (size_t j = 0; j < dim; ++j) v[j] = v[j] - q * basis[b][j];
            for (size_t j = 0; j < combo[b].size(); ++j) cmb[j] = cmb[j] - q * combo[b][j];
        }
        size_t piv = dim;
        for (size_t j = 0; j < dim; ++j)
            if (!v[j].is_zero()) {
                piv = j;
                break;
            }
        if (piv == dim) {
            FPoly p;
            p.c = cmb;
            p.normalize();
            FieldElement lead = p.c.back().inverse();
            for (auto& x : p.c) x = x * lead;
            return p;
        }
        FieldElement inv = v[piv].inverse();
        for (size_t j = 0; j < dim; ++j) v[j] = v[j] * inv;
        for (auto& x : cmb) x = x * inv;
        basis.push_back(v);
        combo.push_back(cmb);
        pivots.push_back(piv);
        pw = pw * m;
        if (k > dim) throw std::logic_error("minimal polynomial search overran");
    }
}

// Squarefree minimal polynomial = semisimple (characteristic zero).
inline bool is_semisimple(const MatrixOverField& m) {
    FPoly p = minimal_polynomial(m);
    return detail::poly_gcd(p, detail::poly_derivative(p)).degree() == 0;
}

// Exact Jordan-Chevalley decomposition M = g_s g_u, fully rational: Newton
// iteration toward the squarefree part of the minimal polynomial.
struct JordanSplit {
    MatrixOverField semisimple;
    MatrixOverField unipotent;
};

inline JordanSplit jordan_split(const MatrixOverField& m) {
    if (m.det().is_zero()) throw std::invalid_argument("jordan_split needs invertible input");
    FPoly p = minimal_polynomial(m);
    FPoly g = detail::poly_gcd(p, detail::poly_derivative(p));
    FPoly q;
    detail::poly_divmod(p, g, &q);
    MatrixOverField x = m;
    for (int iter = 0; iter < 16; ++iter) {
        MatrixOverField qx = detail::poly_eval(q, x);
        if (detail::matrix_is_zero(qx)) break;
        MatrixOverField dqx = detail::poly_eval(detail::poly_derivative(q), x);
        x = x - dqx.inverse() * qx;
    }
    if (!detail::matrix_is_zero(detail::poly_eval(q, x)))
        throw std::logic_error("jordan_split: Newton did not converge");
    JordanSplit out;
    out.semisimple = x;
    out.unipotent = x.inverse() * m;
    if (!(out.semisimple * out.unipotent == out.unipotent * out.semisimple))
        throw std::logic_error("jordan_split: factors do not commute");
    MatrixOverField nil = out.unipotent - MatrixOverField::identity(m.field(), m.dim());
    MatrixOverField acc = MatrixOverField::identity(m.field(), m.dim());
    for (size_t i = 0; i < m.dim(); ++i) acc = acc * nil;
    if (!detail::matrix_is_zero(acc)) throw std::logic_error("jordan_split: unipotent check failed");
    return out;
}

// ---- exact diagonalization certificates ---------------------------------------

struct SemisimpleCert {
    MatrixOverField g, g_inv;
    std::vector<FieldElement> eigenvalues;  // g^-1 M g = diag(eigenvalues), verified
};

namespace detail {

inline std::optional<FieldElement> field_sqrt(const FieldElement& z) {
    const FieldDescriptor& f = z.field();
    if (z.is_zero()) return FieldElement::zero(f);
    auto rational_sqrt = [](const mpq_class& a) -> std::optional<mpq_class> {
        if (a <= 0) return std::nullopt;
        if (!mpz_perfect_square_p(a.get_num_mpz_t()) || !mpz_perfect_square_p(a.get_den_mpz_t()))
            return std::nullopt;
        mpz_class sn, sd;
        mpz_sqrt(sn.get_mpz_t(), a.get_num_mpz_t());
        mpz_sqrt(sd.get_mpz_t(), a.get_den_mpz_t());
        return mpq_class(sn) / mpq_class(sd);
    };
    if (z.b() == 0) {
        if (auto s = rational_sqrt(z.a())) return FieldElement(f, *s);
        if (!f.is_rational()) {
            if (auto y = rational_sqrt(z.a() / f.d)) return FieldElement(f, 0, *y);
        }
        return std::nullopt;
    }
    // (x + y sqrt d)^2 = a + b sqrt d: x^2 = (a +- s)/2 with s = sqrt(N(z))
    auto s = rational_sqrt(z.a() * z.a() - mpq_class(f.d) * z.b() * z.b());
    if (!s) return std::nullopt;
    for (int sign = 0; sign < 2; ++sign) {
        auto x = rational_sqrt((z.a() + (sign ? -*s : *s)) / 2);
        if (!x) continue;
        mpq_class y = z.b() / (2 * *x);
        FieldElement r(f, *x, y);
        if (r * r == z) return r;
    }
    return std::nullopt;
}

inline long squarefree_part(const mpq_class& r) {
    mpz_class m = r.get_num() * r.get_den();
    long sign = m < 0 ? -1 : 1;
    mpz_class d0 = 1;
    for (auto& [p, e] : factorize(m))
        if (e % 2) d0 *= p;
    if (!d0.fits_slong_p()) throw CapError("discriminant squarefree part too large");
    return sign * d0.get_si();
}

}  // namespace detail

// Exact diagonalization certificate. Supported inputs: diagonal matrices of
// any size, and 2x2 matrices whose eigenvalues lie in Q or one quadratic
// extension (the certificate may live in a larger field than the input).
inline SemisimpleCert make_semisimple_cert(const MatrixOverField& m0) {
    size_t n = m0.dim();
    bool diag = true;
    for (size_t i = 0; i < n && diag; ++i)
        for (size_t j = 0; j < n; ++j)
            if (i != j && !m0.at(i, j).is_zero()) diag = false;
    if (diag) {
        SemisimpleCert c;
        c.g = MatrixOverField::identity(m0.field(), n);
        c.g_inv = c.g;
        for (size_t i = 0; i < n; ++i) c.eigenvalues.push_back(m0.at(i, i));
        return c;
    }
    if (n != 2) throw UnsupportedFieldError("diagonalization beyond 2x2 requires diagonal input");

    FieldElement tr = m0.at(0, 0) + m0.at(1, 1);
    FieldElement de = m0.det();
    FieldElement four(m0.field(), 4);
    FieldElement disc = tr * tr - four * de;

    FieldDescriptor workf = m0.field();
    FieldElement sqrt_disc = FieldElement::zero(workf);
    auto sq = detail::field_sqrt(disc);
    if (sq) {
        sqrt_disc = *sq;
    } else {
        if (!m0.field().is_rational())
            throw UnsupportedFieldError("eigenvalues would need a biquadratic extension");
        long d0 = detail::squarefree_part(disc.a());
        workf = FieldDescriptor::quadratic(d0);
        mpq_class s2 = disc.a() / d0;
        mpz_class sn, sd;
        assert(mpz_perfect_square_p(s2.get_num_mpz_t()) && mpz_perfect_square_p(s2.get_den_mpz_t()));
        mpz_sqrt(sn.get_mpz_t(), s2.get_num_mpz_t());
        mpz_sqrt(sd.get_mpz_t(), s2.get_den_mpz_t());
        sqrt_disc = FieldElement(workf, 0, mpq_class(sn) / mpq_class(sd));
    }
    MatrixOverField m = m0.embedded_into(workf);
    FieldElement two(workf, 2);
    FieldElement l1 = (tr.embedded_into(workf) + sqrt_disc) / two;
    FieldElement l2 = (tr.embedded_into(workf) - sqrt_disc) / two;
    if (l1 == l2) {
        // repeated eigenvalue: semisimple only if scalar, and scalar is diagonal
        throw std::invalid_argument("make_semisimple_cert: non-diagonal input with repeated eigenvalue");
    }
    auto eigenvector = [&](const FieldElement& lam) -> std::vector<FieldElement> {
        if (!m.at(0, 1).is_zero()) return {m.at(0, 1), lam - m.at(0, 0)};
        return {lam - m.at(1, 1), m.at(1, 0)};
    };
    auto v1 = eigenvector(l1), v2 = eigenvector(l2);
    SemisimpleCert c;
    c.g = MatrixOverField(workf, 2);
    c.g.at(0, 0) = v1[0];
    c.g.at(1, 0) = v1[1];
    c.g.at(0, 1) = v2[0];
    c.g.at(1, 1) = v2[1];
    if (c.g.det().is_zero()) throw std::logic_error("eigenvector matrix degenerate");
    c.g_inv = c.g.inverse();
    c.eigenvalues = {l1, l2};
    MatrixOverField check = c.g_inv * m * c.g;
    if (!(check == MatrixOverField::diagonal(workf, c.eigenvalues)))
        throw std::logic_error("diagonalization certificate failed verification");
    return c;
}

// ---- BG spec and its PEP parametrization ---------------------------------------

struct BgSpec {
    FieldDescriptor field;
    std::vector<std::pair<MatrixOverField, SemisimpleCert>> generators;

    size_t dim() const { return generators.empty() ? 0 : generators[0].first.dim(); }
    size_t rank_vars() const { return generators.size(); }
};

// Builds certificates over a common supported field extension.
inline BgSpec make_bg_spec(const std::vector<MatrixOverField>& mats) {
    if (mats.empty()) throw std::invalid_argument("empty BG spec");
    std::vector<SemisimpleCert> certs;
    FieldDescriptor common = FieldDescriptor::rational();
    for (const auto& m : mats) {
        SemisimpleCert c = make_semisimple_cert(m);
        FieldDescriptor fc = c.g.field().degree() > 1 ? c.g.field() : m.field();
        if (fc.degree() > 1) {
            if (common.degree() > 1 && !(common == fc))
                throw UnsupportedFieldError("BG generators need incompatible quadratic extensions");
            common = fc;
        }
        certs.push_back(c);
    }
    BgSpec spec;
    spec.field = common;
    for (size_t i = 0; i < mats.size(); ++i) {
        MatrixOverField lifted = mats[i].embedded_into(common);
        SemisimpleCert cert = certs[i].g.field() == common ? certs[i] : make_semisimple_cert(lifted);
        // re-verify in the common field
        MatrixOverField check = cert.g_inv * lifted * cert.g;
        std::vector<FieldElement> eig;
        for (auto& e : cert.eigenvalues) eig.push_back(e.embedded_into(common));
        if (!(check == MatrixOverField::diagonal(common, eig)))
            throw std::logic_error("BG certificate failed verification in the common field");
        cert.eigenvalues = eig;
        spec.generators.emplace_back(lifted, cert);
    }
    return spec;
}

// PEP vector with n^2 components (row-major) whose value at (a_1..a_r) is
// the product prod_i g_i diag(lambda_i^{a_i}) g_i^{-1}, entrywise exact.
inline PepVector bg_to_pep(const BgSpec& spec) {
    size_t n = spec.dim(), r = spec.rank_vars();
    FieldDescriptor f = spec.field;
    std::vector<FieldElement> bases;
    auto base_index = [&](const FieldElement& x) -> size_t {
        for (size_t i = 0; i < bases.size(); ++i)
            if (bases[i] == x) return i;
        bases.push_back(x);
        return bases.size() - 1;
    };
    std::vector<std::vector<std::vector<size_t>>> slot(r);  // slot[i][j] = base index of lambda_{i,j}
    for (size_t i = 0; i < r; ++i) {
        slot[i].resize(n);
        for (size_t j = 0; j < n; ++j) slot[i][j] = {base_index(spec.generators[i].second.eigenvalues[j])};
    }
    size_t k = bases.size();

    // factor i as an n x n matrix of PEP polynomials in variable i
    auto factor = [&](size_t i) {
        std::vector<std::vector<PepPolynomial>> F(n, std::vector<PepPolynomial>(n));
        const auto& cert = spec.generators[i].second;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = 0; q < n; ++q)
                for (size_t j = 0; j < n; ++j) {
                    FieldElement coeff = cert.g.at(p, j) * cert.g_inv.at(j, q);
                    if (coeff.is_zero()) continue;
                    PepTerm t;
                    t.coeff = coeff;
                    t.exponents = IntMatrix(k, r);
                    t.exponents.at(slot[i][j][0], i) = 1;
                    F[p][q].terms.push_back(t);
                }
        return F;
    };
    std::vector<std::vector<PepPolynomial>> prod = factor(0);
    for (size_t i = 1; i < r; ++i) {
        auto Fi = factor(i);
        std::vector<std::vector<PepPolynomial>> next(n, std::vector<PepPolynomial>(n));
        for (size_t p = 0; p < n; ++p)
            for (size_t q = 0; q < n; ++q)
                for (size_t j = 0; j < n; ++j) {
                    PepPolynomial term = detail::poly_mul(prod[p][j], Fi[j][q]);
                    for (auto& t : term.terms) next[p][q].terms.push_back(t);
                }
        prod = next;
    }
    PepVector out;
    out.field = f;
    out.variables = r;
    out.bases = bases;
    for (size_t p = 0; p < n; ++p)
        for (size_t q = 0; q < n; ++q) out.components.push_back(prod[p][q]);
    return canonicalize(out);
}

// Z-rank of the abelian group generated by commuting semisimple matrices =
// r minus the rank of the joint exact-relation lattice of the eigenvalue
// slots (Appendix Lemma A's right-hand side).
inline size_t eigenvalue_group_rank(const BgSpec& spec) {
    size_t n = spec.dim(), r = spec.rank_vars();
    Lattice inter = Lattice::full(r);
    for (size_t j = 0; j < n; ++j) {
        std::vector<FieldElement> tuple;
        for (size_t i = 0; i < r; ++i) tuple.push_back(spec.generators[i].second.eigenvalues[j]);
        inter = inter.intersect(exact_one_relations(tuple));
    }
    return r - inter.rank();
}

// ---- unipotent power membership --------------------------------------------------

struct PowerMembershipReport {
    long long count = 0;
    bool certified = false;
    long image_box = 0;
    double envelope = 0;  // (log N)^{r+1}
};

struct PowerMembershipOptions {
    double height_cap = 5000.0;  // candidate heights beyond this abort (entry bit-size guard)
    long fallback_box = 12;
    unsigned threads = 1;
};

namespace detail {

// Upper bound on max_{|l| <= N} h_aff(g^l) when g is unipotent, via the
// binomial expansion g^l = sum_k C(l,k) (g - I)^k with |C(l,k)| <= (2N)^k:
// clear denominators, bound entry magnitudes exactly in mpz.
inline std::optional<double> unipotent_power_height_bound(const MatrixOverField& g, long N) {
    size_t n = g.dim();
    MatrixOverField nil = g - MatrixOverField::identity(g.field(), n);
    std::vector<MatrixOverField> powers;  // (g - I)^k for k < n
    MatrixOverField acc = MatrixOverField::identity(g.field(), n);
    for (size_t k = 0; k < n; ++k) {
        powers.push_back(acc);
        acc = acc * nil;
    }
    if (!matrix_is_zero(acc)) return std::nullopt;  // not unipotent
    mpz_class den = 1;
    for (const auto& p : powers)
        for (const auto& e : p.entries()) {
            den = lcm(den, e.a().get_den());
            den = lcm(den, e.b().get_den());
        }
    mpz_class bound = 0;
    mpz_class scale = 1;
    for (size_t k = 0; k < n; ++k) {
        mpz_class maxabs = 0;
        for (const auto& e : powers[k].entries()) {
            mpz_class na = abs(e.a().get_num() * (den / e.a().get_den()));
            mpz_class nb = abs(e.b().get_num() * (den / e.b().get_den()));
            mpz_class cand = na + nb;
            if (cand > maxabs) maxabs = cand;
        }
        bound += scale * maxabs;
        scale *= 2 * mpz_class(N);
    }
    if (bound == 0) bound = 1;
    // scaled entries are integers a + b sqrt(d) with |a| + |b| <= bound, so
    // every archimedean value is at most bound * (1 + sqrt|d|); denominators
    // divide den
    double sqrt_slack =
        g.field().is_rational() ? 0.0 : std::log(1.0 + std::sqrt(std::fabs(double(g.field().d))));
    return std::log(bound.get_d()) + std::log(den.get_d()) + sqrt_slack + 1.0;
}

}  // namespace detail

// Exact #{l : |l| <= N, g^l in f(Z^r)}, by value hashing of the candidates
// against the enumerated image over a certified (or flagged) box.
inline PowerMembershipReport power_membership_count(const MatrixOverField& g, const PepVector& f, long N,
                                                    const PowerMembershipOptions& opts = {}) {
    PepVector c = f.canonical ? f : canonicalize(f);
    if (c.components.size() != g.dim() * g.dim())
        throw std::invalid_argument("power_membership_count: component count != n^2");
    MatrixOverField gi = g.inverse();

    double hmax = 0;
    if (auto bound = detail::unipotent_power_height_bound(g, N)) {
        hmax = *bound;
        if (hmax > opts.height_cap) throw CapError("power_membership_count: candidate heights exceed cap");
    } else {
        for (int dir = 0; dir < 2; ++dir) {
            MatrixOverField p = MatrixOverField::identity(g.field(), g.dim());
            const MatrixOverField& step = dir ? gi : g;
            for (long l = 0; l <= N; ++l) {
                double h = matrix_height_upper(p);
                hmax = std::max(hmax, h);
                if (h > opts.height_cap) throw CapError("power_membership_count: candidate heights exceed cap");
                if (l < N) p = p * step;
            }
        }
    }

    PowerMembershipReport rep;
    long R = opts.fallback_box;
    if (detail::all_components_monomial(c) && c.variables >= 1 && c.variables <= 3) {
        HeightSeminorm norm = build_height_seminorm(c);
        if (auto floor = seminorm_floor(norm); floor && *floor > 0) {
            double gap = monomial_height_gap(c).to_double();
            R = static_cast<long>(std::floor((hmax + gap) / *floor)) + 1;
            rep.certified = true;
        }
    } else if (c.variables == 0) {
        R = 0;
        rep.certified = true;
    }
    rep.image_box = R;
    EnumerateOptions eo;
    eo.threads = opts.threads;
    ImageSet img = enumerate_image(c, R, eo);

    auto member = [&](const MatrixOverField& m) {
        return img.values.find(m.entries()) != img.values.end();
    };
    long long count = 0;
    {
        MatrixOverField p = MatrixOverField::identity(g.field(), g.dim());
        if (member(p)) ++count;
        for (long l = 1; l <= N; ++l) {
            p = p * g;
            if (member(p)) ++count;
        }
        p = MatrixOverField::identity(g.field(), g.dim());
        for (long l = 1; l <= N; ++l) {
            p = p * gi;
            if (member(p)) ++count;
        }
    }
    rep.count = count;
    rep.envelope = std::pow(std::log(static_cast<double>(N)), static_cast<double>(c.variables) + 1.0);
    return rep;
}

// ---- SL2(Z) baseline ---------------------------------------------------------------

// Exact #{(a,b,c,d) : ad - bc = 1, max |.| <= T} by iterating (a, d) and
// counting divisor pairs of ad - 1 inside the box.
inline long long sl2z_ball_count(long T, unsigned threads = 1) {
    if (T < 1) throw std::invalid_argument("sl2z_ball_count: T >= 1");
    if (T > 3000) throw CapError("sl2z_ball_count: T beyond runtime cap");
    long long M = static_cast<long long>(T) * T + 1;
    std::vector<int32_t> spf(M + 1, 0);
    for (long long i = 2; i <= M; ++i) {
        if (spf[i] == 0)
            for (long long j = i; j <= M; j += i)
                if (spf[j] == 0) spf[j] = static_cast<int32_t>(i);
    }
    auto pairs_for = [&](long long m) -> long long {
        if (m == 0) return 4LL * T + 1;  // b = 0 or c = 0
        long long am = std::llabs(m);
        // factor via spf
        std::vector<std::pair<long long, int>> fac;
        long long x = am;
        while (x > 1) {
            long long p = spf[x];
            int e = 0;
            while (x % p == 0) {
                x /= p;
                ++e;
            }
            fac.emplace_back(p, e);
        }
        // count divisors e of am with e <= T and am / e <= T
        long long lo = (am + T - 1) / T;
        long long cnt = 0;
        std::function<void(size_t, long long)> rec = [&](size_t i, long long dcur) {
            if (dcur > T) return;
            if (i == fac.size()) {
                if (dcur >= lo) ++cnt;
                return;
            }
            long long p = fac[i].first;
            long long v = 1;
            for (int e = 0; e <= fac[i].second; ++e) {
                rec(i + 1, dcur * v);
                if (e < fac[i].second) v *= p;
            }
        };
        rec(0, 1);
        return 2 * cnt;  // sign patterns
    };
    unsigned nt = std::max(1u, threads);
    std::vector<long long> partial(nt, 0);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t)
        pool.emplace_back([&, t]() {
            long long sum = 0;
            for (long a = -T + static_cast<long>(t); a <= T; a += nt)
                for (long d = -T; d <= T; ++d) sum += pairs_for(static_cast<long long>(a) * d - 1);
            partial[t] = sum;
        });
    for (auto& th : pool) th.join();
    long long total = 0;
    for (auto s : partial) total += s;
    return total;
}

// Brute-force oracle, O(T^4); test sizes only.
inline long long sl2z_exhaustive_count(long T) {
    long long n = 0;
    for (long a = -T; a <= T; ++a)
        for (long b = -T; b <= T; ++b)
            for (long c = -T; c <= T; ++c)
                for (long d = -T; d <= T; ++d)
                    if (static_cast<long long>(a) * d - static_cast<long long>(b) * c == 1) ++n;
    return n;
}

// ---- free-word growth ----------------------------------------------------------------

struct WordGrowthLevel {
    int length = 0;
    long long distinct_cumulative = 0;
    double max_height = 0;
};

struct WordGrowthReport {
    std::vector<WordGrowthLevel> levels;
    double generator_height = 0;  // C
    double delta = 0;             // implied T^delta envelope exponent: log 2 / log(n C)
    bool height_bound_ok = true;  // every word satisfies h <= l log(n C)
};

// Enumerates reduced words of length <= l_max in {g1^+-1, g2^+-1} with exact
// deduplication, verifying the affine-height growth bound word by word.
inline WordGrowthReport free_word_growth(const MatrixOverField& g1, const MatrixOverField& g2, int l_max) {
    FieldDescriptor f = g1.field();
    size_t n = g1.dim();
    std::vector<MatrixOverField> gens = {g1, g1.inverse(), g2, g2.inverse()};
    WordGrowthReport rep;
    double C = 0;
    for (const auto& g : gens) C = std::max(C, std::exp(matrix_height(g).to_double()));
    rep.generator_height = C;
    double lognC = std::log(static_cast<double>(n) * C);
    rep.delta = lognC > 0 ? std::log(2.0) / lognC : 0;

    struct Node {
        MatrixOverField m;
        int last;  // generator index, -1 at the root
    };
    std::unordered_map<size_t, std::vector<MatrixOverField>> seen;
    auto insert_new = [&](const MatrixOverField& m) {
        auto& bucket = seen[m.hash()];
        for (const auto& x : bucket)
            if (x == m) return false;
        bucket.push_back(m);
        return true;
    };
    std::vector<Node> frontier;
    MatrixOverField id = MatrixOverField::identity(f, n);
    insert_new(id);
    frontier.push_back({id, -1});
    long long cumulative = 1;
    double hmax = 0;
    rep.levels.push_back({0, 1, 0.0});
    for (int l = 1; l <= l_max; ++l) {
        std::vector<Node> next;
        for (const auto& node : frontier)
            for (int gidx = 0; gidx < 4; ++gidx) {
                if (node.last >= 0 && (node.last ^ 1) == gidx) continue;  // immediate cancellation
                MatrixOverField m = node.m * gens[gidx];
                double h = matrix_height(m).to_double();
                if (h > l * lognC + 1e-9) rep.height_bound_ok = false;
                if (insert_new(m)) {
                    next.push_back({m, gidx});
                    ++cumulative;
                    hmax = std::max(hmax, h);
                }
            }
        rep.levels.push_back({l, cumulative, hmax});
        frontier = std::move(next);
    }
    return rep;
}

// ---- sparseness ------------------------------------------------------------------------

struct SparsenessReport {
    std::vector<double> thresholds;
    std::vector<long long> pep_counts;
    std::vector<long long> ambient_counts;
    std::vector<double> ratios;
    bool decreasing = true;
};

inline SparsenessReport sparseness_report(const PepVector& f, const std::vector<double>& thresholds,
                                          const std::vector<long long>& ambient_counts,
                                          const CountOptions& opts = {}) {
    if (thresholds.size() != ambient_counts.size())
        throw std::invalid_argument("sparseness_report: length mismatch");
    SparsenessReport rep;
    rep.thresholds = thresholds;
    rep.ambient_counts = ambient_counts;
    CountReport cr = count_by_height(f, thresholds, opts);
    rep.pep_counts = cr.counts;
    for (size_t i = 0; i < thresholds.size(); ++i) {
        double ratio = ambient_counts[i] > 0
                           ? static_cast<double>(cr.counts[i]) / static_cast<double>(ambient_counts[i])
                           : 0.0;
        rep.ratios.push_back(ratio);
        if (i > 0 && rep.ratios[i] >= rep.ratios[i - 1]) rep.decreasing = false;
    }
    return rep;
}

}  // namespace pep
