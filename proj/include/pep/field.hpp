#pragma once

// Exact arithmetic in Q and quadratic fields Q(sqrt(d)), d squarefree.
// Elements are stored as a + b*sqrt(d) with exact rationals a, b; equality
// is structural after mpq normalization.

#include <gmpxx.h>

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pep/errors.hpp"
#include "pep/real.hpp"

namespace pep {

enum class FieldKind { Rational, Quadratic };

struct FieldDescriptor {
    FieldKind kind = FieldKind::Rational;
    long d = 0;  // squarefree, != 0, 1; meaningful only for Quadratic

    static FieldDescriptor rational() { return {FieldKind::Rational, 0}; }
    static FieldDescriptor quadratic(long d) {
        if (d == 0 || d == 1) throw UnsupportedFieldError("quadratic field needs squarefree d != 0, 1");
        long ad = d < 0 ? -d : d;
        for (long p = 2; p * p <= ad; ++p)
            if (ad % (p * p) == 0) throw UnsupportedFieldError("d must be squarefree");
        return {FieldKind::Quadratic, d};
    }

    int degree() const { return kind == FieldKind::Rational ? 1 : 2; }
    bool is_rational() const { return kind == FieldKind::Rational; }
    bool is_real_quadratic() const { return kind == FieldKind::Quadratic && d > 0; }
    bool is_imaginary_quadratic() const { return kind == FieldKind::Quadratic && d < 0; }

    friend bool operator==(const FieldDescriptor& x, const FieldDescriptor& y) {
        return x.kind == y.kind && (x.kind == FieldKind::Rational || x.d == y.d);
    }
    friend bool operator!=(const FieldDescriptor& x, const FieldDescriptor& y) { return !(x == y); }

    std::string str() const {
        return is_rational() ? "Q" : "Q(sqrt(" + std::to_string(d) + "))";
    }
};

class FieldElement {
    struct RawTag {};
    // arithmetic-internal: gmp keeps canonical inputs canonical
    FieldElement(RawTag, const FieldDescriptor& f, mpq_class a, mpq_class b)
        : field_(f), a_(std::move(a)), b_(std::move(b)) {}

public:
    FieldElement() : field_(FieldDescriptor::rational()), a_(0), b_(0) {}
    FieldElement(FieldDescriptor f, mpq_class a, mpq_class b = 0)
        : field_(f), a_(std::move(a)), b_(std::move(b)) {
        a_.canonicalize();
        b_.canonicalize();
        if (field_.is_rational() && b_ != 0)
            throw UnsupportedFieldError("rational element with nonzero sqrt part");
    }
    static FieldElement rational(mpq_class a) { return FieldElement(FieldDescriptor::rational(), std::move(a)); }
    static FieldElement zero(FieldDescriptor f) { return FieldElement(f, 0); }
    static FieldElement one(FieldDescriptor f) { return FieldElement(f, 1); }

    const FieldDescriptor& field() const { return field_; }
    const mpq_class& a() const { return a_; }
    const mpq_class& b() const { return b_; }

    bool is_zero() const { return a_ == 0 && b_ == 0; }
    bool is_one() const { return a_ == 1 && b_ == 0; }
    bool is_rational_value() const { return b_ == 0; }

    // Embeds into a (possibly) larger supported field. Only Q -> Q(sqrt d)
    // lifts are available.
    FieldElement embedded_into(const FieldDescriptor& f) const {
        if (field_ == f) return *this;
        if (field_.is_rational()) return FieldElement(f, a_, 0);
        throw UnsupportedFieldError("cannot embed " + field_.str() + " into " + f.str());
    }

    FieldElement conj() const { return FieldElement(RawTag{}, field_, a_, -b_); }

    // this += x * y with caller-provided scratch; hot path of the matrix
    // product (fields unchecked)
    void acc_mul(const FieldElement& x, const FieldElement& y, mpq_class& t, mpq_class& u) {
        if (field_.is_rational()) {
            t = x.a_ * y.a_;
            a_ += t;
            return;
        }
        t = x.a_ * y.a_;
        u = x.b_ * y.b_;
        u *= static_cast<long>(field_.d);
        t += u;
        a_ += t;
        t = x.a_ * y.b_;
        u = x.b_ * y.a_;
        t += u;
        b_ += t;
    }

    // Field norm N(a + b sqrt d) = a^2 - d b^2 (identity on Q).
    mpq_class norm() const {
        if (field_.is_rational()) return a_;
        return a_ * a_ - mpq_class(field_.d) * b_ * b_;
    }
    mpq_class trace() const { return field_.is_rational() ? a_ : mpq_class(2 * a_); }

    friend FieldElement operator+(const FieldElement& x, const FieldElement& y) {
        check(x, y);
        return FieldElement(RawTag{}, x.field_, x.a_ + y.a_, x.b_ + y.b_);
    }
    friend FieldElement operator-(const FieldElement& x, const FieldElement& y) {
        check(x, y);
        return FieldElement(RawTag{}, x.field_, x.a_ - y.a_, x.b_ - y.b_);
    }
    FieldElement operator-() const { return FieldElement(RawTag{}, field_, -a_, -b_); }
    friend FieldElement operator*(const FieldElement& x, const FieldElement& y) {
        check(x, y);
        if (x.field_.is_rational()) return FieldElement(RawTag{}, x.field_, x.a_ * y.a_, 0);
        mpq_class d(x.field_.d);
        return FieldElement(RawTag{}, x.field_, x.a_ * y.a_ + d * x.b_ * y.b_,
                            x.a_ * y.b_ + x.b_ * y.a_);
    }
    FieldElement inverse() const {
        if (is_zero()) throw std::invalid_argument("inverse of zero");
        if (field_.is_rational()) return FieldElement(RawTag{}, field_, 1 / a_, 0);
        mpq_class n = norm();
        return FieldElement(RawTag{}, field_, a_ / n, -b_ / n);
    }
    friend FieldElement operator/(const FieldElement& x, const FieldElement& y) { return x * y.inverse(); }

    FieldElement pow(long e) const {
        if (e == 0) return one(field_);
        FieldElement base = e > 0 ? *this : inverse();
        unsigned long k = e > 0 ? static_cast<unsigned long>(e) : static_cast<unsigned long>(-(e + 1)) + 1;
        FieldElement acc = one(field_);
        while (k) {
            if (k & 1) acc = acc * base;
            base = base * base;
            k >>= 1;
        }
        return acc;
    }
    FieldElement pow(const mpz_class& e) const {
        if (!e.fits_slong_p()) throw CapError("exponent too large");
        return pow(e.get_si());
    }

    friend bool operator==(const FieldElement& x, const FieldElement& y) {
        return x.field_ == y.field_ && x.a_ == y.a_ && x.b_ == y.b_;
    }
    friend bool operator!=(const FieldElement& x, const FieldElement& y) { return !(x == y); }

    // Sign of the image under the real embedding sqrt(d) -> +sqrt(d)
    // (or -sqrt(d) for embedding 1). Exact: decided by rational
    // comparisons and one squaring.
    int embedding_sign(int embedding = 0) const {
        if (field_.is_imaginary_quadratic()) throw std::invalid_argument("no real embedding");
        if (is_zero()) return 0;
        mpq_class a = a_, b = b_;
        if (embedding == 1) b = -b;
        if (b == 0) return sgn(a);
        if (a == 0) return sgn(b);
        if (a > 0 && b > 0) return 1;
        if (a < 0 && b < 0) return -1;
        // opposite signs: compare a^2 vs d b^2
        mpq_class lhs = a * a, rhs = mpq_class(field_.d) * b * b;
        int big = lhs > rhs ? 1 : (lhs < rhs ? -1 : 0);
        if (big == 0) return 0;  // cannot happen for d squarefree, b != 0
        return big > 0 ? sgn(a) : sgn(b);
    }

    // Exact comparison |sigma(x)| vs rational bound c >= 0 at a real embedding.
    // Returns -1, 0, +1.
    int cmp_abs_embedding(const mpq_class& c, int embedding = 0) const {
        if (field_.is_imaginary_quadratic()) throw std::invalid_argument("no real embedding");
        // |a + b s|^2 = a^2 + d b^2 + 2ab s  with s = +-sqrt(d); compare to c^2.
        mpq_class a = a_, b = b_;
        if (embedding == 1) b = -b;
        if (b == 0) {
            mpq_class av = ::abs(a);
            return av < c ? -1 : (av == c ? 0 : 1);
        }
        mpq_class c2 = c * c;
        mpq_class u = a * a + mpq_class(field_.d) * b * b - c2;  // |x|^2 - c^2 = u + v s
        mpq_class v = 2 * a * b;
        // sign of u + v sqrt(d)
        FieldElement t(field_, u, v);
        return t.embedding_sign(0);
    }

    Real embedding_value(int embedding, mpfr_prec_t /*unused; global prec*/ = 0) const {
        if (field_.is_rational()) return Real(a_);
        if (field_.is_imaginary_quadratic()) throw std::invalid_argument("complex embedding has no real value");
        Real s = Real(mpz_class(field_.d)).sqrt();
        if (embedding == 1) s = -s;
        return Real(a_) + Real(b_) * s;
    }

    // |sigma(x)| as a Real; for the complex pair of an imaginary quadratic
    // field this is sqrt(N(x)).
    Real abs_embedding(int embedding = 0) const {
        if (field_.is_imaginary_quadratic()) return Real(norm()).sqrt();
        return embedding_value(embedding).abs();
    }

    std::string str() const {
        if (field_.is_rational() || b_ == 0) return a_.get_str();
        return a_.get_str() + " + (" + b_.get_str() + ")*sqrt(" + std::to_string(field_.d) + ")";
    }

    size_t hash() const {
        auto hz = [](const mpz_class& z, size_t s) {
            const __mpz_struct* p = z.get_mpz_t();
            s = (s ^ static_cast<size_t>(p->_mp_size)) * 1099511628211ull;
            for (int i = 0; i < std::abs(p->_mp_size); ++i)
                s = (s ^ static_cast<size_t>(mpz_getlimbn(p, i))) * 1099511628211ull;
            return s;
        };
        size_t s = 1469598103934665603ull;
        s = hz(a_.get_num(), s);
        s = hz(a_.get_den(), s);
        s = hz(b_.get_num(), s);
        s = hz(b_.get_den(), s);
        s = (s ^ static_cast<size_t>(field_.kind == FieldKind::Quadratic ? field_.d : 0)) * 1099511628211ull;
        return s;
    }

private:
    static void check(const FieldElement& x, const FieldElement& y) {
        if (x.field_ != y.field_) throw std::invalid_argument("field mismatch");
    }
    FieldDescriptor field_;
    mpq_class a_, b_;
};

// Roots of unity available in the supported fields: {1,-1} over Q and
// generic quadratic, plus i over Q(i) and the sixth roots over Q(sqrt(-3)).
inline std::vector<std::pair<FieldElement, int>> roots_of_unity(const FieldDescriptor& f) {
    std::vector<std::pair<FieldElement, int>> out;
    out.emplace_back(FieldElement::one(f), 1);
    out.emplace_back(FieldElement(f, -1), 2);
    if (f.kind == FieldKind::Quadratic && f.d == -1) {
        out.emplace_back(FieldElement(f, 0, 1), 4);   // i
        out.emplace_back(FieldElement(f, 0, -1), 4);  // -i
    }
    if (f.kind == FieldKind::Quadratic && f.d == -3) {
        mpq_class h(1, 2);
        out.emplace_back(FieldElement(f, -h, h), 3);   // omega
        out.emplace_back(FieldElement(f, -h, -h), 3);  // omega^2
        out.emplace_back(FieldElement(f, h, h), 6);    // -omega^2
        out.emplace_back(FieldElement(f, h, -h), 6);   // -omega
    }
    return out;
}

// Multiplicative order if x is a root of unity, absent otherwise.
inline std::optional<int> torsion_order(const FieldElement& x) {
    if (x.is_zero()) return std::nullopt;
    for (const auto& [z, ord] : roots_of_unity(x.field()))
        if (x == z) return ord;
    return std::nullopt;
}

// Canonical primitive root of unity of order e in f. Orders beyond what the
// field supports throw.
inline FieldElement canonical_root_of_unity(const FieldDescriptor& f, int e) {
    switch (e) {
        case 1: return FieldElement::one(f);
        case 2: return FieldElement(f, -1);
        case 4:
            if (f.kind == FieldKind::Quadratic && f.d == -1) return FieldElement(f, 0, 1);
            break;
        case 3:
            if (f.kind == FieldKind::Quadratic && f.d == -3) return FieldElement(f, mpq_class(-1, 2), mpq_class(1, 2));
            break;
        case 6:
            if (f.kind == FieldKind::Quadratic && f.d == -3) return FieldElement(f, mpq_class(1, 2), mpq_class(1, 2));
            break;
    }
    throw UnsupportedFieldError("no root of unity of order " + std::to_string(e) + " in " + f.str());
}

struct FieldElementHash {
    size_t operator()(const FieldElement& x) const { return x.hash(); }
};

struct FieldElementVecHash {
    size_t operator()(const std::vector<FieldElement>& v) const {
        size_t s = 1469598103934665603ull;
        for (const auto& x : v) s = (s ^ x.hash()) * 1099511628211ull;
        return s;
    }
};

}  // namespace pep
