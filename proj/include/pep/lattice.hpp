#pragma once

// Integer sublattices of Z^r, cosets (translates) and quasi-cosets (coset
// minus lower-rank subcosets). Lattices are kept in reduced row HNF so that
// structural equality is canonical equality.

#include <gmpxx.h>

#include <algorithm>
#include <cassert>
#include <functional>
#include <optional>
#include <vector>

#include "pep/intmatrix.hpp"

namespace pep {

using ZVec = std::vector<mpz_class>;

inline ZVec zvec(std::initializer_list<long> xs) {
    ZVec v;
    for (long x : xs) v.emplace_back(x);
    return v;
}

inline ZVec operator-(const ZVec& a, const ZVec& b) {
    assert(a.size() == b.size());
    ZVec c(a.size());
    for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
    return c;
}
inline ZVec operator+(const ZVec& a, const ZVec& b) {
    assert(a.size() == b.size());
    ZVec c(a.size());
    for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

class Lattice {
public:
    Lattice() : ambient_(0), basis_(0, 0) {}
    explicit Lattice(size_t ambient) : ambient_(ambient), basis_(0, ambient) {}

    static Lattice zero(size_t r) { return Lattice(r); }
    static Lattice full(size_t r) { return from_basis(IntMatrix::identity(r)); }
    static Lattice from_basis(const IntMatrix& rows) {
        Lattice l(rows.cols());
        IntMatrix h = hnf(rows);
        std::vector<std::vector<mpz_class>> nz;
        for (size_t i = 0; i < h.rows(); ++i) {
            bool z = true;
            for (size_t j = 0; j < h.cols(); ++j)
                if (h.at(i, j) != 0) z = false;
            if (!z) nz.push_back(h.row(i));
        }
        l.basis_ = nz.empty() ? IntMatrix(0, rows.cols()) : IntMatrix::from_rows(nz);
        return l;
    }
    static Lattice from_rows(size_t ambient, const std::vector<ZVec>& rows) {
        if (rows.empty()) return Lattice(ambient);
        return from_basis(IntMatrix::from_rows(rows));
    }

    size_t ambient_rank() const { return ambient_; }
    size_t rank() const { return basis_.rows(); }
    const IntMatrix& basis() const { return basis_; }
    bool is_zero_lattice() const { return basis_.rows() == 0; }
    bool is_full() const { return basis_.rows() == ambient_ && basis_ == IntMatrix::identity(ambient_); }

    // Membership via back-substitution on the HNF pivots.
    bool contains(const ZVec& x) const {
        assert(x.size() == ambient_);
        ZVec v = x;
        for (size_t i = 0; i < basis_.rows(); ++i) {
            size_t p = pivot_col(i);
            if (v[p] % basis_.at(i, p) != 0) {
                // pivot coordinate not reachable
            }
            mpz_class q = v[p] / basis_.at(i, p);
            for (size_t j = 0; j < ambient_; ++j) v[j] -= q * basis_.at(i, j);
        }
        for (const auto& c : v)
            if (c != 0) return false;
        return true;
    }

    // Coefficients w.r.t. the HNF basis if x is a member.
    std::optional<ZVec> coordinates(const ZVec& x) const {
        ZVec v = x, coeff(basis_.rows());
        for (size_t i = 0; i < basis_.rows(); ++i) {
            size_t p = pivot_col(i);
            if (v[p] % basis_.at(i, p) != 0) return std::nullopt;
            mpz_class q = v[p] / basis_.at(i, p);
            coeff[i] = q;
            for (size_t j = 0; j < ambient_; ++j) v[j] -= q * basis_.at(i, j);
        }
        for (const auto& c : v)
            if (c != 0) return std::nullopt;
        return coeff;
    }

    size_t pivot_col(size_t row) const {
        for (size_t j = 0; j < ambient_; ++j)
            if (basis_.at(row, j) != 0) return j;
        assert(false && "zero basis row");
        return ambient_;
    }

    Lattice sum(const Lattice& o) const {
        assert(ambient_ == o.ambient_);
        std::vector<std::vector<mpz_class>> rows;
        for (size_t i = 0; i < basis_.rows(); ++i) rows.push_back(basis_.row(i));
        for (size_t i = 0; i < o.basis_.rows(); ++i) rows.push_back(o.basis_.row(i));
        if (rows.empty()) return Lattice(ambient_);
        return from_basis(IntMatrix::from_rows(rows));
    }

    Lattice intersect(const Lattice& o) const {
        assert(ambient_ == o.ambient_);
        if (is_zero_lattice() || o.is_zero_lattice()) return Lattice(ambient_);
        // a*B1 = b*B2  <=>  [B1^T | -B2^T] (a;b)^T = 0
        size_t q1 = rank(), q2 = o.rank();
        IntMatrix m(ambient_, q1 + q2);
        for (size_t i = 0; i < ambient_; ++i) {
            for (size_t j = 0; j < q1; ++j) m.at(i, j) = basis_.at(j, i);
            for (size_t j = 0; j < q2; ++j) m.at(i, q1 + j) = -o.basis_.at(j, i);
        }
        IntMatrix ker = right_kernel(m);
        std::vector<std::vector<mpz_class>> rows;
        for (size_t i = 0; i < ker.rows(); ++i) {
            std::vector<mpz_class> x(ambient_, mpz_class(0));
            for (size_t j = 0; j < q1; ++j)
                for (size_t c = 0; c < ambient_; ++c) x[c] += ker.at(i, j) * basis_.at(j, c);
            rows.push_back(x);
        }
        if (rows.empty()) return Lattice(ambient_);
        return from_basis(IntMatrix::from_rows(rows));
    }

    Lattice saturation() const {
        if (is_zero_lattice()) return *this;
        UnimodularCompletion c = unimodular_completion(basis_);
        std::vector<std::vector<mpz_class>> rows;
        for (size_t i = 0; i < c.rank; ++i) rows.push_back(c.P.row(i));
        return from_basis(IntMatrix::from_rows(rows));
    }

    friend bool operator==(const Lattice& a, const Lattice& b) {
        return a.ambient_ == b.ambient_ && a.basis_ == b.basis_;
    }
    friend bool operator!=(const Lattice& a, const Lattice& b) { return !(a == b); }

private:
    size_t ambient_;
    IntMatrix basis_;
};

// Kernel lattice {x : M x = 0} of an integer matrix.
inline Lattice kernel_lattice(const IntMatrix& m) {
    return Lattice::from_basis(right_kernel(m));
}

struct Coset {
    ZVec offset;
    Lattice lattice;

    Coset() = default;
    Coset(ZVec o, Lattice l) : offset(std::move(o)), lattice(std::move(l)) { reduce(); }

    static Coset point(const ZVec& x) {
        return Coset(x, Lattice::zero(x.size()));
    }
    static Coset full(size_t r) { return Coset(ZVec(r, mpz_class(0)), Lattice::full(r)); }

    size_t ambient_rank() const { return offset.size(); }
    long rank() const { return static_cast<long>(lattice.rank()); }

    bool contains(const ZVec& x) const { return lattice.contains(x - offset); }

    // Canonical representative of the offset modulo the lattice: pivot
    // coordinates reduced into [0, pivot).
    void reduce() {
        const IntMatrix& b = lattice.basis();
        for (size_t i = 0; i < b.rows(); ++i) {
            size_t p = lattice.pivot_col(i);
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), offset[p].get_mpz_t(), b.at(i, p).get_mpz_t());
            for (size_t j = 0; j < offset.size(); ++j) offset[j] -= q * b.at(i, j);
        }
    }

    friend bool operator==(const Coset& x, const Coset& y) {
        return x.offset == y.offset && x.lattice == y.lattice;
    }
};

// Exact intersection of two cosets; empty intersection is represented by
// nullopt.
inline std::optional<Coset> coset_intersect(const Coset& c1, const Coset& c2) {
    assert(c1.ambient_rank() == c2.ambient_rank());
    size_t r = c1.ambient_rank();
    size_t q1 = c1.lattice.rank(), q2 = c2.lattice.rank();
    IntMatrix m(r, q1 + q2);
    for (size_t i = 0; i < r; ++i) {
        for (size_t j = 0; j < q1; ++j) m.at(i, j) = c1.lattice.basis().at(j, i);
        for (size_t j = 0; j < q2; ++j) m.at(i, q1 + j) = -c2.lattice.basis().at(j, i);
    }
    ZVec diff = c2.offset - c1.offset;
    auto w = solve_integer(m, diff);
    if (!w) return std::nullopt;
    ZVec x0 = c1.offset;
    for (size_t j = 0; j < q1; ++j)
        for (size_t c = 0; c < r; ++c) x0[c] += (*w)[j] * c1.lattice.basis().at(j, c);
    return Coset(x0, c1.lattice.intersect(c2.lattice));
}

struct QuasiCoset {
    Coset base;
    std::vector<Coset> excluded;

    bool contains(const ZVec& x) const {
        if (!base.contains(x)) return false;
        for (const auto& n : excluded)
            if (n.contains(x)) return false;
        return true;
    }
};

namespace detail {

inline void enumerate_rec(const Coset& c, long R, size_t i, ZVec& point,
                          const std::function<void(const ZVec&)>& emit) {
    const IntMatrix& b = c.lattice.basis();
    if (i == b.rows()) {
        for (const auto& x : point)
            if (cmp_abs(x, mpz_class(R)) > 0) return;
        emit(point);
        return;
    }
    size_t p = c.lattice.pivot_col(i);
    const mpz_class& d = b.at(i, p);
    // |point[p] + m*d| <= R   (rows below i leave column p untouched)
    mpz_class lo, hi, t;
    t = mpz_class(-R) - point[p];
    mpz_cdiv_q(lo.get_mpz_t(), t.get_mpz_t(), d.get_mpz_t());
    t = mpz_class(R) - point[p];
    mpz_fdiv_q(hi.get_mpz_t(), t.get_mpz_t(), d.get_mpz_t());
    for (mpz_class m = lo; m <= hi; ++m) {
        ZVec next = point;
        for (size_t j = 0; j < next.size(); ++j) next[j] += m * b.at(i, j);
        enumerate_rec(c, R, i + 1, next, emit);
    }
}

}  // namespace detail

// Streams exactly the members with ||n||_inf <= R, each once.
inline void enumerate_coset_box(const Coset& c, long R, const std::function<void(const ZVec&)>& emit) {
    assert(R >= 0);
    ZVec start = c.offset;
    detail::enumerate_rec(c, R, 0, start, emit);
}

inline std::vector<ZVec> coset_box_points(const Coset& c, long R) {
    std::vector<ZVec> out;
    enumerate_coset_box(c, R, [&](const ZVec& v) { out.push_back(v); });
    return out;
}

inline void enumerate_coset_box(const QuasiCoset& qc, long R, const std::function<void(const ZVec&)>& emit) {
    enumerate_coset_box(qc.base, R, [&](const ZVec& v) {
        for (const auto& n : qc.excluded)
            if (n.contains(v)) return;
        emit(v);
    });
}

inline std::vector<ZVec> coset_box_points(const QuasiCoset& qc, long R) {
    std::vector<ZVec> out;
    enumerate_coset_box(qc, R, [&](const ZVec& v) { out.push_back(v); });
    return out;
}

// All points of Z^r with ||n||_inf <= R.
inline std::vector<ZVec> box_points(size_t r, long R) {
    return coset_box_points(Coset::full(r), R);
}

}  // namespace pep
