#pragma once

// Exact integer matrices: Hermite and Smith normal forms with recorded
// unimodular transforms, kernels, integral solving, determinants. All
// lattice work in the library reduces to these.

#include <gmpxx.h>

#include <cassert>
#include <numeric>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace pep {

inline int cmp_abs(const mpz_class& a, const mpz_class& b) {
    return mpz_cmpabs(a.get_mpz_t(), b.get_mpz_t());
}

class IntMatrix {
public:
    IntMatrix() : rows_(0), cols_(0) {}
    IntMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), e_(rows * cols, mpz_class(0)) {}

    static IntMatrix identity(size_t n) {
        IntMatrix m(n, n);
        for (size_t i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }
    static IntMatrix from_rows(const std::vector<std::vector<mpz_class>>& rows) {
        size_t r = rows.size(), c = r ? rows[0].size() : 0;
        IntMatrix m(r, c);
        for (size_t i = 0; i < r; ++i) {
            assert(rows[i].size() == c);
            for (size_t j = 0; j < c; ++j) m.at(i, j) = rows[i][j];
        }
        return m;
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    mpz_class& at(size_t i, size_t j) { return e_[i * cols_ + j]; }
    const mpz_class& at(size_t i, size_t j) const { return e_[i * cols_ + j]; }

    std::vector<mpz_class> row(size_t i) const {
        return std::vector<mpz_class>(e_.begin() + i * cols_, e_.begin() + (i + 1) * cols_);
    }

    bool is_zero() const {
        for (const auto& x : e_)
            if (x != 0) return false;
        return true;
    }

    IntMatrix transpose() const {
        IntMatrix t(cols_, rows_);
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
        return t;
    }

    friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
        assert(a.cols_ == b.rows_);
        IntMatrix c(a.rows_, b.cols_);
        for (size_t i = 0; i < a.rows_; ++i)
            for (size_t k = 0; k < a.cols_; ++k) {
                if (a.at(i, k) == 0) continue;
                for (size_t j = 0; j < b.cols_; ++j) c.at(i, j) += a.at(i, k) * b.at(k, j);
            }
        return c;
    }
    friend bool operator==(const IntMatrix& a, const IntMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.e_ == b.e_;
    }

    std::vector<mpz_class> apply(const std::vector<mpz_class>& x) const {
        assert(x.size() == cols_);
        std::vector<mpz_class> y(rows_, mpz_class(0));
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = 0; j < cols_; ++j) y[i] += at(i, j) * x[j];
        return y;
    }

    void swap_rows(size_t i, size_t j) {
        if (i == j) return;
        for (size_t c = 0; c < cols_; ++c) std::swap(at(i, c), at(j, c));
    }
    void negate_row(size_t i) {
        for (size_t c = 0; c < cols_; ++c) at(i, c) = -at(i, c);
    }
    // row i += q * row j
    void add_row(size_t i, size_t j, const mpz_class& q) {
        if (q == 0) return;
        for (size_t c = 0; c < cols_; ++c) at(i, c) += q * at(j, c);
    }
    void swap_cols(size_t i, size_t j) {
        if (i == j) return;
        for (size_t r = 0; r < rows_; ++r) std::swap(at(r, i), at(r, j));
    }
    void negate_col(size_t i) {
        for (size_t r = 0; r < rows_; ++r) at(r, i) = -at(r, i);
    }
    // col i += q * col j
    void add_col(size_t i, size_t j, const mpz_class& q) {
        if (q == 0) return;
        for (size_t r = 0; r < rows_; ++r) at(r, i) += q * at(r, j);
    }

    std::string str() const {
        std::string s = "[";
        for (size_t i = 0; i < rows_; ++i) {
            s += i ? "; " : "";
            for (size_t j = 0; j < cols_; ++j) s += (j ? "," : "") + at(i, j).get_str();
        }
        return s + "]";
    }

private:
    size_t rows_, cols_;
    std::vector<mpz_class> e_;
};

// Reduced row Hermite normal form: row-echelon over Z, positive pivots,
// entries above each pivot reduced into [0, pivot). Zero rows sink to the
// bottom. Canonical for the row lattice.
inline IntMatrix hnf(IntMatrix m) {
    size_t r = 0;
    for (size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        // gcd-reduce the column below r
        while (true) {
            size_t piv = m.rows();
            for (size_t i = r; i < m.rows(); ++i)
                if (m.at(i, c) != 0 && (piv == m.rows() || cmp_abs(m.at(i, c), m.at(piv, c)) < 0)) piv = i;
            if (piv == m.rows()) break;
            m.swap_rows(r, piv);
            bool clean = true;
            for (size_t i = r + 1; i < m.rows(); ++i) {
                if (m.at(i, c) == 0) continue;
                mpz_class q;
                mpz_fdiv_q(q.get_mpz_t(), m.at(i, c).get_mpz_t(), m.at(r, c).get_mpz_t());
                m.add_row(i, r, -q);
                if (m.at(i, c) != 0) clean = false;
            }
            if (clean) break;
        }
        if (m.at(r, c) == 0) continue;
        if (m.at(r, c) < 0) m.negate_row(r);
        for (size_t i = 0; i < r; ++i) {
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), m.at(i, c).get_mpz_t(), m.at(r, c).get_mpz_t());
            m.add_row(i, r, -q);
        }
        ++r;
    }
    return m;
}

inline size_t rank_of(const IntMatrix& m) {
    IntMatrix h = hnf(m);
    size_t r = 0;
    for (size_t i = 0; i < h.rows(); ++i) {
        bool nz = false;
        for (size_t j = 0; j < h.cols(); ++j)
            if (h.at(i, j) != 0) {
                nz = true;
                break;
            }
        if (nz) ++r;
    }
    return r;
}

struct SmithForm {
    IntMatrix S;     // = U * M * V, diagonal with divisibility chain
    IntMatrix U, Uinv, V, Vinv;
    size_t rank = 0;
};

// Smith normal form with all four transforms tracked exactly.
inline SmithForm snf(const IntMatrix& m0) {
    SmithForm f;
    f.S = m0;
    size_t rows = m0.rows(), cols = m0.cols();
    f.U = IntMatrix::identity(rows);
    f.Uinv = IntMatrix::identity(rows);
    f.V = IntMatrix::identity(cols);
    f.Vinv = IntMatrix::identity(cols);
    IntMatrix& S = f.S;

    auto row_add = [&](size_t i, size_t j, const mpz_class& q) {
        S.add_row(i, j, q);
        f.U.add_row(i, j, q);
        f.Uinv.add_col(j, i, -q);
    };
    auto row_swap = [&](size_t i, size_t j) {
        S.swap_rows(i, j);
        f.U.swap_rows(i, j);
        f.Uinv.swap_cols(i, j);
    };
    auto row_neg = [&](size_t i) {
        S.negate_row(i);
        f.U.negate_row(i);
        f.Uinv.negate_col(i);
    };
    auto col_add = [&](size_t i, size_t j, const mpz_class& q) {
        S.add_col(i, j, q);
        f.V.add_col(i, j, q);
        f.Vinv.add_row(j, i, -q);
    };
    auto col_swap = [&](size_t i, size_t j) {
        S.swap_cols(i, j);
        f.V.swap_cols(i, j);
        f.Vinv.swap_rows(i, j);
    };

    size_t t = 0;
    size_t n = std::min(rows, cols);
    while (t < n) {
        // find a nonzero pivot with minimal |value|
        size_t pi = rows, pj = cols;
        for (size_t i = t; i < rows; ++i)
            for (size_t j = t; j < cols; ++j)
                if (S.at(i, j) != 0 && (pi == rows || cmp_abs(S.at(i, j), S.at(pi, pj)) < 0)) {
                    pi = i;
                    pj = j;
                }
        if (pi == rows) break;  // all zero
        row_swap(t, pi);
        col_swap(t, pj);
        bool again = true;
        while (again) {
            again = false;
            for (size_t i = t + 1; i < rows; ++i) {
                if (S.at(i, t) == 0) continue;
                mpz_class q = S.at(i, t) / S.at(t, t);
                row_add(i, t, -q);
                if (S.at(i, t) != 0) {
                    row_swap(t, i);
                    again = true;
                }
            }
            for (size_t j = t + 1; j < cols; ++j) {
                if (S.at(t, j) == 0) continue;
                mpz_class q = S.at(t, j) / S.at(t, t);
                col_add(j, t, -q);
                if (S.at(t, j) != 0) {
                    col_swap(t, j);
                    again = true;
                }
            }
        }
        // divisibility: S[t][t] must divide the rest of the block
        bool redo = false;
        for (size_t i = t + 1; i < rows && !redo; ++i)
            for (size_t j = t + 1; j < cols && !redo; ++j)
                if (S.at(i, j) % S.at(t, t) != 0) {
                    row_add(t, i, 1);
                    redo = true;
                }
        if (redo) continue;
        if (S.at(t, t) < 0) row_neg(t);
        ++t;
    }
    f.rank = t;
    return f;
}

// Basis of the right kernel {x : M x = 0}, as rows; automatically saturated.
inline IntMatrix right_kernel(const IntMatrix& m) {
    SmithForm f = snf(m);
    std::vector<std::vector<mpz_class>> basis;
    for (size_t j = f.rank; j < m.cols(); ++j) {
        std::vector<mpz_class> col(m.cols());
        for (size_t i = 0; i < m.cols(); ++i) col[i] = f.V.at(i, j);
        basis.push_back(col);
    }
    IntMatrix k = basis.empty() ? IntMatrix(0, m.cols()) : IntMatrix::from_rows(basis);
    return hnf(k);
}

// One integral solution of M x = b, if any.
inline std::optional<std::vector<mpz_class>> solve_integer(const IntMatrix& m, const std::vector<mpz_class>& b) {
    assert(b.size() == m.rows());
    SmithForm f = snf(m);
    std::vector<mpz_class> ub = f.U.apply(b);
    std::vector<mpz_class> y(m.cols(), mpz_class(0));
    for (size_t i = 0; i < m.rows(); ++i) {
        if (i < f.rank) {
            if (ub[i] % f.S.at(i, i) != 0) return std::nullopt;
            y[i] = ub[i] / f.S.at(i, i);
        } else if (ub[i] != 0) {
            return std::nullopt;
        }
    }
    return f.V.apply(y);
}

inline mpz_class determinant(IntMatrix m) {
    assert(m.rows() == m.cols());
    size_t n = m.rows();
    if (n == 0) return 1;
    // fraction-free Bareiss
    mpz_class sign = 1, prev = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (m.at(k, k) == 0) {
            size_t s = k + 1;
            while (s < n && m.at(s, k) == 0) ++s;
            if (s == n) return 0;
            m.swap_rows(k, s);
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j < n; ++j) {
                m.at(i, j) = m.at(k, k) * m.at(i, j) - m.at(i, k) * m.at(k, j);
                mpz_divexact(m.at(i, j).get_mpz_t(), m.at(i, j).get_mpz_t(), prev.get_mpz_t());
            }
        prev = m.at(k, k);
    }
    return sign * m.at(n - 1, n - 1);
}

// Unimodular P whose first `rank` rows are a basis of the saturation of the
// row space of B; P_inverse is returned alongside.
struct UnimodularCompletion {
    IntMatrix P;     // r x r, unimodular
    IntMatrix Pinv;
    size_t rank;
};

inline UnimodularCompletion unimodular_completion(const IntMatrix& basis_rows) {
    SmithForm f = snf(basis_rows);
    UnimodularCompletion out;
    out.P = f.Vinv;
    out.Pinv = f.V;
    out.rank = f.rank;
    return out;
}

}  // namespace pep
