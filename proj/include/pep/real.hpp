#pragma once

// Precision-tracked real numbers on top of MPFR. Archimedean absolute
// values, logs and the norm-ball geometry run through this type; every
// decision that must be exact (kernels, valuations, torsion) is made
// symbolically elsewhere and never through a Real comparison.

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

namespace pep {

class Real {
public:
    static mpfr_prec_t default_precision() { return default_prec_; }
    static void set_default_precision(mpfr_prec_t bits) {
        default_prec_ = bits < MPFR_PREC_MIN ? MPFR_PREC_MIN : bits;
    }

    Real() { mpfr_init2(v_, default_prec_); mpfr_set_zero(v_, 1); }
    explicit Real(double x) { mpfr_init2(v_, default_prec_); mpfr_set_d(v_, x, MPFR_RNDN); }
    explicit Real(long x) { mpfr_init2(v_, default_prec_); mpfr_set_si(v_, x, MPFR_RNDN); }
    explicit Real(const mpz_class& x) { mpfr_init2(v_, default_prec_); mpfr_set_z(v_, x.get_mpz_t(), MPFR_RNDN); }
    explicit Real(const mpq_class& x) { mpfr_init2(v_, default_prec_); mpfr_set_q(v_, x.get_mpq_t(), MPFR_RNDN); }

    Real(const Real& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    Real(Real&& o) noexcept { mpfr_init2(v_, default_prec_); mpfr_swap(v_, o.v_); }
    Real& operator=(const Real& o) {
        if (this != &o) mpfr_set(v_, o.v_, MPFR_RNDN);
        return *this;
    }
    Real& operator=(Real&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Real() { mpfr_clear(v_); }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }

    friend Real operator+(const Real& a, const Real& b) { Real r; mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
    friend Real operator-(const Real& a, const Real& b) { Real r; mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
    friend Real operator*(const Real& a, const Real& b) { Real r; mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
    friend Real operator/(const Real& a, const Real& b) { Real r; mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
    Real operator-() const { Real r; mpfr_neg(r.v_, v_, MPFR_RNDN); return r; }

    Real& operator+=(const Real& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real& operator-=(const Real& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real& operator*=(const Real& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real& operator/=(const Real& o) { mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }

    friend bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
    friend bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
    friend bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
    friend bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }
    friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }

    Real abs() const { Real r; mpfr_abs(r.v_, v_, MPFR_RNDN); return r; }
    Real log() const { Real r; mpfr_log(r.v_, v_, MPFR_RNDN); return r; }
    Real exp() const { Real r; mpfr_exp(r.v_, v_, MPFR_RNDN); return r; }
    Real sqrt() const { Real r; mpfr_sqrt(r.v_, v_, MPFR_RNDN); return r; }
    Real pow_int(long k) const { Real r; mpfr_pow_si(r.v_, v_, k, MPFR_RNDN); return r; }

    static Real max(const Real& a, const Real& b) { return a >= b ? a : b; }
    static Real min(const Real& a, const Real& b) { return a <= b ? a : b; }

    static Real log_of(const mpq_class& q) { return Real(q).log(); }
    static Real log_of(const mpz_class& z) { return Real(z).log(); }
    static Real pi() { Real r; mpfr_const_pi(r.v_, MPFR_RNDN); return r; }

    std::string str(int digits = 20) const {
        char buf[128];
        mpfr_snprintf(buf, sizeof buf, "%.*Rg", digits, v_);
        return std::string(buf);
    }

private:
    static inline mpfr_prec_t default_prec_ = 128;
    mpfr_t v_;
};

}  // namespace pep
