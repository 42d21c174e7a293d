#pragma once

// Affine Weil heights and the height seminorm ||n||_f: the affine height of
// the tuple of character values, a piecewise-linear convex function
// (1/[K:Q]) sum_v max(0, max_j L_{v,j}(n)). Finite-place forms carry exact
// rational coefficients times log p; archimedean forms are precision-tracked
// reals. The kernel is decided symbolically from the exponent matrices.
//
// The unit ball {||x|| <= 1} is an H-polytope: the sum of per-place maxima
// is the maximum of all per-place form assignments. Exact volumes for
// r' <= 3 go through vertex enumeration; higher ranks use sphere-direction
// Monte Carlo (vol = vol(B_d) * E[g(u)^{-d}] over uniform directions).

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "pep/pep.hpp"
#include "pep/places.hpp"
#include "pep/real.hpp"

namespace pep {

// h_aff(x) = (1/[K:Q]) sum_v log max{||x_1||_v, ..., ||x_n||_v, 1}.
// Only places where some ||x_i||_v exceeds 1 contribute, and those can sit
// only above denominator primes; numerators are never factored.
inline Real affine_height(const std::vector<FieldElement>& xs) {
    if (xs.empty()) return Real();
    FieldDescriptor f = xs[0].field();
    std::vector<const FieldElement*> nz;
    for (const auto& x : xs) {
        if (!(x.field() == f)) throw UnsupportedFieldError("affine_height: mixed fields");
        if (!x.is_zero()) nz.push_back(&x);
    }
    if (nz.empty()) return Real();
    std::set<mpz_class> primes;
    for (const auto* x : nz) {
        for (auto& [p, e] : factorize(x->a().get_den())) primes.insert(p);
        for (auto& [p, e] : factorize(x->b().get_den())) primes.insert(p);
    }
    Real total;
    for (const auto& p : primes)
        for (const auto& v : places_above(p, f)) {
            long minval = 0;
            bool first = true;
            for (const auto* x : nz) {
                long val = valuation(*x, v);
                minval = first ? val : std::min(minval, val);
                first = false;
            }
            if (minval < 0) total += Real(-static_cast<long>(v.res_f) * minval) * Real::log_of(v.p);
        }
    for (const auto& v : archimedean_places(f)) {
        Real m;  // log max(..., 1) starts at 0
        for (const auto* x : nz) m = Real::max(m, normalized_log_abs(*x, v));
        total += m;
    }
    return total / Real(static_cast<long>(f.degree()));
}

inline Real affine_height(const FieldElement& x) { return affine_height(std::vector<FieldElement>{x}); }

class HeightSeminorm {
public:
    size_t variables = 0;
    int field_degree = 1;
    struct PlaceForms {
        Place place;
        bool finite = false;
        std::vector<std::vector<mpq_class>> rational_rows;  // times log p (finite places)
        std::vector<std::vector<Real>> real_rows;           // archimedean places
    };
    std::vector<PlaceForms> places;
    Lattice kernel;  // {n : all mu-forms vanish}; the seminorm is 0 exactly there

    Real eval(const ZVec& n) const {
        if (n.size() != variables) throw std::invalid_argument("seminorm: wrong length");
        if (kernel.contains(n)) return Real();  // symbolic zero
        return eval_real(to_reals(n));
    }
    Real eval_real(const std::vector<Real>& x) const {
        Real total;
        for (const auto& pf : places) {
            Real m;
            if (pf.finite) {
                Real lp = Real::log_of(pf.place.p);
                for (const auto& row : pf.rational_rows) {
                    Real dot;
                    for (size_t j = 0; j < variables; ++j) dot += Real(row[j]) * x[j];
                    m = Real::max(m, dot * lp);
                }
            } else {
                for (const auto& row : pf.real_rows) {
                    Real dot;
                    for (size_t j = 0; j < variables; ++j) dot += row[j] * x[j];
                    m = Real::max(m, dot);
                }
            }
            total += m;
        }
        return total / Real(static_cast<long>(field_degree));
    }
    double eval_double(const std::vector<double>& x) const {
        double total = 0;
        for (const auto& pf : places) {
            double m = 0;
            if (pf.finite) {
                double lp = Real::log_of(pf.place.p).to_double();
                for (const auto& row : pf.rational_rows) {
                    double dot = 0;
                    for (size_t j = 0; j < variables; ++j) dot += mpq_class(row[j]).get_d() * x[j];
                    m = std::max(m, dot * lp);
                }
            } else {
                for (const auto& row : pf.real_rows) {
                    double dot = 0;
                    for (size_t j = 0; j < variables; ++j) dot += row[j].to_double() * x[j];
                    m = std::max(m, dot);
                }
            }
            total += m;
        }
        return total / field_degree;
    }

    static std::vector<Real> to_reals(const ZVec& n) {
        std::vector<Real> x;
        x.reserve(n.size());
        for (const auto& v : n) x.emplace_back(Real(v));
        return x;
    }

    // All linear pieces of the scaled norm [K:Q] * ||x||: one coefficient
    // vector (as Reals) per assignment of an active form (or none) to each
    // place. The unit ball is {x : piece(x) <= [K:Q] for all pieces}.
    std::vector<std::vector<Real>> linear_pieces(size_t cap = 200000) const {
        std::vector<std::vector<std::vector<Real>>> options;  // per place
        for (const auto& pf : places) {
            std::vector<std::vector<Real>> opts;
            opts.emplace_back(variables, Real());  // inactive
            if (pf.finite) {
                Real lp = Real::log_of(pf.place.p);
                for (const auto& row : pf.rational_rows) {
                    std::vector<Real> c(variables);
                    bool zero = true;
                    for (size_t j = 0; j < variables; ++j) {
                        c[j] = Real(row[j]) * lp;
                        if (row[j] != 0) zero = false;
                    }
                    if (!zero) opts.push_back(c);
                }
            } else {
                for (const auto& row : pf.real_rows) {
                    std::vector<Real> c(variables);
                    bool zero = true;
                    for (size_t j = 0; j < variables; ++j) {
                        c[j] = row[j];
                        if (!(row[j] == Real())) zero = false;
                    }
                    if (!zero) opts.push_back(c);
                }
            }
            options.push_back(opts);
        }
        double count = 1;
        for (const auto& o : options) count *= static_cast<double>(o.size());
        if (count > static_cast<double>(cap)) throw CapError("seminorm has too many linear pieces");
        std::vector<std::vector<Real>> pieces;
        std::vector<size_t> choice(options.size(), 0);
        while (true) {
            std::vector<Real> c(variables);
            bool zero = true;
            for (size_t v = 0; v < options.size(); ++v)
                for (size_t j = 0; j < variables; ++j) {
                    c[j] += options[v][choice[v]][j];
                }
            for (size_t j = 0; j < variables; ++j)
                if (!(c[j] == Real())) zero = false;
            if (!zero) pieces.push_back(c);
            size_t i = 0;
            for (; i < options.size(); ++i) {
                if (++choice[i] < options[i].size()) break;
                choice[i] = 0;
            }
            if (i == options.size()) break;
        }
        return pieces;
    }
};

// Height seminorm built from all characters of f (union across
// components); kernel is the common kernel of the mu exponent rows.
inline HeightSeminorm build_height_seminorm(const PepVector& f) {
    PepVector c = f.canonical ? f : canonicalize(f);
    HeightSeminorm N;
    N.variables = c.variables;
    N.field_degree = c.field.degree();
    size_t mu0 = c.torsion_E > 1 ? 1 : 0;
    std::vector<IntMatrix> chars = characters_of(c);

    // kernel from mu rows
    std::vector<std::vector<mpz_class>> rows;
    for (const auto& A : chars)
        for (size_t i = mu0; i < A.rows(); ++i) rows.push_back(A.row(i));
    N.kernel = rows.empty() ? Lattice::full(c.variables) : kernel_lattice(IntMatrix::from_rows(rows));

    std::vector<FieldElement> mus(c.bases.begin() + mu0, c.bases.end());
    std::vector<Place> S = archimedean_places(c.field);
    {
        std::set<mpz_class> primes;
        for (const auto& m : mus)
            for (const auto& [v, val] : support(m)) primes.insert(v.p);
        for (const auto& p : primes)
            for (const auto& v : places_above(p, c.field)) S.push_back(v);
    }
    for (const auto& v : S) {
        HeightSeminorm::PlaceForms pf;
        pf.place = v;
        pf.finite = v.is_finite();
        for (const auto& A : chars) {
            if (pf.finite) {
                std::vector<mpq_class> row(c.variables, mpq_class(0));
                for (size_t i = 0; i < mus.size(); ++i) {
                    long coeff = -static_cast<long>(v.res_f) * valuation(mus[i], v);
                    if (coeff == 0) continue;
                    for (size_t j = 0; j < c.variables; ++j) row[j] += mpq_class(coeff) * A.at(mu0 + i, j);
                }
                pf.rational_rows.push_back(row);
            } else {
                std::vector<Real> row(c.variables);
                for (size_t i = 0; i < mus.size(); ++i) {
                    Real l = normalized_log_abs(mus[i], v);
                    for (size_t j = 0; j < c.variables; ++j) row[j] += l * Real(A.at(mu0 + i, j));
                }
                pf.real_rows.push_back(row);
            }
        }
        N.places.push_back(pf);
    }
    return N;
}

inline Real eval_seminorm(const HeightSeminorm& N, const ZVec& n) { return N.eval(n); }
inline Real eval_seminorm(const HeightSeminorm& N, const std::vector<Real>& x) { return N.eval_real(x); }

// Explicit constant sum_j h_aff(a_j) over every term of every component; it
// bounds the gap between the height of the coefficient-carrying monomial
// tuple and the bare character tuple.
inline Real monomial_height_gap(const PepVector& f) {
    PepVector c = f.canonical ? f : canonicalize(f);
    Real g;
    for (const auto& comp : c.components)
        for (const auto& t : comp.terms) g += affine_height(t.coeff);
    return g;
}

struct VolumeResult {
    double value = 0;
    double std_error = 0;
    bool exact = false;
    double linf_radius = 0;  // exact path only: max ||vertex||_inf of the unit ball
};

namespace detail {

// Vertex enumeration of {x in R^d : pieces . x <= D}; pieces must bound a
// polytope (kernel trivial on the quotient).
struct BallGeometry {
    std::vector<std::vector<double>> vertices;
    double linf_radius = 0;
    double volume = 0;
};

inline bool solve_dense(std::vector<std::vector<Real>>& a, std::vector<Real>& b) {
    size_t d = b.size();
    for (size_t col = 0; col < d; ++col) {
        size_t piv = col;
        for (size_t i = col + 1; i < d; ++i)
            if (a[i][col].abs() > a[piv][col].abs()) piv = i;
        if (a[piv][col].abs().to_double() < 1e-30) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (size_t i = 0; i < d; ++i) {
            if (i == col) continue;
            Real m = a[i][col] / a[col][col];
            for (size_t j = col; j < d; ++j) a[i][j] -= m * a[col][j];
            b[i] -= m * b[col];
        }
    }
    for (size_t i = 0; i < d; ++i) b[i] /= a[i][i];
    return true;
}

inline BallGeometry ball_geometry(const std::vector<std::vector<Real>>& pieces, size_t d, double D) {
    BallGeometry g;
    size_t m = pieces.size();
    std::vector<size_t> idx(d);
    std::vector<std::vector<double>> verts;
    auto feasible = [&](const std::vector<Real>& x) {
        for (const auto& p : pieces) {
            Real dot;
            for (size_t j = 0; j < d; ++j) dot += p[j] * x[j];
            if (dot.to_double() > D + 1e-9) return false;
        }
        return true;
    };
    std::function<void(size_t, size_t)> rec = [&](size_t start, size_t k) {
        if (k == d) {
            std::vector<std::vector<Real>> a(d, std::vector<Real>(d));
            std::vector<Real> b(d, Real(D));
            for (size_t i = 0; i < d; ++i)
                for (size_t j = 0; j < d; ++j) a[i][j] = pieces[idx[i]][j];
            if (!solve_dense(a, b)) return;
            if (!feasible(b)) return;
            std::vector<double> v(d);
            for (size_t j = 0; j < d; ++j) v[j] = b[j].to_double();
            for (const auto& w : verts) {
                double dist = 0;
                for (size_t j = 0; j < d; ++j) dist += (w[j] - v[j]) * (w[j] - v[j]);
                if (dist < 1e-16) return;
            }
            verts.push_back(v);
            return;
        }
        for (size_t i = start; i < m; ++i) {
            idx[k] = i;
            rec(i + 1, k + 1);
        }
    };
    rec(0, 0);
    g.vertices = verts;
    for (const auto& v : verts)
        for (double c : v) g.linf_radius = std::max(g.linf_radius, std::fabs(c));

    if (d == 1) {
        double lo = 0, hi = 0;
        for (const auto& v : verts) {
            lo = std::min(lo, v[0]);
            hi = std::max(hi, v[0]);
        }
        g.volume = hi - lo;
        return g;
    }
    // centroid
    std::vector<double> c(d, 0.0);
    for (const auto& v : verts)
        for (size_t j = 0; j < d; ++j) c[j] += v[j] / verts.size();
    if (d == 2) {
        std::vector<std::vector<double>> vs = verts;
        std::sort(vs.begin(), vs.end(), [&](const auto& a, const auto& b) {
            return std::atan2(a[1] - c[1], a[0] - c[0]) < std::atan2(b[1] - c[1], b[0] - c[0]);
        });
        double area = 0;
        for (size_t i = 0; i < vs.size(); ++i) {
            const auto& p = vs[i];
            const auto& q = vs[(i + 1) % vs.size()];
            area += p[0] * q[1] - q[0] * p[1];
        }
        g.volume = std::fabs(area) / 2;
        return g;
    }
    // d == 3: per-facet fans against the body centroid
    double vol = 0;
    for (const auto& p : pieces) {
        std::vector<std::vector<double>> fverts;
        for (const auto& v : verts) {
            double dot = 0;
            for (size_t j = 0; j < 3; ++j) dot += p[j].to_double() * v[j];
            if (std::fabs(dot - D) < 1e-7 * std::max(1.0, std::fabs(D))) fverts.push_back(v);
        }
        if (fverts.size() < 3) continue;
        std::vector<double> fc(3, 0.0);
        for (const auto& v : fverts)
            for (size_t j = 0; j < 3; ++j) fc[j] += v[j] / fverts.size();
        // order around the facet centroid in the facet plane
        std::vector<double> n(3);
        for (size_t j = 0; j < 3; ++j) n[j] = p[j].to_double();
        std::vector<double> u(3), w(3);
        {
            std::vector<double> t = std::fabs(n[0]) < 0.9 ? std::vector<double>{1, 0, 0}
                                                          : std::vector<double>{0, 1, 0};
            u = {n[1] * t[2] - n[2] * t[1], n[2] * t[0] - n[0] * t[2], n[0] * t[1] - n[1] * t[0]};
            double nu = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
            for (auto& x : u) x /= nu;
            w = {n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]};
            double nw = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
            for (auto& x : w) x /= nw;
        }
        std::sort(fverts.begin(), fverts.end(), [&](const auto& a, const auto& b) {
            double ax = 0, ay = 0, bx = 0, by = 0;
            for (size_t j = 0; j < 3; ++j) {
                ax += (a[j] - fc[j]) * u[j];
                ay += (a[j] - fc[j]) * w[j];
                bx += (b[j] - fc[j]) * u[j];
                by += (b[j] - fc[j]) * w[j];
            }
            return std::atan2(ay, ax) < std::atan2(by, bx);
        });
        for (size_t i = 0; i < fverts.size(); ++i) {
            const auto& A = fverts[i];
            const auto& B = fverts[(i + 1) % fverts.size()];
            double m0[3] = {A[0] - c[0], A[1] - c[1], A[2] - c[2]};
            double m1[3] = {B[0] - c[0], B[1] - c[1], B[2] - c[2]};
            double m2[3] = {fc[0] - c[0], fc[1] - c[1], fc[2] - c[2]};
            double det = m0[0] * (m1[1] * m2[2] - m1[2] * m2[1]) - m0[1] * (m1[0] * m2[2] - m1[2] * m2[0]) +
                         m0[2] * (m1[0] * m2[1] - m1[1] * m2[0]);
            vol += std::fabs(det) / 6.0;
        }
    }
    g.volume = vol;
    return g;
}

// Restriction of the pieces to complement coordinates of the kernel.
inline std::vector<std::vector<Real>> quotient_pieces(const HeightSeminorm& N, size_t& dim_out) {
    size_t r = N.variables;
    size_t q = N.kernel.rank();
    dim_out = r - q;
    std::vector<std::vector<Real>> pieces = N.linear_pieces();
    if (q == 0) return pieces;
    UnimodularCompletion comp = unimodular_completion(N.kernel.basis());
    std::vector<std::vector<Real>> out;
    for (const auto& p : pieces) {
        std::vector<Real> c(dim_out);
        bool zero = true;
        for (size_t i = 0; i < dim_out; ++i) {
            for (size_t j = 0; j < r; ++j) c[i] += p[j] * Real(comp.P.at(q + i, j));
            if (!(c[i] == Real())) zero = false;
        }
        if (!zero) out.push_back(c);
    }
    return out;
}

}  // namespace detail

// Volume of the unit ball {||v|| <= 1} on the quotient by the kernel.
// Exact cell decomposition for r' <= 3; sphere-direction Monte Carlo above.
inline VolumeResult unit_ball_volume(const HeightSeminorm& N, size_t mc_samples = 1000000,
                                     uint64_t seed = 12345, bool force_mc = false) {
    size_t d = 0;
    std::vector<std::vector<Real>> pieces = detail::quotient_pieces(N, d);
    if (d == 0) throw std::invalid_argument("unit_ball_volume: zero-dimensional quotient");
    assert(!pieces.empty() && "trivial seminorm cannot have a bounded ball");
    VolumeResult res;
    if (d <= 3 && !force_mc) {
        detail::BallGeometry g = detail::ball_geometry(pieces, d, N.field_degree);
        res.value = g.volume;
        res.std_error = 0;
        res.exact = true;
        res.linf_radius = g.linf_radius;
        return res;
    }
    // Monte Carlo over directions: vol = vol(B_d) * E[g(u)^-d]
    std::vector<std::vector<double>> dp;
    for (const auto& p : pieces) {
        std::vector<double> c(d);
        for (size_t j = 0; j < d; ++j) c[j] = p[j].to_double();
        dp.push_back(c);
    }
    double D = N.field_degree;
    auto gfun = [&](const std::vector<double>& x) {
        double m = 0;
        for (const auto& p : dp) {
            double dot = 0;
            for (size_t j = 0; j < d; ++j) dot += p[j] * x[j];
            m = std::max(m, dot);
        }
        return m / D;
    };
    const size_t chunk = 4096;
    double sum = 0, sumsq = 0;
    size_t n = 0;
    for (size_t c0 = 0; c0 * chunk < mc_samples; ++c0) {
        std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + c0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        size_t lim = std::min(chunk, mc_samples - c0 * chunk);
        for (size_t i = 0; i < lim; ++i) {
            std::vector<double> u(d);
            double norm2 = 0;
            for (size_t j = 0; j < d; ++j) {
                u[j] = gauss(rng);
                norm2 += u[j] * u[j];
            }
            double nrm = std::sqrt(norm2);
            if (nrm < 1e-12) continue;
            for (auto& x : u) x /= nrm;
            double gv = gfun(u);
            double val = std::pow(gv, -static_cast<double>(d));
            sum += val;
            sumsq += val * val;
            ++n;
        }
    }
    double mean = sum / n;
    double var = std::max(0.0, sumsq / n - mean * mean);
    double ball = std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
    res.value = ball * mean;
    res.std_error = ball * std::sqrt(var / n);
    res.exact = false;
    return res;
}

// 1 / (max ||vertex||_inf of the unit ball): the largest m with
// ||n|| >= m ||n||_inf. Exact path only; requires trivial kernel, r <= 3.
inline std::optional<double> seminorm_floor(const HeightSeminorm& N) {
    if (N.kernel.rank() != 0 || N.variables > 3 || N.variables == 0) return std::nullopt;
    std::vector<std::vector<Real>> pieces = N.linear_pieces();
    if (pieces.empty()) return std::nullopt;
    detail::BallGeometry g = detail::ball_geometry(pieces, N.variables, N.field_degree);
    if (g.linf_radius <= 0) return std::nullopt;
    return 1.0 / g.linf_radius;
}

}  // namespace pep
