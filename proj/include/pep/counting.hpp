#pragma once

// Image enumeration and the height-counting experiments: N(Sigma, T) counts,
// asymptotic fits against c (log T)^{r'}, empirical zero loci with symbolic
// coset verification, fiber statistics, degeneracy partitions, the
// anti-triangular census and recurrence zero structure.
//
// Counting completeness is certified only when every reduced piece is
// monomial: the coefficient gap bound is then unconditional, and a box of
// radius (log T_max + gap) / m captures every image point of height at most
// log T_max, where m is the exact floor of the piece norm against the
// sup-norm. Anything else is flagged boundary-estimated.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "pep/heightnorm.hpp"
#include "pep/lattice.hpp"
#include "pep/pep.hpp"
#include "pep/reduction.hpp"

namespace pep {

// Distinct exact image values with fiber pre-image counts.
struct ImageSet {
    std::unordered_map<std::vector<FieldElement>, long long, FieldElementVecHash> values;

    void add(const std::vector<FieldElement>& v, long long mult = 1) { values[v] += mult; }
    void merge(const ImageSet& o) {
        for (const auto& [v, m] : o.values) values[v] += m;
    }
    size_t distinct() const { return values.size(); }
};

struct EnumerateOptions {
    size_t memory_cap = 4000000;  // distinct values
    unsigned threads = 1;
};

// Exact image of f on the sup-norm box of radius R.
inline ImageSet enumerate_image(const PepVector& f, long R, const EnumerateOptions& opts = {}) {
    if (R < 0) throw std::invalid_argument("enumerate_image: negative radius");
    ImageSet out;
    if (f.variables == 0) {
        out.add(evaluate(f, ZVec{}));
        return out;
    }
    unsigned threads = std::max(1u, opts.threads);
    long span = 2 * R + 1;
    if (threads == 1 || span < static_cast<long>(threads) * 2 || f.variables < 1) {
        enumerate_coset_box(Coset::full(f.variables), R, [&](const ZVec& n) {
            out.add(evaluate(f, n));
            if (out.values.size() > opts.memory_cap) throw CapError("enumerate_image: memory cap exceeded");
        });
        return out;
    }
    // slabs over the first coordinate, merged in slab order
    std::vector<ImageSet> parts(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            Coset slab = Coset::full(f.variables - 1);
            for (long x0 = -R + static_cast<long>(t); x0 <= R; x0 += threads) {
                enumerate_coset_box(slab, R, [&](const ZVec& rest) {
                    ZVec n;
                    n.emplace_back(x0);
                    for (const auto& v : rest) n.push_back(v);
                    parts[t].add(evaluate(f, n));
                });
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& part : parts) {
        out.merge(part);
        if (out.values.size() > opts.memory_cap) throw CapError("enumerate_image: memory cap exceeded");
    }
    return out;
}

struct CountReport {
    std::vector<double> thresholds;  // T values, increasing
    std::vector<long long> counts;   // distinct image points with h_aff <= log T
    long box_radius = 0;
    bool certified = false;
    size_t exact_rank = 0;
};

struct CountOptions {
    long fallback_box = 12;  // boundary-estimated path
    unsigned threads = 1;
};

namespace detail {

inline bool all_components_monomial(const PepVector& f) {
    for (const auto& c : f.components)
        if (c.terms.size() > 1) return false;
    return true;
}

inline std::vector<long long> counts_for(const ImageSet& img, const std::vector<double>& thresholds) {
    std::vector<long long> counts(thresholds.size(), 0);
    for (const auto& [v, mult] : img.values) {
        double h = affine_height(v).to_double();
        for (size_t i = 0; i < thresholds.size(); ++i)
            if (h <= std::log(thresholds[i]) + 1e-12) ++counts[i];
    }
    return counts;
}

}  // namespace detail

// N(Sigma, T) over the given thresholds. Certified when the reduced
// decomposition is all-monomial with piece ranks <= 3; flagged
// boundary-estimated (fallback box) otherwise.
inline CountReport count_by_height(const PepVector& f, const std::vector<double>& thresholds,
                                   const CountOptions& opts = {}) {
    for (size_t i = 1; i < thresholds.size(); ++i)
        if (thresholds[i] <= thresholds[i - 1]) throw std::invalid_argument("thresholds must increase");
    if (thresholds.empty()) throw std::invalid_argument("no thresholds");
    PepVector c = f.canonical ? f : canonicalize(f);
    ReducedDecomposition rd = reduced_decomposition(c);
    CountReport rep;
    rep.thresholds = thresholds;
    size_t rmax = 0;
    for (const auto& p : rd.pieces) rmax = std::max(rmax, p.reduced.variables);
    rep.exact_rank = rmax;

    bool certifiable = true;
    for (const auto& p : rd.pieces) {
        if (!detail::all_components_monomial(p.reduced)) certifiable = false;
        if (p.reduced.variables > 3) certifiable = false;
    }
    double logTmax = std::log(thresholds.back());
    ImageSet img;
    if (certifiable) {
        long rbox = 0;
        for (const auto& p : rd.pieces) {
            if (p.reduced.variables == 0) {
                img.add(evaluate(p.reduced, ZVec{}));
                continue;
            }
            HeightSeminorm N = build_height_seminorm(p.reduced);
            auto floor = seminorm_floor(N);
            if (!floor || *floor <= 0) {
                certifiable = false;
                break;
            }
            double gap = monomial_height_gap(p.reduced).to_double();
            long R = static_cast<long>(std::floor((logTmax + gap) / *floor)) + 1;
            rbox = std::max(rbox, R);
            EnumerateOptions eo;
            eo.threads = opts.threads;
            img.merge(enumerate_image(p.reduced, R, eo));
        }
        if (certifiable) {
            rep.certified = true;
            rep.box_radius = rbox;
        }
    }
    if (!certifiable) {
        EnumerateOptions eo;
        eo.threads = opts.threads;
        img = enumerate_image(c, opts.fallback_box, eo);
        rep.certified = false;
        rep.box_radius = opts.fallback_box;
    }
    rep.counts = detail::counts_for(img, thresholds);
    return rep;
}

struct FitResult {
    double c_hat = 0;
    double slope = 0;     // least-squares slope of log N vs log log T, top half
    int rprime_hat = 0;   // rounded slope
    size_t exact_rank = 0;
    bool diagnostic_ok = true;  // |slope - exact_rank| < 1
};

// Asymptotic fit. The exact rank is the authority for c_hat; the fitted
// slope is a cross-check only.
inline FitResult fit_asymptotic(const CountReport& rep) {
    if (rep.thresholds.size() < 4) throw std::invalid_argument("fit needs >= 4 thresholds");
    FitResult out;
    out.exact_rank = rep.exact_rank;
    std::vector<std::pair<double, double>> pts;  // (log log T, log N)
    for (size_t i = 0; i < rep.thresholds.size(); ++i) {
        if (rep.counts[i] <= 0) continue;
        double lt = std::log(rep.thresholds[i]);
        if (lt <= 1.0) continue;
        pts.emplace_back(std::log(lt), std::log(static_cast<double>(rep.counts[i])));
    }
    size_t keep = std::max<size_t>(2, pts.size() / 2);
    if (pts.size() > keep) pts.erase(pts.begin(), pts.end() - keep);
    if (pts.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto& [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double n = static_cast<double>(pts.size());
        double denom = n * sxx - sx * sx;
        out.slope = denom == 0 ? 0 : (n * sxy - sx * sy) / denom;
    }
    out.rprime_hat = static_cast<int>(std::lround(out.slope));
    // c_hat from the exact rank over the top half of thresholds
    size_t from = rep.thresholds.size() / 2;
    double sum = 0;
    size_t n = 0;
    for (size_t i = from; i < rep.thresholds.size(); ++i) {
        double lt = std::log(rep.thresholds[i]);
        sum += rep.counts[i] / std::pow(lt, static_cast<double>(rep.exact_rank));
        ++n;
    }
    out.c_hat = sum / n;
    out.diagnostic_ok = std::fabs(out.slope - static_cast<double>(rep.exact_rank)) < 1.0;
    return out;
}

// ---- zero locus -------------------------------------------------------------

struct ZeroLocusReport {
    std::vector<ZVec> witnesses;
    std::vector<Coset> verified_cosets;  // each passes restrict + identically-zero
    std::vector<ZVec> uncovered;
};

namespace detail {

// Discovery heuristic: rank-1 progressions from difference gcds, then the
// HNF lattice of all witness differences. Authority stays with the symbolic
// verification done by the caller.
inline std::vector<Coset> infer_cosets(const std::vector<ZVec>& pts, size_t r) {
    std::vector<Coset> cands;
    if (pts.empty()) return cands;
    auto push = [&](const Coset& c) {
        for (const auto& e : cands)
            if (e == c) return;
        cands.push_back(c);
    };
    if (r == 1) {
        mpz_class g = 0;
        for (size_t i = 1; i < pts.size(); ++i) g = gcd(g, pts[i][0] - pts[0][0]);
        if (g != 0) {
            IntMatrix b(1, 1);
            b.at(0, 0) = g;
            Lattice L = Lattice::from_basis(b);
            std::map<mpz_class, ZVec> classes;
            for (const auto& p : pts) {
                mpz_class res = p[0] % g;
                if (res < 0) res += g;
                classes.emplace(res, p);
            }
            for (auto& [res, p] : classes) push(Coset(p, L));
        }
    } else {
        // full difference lattice
        std::vector<ZVec> diffs;
        for (size_t i = 1; i < pts.size(); ++i) diffs.push_back(pts[i] - pts[0]);
        if (!diffs.empty()) {
            Lattice L = Lattice::from_rows(r, diffs);
            if (L.rank() > 0) push(Coset(pts[0], L));
        }
        // pairwise rank-1 directions (capped)
        size_t cap = 64;
        for (size_t i = 0; i < pts.size() && i < cap; ++i)
            for (size_t j = i + 1; j < pts.size() && j < cap; ++j) {
                ZVec d = pts[j] - pts[i];
                mpz_class g = 0;
                for (const auto& x : d) g = gcd(g, x);
                if (g == 0) continue;
                for (auto& x : d) x /= g;
                std::vector<ZVec> rows = {d};
                push(Coset(pts[i], Lattice::from_rows(r, rows)));
            }
    }
    if (pts.size() <= 16)
        for (const auto& p : pts) push(Coset::point(p));
    std::sort(cands.begin(), cands.end(), [](const Coset& a, const Coset& b) { return a.rank() > b.rank(); });
    return cands;
}

}  // namespace detail

// Finds all zeros of f in the box, infers candidate cosets, keeps exactly
// those that vanish identically (symbolically) and cover a witness;
// leftover witnesses become rank-0 cosets, which are zero pointwise.
inline ZeroLocusReport empirical_zero_locus(const PepVector& f, long R) {
    PepVector c = f.canonical ? f : canonicalize(f);
    ZeroLocusReport rep;
    enumerate_coset_box(Coset::full(c.variables), R, [&](const ZVec& n) {
        auto vals = evaluate(c, n);
        for (const auto& v : vals)
            if (!v.is_zero()) return;
        rep.witnesses.push_back(n);
    });
    if (rep.witnesses.empty()) return rep;
    std::vector<bool> covered(rep.witnesses.size(), false);
    for (const auto& cand : detail::infer_cosets(rep.witnesses, c.variables)) {
        bool helps = false;
        for (size_t i = 0; i < rep.witnesses.size(); ++i)
            if (!covered[i] && cand.contains(rep.witnesses[i])) helps = true;
        if (!helps) continue;
        if (cand.rank() > 0) {
            PepVector restr = restrict_to_coset(c, cand);
            if (!is_identically_zero(restr)) continue;
        }
        rep.verified_cosets.push_back(cand);
        for (size_t i = 0; i < rep.witnesses.size(); ++i)
            if (cand.contains(rep.witnesses[i])) covered[i] = true;
    }
    for (size_t i = 0; i < rep.witnesses.size(); ++i)
        if (!covered[i]) rep.verified_cosets.push_back(Coset::point(rep.witnesses[i]));
    // soundness sweep: drop nothing, but report anything uncovered (cannot
    // happen with the rank-0 fallback; kept for honesty)
    for (size_t i = 0; i < rep.witnesses.size(); ++i) {
        bool in = false;
        for (const auto& vc : rep.verified_cosets)
            if (vc.contains(rep.witnesses[i])) in = true;
        if (!in) rep.uncovered.push_back(rep.witnesses[i]);
    }
    return rep;
}

// Skolem-Mahler-Lech shape for one-variable polynomials: finitely many
// isolated zeros plus verified arithmetic progressions.
struct RecurrenceZeroStructure {
    std::vector<mpz_class> finite_zeros;
    std::vector<Coset> progressions;
};

inline RecurrenceZeroStructure recurrence_zero_structure(const PepVector& f, long R) {
    if (f.variables != 1) throw std::invalid_argument("recurrence_zero_structure needs r = 1");
    RecurrenceZeroStructure out;
    for (const auto& c : empirical_zero_locus(f, R).verified_cosets) {
        if (c.rank() == 0)
            out.finite_zeros.push_back(c.offset[0]);
        else
            out.progressions.push_back(c);
    }
    std::sort(out.finite_zeros.begin(), out.finite_zeros.end());
    return out;
}

// ---- fibers ------------------------------------------------------------------

struct FiberReport {
    long modulus = 1;
    std::map<std::vector<long>, long long> class_counts;  // residue class -> fiber count
    std::vector<ZVec> violations;                         // points off their class value
    std::vector<Coset> excluded_candidates;               // unverified discovery output
    bool certified = true;
    long g_box = 0;
};

struct FiberOptions {
    long modulus_cap = 64;
    long fallback_g_box = 40;
    unsigned threads = 1;
};

// Fiber counts #g^{-1}(f(n)) over the box, the smallest modulus N that makes
// them constant per class (violations reported as candidate excluded
// cosets); generically the count depends only on the residue class.
inline FiberReport fiber_statistics(const PepVector& f, const PepVector& g, long R,
                                    const FiberOptions& opts = {}) {
    if (f.components.size() != g.components.size())
        throw std::invalid_argument("fiber_statistics: component count mismatch");
    PepVector cf = f.canonical ? f : canonicalize(f);
    PepVector cg = g.canonical ? g : canonicalize(g);
    if (!is_reduced(cg)) throw std::invalid_argument("fiber_statistics: g must be reduced");

    // f values over the box
    std::vector<ZVec> points = coset_box_points(Coset::full(cf.variables), R);
    std::vector<std::vector<FieldElement>> fvals;
    double hmax = 0;
    for (const auto& n : points) {
        fvals.push_back(evaluate(cf, n));
        hmax = std::max(hmax, affine_height(fvals.back()).to_double());
    }

    FiberReport rep;
    long Rg = opts.fallback_g_box;
    rep.certified = false;
    if (detail::all_components_monomial(cg) && cg.variables <= 3 && cg.variables >= 1) {
        HeightSeminorm N = build_height_seminorm(cg);
        auto floor = seminorm_floor(N);
        if (floor && *floor > 0) {
            double gap = monomial_height_gap(cg).to_double();
            Rg = static_cast<long>(std::floor((hmax + gap) / *floor)) + 1;
            rep.certified = true;
        }
    } else if (cg.variables == 0) {
        Rg = 0;
        rep.certified = true;
    }
    rep.g_box = Rg;
    EnumerateOptions eo;
    eo.threads = opts.threads;
    ImageSet gimg = enumerate_image(cg, Rg, eo);

    std::vector<long long> fibers;
    for (const auto& v : fvals) {
        auto it = gimg.values.find(v);
        fibers.push_back(it == gimg.values.end() ? 0 : it->second);
    }

    // smallest modulus with class-constant counts
    auto classify = [&](long N) {
        std::map<std::vector<long>, std::map<long long, long>> buckets;
        for (size_t i = 0; i < points.size(); ++i) {
            std::vector<long> cls(cf.variables);
            for (size_t j = 0; j < cf.variables; ++j) {
                mpz_class m = points[i][j] % N;
                if (m < 0) m += N;
                cls[j] = m.get_si();
            }
            buckets[cls][fibers[i]]++;
        }
        return buckets;
    };
    long bestN = 1;
    long bestViol = -1;
    for (long N = 1; N <= opts.modulus_cap; ++N) {
        auto buckets = classify(N);
        long viol = 0;
        long min_class = -1;
        for (auto& [cls, dist] : buckets) {
            long long mode = 0;
            long modeCount = -1;
            long total = 0;
            for (auto& [val, cnt] : dist) {
                total += cnt;
                if (cnt > modeCount) {
                    modeCount = cnt;
                    mode = val;
                }
            }
            viol += total - modeCount;
            if (min_class < 0 || total < min_class) min_class = total;
        }
        // a modulus must be supported by >= 2 witnesses per class, or it
        // merely isolates boundary points into singleton classes
        if (N > 1 && min_class < 2) continue;
        if (viol == 0) {
            bestN = N;
            bestViol = 0;
            break;
        }
        if (bestViol < 0 || viol < bestViol) {
            bestViol = viol;
            bestN = N;
        }
    }
    rep.modulus = bestN;
    auto buckets = classify(bestN);
    for (auto& [cls, dist] : buckets) {
        long long mode = 0;
        long modeCount = -1;
        for (auto& [val, cnt] : dist)
            if (cnt > modeCount) {
                modeCount = cnt;
                mode = val;
            }
        rep.class_counts[cls] = mode;
    }
    for (size_t i = 0; i < points.size(); ++i) {
        std::vector<long> cls(cf.variables);
        for (size_t j = 0; j < cf.variables; ++j) {
            mpz_class m = points[i][j] % bestN;
            if (m < 0) m += bestN;
            cls[j] = m.get_si();
        }
        if (fibers[i] != rep.class_counts[cls]) rep.violations.push_back(points[i]);
    }
    if (!rep.violations.empty())
        rep.excluded_candidates = detail::infer_cosets(rep.violations, cf.variables);
    return rep;
}

// ---- degeneracy partition -----------------------------------------------------

struct PartitionPiece {
    DegeneracyType type;
    Coset coset;                  // verified: the T2 parts vanish identically on it
    std::vector<Coset> excluded;  // other verified pieces of smaller rank inside
    Lattice stab;
    size_t points = 0;
    bool constant_height = false;
    double ratio_min = 0, ratio_max = 0;  // h(f(n)) / ||n - n0||_piece over class points
};

// Classifies box points by degeneracy type and turns the classes into
// verified quasi-cosets with their stabilizers and restricted norms
// (discovered empirically, verified symbolically).
inline std::vector<PartitionPiece> partition_report(const PepVector& f, long R) {
    PepVector c = f.canonical ? f : canonicalize(f);
    std::map<std::string, std::pair<DegeneracyType, std::vector<ZVec>>> classes;
    enumerate_coset_box(Coset::full(c.variables), R, [&](const ZVec& n) {
        DegeneracyType t = degeneracy_type(c, n);
        auto& slot = classes[t.key()];
        slot.first = t;
        slot.second.push_back(n);
    });
    std::vector<PartitionPiece> out;
    for (auto& [key, cls] : classes) {
        const DegeneracyType& t = cls.first;
        const std::vector<ZVec>& pts = cls.second;
        // T2-part polynomial (must vanish identically on the piece coset)
        PepVector t2part;
        t2part.field = c.field;
        t2part.variables = c.variables;
        t2part.bases = c.bases;
        t2part.canonical = c.canonical;
        t2part.torsion_E = c.torsion_E;
        bool t2empty = true;
        for (size_t ci = 0; ci < c.components.size(); ++ci) {
            PepPolynomial comp;
            for (size_t idx : t.parts[ci].second) comp.terms.push_back(c.components[ci].terms[idx]);
            if (!comp.terms.empty()) t2empty = false;
            t2part.components.push_back(comp);
        }
        std::optional<Coset> found;
        if (t2empty) {
            found = Coset::full(c.variables);
        } else {
            for (const auto& cand : detail::infer_cosets(pts, c.variables)) {
                if (cand.rank() == 0) {
                    found = cand;  // pointwise: T2 sums to zero at the witness by construction
                    break;
                }
                if (is_identically_zero(restrict_to_coset(t2part, cand))) {
                    bool all = true;
                    for (const auto& p : pts)
                        if (!cand.contains(p)) all = false;
                    if (all) {
                        found = cand;
                        break;
                    }
                }
            }
            if (!found && !pts.empty()) found = Coset::point(pts[0]);
        }
        if (!found) continue;
        PartitionPiece piece;
        piece.type = t;
        piece.coset = *found;
        piece.points = pts.size();
        piece.stab = stabilizer(c, *found);
        PepVector fM = restrict_to_coset(c, *found);
        HeightSeminorm N = build_height_seminorm(fM);
        bool constant = fM.variables == 0 || N.kernel.rank() == fM.variables;
        piece.constant_height = constant;
        if (!constant) {
            bool first = true;
            for (const auto& p : pts) {
                auto coords = piece.coset.lattice.coordinates(p - piece.coset.offset);
                if (!coords) continue;
                Real nn = N.eval(*coords);
                if (nn.to_double() < 1.0) continue;  // too close to the tip for a ratio
                double ratio = affine_height(evaluate(c, p)).to_double() / nn.to_double();
                if (first) {
                    piece.ratio_min = piece.ratio_max = ratio;
                    first = false;
                } else {
                    piece.ratio_min = std::min(piece.ratio_min, ratio);
                    piece.ratio_max = std::max(piece.ratio_max, ratio);
                }
            }
        }
        out.push_back(piece);
    }
    // attach lower-rank pieces as exclusions of the bigger ones
    for (auto& big : out)
        for (const auto& small : out) {
            if (small.coset.rank() >= big.coset.rank()) continue;
            if (auto inter = coset_intersect(big.coset, small.coset); inter && *inter == small.coset)
                big.excluded.push_back(small.coset);
        }
    std::sort(out.begin(), out.end(),
              [](const PartitionPiece& a, const PartitionPiece& b) { return a.coset.rank() > b.coset.rank(); });
    return out;
}

// ---- anti-triangular census ----------------------------------------------------

struct AntiTriangularViolation {
    ZVec point;
    double lhs, rhs;  // h(sum) vs (1/e - eps) * sum of term heights
};

// Non-degenerate points where h(sum of terms) drops below
// (1/e - eps) * (sum of the term heights); empirically finite.
inline std::vector<AntiTriangularViolation> anti_triangular_census(const PepVector& f, long R, double eps) {
    if (f.components.size() != 1) throw std::invalid_argument("census needs a single component");
    PepVector c = f.canonical ? f : canonicalize(f);
    size_t e = c.components[0].terms.size();
    if (e == 0) return {};
    if (eps <= 0 || eps >= 1.0 / static_cast<double>(e))
        throw std::invalid_argument("census needs 0 < eps < 1/e");
    std::vector<AntiTriangularViolation> out;
    enumerate_coset_box(Coset::full(c.variables), R, [&](const ZVec& n) {
        std::vector<FieldElement> terms;
        for (const auto& t : c.components[0].terms)
            terms.push_back(t.coeff * evaluate_character(c, t.exponents, n));
        if (!is_nondegenerate_at(c, n)) return;
        FieldElement sum = FieldElement::zero(c.field);
        double rhs_sum = 0;
        for (const auto& tv : terms) {
            sum = sum + tv;
            rhs_sum += affine_height(tv).to_double();
        }
        double lhs = affine_height(sum).to_double();
        double rhs = (1.0 / static_cast<double>(e) - eps) * rhs_sum;
        if (lhs < rhs - 1e-12) out.push_back({n, lhs, rhs});
    });
    return out;
}

}  // namespace pep
