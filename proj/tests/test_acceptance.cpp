// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line so
// the run reads as a checklist; tolerances are pinned in the assertions.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <iostream>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "pep/counting.hpp"
#include "pep/heightnorm.hpp"
#include "pep/matrixgroups.hpp"
#include "pep/reduction.hpp"

using namespace pep;
using namespace fixtures;

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int idx, const std::string& label, bool pass, double secs, double limit) {
    std::cout << "ACCEPTANCE " << idx << " [" << label << "]: " << (pass ? "PASS" : "FAIL") << "  ("
              << secs << " s, limit " << limit << " s)" << std::endl;
    CHECK(pass);
    CHECK(secs < limit);
}

}  // namespace

TEST_CASE("criterion 1: counting law for the dyadic line") {
    Stopwatch sw;
    std::vector<double> ts = {1e3, 1e6, 1e9, 1e12};
    auto rep = count_by_height(two_pow(), ts);
    bool pass = rep.certified;
    for (size_t i = 0; i < ts.size(); ++i) {
        long long expect = 2 * static_cast<long long>(std::floor(std::log2(ts[i]))) + 1;
        if (rep.counts[i] != expect) pass = false;
    }
    auto fit = fit_asymptotic(rep);
    if (fit.rprime_hat != 1) pass = false;
    double cstar = 2.0 / std::log(2);
    if (std::fabs(fit.c_hat - cstar) / cstar >= 0.05) pass = false;
    report(1, "rank-1 counting law", pass, sw.seconds(), 1.0);
}

TEST_CASE("criterion 2: counting law for the 2-3 grid") {
    Stopwatch sw;
    auto rep = count_by_height(two_three_grid(), {1e9});
    double L = std::log(1e9);
    double density = static_cast<double>(rep.counts[0]) / (L * L);
    double a = std::log(2), b = std::log(3);
    double cstar = 3.0 / (a * b);
    bool pass = rep.certified && std::fabs(density - cstar) / cstar < 0.15;
    auto vol = unit_ball_volume(build_height_seminorm(canonicalize(two_three_grid())));
    double oracle = 1 / (2 * a * b) + 1 / (a * b) + 1 / (a * b) + 1 / (2 * a * b);
    if (!vol.exact || std::fabs(vol.value - oracle) >= 1e-6) pass = false;
    report(2, "rank-2 counting law + exact ball volume", pass, sw.seconds(), 10.0);
}

TEST_CASE("criterion 3: zero locus of the alternating sum") {
    Stopwatch sw;
    auto rep = empirical_zero_locus(two_pow_plus_minus_two_pow(), 100);
    bool pass = rep.uncovered.empty() && rep.verified_cosets.size() == 1;
    if (pass) {
        const Coset& c = rep.verified_cosets[0];
        pass = c.rank() == 1 && c.lattice.contains(zvec({2})) && !c.lattice.contains(zvec({1})) &&
               c.contains(zvec({1}));
    }
    report(3, "odd progression recovered and verified", pass, sw.seconds(), 1.0);
}

TEST_CASE("criterion 4: reduced decomposition and group image") {
    Stopwatch sw;
    bool pass = true;

    // pieces re-evaluate identically on a radius-6 box
    for (const auto& f : {sign_plus_two_pow(), omega_vector()}) {
        auto rd = reduced_decomposition(f);
        long R = f.variables >= 3 ? 6 : 6;
        for (const auto& n : box_points(f.variables, R)) {
            int owners = 0;
            for (const auto& piece : rd.pieces) {
                if (!piece.coset.contains(n)) continue;
                ++owners;
                if (!(evaluate(piece.reduced, piece.proj.apply(n)) == evaluate(f, n))) pass = false;
            }
            if (owners != 1) pass = false;
        }
    }

    // the omega vector is monomial on every first-reduction coset, and its
    // box image is exactly the group <2, -1, omega> within reachable range
    auto om = omega_vector();
    auto pieces = monomial_on_cosets(om);
    if (!pieces) {
        pass = false;
    } else {
        auto K = FieldDescriptor::quadratic(-3);
        FieldElement w(K, mpq_class(-1, 2), mpq_class(1, 2));
        std::set<std::string> image;
        for (const auto& n : box_points(3, 6)) image.insert(evaluate(om, n)[0].str());
        // every image value is +- w^j 2^s
        for (const auto& n : box_points(3, 6)) {
            FieldElement v = evaluate(om, n)[0];
            bool in_group = false;
            for (int sgn = 0; sgn < 2 && !in_group; ++sgn)
                for (int j = 0; j < 3 && !in_group; ++j) {
                    FieldElement u = v * (sgn ? -FieldElement::one(K) : FieldElement::one(K)) * w.pow(-j);
                    if (!u.is_rational_value() || u.a() <= 0) continue;
                    mpq_class r = u.a();
                    // power of two: numerator and denominator both powers of 2
                    mpz_class num = r.get_num(), den = r.get_den();
                    auto pow2 = [](mpz_class x) {
                        while (x % 2 == 0) x /= 2;
                        return x == 1;
                    };
                    if (pow2(num) && pow2(den)) in_group = true;
                }
            if (!in_group) pass = false;
        }
        // every group element +-w^j 2^s with |s| <= 5 appears in the image
        for (int sgn = 0; sgn < 2; ++sgn)
            for (int j = 0; j < 3; ++j)
                for (long s = -5; s <= 5; ++s) {
                    FieldElement el = (sgn ? -FieldElement::one(K) : FieldElement::one(K)) * w.pow(j) *
                                      FieldElement(K, 2).pow(s);
                    if (!image.count(el.str())) pass = false;
                }
    }
    report(4, "decomposition exact + image is the group <2,-1,omega>", pass, sw.seconds(), 5.0);
}

TEST_CASE("criterion 5: stabilizers and rank vs the eigenvalue group") {
    Stopwatch sw;
    bool pass = stabilizer(sign_plus_two_pow()).rank() == 0;
    auto st = stabilizer(two_pow_difference());
    if (!(st.rank() == 1 && st.contains(zvec({1, 1})))) pass = false;

    auto P = MatrixOverField::from_longs(Q(), {{1, 1}, {0, 1}});
    auto conj = [&](const MatrixOverField& d) { return P * d * P.inverse(); };
    std::vector<std::vector<MatrixOverField>> fixtures = {
        {MatrixOverField::diagonal(Q(), {q(2), q(1, 2)})},
        {MatrixOverField::diagonal(Q(), {q(2), q(1, 2)}), MatrixOverField::diagonal(Q(), {q(1, 2), q(2)})},
        {MatrixOverField::diagonal(Q(), {q(2), q(3)}), MatrixOverField::diagonal(Q(), {q(3), q(2)})},
        {conj(MatrixOverField::diagonal(Q(), {q(3), q(1, 3)}))},
        {MatrixOverField::diagonal(Q(), {q(-1), q(-1)}), MatrixOverField::diagonal(Q(), {q(2), q(2)})},
    };
    for (const auto& mats : fixtures) {
        BgSpec spec = make_bg_spec(mats);
        if (pep_rank(bg_to_pep(spec)) != eigenvalue_group_rank(spec)) pass = false;
    }
    report(5, "stabilizers + rank matches the Z-rank on 5 BG fixtures", pass, sw.seconds(), 5.0);
}

TEST_CASE("criterion 6: heights track the seminorm at 100% of samples") {
    Stopwatch sw;
    bool pass = true;
    std::mt19937_64 rng(60);
    std::uniform_int_distribution<long> mag(40, 60);
    std::uniform_int_distribution<int> sgn(0, 1);

    for (const auto& f : {two_plus_three_pow(), five_plus_seven_pow()}) {
        auto c = canonicalize(f);
        auto N = build_height_seminorm(c);
        for (long n = 40; n <= 60; ++n)
            for (long s : {n, -n}) {
                if (!is_nondegenerate_at(c, zvec({s}))) continue;
                double h = affine_height(evaluate(c, zvec({s}))).to_double();
                double nn = N.eval(zvec({s})).to_double();
                if (std::fabs(h / nn - 1.0) > 0.1) pass = false;
            }
    }
    {
        auto c = canonicalize(twisted_pair());
        auto N = build_height_seminorm(c);
        int sampled = 0;
        while (sampled < 200) {
            long a = mag(rng) * (sgn(rng) ? 1 : -1);
            long b = mag(rng) * (sgn(rng) ? 1 : -1);
            std::uniform_int_distribution<long> small(-60, 60);
            if (sgn(rng)) a = small(rng);  // mix: one large coordinate suffices
            long norm_inf = std::max(std::labs(a), std::labs(b));
            if (norm_inf < 40 || norm_inf > 60) continue;
            ZVec n = zvec({a, b});
            if (!is_nondegenerate_at(c, n)) continue;
            ++sampled;
            double h = affine_height(evaluate(c, n)).to_double();
            double nn = N.eval(n).to_double();
            if (std::fabs(h / nn - 1.0) > 0.1) pass = false;
        }
    }
    report(6, "height/seminorm ratio within 0.1 on 40..60 shells", pass, sw.seconds(), 30.0);
}

TEST_CASE("criterion 7: unipotent powers are sparse in diagonal images") {
    Stopwatch sw;
    auto U = MatrixOverField::from_longs(Q(), {{1, 1}, {0, 1}});
    auto rep1 = power_membership_count(U, diag_two_pep(), 1000000);
    bool pass = rep1.certified && rep1.count == 1;

    auto rep2 = power_membership_count(U, diag_rank2_pep(), 1000000);
    double envelope = std::pow(std::log(1e6), 2.0);
    if (!(rep2.count <= 25 && static_cast<double>(rep2.count) <= envelope)) pass = false;
    report(7, "unipotent power membership = 1 and <= (log N)^2", pass, sw.seconds(), 10.0);
}

TEST_CASE("criterion 8: ambient growth and sparseness") {
    Stopwatch sw;
    bool pass = true;
    for (long T = 1; T <= 4; ++T)
        if (sl2z_ball_count(T) != sl2z_exhaustive_count(T)) pass = false;

    std::vector<double> ts = {50, 100, 200, 400};
    std::vector<long long> ambient;
    for (double t : ts) ambient.push_back(sl2z_ball_count(static_cast<long>(t)));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < ts.size(); ++i) {
        double x = std::log(ts[i]), y = std::log(static_cast<double>(ambient[i]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = static_cast<double>(ts.size());
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (std::fabs(slope - 2.0) > 0.15) pass = false;

    auto sp = sparseness_report(diag_two_pep(), ts, ambient);
    if (!sp.decreasing) pass = false;
    report(8, "quadratic ambient growth + decreasing sparseness ratio", pass, sw.seconds(), 60.0);
}

TEST_CASE("criterion 9: anti-triangular violations stabilize") {
    Stopwatch sw;
    auto v50 = anti_triangular_census(two_plus_three_pow(), 50, 0.1);
    auto v100 = anti_triangular_census(two_plus_three_pow(), 100, 0.1);
    bool pass = v50.size() == v100.size();
    report(9, "violation census identical at radii 50 and 100", pass, sw.seconds(), 5.0);
}

TEST_CASE("criterion 10: fiber counts are class-constant") {
    Stopwatch sw;
    auto f = pep_from_terms(Q(), {q(4)}, 1, {{q(1), {{1}}}});
    auto rep = fiber_statistics(f, two_pow(), 50);
    bool pass = rep.certified && rep.modulus == 1 && rep.violations.empty() &&
                rep.excluded_candidates.empty() && rep.class_counts.size() == 1 &&
                rep.class_counts.begin()->second == 1;
    report(10, "constant fiber count 1 with modulus 1", pass, sw.seconds(), 5.0);
}
