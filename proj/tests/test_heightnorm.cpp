#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "pep/heightnorm.hpp"

using namespace pep;
using namespace fixtures;

TEST_CASE("affine heights of rationals") {
    CHECK(std::fabs(affine_height(q(2, 3)).to_double() - std::log(3)) < 1e-12);
    CHECK(affine_height(q(0)).to_double() == 0.0);
    CHECK(affine_height(q(1)).to_double() == 0.0);
    // h(1/t) = h(t)
    CHECK(std::fabs(affine_height(q(7, 5)).to_double() - affine_height(q(5, 7)).to_double()) < 1e-12);
    // H(p/q) = max(|p|, |q|)
    CHECK(std::fabs(affine_height(q(22, 7)).to_double() - std::log(22)) < 1e-12);
    CHECK(std::fabs(affine_height(q(-9, 4)).to_double() - std::log(9)) < 1e-12);
}

TEST_CASE("affine heights over quadratic fields") {
    auto K = FieldDescriptor::quadratic(-1);
    FieldElement x(K, 1, 1);  // 1 + i: H^2 = product of max(||.||,1) = 2 -> h = log(2)/2
    CHECK(std::fabs(affine_height(x).to_double() - std::log(2.0) / 2) < 1e-12);
    // heights are embedding-invariant: h over Q equals h after lifting
    auto K2 = FieldDescriptor::quadratic(2);
    CHECK(std::fabs(affine_height(FieldElement(K2, mpq_class(2, 3))).to_double() - std::log(3)) < 1e-12);
}

TEST_CASE("seminorm of 2^n is |n| log 2") {
    auto N = build_height_seminorm(canonicalize(two_pow()));
    for (long n = -10; n <= 10; ++n)
        CHECK(std::fabs(N.eval(zvec({n})).to_double() - std::fabs(n) * std::log(2)) < 1e-12);
    CHECK(N.eval(zvec({0})).to_double() == 0.0);
}

TEST_CASE("seminorm matches affine height of the character tuple") {
    auto N = build_height_seminorm(canonicalize(two_three_grid()));
    // at (1, -1): h_aff(2/3) = log 3
    CHECK(std::fabs(N.eval(zvec({1, -1})).to_double() - std::log(3)) < 1e-12);
    // monomial agreement across a box
    auto f = canonicalize(two_three_grid());
    for (const auto& n : box_points(2, 20)) {
        double lhs = N.eval(n).to_double();
        double rhs = affine_height(evaluate(f, n)).to_double();
        CHECK(std::fabs(lhs - rhs) < 1e-9);
    }
}

TEST_CASE("seminorm kernel is exact") {
    auto N = build_height_seminorm(canonicalize(two_pow_difference()));
    CHECK(N.kernel.rank() == 1);
    CHECK(N.kernel.contains(zvec({1, 1})));
    for (long t = -8; t <= 8; ++t) CHECK(N.eval(zvec({t, t})).to_double() == 0.0);
    for (const auto& n : box_points(2, 5)) {
        if (N.kernel.contains(n)) continue;
        CHECK(N.eval(n).to_double() > 0);
    }
}

TEST_CASE("seminorm axioms on random pairs") {
    // The gauge of a multi-character vector is subadditive and positively
    // homogeneous; full |k|-homogeneity additionally needs a single
    // character (h_aff of a tuple is not inversion-invariant in general).
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<long> d(-30, 30), k(1, 5);
    for (const auto& f : {canonicalize(two_three_grid()), canonicalize(twisted_pair())}) {
        auto N = build_height_seminorm(f);
        for (int i = 0; i < 250; ++i) {
            ZVec a = zvec({d(rng), d(rng)}), b = zvec({d(rng), d(rng)});
            double na = N.eval(a).to_double(), nb = N.eval(b).to_double();
            CHECK(N.eval(a + b).to_double() <= na + nb + 1e-9);
            long kk = k(rng);
            ZVec ka(a.size());
            for (size_t j = 0; j < a.size(); ++j) ka[j] = a[j] * kk;
            CHECK(std::fabs(N.eval(ka).to_double() - kk * na) < 1e-9);
        }
    }
    // single character: fully symmetric, |k|-homogeneous
    auto N = build_height_seminorm(canonicalize(two_three_grid()));
    std::uniform_int_distribution<long> ks(-5, 5);
    for (int i = 0; i < 250; ++i) {
        ZVec a = zvec({d(rng), d(rng)});
        long kk = ks(rng);
        ZVec ka(a.size());
        for (size_t j = 0; j < a.size(); ++j) ka[j] = a[j] * kk;
        CHECK(std::fabs(N.eval(ka).to_double() - std::fabs(kk) * N.eval(a).to_double()) < 1e-9);
    }
    // positive homogeneity pinned example: ||3n|| = 3 ||n|| at n = (2, -1)
    CHECK(std::fabs(N.eval(zvec({6, -3})).to_double() - 3 * N.eval(zvec({2, -1})).to_double()) < 1e-12);
}

TEST_CASE("unit ball volumes, exact cells") {
    auto N1 = build_height_seminorm(canonicalize(two_pow()));
    auto v1 = unit_ball_volume(N1);
    CHECK(v1.exact);
    CHECK(std::fabs(v1.value - 2.0 / std::log(2)) < 1e-9);

    auto N2 = build_height_seminorm(canonicalize(two_three_grid()));
    auto v2 = unit_ball_volume(N2);
    CHECK(v2.exact);
    // polygon-area oracle: quadrant areas L^2/(2ab), L^2/ab, L^2/ab, L^2/(2ab)
    double a = std::log(2), b = std::log(3);
    double oracle = 1 / (2 * a * b) + 1 / (a * b) + 1 / (a * b) + 1 / (2 * a * b);
    CHECK(std::fabs(v2.value - oracle) < 1e-6);
    CHECK(std::fabs(oracle - 3.0 / (a * b)) < 1e-15);
}

TEST_CASE("volume scales under exponent doubling") {
    // doubling every exponent halves linear dimensions: volume shrinks 2^r'
    auto f = canonicalize(two_three_grid());
    PepVector g = f;
    g.canonical = false;
    for (auto& comp : g.components)
        for (auto& t : comp.terms)
            for (size_t i = 0; i < t.exponents.rows(); ++i)
                for (size_t j = 0; j < t.exponents.cols(); ++j) t.exponents.at(i, j) *= 2;
    auto vf = unit_ball_volume(build_height_seminorm(f));
    auto vg = unit_ball_volume(build_height_seminorm(canonicalize(g)));
    CHECK(std::fabs(vg.value - vf.value / 4.0) < 1e-9);
}

TEST_CASE("Monte Carlo volume agrees with exact cells") {
    for (const auto& f : {canonicalize(two_pow()), canonicalize(two_three_grid())}) {
        auto N = build_height_seminorm(f);
        auto ex = unit_ball_volume(N);
        auto mc = unit_ball_volume(N, 200000, 4242, /*force_mc=*/true);
        CHECK_FALSE(mc.exact);
        // in dimension 1 the direction integrand is constant: zero variance
        CHECK(mc.std_error >= 0);
        if (N.variables > 1) CHECK(mc.std_error > 0);
        CHECK(std::fabs(mc.value - ex.value) < 3 * mc.std_error + 1e-6);
    }
}

TEST_CASE("exact cells handle a rank-3 grid") {
    // single character 2^a 3^b 5^c; Monte Carlo cross-checks the cell volume
    PepPolynomial comp;
    comp.terms.push_back(term_of(q(1), {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
    auto f = make_pep_vector(Q(), {q(2), q(3), q(5)}, 3, {comp});
    auto N = build_height_seminorm(canonicalize(f));
    auto ex = unit_ball_volume(N);
    CHECK(ex.exact);
    auto mc = unit_ball_volume(N, 400000, 7, /*force_mc=*/true);
    CHECK(std::fabs(mc.value - ex.value) < 3 * mc.std_error + 1e-3);
    // the ball contains the coordinate simplex scaled by the two-sided forms
    CHECK(ex.value > 0);
    // monomial agreement in rank 3
    auto cf = canonicalize(f);
    for (const auto& n : box_points(3, 4)) {
        double lhs = N.eval(n).to_double();
        double rhs = affine_height(evaluate(cf, n)).to_double();
        CHECK(std::fabs(lhs - rhs) < 1e-9);
    }
}

TEST_CASE("monomial height gap") {
    CHECK(monomial_height_gap(canonicalize(two_pow())).to_double() == 0.0);

    auto f = scaled_two_pow(3);
    double gap = monomial_height_gap(canonicalize(f)).to_double();
    CHECK(std::fabs(gap - std::log(3)) < 1e-12);
    auto N = build_height_seminorm(canonicalize(f));
    for (long n = -5; n <= 5; ++n) {
        double h = affine_height(evaluate(f, zvec({n}))[0]).to_double();
        CHECK(std::fabs(h - N.eval(zvec({n})).to_double()) <= gap + 1e-9);
    }

    // f = (2^n, 5 * 3^n): gap log 5
    PepPolynomial c1, c2;
    c1.terms.push_back(term_of(q(1), {{1}, {0}}));
    c2.terms.push_back(term_of(q(5), {{0}, {1}}));
    auto g = make_pep_vector(Q(), {q(2), q(3)}, 1, {c1, c2});
    double gap2 = monomial_height_gap(canonicalize(g)).to_double();
    CHECK(std::fabs(gap2 - std::log(5)) < 1e-12);
    auto Ng = build_height_seminorm(canonicalize(g));
    for (long n = -5; n <= 5; ++n) {
        double h = affine_height(evaluate(g, zvec({n}))).to_double();
        CHECK(std::fabs(h - Ng.eval(zvec({n})).to_double()) <= gap2 + 1e-9);
    }
}

TEST_CASE("kernel coincides with the stabilizer for independent bases") {
    auto f = canonicalize(two_pow_difference());
    auto N = build_height_seminorm(f);
    CHECK(N.kernel == stabilizer(f));
}

TEST_CASE("height of values tracks the seminorm away from degeneracy") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<long> mag(40, 60);
    std::uniform_int_distribution<int> sign(0, 1);
    for (const auto& f : {two_plus_three_pow(), five_plus_seven_pow()}) {
        auto c = canonicalize(f);
        auto N = build_height_seminorm(c);
        for (int i = 0; i < 60; ++i) {
            long n = mag(rng) * (sign(rng) ? 1 : -1);
            if (!is_nondegenerate_at(c, zvec({n}))) continue;
            double h = affine_height(evaluate(c, zvec({n}))).to_double();
            double nn = N.eval(zvec({n})).to_double();
            CHECK(std::fabs(h / nn - 1.0) <= 0.1);
        }
    }
}

TEST_CASE("volume on the quotient by the kernel") {
    // 2^{n1 - n2}: kernel is the diagonal, the quotient gauge is |y| log 2
    auto N = build_height_seminorm(canonicalize(two_pow_difference()));
    REQUIRE(N.kernel.rank() == 1);
    auto v = unit_ball_volume(N);
    CHECK(v.exact);
    CHECK(std::fabs(v.value - 2.0 / std::log(2)) < 1e-9);
}

TEST_CASE("seminorm floor equals the inverse sup-norm radius") {
    auto N = build_height_seminorm(canonicalize(two_pow()));
    auto floor = seminorm_floor(N);
    REQUIRE(floor.has_value());
    CHECK(std::fabs(*floor - std::log(2)) < 1e-9);

    auto N2 = build_height_seminorm(canonicalize(two_three_grid()));
    auto f2 = seminorm_floor(N2);
    REQUIRE(f2.has_value());
    CHECK(std::fabs(*f2 - std::log(2)) < 1e-9);  // widest vertex sits at (1/log2, 0) scale
}
