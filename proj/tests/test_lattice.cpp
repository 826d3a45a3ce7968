#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "lot/lattice.hpp"

using namespace lot;
using lot::test::random_vec;

TEST_CASE("meet_join pointwise definition") {
    LatticeVector u(Vec{1, 3}), v(Vec{2, 2});
    auto [mt, jn] = meet_join(u, v);
    CHECK(mt.values() == Vec{1, 2});
    CHECK(jn.values() == Vec{2, 3});
}

TEST_CASE("meet_join idempotence") {
    LatticeVector u(Vec{5, -1});
    auto [mt, jn] = meet_join(u, u);
    CHECK(mt.values() == u.values());
    CHECK(jn.values() == u.values());
}

TEST_CASE("meet_join space mismatch") {
    LatticeVector u(Vec{1, 2}), v(Vec{1, 2, 3});
    CHECK_THROWS_AS(meet_join(u, v), DimensionError);
}

TEST_CASE("meet+join = sum and join-meet = |diff|, exactly") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        LatticeVector u(random_vec(rng, 6)), v(random_vec(rng, 6));
        auto [mt, jn] = meet_join(u, v);
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(mt[i] + jn[i] == u[i] + v[i]);
            CHECK(jn[i] - mt[i] == std::abs(u[i] - v[i]));
        }
    }
}

TEST_CASE("jordan_decompose definition") {
    auto d = jordan_decompose(LatticeVector(Vec{2, -3}));
    CHECK(d.pos.values() == Vec{2, 0});
    CHECK(d.neg.values() == Vec{0, 3});
    CHECK(d.tv == 5.0);
}

TEST_CASE("jordan_decompose null measure") {
    auto d = jordan_decompose(LatticeVector(Vec{0, 0}));
    CHECK(d.pos.values() == Vec{0, 0});
    CHECK(d.neg.values() == Vec{0, 0});
    CHECK(d.tv == 0.0);
}

TEST_CASE("jordan reconstruction is exact and parts are mutually singular") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        LatticeVector s(random_vec(rng, 8));
        auto d = jordan_decompose(s);
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(d.pos[i] - d.neg[i] == s[i]);
            CHECK(std::min(d.pos[i], d.neg[i]) == 0.0);
        }
    }
}

TEST_CASE("leq_on_set") {
    LatticeVector mu1(Vec{1, 5}), mu2(Vec{2, 0});
    CHECK(leq_on_set(mu1, mu2, {0}, 1e-9));
    std::size_t w = 99;
    CHECK_FALSE(leq_on_set(mu1, mu2, {0, 1}, 1e-9, &w));
    CHECK(w == 1);
    CHECK(leq_on_set(mu1, mu2, {}, 1e-9));  // vacuous on the empty set
    CHECK_THROWS_AS(leq_on_set(mu1, mu2, {7}, 1e-9), ValidationError);
}

TEST_CASE("interval_linear_max sign selection") {
    OrderInterval box(LatticeVector(Vec{0, 0}), LatticeVector(Vec{1, 1}));
    auto r = interval_linear_max(box, LatticeVector(Vec{2, -3}));
    CHECK(r.value == 2.0);
    CHECK(r.argmax.values() == Vec{1, 0});
}

TEST_CASE("interval_linear_max degenerate interval") {
    LatticeVector m(Vec{1.5, -0.5, 2});
    OrderInterval box(m, m);
    LatticeVector phi(Vec{0.3, 4.0, -1.0});
    auto r = interval_linear_max(box, phi);
    CHECK_THAT(r.value, Catch::Matchers::WithinAbs(dot(m.values(), phi.values()), 1e-15));
}

TEST_CASE("interval_linear_max empty interval") {
    OrderInterval box(LatticeVector(Vec{1, 0}), LatticeVector(Vec{0, 1}));
    CHECK(box.empty);
    CHECK_THROWS_AS(interval_linear_max(box, LatticeVector(Vec{1, 1})), PreconditionError);
}

TEST_CASE("interval_linear_max matches exhaustive grid maximization") {
    // Oracle: enumerate a full lattice grid with 5 levels per coordinate in
    // dimension 4 and take the maximum of <m, phi> directly.
    Rng rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        Vec lo = random_vec(rng, 4), width = lot::test::random_positive(rng, 4, 0.1, 3.0);
        Vec hi(4);
        for (int i = 0; i < 4; ++i) hi[i] = lo[i] + width[i];
        LatticeVector phi(random_vec(rng, 4));

        const int levels = 5;
        double best = -kInf;
        for (int flat = 0; flat < levels * levels * levels * levels; ++flat) {
            int rem = flat;
            double val = 0;
            for (int i = 0; i < 4; ++i) {
                int k = rem % levels;
                rem /= levels;
                val += (lo[i] + (hi[i] - lo[i]) * k / (levels - 1)) * phi[i];
            }
            best = std::max(best, val);
        }

        OrderInterval box{LatticeVector(lo), LatticeVector(hi)};
        auto r = interval_linear_max(box, phi);
        CHECK_THAT(r.value, Catch::Matchers::WithinAbs(best, 1e-12));
        CHECK(box.contains(r.argmax));
    }
}

TEST_CASE("density_split midpoint and endpoint") {
    LatticeVector mu1(Vec{0, 2}), mu2(Vec{2, 0});
    auto h = density_split(mu1, mu2, LatticeVector(Vec{1, 1}));
    CHECK(h.values() == Vec{0.5, 0.5});
    auto h0 = density_split(mu1, mu2, mu1);
    CHECK(h0.values() == Vec{0, 0});
}

TEST_CASE("density_split round-trips a planted density") {
    Rng rng(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        LatticeVector mu1(random_vec(rng, 6)), mu2(random_vec(rng, 6));
        Vec hstar(6), v(6);
        for (int i = 0; i < 6; ++i) {
            hstar[i] = unit(rng);
            v[i] = (1 - hstar[i]) * mu1[i] + hstar[i] * mu2[i];
        }
        auto h = density_split(mu1, mu2, LatticeVector(v), 1e-12);
        for (std::size_t i : support_of_difference(mu1, mu2))
            CHECK_THAT(h[i], Catch::Matchers::WithinAbs(hstar[i], 1e-10));
    }
}

TEST_CASE("density_split rejects points outside the order interval") {
    LatticeVector mu1(Vec{0, 2}), mu2(Vec{2, 0});
    CHECK_THROWS_AS(density_split(mu1, mu2, LatticeVector(Vec{3, 1})), PreconditionError);
}

TEST_CASE("interval-respecting reallocations of positive measures stay positive") {
    Rng rng(41);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        LatticeVector mu1(lot::test::random_positive(rng, 5)), mu2(lot::test::random_positive(rng, 5));
        Vec v1(5), v2(5);
        for (int i = 0; i < 5; ++i) {
            double h = unit(rng);
            v1[i] = (1 - h) * mu1[i] + h * mu2[i];
            v2[i] = mu1[i] + mu2[i] - v1[i];
        }
        auto [lo, hi] = meet_join(mu1, mu2);
        OrderInterval box{lo, hi};
        REQUIRE(box.contains(LatticeVector(v1), 1e-12));
        REQUIRE(box.contains(LatticeVector(v2), 1e-12));
        CHECK_NOTHROW(PositiveMeasure(v1));
        CHECK_NOTHROW(PositiveMeasure(v2));
    }
}

TEST_CASE("PositiveMeasure rejects negative atoms") {
    CHECK_THROWS_AS(PositiveMeasure(Vec{0.5, -1e-6}), ValidationError);
}

TEST_CASE("FiniteSpace invariants") {
    CHECK_THROWS_AS(FiniteSpace(0), ValidationError);
    CHECK_THROWS_AS(FiniteSpace(2, {"a", "a"}), ValidationError);
    CHECK_NOTHROW(FiniteSpace(2, {"a", "b"}));
}

TEST_CASE("simplex projection properties") {
    Rng rng(57);
    for (int k = 0; k < 200; ++k) {
        std::size_t n = 1 + k % 7;
        Vec y = random_vec(rng, n, -3, 3);
        double mass = 0.1 + (k % 5) * 0.7;
        Vec x = project_simplex(y, mass);
        double s = 0;
        for (double v : x) {
            CHECK(v >= 0.0);
            s += v;
        }
        CHECK_THAT(s, Catch::Matchers::WithinAbs(mass, 1e-12));
        // projection is idempotent on feasible points
        Vec x2 = project_simplex(x, mass);
        CHECK(linf_dist(x, x2) <= 1e-12);
    }
    // zero-mass target collapses everything to zero
    Vec z = project_simplex(Vec{0.4, -0.2, 1.0}, 0.0);
    CHECK(z == Vec{0, 0, 0});
}
