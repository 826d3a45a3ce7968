#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "lot/jko.hpp"
#include "oracles.hpp"

using namespace lot;
using Catch::Matchers::WithinAbs;

namespace {

SpacePtr grid_space(std::size_t n) {
    std::vector<std::vector<double>> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = {double(i) / double(std::max<std::size_t>(n - 1, 1))};
    return make_space(n, coords);
}

JkoConfig stationary_config(std::size_t n, Vec m_ref) {
    auto space = grid_space(n);
    JkoConfig cfg;
    cfg.kind = ProblemKind::exact;
    cfg.C = ground_cost(space, space, "sqeuclidean");
    cfg.f = kl_entropy();
    cfg.m = PositiveMeasure(space, std::move(m_ref));
    cfg.V = LatticeVector(space, Vec(n, 0.0));
    return cfg;
}

}  // namespace

TEST_CASE("energy_eval") {
    auto space = make_space(2);
    JkoConfig cfg;
    cfg.kind = ProblemKind::exact;
    cfg.C = constant_cost(space, space, 0.0);
    cfg.f = kl_entropy();
    cfg.m = PositiveMeasure(space, Vec{1, 1});
    cfg.V = LatticeVector(space, Vec{0, 0});
    CHECK_THAT(energy_eval(PositiveMeasure(space, Vec{1, 1}), cfg), WithinAbs(0.0, 1e-15));

    JkoConfig off = cfg;
    off.m = PositiveMeasure(space, Vec{1, 0});
    CHECK(energy_eval(PositiveMeasure(space, Vec{0.5, 0.25}), off) == kInf);

    JkoConfig sq = cfg;
    sq.f = square_entropy();
    sq.m = PositiveMeasure(space, Vec{1, 2});
    sq.V = LatticeVector(space, Vec{1, 0});
    CHECK_THAT(energy_eval(PositiveMeasure(space, Vec{2, 2}), sq), WithinAbs(8.0, 1e-12));
}

TEST_CASE("jko stationarity: constant densities are fixed points") {
    for (double K : {0.5, 1.0, 2.0}) {
        auto cfg = stationary_config(4, Vec{0.2, 0.3, 0.25, 0.25});
        Vec mu(4);
        for (int i = 0; i < 4; ++i) mu[i] = K * cfg.m[i];
        auto nu = jko_step(PositiveMeasure(cfg.C.rows, mu), cfg);
        for (int j = 0; j < 4; ++j) CHECK_THAT(nu[j], WithinAbs(mu[j], 1e-8));
    }
}

TEST_CASE("jko exact step against the scalar simplex oracle") {
    auto space = make_space(2);
    JkoConfig cfg;
    cfg.kind = ProblemKind::exact;
    cfg.C = cost_from_values(space, space, Vec{0, 1, 1, 0});
    cfg.f = square_entropy();
    cfg.m = PositiveMeasure(space, Vec{0.5, 0.5});
    cfg.V = LatticeVector(space, Vec{0, 0});

    auto step = jko_step_full(PositiveMeasure(space, Vec{0.9, 0.1}), cfg);
    // independent oracle: T_c is |nu1 - 0.9| on two points, E = 2 nu1^2 + 2 nu2^2
    double best = kInf, best_nu1 = 0;
    for (int k = 0; k <= 10000; ++k) {
        double nu1 = k * 1e-4;
        double obj = std::abs(nu1 - 0.9) + 2 * nu1 * nu1 + 2 * (1 - nu1) * (1 - nu1);
        if (obj < best) {
            best = obj;
            best_nu1 = nu1;
        }
    }
    CHECK_THAT(best_nu1, WithinAbs(0.625, 1e-12));  // stationarity of the scan
    CHECK_THAT(step.nu[0], WithinAbs(best_nu1, 1e-3));
    CHECK_THAT(step.objective, WithinAbs(best, 1e-4));
    // strictly between the source and the uniform reference
    CHECK(step.nu[0] > 0.5);
    CHECK(step.nu[0] < 0.9);
}

TEST_CASE("jko entropic step with large eps moves closer to uniform") {
    auto space = make_space(2);
    JkoConfig ex;
    ex.kind = ProblemKind::exact;
    ex.C = cost_from_values(space, space, Vec{0, 1, 1, 0});
    ex.f = square_entropy();
    ex.m = PositiveMeasure(space, Vec{0.5, 0.5});
    ex.V = LatticeVector(space, Vec{0, 0});
    JkoConfig en = ex;
    en.kind = ProblemKind::entropic;
    en.epsilon = 5.0;
    en.alpha = PositiveMeasure(space, Vec{0.5, 0.5});
    en.beta = PositiveMeasure(space, Vec{0.5, 0.5});

    PositiveMeasure mu(space, Vec{0.9, 0.1});
    auto nu_ex = jko_step(mu, ex);
    auto nu_en = jko_step(mu, en);
    Vec uniform{0.5, 0.5};
    CHECK(l1_dist(nu_en.values(), uniform) < l1_dist(nu_ex.values(), uniform));
    // mass preservation for both kinds
    CHECK_THAT(nu_ex.mass(), WithinAbs(1.0, 1e-8));
    CHECK_THAT(nu_en.mass(), WithinAbs(1.0, 1e-8));
}

TEST_CASE("jko entropic step against a plan-parameterized oracle") {
    // 2x2 plans in Pi(mu, nu) have one degree of freedom; scanning it gives an
    // implementation-independent value of T_eps, minimized over nu on a grid.
    auto space = make_space(2);
    JkoConfig cfg;
    cfg.kind = ProblemKind::entropic;
    cfg.epsilon = 0.4;
    cfg.C = cost_from_values(space, space, Vec{0.1, 0.8, 1.1, 0.3});
    cfg.f = kl_entropy();
    cfg.m = PositiveMeasure(space, Vec{0.5, 0.5});
    cfg.V = LatticeVector(space, Vec{0.2, -0.1});
    cfg.alpha = PositiveMeasure(space, Vec{0.5, 0.5});
    cfg.beta = PositiveMeasure(space, Vec{0.5, 0.5});

    PositiveMeasure mu(space, Vec{0.55, 0.45});
    auto step = jko_step_full(mu, cfg);

    auto t_eps = [&](double nu1) {
        // scan pi11 in the feasible interval
        double M = 1.0;
        double lo = std::max(0.0, mu[0] + nu1 - M), hi = std::min(mu[0], nu1);
        double best = kInf;
        for (int k = 0; k <= 4000; ++k) {
            double p11 = lo + (hi - lo) * k / 4000.0;
            double p12 = mu[0] - p11, p21 = nu1 - p11, p22 = mu[1] - p21;
            if (p12 < -1e-12 || p21 < -1e-12 || p22 < -1e-12) continue;
            Vec p{p11, p12, p21, p22};
            double cost = 0, kl = 0;
            Vec ab{0.25, 0.25, 0.25, 0.25};
            for (int q = 0; q < 4; ++q) {
                cost += p[q] * cfg.C.values[q];
                if (p[q] > 0) kl += p[q] * std::log(p[q] / ab[q]) - p[q];
                else kl += 0;
            }
            best = std::min(best, cost + cfg.epsilon * (kl + 0.0));
        }
        return best;
    };
    double best = kInf, best_nu1 = 0;
    for (int k = 1; k < 1000; ++k) {
        double nu1 = k * 1e-3;
        double e = 0;
        Vec nu{nu1, 1 - nu1};
        for (int j = 0; j < 2; ++j)
            e += cfg.f.value(nu[j] / 0.5) * 0.5 + cfg.V[j] * nu[j];
        double obj = t_eps(nu1) + e;
        if (obj < best) {
            best = obj;
            best_nu1 = nu1;
        }
    }
    CHECK_THAT(step.nu[0], WithinAbs(best_nu1, 2e-3));
    CHECK_THAT(step.objective, WithinAbs(best, 1e-4));
}

TEST_CASE("jko flow: stationary start stays constant, flows contract to the reference") {
    auto cfg = stationary_config(8, Vec(8, 0.125));
    cfg.steps = 10;
    Vec mu0(8);
    for (int i = 0; i < 8; ++i) mu0[i] = 1.0 * 0.125;
    auto traj = jko_flow(PositiveMeasure(cfg.C.rows, mu0), cfg);
    for (const auto& nu : traj.measures)
        for (int j = 0; j < 8; ++j) CHECK_THAT(nu[j], WithinAbs(mu0[j], 1e-8));

    // perturbed start: sup-norm distance of densities to the constant K is
    // nonincreasing along the flow (stepwise density bounds)
    Rng rng(7);
    Vec mu1(8);
    double mass = 0;
    for (int i = 0; i < 8; ++i) {
        mu1[i] = 0.125 * (0.6 + 0.8 * std::uniform_real_distribution<double>(0, 1)(rng));
        mass += mu1[i];
    }
    double K = mass / 1.0;
    auto traj2 = jko_flow(PositiveMeasure(cfg.C.rows, mu1), cfg);
    double prev = kInf;
    for (const auto& nu : traj2.measures) {
        double dist = 0;
        for (int j = 0; j < 8; ++j) dist = std::max(dist, std::abs(nu[j] / 0.125 - K));
        CHECK(dist <= prev + 1e-9);
        prev = dist;
    }

    cfg.steps = 1;
    auto one = jko_flow(PositiveMeasure(cfg.C.rows, mu1), cfg);
    auto single = jko_step(PositiveMeasure(cfg.C.rows, mu1), cfg);
    CHECK(l1_dist(one.measures.back().values(), single.values()) == 0.0);
}

TEST_CASE("jko comparison, unbalanced kind ordered inputs") {
    auto space = make_space(2);
    JkoConfig cfg;
    cfg.kind = ProblemKind::unbalanced;
    cfg.C = cost_from_values(space, space, Vec{0.0, 0.7, 0.7, 0.0});
    cfg.uot = UotProblem{kl_entropy(), kl_entropy(0.8)};
    cfg.f = kl_entropy();
    cfg.m = PositiveMeasure(space, Vec{0.5, 0.5});
    cfg.V = LatticeVector(space, Vec{0.1, -0.05});

    PositiveMeasure mu1(space, Vec{0.4, 0.5});
    PositiveMeasure mu2(space, Vec{0.6, 0.8});
    auto rep = verify_jko_comparison(mu1, mu2, cfg, 1e-5);
    CHECK(rep.passed);

    // joint 6-dim refinement oracle (plan entries + nu) for both sides
    auto objective = [&](const PositiveMeasure& mu) {
        return [&, mu](const Vec& z) {
            // z = (pi11, pi12, pi21, pi22, nu1, nu2)
            auto fkl = [](double s, double lam) {
                return s <= 0 ? lam : lam * (s * std::log(s) - s + 1);
            };
            double r0 = (z[0] + z[1]) / mu[0], r1 = (z[2] + z[3]) / mu[1];
            Vec nu{z[4], z[5]};
            if (nu[0] <= 1e-9 || nu[1] <= 1e-9) return kInf;
            double s0 = (z[0] + z[2]) / nu[0], s1 = (z[1] + z[3]) / nu[1];
            double acc = fkl(r0, 1.0) * mu[0] + fkl(r1, 1.0) * mu[1];
            acc += fkl(s0, 0.8) * nu[0] + fkl(s1, 0.8) * nu[1];
            acc += 0.7 * (z[1] + z[2]);
            for (int j = 0; j < 2; ++j)
                acc += fkl(nu[j] / 0.5, 1.0) * 0.5 + cfg.V[j] * nu[j];
            return acc;
        };
    };
    auto o1 = lot::test::grid_minimize(objective(mu1), Vec(6, 0.0), Vec(6, 1.5), 7, 14);
    auto o2 = lot::test::grid_minimize(objective(mu2), Vec(6, 0.0), Vec(6, 1.5), 7, 14);
    auto nu1 = jko_step_full(mu1, cfg), nu2 = jko_step_full(mu2, cfg);
    CHECK_THAT(nu1.objective, WithinAbs(o1.value, 1e-3));
    CHECK_THAT(nu2.objective, WithinAbs(o2.value, 1e-3));
    CHECK(o1.x[4] <= o2.x[4] + 1e-2);
    CHECK(o1.x[5] <= o2.x[5] + 1e-2);
}

TEST_CASE("jko comparison: identical inputs give the identical step") {
    auto space = make_space(3);
    JkoConfig cfg;
    cfg.kind = ProblemKind::exact;
    cfg.C = ground_cost(grid_space(3), grid_space(3), "sqeuclidean");
    cfg.f = kl_entropy();
    cfg.m = PositiveMeasure(cfg.C.cols, Vec(3, 1.0 / 3));
    cfg.V = LatticeVector(cfg.C.cols, Vec(3, 0.0));
    PositiveMeasure mu(cfg.C.rows, Vec{0.5, 0.3, 0.2});
    auto rep = verify_jko_comparison(mu, mu, cfg, 1e-12);
    CHECK(rep.passed);
    CHECK(rep.worst_violation == 0.0);
}

TEST_CASE("jko comparison batch of ordered unbalanced pairs") {
    Rng rng(41);
    auto space = make_space(3);
    JkoConfig cfg;
    cfg.kind = ProblemKind::unbalanced;
    cfg.C = ground_cost(grid_space(3), grid_space(3), "sqeuclidean");
    cfg.uot = UotProblem{kl_entropy(), kl_entropy()};
    cfg.f = kl_entropy();
    cfg.m = PositiveMeasure(cfg.C.cols, Vec(3, 1.0 / 3));
    cfg.V = LatticeVector(cfg.C.cols, Vec(3, 0.0));
    cfg.tol = 1e-7;  // conclusion tolerance is 1e-5; the inner target leaves margin
    for (int k = 0; k < 10; ++k) {
        Vec m1 = lot::test::random_positive(rng, 3, 0.1, 0.9), m2 = m1;
        for (int i = 0; i < 3; ++i)
            m2[i] += std::uniform_real_distribution<double>(0.0, 0.4)(rng);
        auto rep = verify_jko_comparison(PositiveMeasure(cfg.C.rows, m1),
                                         PositiveMeasure(cfg.C.rows, m2), cfg, 1e-5);
        CHECK(rep.passed);
    }
}

TEST_CASE("jko comparison rejects ordered unequal inputs for mass-preserving kinds") {
    auto cfg = stationary_config(3, Vec(3, 1.0 / 3));
    PositiveMeasure mu1(cfg.C.rows, Vec{0.2, 0.3, 0.2});
    PositiveMeasure mu2(cfg.C.rows, Vec{0.3, 0.4, 0.3});
    CHECK_THROWS_AS(verify_jko_comparison(mu1, mu2, cfg, 1e-6), PreconditionError);
    PositiveMeasure bad(cfg.C.rows, Vec{0.4, 0.2, 0.2});
    CHECK_THROWS_AS(verify_jko_comparison(bad, mu1, cfg, 1e-6), PreconditionError);
}

TEST_CASE("tv contraction for exact and entropic steps") {
    auto cfg = stationary_config(8, Vec(8, 0.125));
    cfg.tol = 1e-7;  // random pairs can tie destinations; see JkoConfig::tol
    JkoConfig en = cfg;
    en.kind = ProblemKind::entropic;
    en.epsilon = 0.2;
    en.alpha = PositiveMeasure(cfg.C.rows, Vec(8, 0.125));
    en.beta = PositiveMeasure(cfg.C.cols, Vec(8, 0.125));

    PositiveMeasure same(cfg.C.rows, Vec(8, 0.125));
    auto repsame = verify_tv_contraction(same, same, cfg, 1e-6);
    CHECK(repsame.passed);
    CHECK(repsame.worst_violation <= 0.0);

    Rng rng(43);
    for (int k = 0; k < 6; ++k) {
        Vec a = lot::test::random_mass(rng, 8, 1.0), b = lot::test::random_mass(rng, 8, 1.0);
        auto r1 = verify_tv_contraction(PositiveMeasure(cfg.C.rows, a),
                                        PositiveMeasure(cfg.C.rows, b), cfg, 1e-6);
        CHECK(r1.passed);
        auto r2 = verify_tv_contraction(PositiveMeasure(cfg.C.rows, a),
                                        PositiveMeasure(cfg.C.rows, b), en, 1e-6);
        CHECK(r2.passed);
    }
}

TEST_CASE("jko max principle: density bounds propagate") {
    auto cfg = stationary_config(6, Vec(6, 1.0 / 6));
    Vec mu(6);
    mu[0] = 0.5 / 6;
    mu[1] = 2.0 / 6;
    mu[2] = 1.3 / 6;
    mu[3] = 0.8 / 6;
    mu[4] = 1.7 / 6;
    mu[5] = 0.7 / 6;
    auto rep = verify_jko_max_principle(PositiveMeasure(cfg.C.rows, mu), 0.5, 2.0, cfg, 1e-6);
    CHECK(rep.passed);

    Vec cm(6);
    for (int i = 0; i < 6; ++i) cm[i] = 1.5 / 6;
    auto tight = verify_jko_max_principle(PositiveMeasure(cfg.C.rows, cm), 1.5, 1.5, cfg, 1e-6);
    CHECK(tight.passed);

    CHECK_THROWS_AS(verify_jko_max_principle(PositiveMeasure(cfg.C.rows, mu), 2.5, 3.0, cfg, 1e-6),
                    PreconditionError);
    JkoConfig bad = cfg;
    bad.V = LatticeVector(cfg.C.cols, Vec(6, 0.3));
    CHECK_THROWS_AS(verify_jko_max_principle(PositiveMeasure(cfg.C.rows, mu), 0.5, 2.0, bad, 1e-6),
                    PreconditionError);
}

TEST_CASE("jko inner solutions are initialization independent") {
    auto cfg = stationary_config(5, Vec(5, 0.2));
    Rng rng(47);
    Vec mu = lot::test::random_mass(rng, 5, 1.0);
    auto base = jko_step(PositiveMeasure(cfg.C.rows, mu), cfg);
    JkoConfig alt = cfg;
    Vec init(25, 0.0);
    for (int i = 0; i < 5; ++i) init[i * 5 + (i + 1) % 5] = mu[i];  // shifted diagonal
    alt.inner_init = init;
    auto moved = jko_step(PositiveMeasure(cfg.C.rows, mu), alt);
    CHECK(linf_dist(base.values(), moved.values()) <= 1e-6);
}

TEST_CASE("jko objectives are q-dominance ordered for ordered sources") {
    // JKO objectives of two ordered sources on a 3-point space: the argmin
    // sets on a grid satisfy the mass-shift set order.
    auto space = make_space(3);
    auto C = ground_cost(grid_space(3), grid_space(3), "sqeuclidean");
    UotProblem prob{kl_entropy(), kl_entropy()};
    JkoConfig cfg;
    cfg.kind = ProblemKind::unbalanced;
    cfg.C = C;
    cfg.uot = prob;
    cfg.f = kl_entropy();
    cfg.m = PositiveMeasure(C.cols, Vec(3, 1.0 / 3));
    cfg.V = LatticeVector(C.cols, Vec(3, 0.0));

    PositiveMeasure mu1(C.rows, Vec{0.25, 0.3, 0.2});
    PositiveMeasure mu2(C.rows, Vec{0.45, 0.5, 0.45});
    UotConfig ucfg;
    ucfg.tol = 1e-7;
    auto make_objective = [&](PositiveMeasure mu) {
        Functional F;
        F.dim = 3;
        F.name = "jko-objective";
        F.eval = [&, mu](std::span<const double> nu) {
            Vec v(nu.begin(), nu.end());
            for (double x : v)
                if (x < 0) return kInf;
            PositiveMeasure pnu(C.cols, v);
            if (pnu.mass() <= 1e-9) return kInf;
            auto sol = solve_unbalanced(mu, pnu, C, prob, ucfg);
            return sol.primal + energy_eval(pnu, cfg);
        };
        return F;
    };
    auto F1 = make_objective(mu1), F2 = make_objective(mu2);
    GridSpec g = GridSpec::cube(3, 0.05, 0.75, 8);
    ArgminDominanceConfig acfg;
    acfg.member_tol = 1e-6;
    acfg.t_levels = 9;
    auto rep = check_argmin_dominance(DominanceMode::Q, F1, F2, g, 1e-6, acfg);
    CHECK(rep.passed);
}

TEST_CASE("ordering composes along unbalanced flows; mass is constant along exact flows") {
    auto space = grid_space(3);
    JkoConfig cfg;
    cfg.kind = ProblemKind::unbalanced;
    cfg.C = ground_cost(space, space, "sqeuclidean");
    cfg.uot = UotProblem{kl_entropy(), kl_entropy()};
    cfg.f = kl_entropy();
    cfg.m = PositiveMeasure(space, Vec(3, 1.0 / 3));
    cfg.V = LatticeVector(space, Vec(3, 0.0));
    cfg.tol = 1e-7;
    cfg.steps = 3;
    auto t1 = jko_flow(PositiveMeasure(space, Vec{0.2, 0.35, 0.3}), cfg);
    auto t2 = jko_flow(PositiveMeasure(space, Vec{0.4, 0.5, 0.45}), cfg);
    for (std::size_t k = 0; k < t1.measures.size(); ++k)
        CHECK(leq(t1.measures[k].base(), t2.measures[k].base(), 1e-5));

    JkoConfig ex = cfg;
    ex.kind = ProblemKind::exact;
    ex.uot.reset();
    ex.tol = 1e-9;
    auto t3 = jko_flow(PositiveMeasure(space, Vec{0.4, 0.3, 0.3}), ex);
    for (const auto& nu : t3.measures) CHECK_THAT(nu.mass(), WithinAbs(1.0, 1e-8));
    for (double obj : t3.objectives) CHECK(std::isfinite(obj));
}

TEST_CASE("the time step is absorbed into the cost scale") {
    auto space = grid_space(3);
    JkoConfig a;
    a.kind = ProblemKind::exact;
    a.C = ground_cost(space, space, "sqeuclidean");
    a.cost_scale = 2.0;
    a.f = kl_entropy();
    a.m = PositiveMeasure(space, Vec(3, 1.0 / 3));
    a.V = LatticeVector(space, Vec(3, 0.0));
    JkoConfig b = a;
    b.cost_scale = 1.0;
    for (double& c : b.C.values) c *= 2.0;
    PositiveMeasure mu(space, Vec{0.5, 0.2, 0.3});
    auto na = jko_step(mu, a), nb = jko_step(mu, b);
    CHECK(linf_dist(na.values(), nb.values()) <= 1e-9);
}

TEST_CASE("jko exact step with a zero-mass source atom") {
    auto space = grid_space(3);
    JkoConfig cfg;
    cfg.kind = ProblemKind::exact;
    cfg.C = ground_cost(space, space, "sqeuclidean");
    cfg.f = kl_entropy();
    cfg.m = PositiveMeasure(space, Vec{0.4, 0.3, 0.3});
    cfg.V = LatticeVector(space, Vec{0.1, 0.0, -0.1});
    Vec mu{0.6, 0.0, 0.4};
    auto step = jko_step_full(PositiveMeasure(space, mu), cfg);
    CHECK_THAT(step.nu.mass(), WithinAbs(1.0, 1e-9));

    // simplex refinement oracle with vertex-enumeration transport values
    auto objective = [&](const Vec& z) {
        double nu3 = 1.0 - z[0] - z[1];
        if (z[0] <= 0 || z[1] <= 0 || nu3 <= 0) return kInf;
        Vec nu{z[0], z[1], nu3};
        auto oracle = lot::test::enumerate_transport_vertices(mu, nu, cfg.C);
        double e = 0;
        for (int j = 0; j < 3; ++j)
            e += cfg.f.value(nu[j] / cfg.m[j]) * cfg.m[j] + cfg.V[j] * nu[j];
        return oracle.min_cost + e;
    };
    auto oracle = lot::test::grid_minimize(objective, Vec(2, 0.01), Vec(2, 0.98), 41, 6);
    CHECK_THAT(step.objective, WithinAbs(oracle.value, 1e-4));
}
