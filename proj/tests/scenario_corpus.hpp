#pragma once

// Scripted scenario families for the comparison-principle checks. Every
// scenario is deterministic in its seed and built so the hypotheses hold by
// construction.

#include "helpers.hpp"
#include "lot/comparison.hpp"

namespace lot::test {

// 1D grid instance: nu and mu1 are strictly positive probability vectors,
// mu2 adds mass to mu1 on U and rebalances by scaling the complement down, so
// H1 holds and masses stay equal. H2 is then arranged by the harness through
// the minimal constant shift.
inline PotentialScenario make_grid_scenario(ProblemKind kind, unsigned seed) {
    Rng rng(seed * 2654435761u + 17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = 5 + seed % 6;

    std::vector<std::vector<double>> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = {double(i) / double(n - 1)};
    auto space = make_space(n, coords);

    PotentialScenario s;
    s.kind = kind;
    switch (seed % 3) {
        case 0: s.C = ground_cost(space, space, "sqeuclidean"); break;
        case 1: s.C = ground_cost(space, space, "euclidean"); break;
        default: s.C = ground_cost(space, space, "lp", 3.0); break;
    }
    s.nu = PositiveMeasure(space, random_mass(rng, n, 1.0));
    Vec m1 = random_mass(rng, n, 1.0);

    // U: random proper nonempty subset
    std::vector<std::size_t> U;
    while (U.empty() || U.size() == n) {
        U.clear();
        for (std::size_t i = 0; i < n; ++i)
            if (unit(rng) < 0.5) U.push_back(i);
    }
    std::vector<char> in_U(n, 0);
    for (std::size_t i : U) in_U[i] = 1;

    // Mass moves only on a subset of U and is rebalanced on a subset of the
    // complement; untouched atoms fall outside supp(mu2 - mu1), which is what
    // gives the meet/join conclusions content beyond the pointwise order.
    std::vector<std::size_t> bump_set, drain_set;
    for (std::size_t i : U)
        if (bump_set.empty() || unit(rng) < 0.6) bump_set.push_back(i);
    for (std::size_t i = 0; i < n; ++i)
        if (!in_U[i] && (drain_set.empty() || unit(rng) < 0.6)) drain_set.push_back(i);

    double outside = 0;
    for (std::size_t i : drain_set) outside += m1[i];
    double bump_total = std::min(0.05 + 0.25 * unit(rng), 0.5 * outside);
    Vec bump(n, 0.0);
    double raw = 0;
    for (std::size_t i : bump_set) {
        bump[i] = 0.1 + unit(rng);
        raw += bump[i];
    }
    Vec m2 = m1;
    for (std::size_t i : bump_set) m2[i] += bump[i] / raw * bump_total;
    for (std::size_t i : drain_set) m2[i] *= 1.0 - bump_total / outside;

    s.mu1 = PositiveMeasure(space, m1);
    s.mu2 = PositiveMeasure(space, m2);
    s.U = U;
    s.name = std::string("grid-") + to_string(kind) + "-" + std::to_string(seed);

    if (kind == ProblemKind::entropic) {
        s.epsilon = seed % 2 == 0 ? 0.5 : 0.2;
        s.alpha = PositiveMeasure(space, Vec(n, 1.0 / double(n)));
        s.beta = PositiveMeasure(space, Vec(n, 1.0 / double(n)));
        s.entropic_cfg.tol = 1e-11;
    }
    return s;
}

// Unbalanced instance: mu2 = mu1 + eta with eta supported on a random subset,
// U is the whole source space (H2 is vacuous), entropies alternate between
// KL and quadratic types.
inline PotentialScenario make_unbalanced_scenario(unsigned seed) {
    Rng rng(seed * 912839u + 5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = 2 + seed % 3, m = 2 + (seed / 3) % 3;

    PotentialScenario s;
    s.kind = ProblemKind::unbalanced;
    Vec costs(n * m);
    for (auto& c : costs) c = 1.5 * unit(rng);
    s.C = cost_from_values(make_space(n), make_space(m), std::move(costs));
    s.nu = PositiveMeasure(s.C.cols, random_positive(rng, m, 0.2, 1.2));
    Vec m1 = random_positive(rng, n, 0.2, 1.2);
    Vec eta(n, 0.0);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i)
        if (unit(rng) < 0.6) {
            eta[i] = 0.1 + 0.4 * unit(rng);
            any = true;
        }
    if (!any) eta[seed % n] = 0.25;
    Vec m2 = m1;
    for (std::size_t i = 0; i < n; ++i) m2[i] += eta[i];

    s.mu1 = PositiveMeasure(s.C.rows, m1);
    s.mu2 = PositiveMeasure(s.C.rows, m2);
    s.U.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.U[i] = i;
    switch (seed % 3) {
        case 0: s.uot = UotProblem{kl_entropy(1.0), kl_entropy(0.8)}; break;
        case 1: s.uot = UotProblem{kl_entropy(0.6), quadratic_entropy(1.2)}; break;
        default: s.uot = UotProblem{quadratic_entropy(1.0), kl_entropy(1.1)}; break;
    }
    s.uot_cfg.tol = 1e-9;
    s.name = "uot-" + std::to_string(seed);
    return s;
}

}  // namespace lot::test
