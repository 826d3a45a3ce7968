#pragma once

#include "lot/fista.hpp"
#include "lot/transforms.hpp"

namespace lot {

namespace detail {

struct UotObjective {
    const PositiveMeasure* mu;
    const PositiveMeasure* nu;
    const CostMatrix* C;
    const UotProblem* prob;
    std::size_t n, m;

    // Rows off supp(mu) and columns off supp(nu) are forced to zero: the
    // internal energies are +inf there otherwise.
    void project(Vec& pi) const {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double& x = pi[i * m + j];
                x = ((*mu)[i] == 0 || (*nu)[j] == 0) ? 0.0 : std::max(x, 0.0);
            }
    }
    void marginals(const Vec& pi, Vec& row, Vec& col) const {
        row.assign(n, 0.0);
        col.assign(m, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                row[i] += pi[i * m + j];
                col[j] += pi[i * m + j];
            }
    }
    double value(const Vec& pi) const {
        Vec row, col;
        marginals(pi, row, col);
        double acc = dot(pi, C->values);
        for (std::size_t i = 0; i < n; ++i)
            if ((*mu)[i] > 0) acc += prob->h0.value(row[i] / (*mu)[i]) * (*mu)[i];
        for (std::size_t j = 0; j < m; ++j)
            if ((*nu)[j] > 0) acc += prob->h1.value(col[j] / (*nu)[j]) * (*nu)[j];
        return acc;
    }
    void gradient(const Vec& pi, Vec& g) const {
        Vec row, col;
        marginals(pi, row, col);
        Vec d0(n, 0.0), d1(m, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            if ((*mu)[i] > 0) d0[i] = prob->h0.derivative(row[i] / (*mu)[i]);
        for (std::size_t j = 0; j < m; ++j)
            if ((*nu)[j] > 0) d1[j] = prob->h1.derivative(col[j] / (*nu)[j]);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) g[i * m + j] = d0[i] + d1[j] + C->at(i, j);
    }
    double kkt(const Vec& pi, const Vec& g) const {
        double r = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                if ((*mu)[i] == 0 || (*nu)[j] == 0) continue;
                double x = pi[i * m + j];
                r = std::max(r, x > 1e-12 ? std::abs(g[i * m + j]) : std::max(-g[i * m + j], 0.0));
            }
        return r;
    }
};

}  // namespace detail

// Unbalanced transport: minimizes H_{h0,mu}(pi_0) + H_{h1,nu}(pi_1) + <c, pi>
// over nonnegative plans by accelerated projected gradient. Potentials are
// read off the marginal optimality conditions and canonicalized against the
// c-transform.
inline OtSolution solve_unbalanced(const PositiveMeasure& mu, const PositiveMeasure& nu,
                                   const CostMatrix& C, const UotProblem& prob, UotConfig cfg = {}) {
    C.validate();
    const std::size_t n = C.n(), m = C.m();
    if (mu.size() != n || nu.size() != m) throw DimensionError("solve_unbalanced: size mismatch");
    if (mu.mass() <= 0 || nu.mass() <= 0) throw PreconditionError("solve_unbalanced: null measure");

    detail::UotObjective obj{&mu, &nu, &C, &prob, n, m};
    FistaProblem p;
    p.value = [&obj](const Vec& x) { return obj.value(x); };
    p.gradient = [&obj](const Vec& x, Vec& g) { obj.gradient(x, g); };
    p.project = [&obj](Vec& x) { obj.project(x); };
    p.kkt = [&obj](const Vec& x, const Vec& g) { return obj.kkt(x, g); };

    Vec x0(n * m);
    const double total = mu.mass() + nu.mass();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) x0[i * m + j] = 2 * mu[i] * nu[j] / total;

    auto res = fista_minimize(p, std::move(x0), cfg.tol, cfg.max_iters);
    if (!res.converged)
        throw SolverError("solve_unbalanced: stationarity residual " + std::to_string(res.kkt) +
                          " above tolerance after " + std::to_string(res.iterations) + " iterations");

    OtSolution sol;
    sol.kind = ProblemKind::unbalanced;
    sol.iterations = res.iterations;
    sol.plan = TransportPlan(n, m);
    sol.plan.values = res.x;
    Vec row = sol.plan.row_sums(), col = sol.plan.col_sums();

    // psi0 on supp(nu) from the column optimality; phi from the row
    // optimality capped by dual feasibility; psi = phi^c.
    Vec psi0(m, 0.0);
    for (std::size_t j = 0; j < m; ++j)
        if (nu[j] > 0) psi0[j] = prob.h1.derivative(col[j] / nu[j]);
    Vec phi(n);
    for (std::size_t i = 0; i < n; ++i) {
        double cap = kInf;
        for (std::size_t j = 0; j < m; ++j)
            if (nu[j] > 0) cap = std::min(cap, psi0[j] + C.at(i, j));
        double from_row = mu[i] > 0 ? -prob.h0.derivative(row[i] / mu[i]) : kInf;
        phi[i] = std::min(from_row, cap);
        if (!std::isfinite(phi[i])) throw SolverError("solve_unbalanced: potential recovery failed");
    }
    sol.phi = LatticeVector(C.rows, phi);
    sol.psi = c_transform(sol.phi, C);

    for (std::size_t j = 0; j < m; ++j)
        if (nu[j] > 0 && std::abs(prob.h1.conj_slope(sol.psi[j])) < 1e-8) sol.h1_conj_flat = true;

    sol.primal = res.value;
    sol.dual = 0;
    for (std::size_t i = 0; i < n; ++i) sol.dual -= prob.h0.conjugate(-sol.phi[i]) * mu[i];
    for (std::size_t j = 0; j < m; ++j) sol.dual -= prob.h1.conjugate(sol.psi[j]) * nu[j];
    sol.gap = sol.primal - sol.dual;
    return sol;
}

// Dual objective in minimization form: J_h(mu, phi) = <h1*(phi^c), nu> +
// <h0*(-phi), mu>; unbalanced potentials minimize it and -min equals the
// transport cost.
inline double unbalanced_dual_objective(const LatticeVector& phi, const PositiveMeasure& mu,
                                        const PositiveMeasure& nu, const CostMatrix& C,
                                        const UotProblem& prob) {
    LatticeVector psi = c_transform(phi, C);
    double acc = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) acc += prob.h0.conjugate(-phi[i]) * mu[i];
    for (std::size_t j = 0; j < nu.size(); ++j) acc += prob.h1.conjugate(psi[j]) * nu[j];
    return acc;
}

}  // namespace lot
