#pragma once

#include "lot/transforms.hpp"

namespace lot {

// Log-domain Sinkhorn. Alternates the exact marginal updates on (phi, psi)
// until the l1 marginal residual of the implied plan meets cfg.tol.
// Requires strictly positive mu and nu: a zero atom drives its potential to
// -inf, which has no finite representation on the atom set.
inline OtSolution solve_entropic(const PositiveMeasure& mu, const PositiveMeasure& nu,
                                 const CostMatrix& C, double eps, const PositiveMeasure& alpha,
                                 const PositiveMeasure& beta, EntropicConfig cfg = {}) {
    C.validate();
    const std::size_t n = C.n(), m = C.m();
    if (mu.size() != n || nu.size() != m) throw DimensionError("solve_entropic: size mismatch");
    if (alpha.size() != n || beta.size() != m)
        throw DimensionError("solve_entropic: reference measure size mismatch");
    if (!(eps > 0)) throw PreconditionError("solve_entropic: eps must be > 0");
    check_balanced(mu.mass(), nu.mass(), cfg.mass_rtol);
    for (std::size_t i = 0; i < n; ++i) {
        if (mu[i] <= 0)
            throw PreconditionError("solve_entropic: mu must be strictly positive atomwise");
        if (alpha[i] <= 0)
            throw PreconditionError("solve_entropic: zero reference mass where mu has mass");
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (nu[j] <= 0)
            throw PreconditionError("solve_entropic: nu must be strictly positive atomwise");
        if (beta[j] <= 0)
            throw PreconditionError("solve_entropic: zero reference mass where nu has mass");
    }

    Vec nu_bal = nu.values();
    const double scale = mu.mass() / nu.mass();
    for (double& x : nu_bal) x *= scale;

    Vec la(n), lb(m), lmu(n), lnu(m);
    for (std::size_t i = 0; i < n; ++i) {
        la[i] = std::log(alpha[i]);
        lmu[i] = std::log(mu[i]);
    }
    for (std::size_t j = 0; j < m; ++j) {
        lb[j] = std::log(beta[j]);
        lnu[j] = std::log(nu_bal[j]);
    }

    Vec phi(n, 0.0), psi(m, 0.0), terms(std::max(n, m));
    auto plan_at = [&](std::size_t i, std::size_t j) {
        return std::exp((phi[i] - psi[j] - C.at(i, j)) / eps + la[i] + lb[j]);
    };

    long it = 0;
    double residual = kInf;
    for (; it < cfg.max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) terms[j] = (-psi[j] - C.at(i, j)) / eps + lb[j];
            phi[i] = eps * (lmu[i] - la[i] - logsumexp(std::span(terms).first(m)));
        }
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < n; ++i) terms[i] = (phi[i] - C.at(i, j)) / eps + la[i];
            psi[j] = eps * (logsumexp(std::span(terms).first(n)) + lb[j] - lnu[j]);
        }
        // columns now match nu exactly; the row drift is the residual
        residual = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0;
            for (std::size_t j = 0; j < m; ++j) row += plan_at(i, j);
            residual += std::abs(row - mu[i]);
        }
        if (residual <= cfg.tol) {
            ++it;
            break;
        }
    }
    if (residual > cfg.tol)
        throw SolverError("solve_entropic: no convergence in " + std::to_string(cfg.max_iters) +
                          " iterations (residual " + std::to_string(residual) + ")");

    OtSolution sol;
    sol.kind = ProblemKind::entropic;
    sol.iterations = it;
    sol.plan = TransportPlan(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) sol.plan.at(i, j) = plan_at(i, j);

    // zero-mean normalization of phi; the pair shifts together
    double shift = sum(phi) / double(n);
    for (double& x : phi) x -= shift;
    for (double& x : psi) x -= shift;
    sol.phi = LatticeVector(C.rows, phi);
    sol.psi = LatticeVector(C.cols, psi);

    double mass_plan = sol.plan.mass();
    sol.dual = dot(phi, mu.values()) - dot(psi, nu_bal) - eps * mass_plan;
    double kl = 0;  // KL(plan | alpha x beta) with integrand s log s - s
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            kl += sol.plan.at(i, j) * ((phi[i] + shift - (psi[j] + shift) - C.at(i, j)) / eps) -
                  sol.plan.at(i, j);
    sol.primal = sol.plan.cost_against(C) + eps * kl;
    sol.gap = sol.primal - sol.dual;
    return sol;
}

// Semidual objective in minimization form: J_eps(mu, phi) = <L(phi), nu> -
// <phi, mu>; entropic potentials minimize it (the eps KL(nu | beta) offset is
// constant in phi).
inline double entropic_dual_objective(const LatticeVector& phi, const PositiveMeasure& mu,
                                      const PositiveMeasure& nu, const CostMatrix& C, double eps,
                                      const PositiveMeasure& alpha) {
    return dot(soft_c_transform(phi, C, eps, alpha).values(), nu.values()) -
           dot(phi.values(), mu.values());
}

}  // namespace lot
