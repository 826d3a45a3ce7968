#pragma once

#include "lot/checks.hpp"
#include "lot/ot_types.hpp"

namespace lot {

// phi^c(y) = max_x phi(x) - c(x, y).
inline LatticeVector c_transform(const LatticeVector& phi, const CostMatrix& C) {
    if (phi.size() != C.n()) throw DimensionError("c_transform: phi not on the row space");
    Vec out(C.m(), -kInf);
    for (std::size_t j = 0; j < C.m(); ++j)
        for (std::size_t i = 0; i < C.n(); ++i) out[j] = std::max(out[j], phi[i] - C.at(i, j));
    return LatticeVector(C.cols, std::move(out));
}

// Reverse transform psi^cbar(x) = min_y psi(y) + c(x, y); used to
// canonicalize potentials.
inline LatticeVector c_transform_reverse(const LatticeVector& psi, const CostMatrix& C) {
    if (psi.size() != C.m()) throw DimensionError("c_transform_reverse: psi not on the column space");
    Vec out(C.n(), kInf);
    for (std::size_t i = 0; i < C.n(); ++i)
        for (std::size_t j = 0; j < C.m(); ++j) out[i] = std::min(out[i], psi[j] + C.at(i, j));
    return LatticeVector(C.rows, std::move(out));
}

// Soft c-transform: eps log int exp((phi(x) - c(x,y))/eps) dalpha(x), computed
// in log-sum-exp form.
inline LatticeVector soft_c_transform(const LatticeVector& phi, const CostMatrix& C, double eps,
                                      const PositiveMeasure& alpha) {
    if (phi.size() != C.n()) throw DimensionError("soft_c_transform: phi not on the row space");
    if (alpha.size() != C.n()) throw DimensionError("soft_c_transform: alpha not on the row space");
    if (!(eps > 0)) throw PreconditionError("soft_c_transform: eps must be > 0");
    if (alpha.mass() <= 0) throw PreconditionError("soft_c_transform: alpha is null");
    Vec out(C.m());
    Vec terms(C.n());
    for (std::size_t j = 0; j < C.m(); ++j) {
        for (std::size_t i = 0; i < C.n(); ++i)
            terms[i] = alpha[i] > 0 ? (phi[i] - C.at(i, j)) / eps + std::log(alpha[i]) : -kInf;
        out[j] = eps * logsumexp(terms);
    }
    return LatticeVector(C.cols, std::move(out));
}

using PotentialOperator = std::function<LatticeVector(const LatticeVector&)>;

// Verifies the sup-norm 1-Lipschitz bound on sampled pairs and spot-checks the
// two hypotheses behind it: order preservation and constant equivariance.
inline CheckReport check_nonexpansive(const PotentialOperator& T, std::size_t dim,
                                      const VecSampler& sampler, long n_trials, double tol,
                                      Rng rng = Rng(0)) {
    CheckReport rep;
    SpacePtr space = make_space(dim);
    std::uniform_real_distribution<double> shift(-5.0, 5.0);
    for (long k = 0; k < n_trials; ++k) {
        Vec a = sampler(rng), b = sampler(rng);
        LatticeVector u(space, a), v(space, b);
        LatticeVector Tu = T(u), Tv = T(v);
        double lip = linf_dist(Tu.values(), Tv.values()) - linf_dist(a, b);

        // hypothesis (a): order preservation on an ordered pair
        auto [mt, jn] = meet_join(u, v);
        LatticeVector Tmt = T(mt), Tjn = T(jn);
        double order_viol = 0;
        for (std::size_t i = 0; i < Tmt.size(); ++i)
            order_viol = std::max(order_viol, Tmt[i] - Tjn[i]);

        // hypothesis (b): constant equivariance
        double K = shift(rng);
        Vec shifted = a;
        for (double& x : shifted) x += K;
        LatticeVector TuK = T(LatticeVector(space, shifted));
        double equiv_viol = 0;
        for (std::size_t i = 0; i < Tu.size(); ++i)
            equiv_viol = std::max(equiv_viol, std::abs(TuK[i] - Tu[i] - K));

        rep.record(std::max({lip, order_viol, equiv_viol}), {a, b, {K}});
    }
    rep.finish(tol);
    return rep;
}

}  // namespace lot
