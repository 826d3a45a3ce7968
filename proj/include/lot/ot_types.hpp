#pragma once

#include "lot/cost.hpp"
#include "lot/entropy.hpp"

namespace lot {

enum class ProblemKind { exact, entropic, unbalanced };

inline const char* to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::exact: return "exact";
        case ProblemKind::entropic: return "entropic";
        default: return "unbalanced";
    }
}

struct TransportPlan {
    std::size_t n = 0, m = 0;
    Vec values;  // row-major, nonnegative

    TransportPlan() = default;
    TransportPlan(std::size_t n_, std::size_t m_) : n(n_), m(m_), values(n_ * m_, 0.0) {}

    double at(std::size_t i, std::size_t j) const { return values[i * m + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * m + j]; }

    Vec row_sums() const {
        Vec r(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) r[i] += at(i, j);
        return r;
    }
    Vec col_sums() const {
        Vec c(m, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) c[j] += at(i, j);
        return c;
    }
    double mass() const { return sum(values); }
    double cost_against(const CostMatrix& C) const { return dot(values, C.values); }
};

struct OtSolution {
    TransportPlan plan;
    LatticeVector phi;  // potential on the row space
    LatticeVector psi;  // potential on the column space
    double primal = 0;
    double dual = 0;
    double gap = 0;  // primal - dual
    long iterations = 0;
    ProblemKind kind = ProblemKind::exact;
    bool h1_conj_flat = false;  // unbalanced only: h1* flat near the returned psi
};

// Two finite-valued entropies penalizing the marginals of an unbalanced plan.
struct UotProblem {
    EntropyFunction h0, h1;
};

struct ExactOtConfig {
    double tol = 1e-9;        // optimality tolerance on reduced costs
    double mass_rtol = 1e-9;  // relative tolerance for "balanced" inputs
    long max_pivots = 0;      // 0 = automatic
};

struct EntropicConfig {
    double tol = 1e-10;       // l1 marginal residual target
    double mass_rtol = 1e-9;
    long max_iters = 200000;
};

struct UotConfig {
    double tol = 1e-9;        // first-order stationarity residual target
    long max_iters = 200000;
};

inline void check_balanced(double mass_mu, double mass_nu, double rtol) {
    double scale = std::max({std::abs(mass_mu), std::abs(mass_nu), 1.0});
    if (std::abs(mass_mu - mass_nu) > rtol * scale)
        throw PreconditionError("unbalanced input: transport cost is +inf for unequal masses");
}

}  // namespace lot
