#pragma once

#include <deque>

#include "lot/transforms.hpp"

namespace lot {

namespace detail {

struct BasisArc {
    int i = 0, j = 0;  // row index, column index
    double flow = 0;
};

// Potentials u (rows), v (cols) from the basis tree: u_i + v_j = c_ij on
// basic arcs, u_0 = 0.
inline void tree_potentials(int n, int m, const std::vector<BasisArc>& basis, const CostMatrix& C,
                            Vec& u, Vec& v) {
    u.assign(n, 0.0);
    v.assign(m, 0.0);
    std::vector<std::vector<std::pair<int, int>>> adj(n + m);  // node -> (other, arc)
    for (int a = 0; a < int(basis.size()); ++a) {
        adj[basis[a].i].push_back({n + basis[a].j, a});
        adj[n + basis[a].j].push_back({basis[a].i, a});
    }
    std::vector<char> seen(n + m, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    while (!queue.empty()) {
        int node = queue.front();
        queue.pop_front();
        for (auto [other, a] : adj[node]) {
            if (seen[other]) continue;
            seen[other] = 1;
            double c = C.at(std::size_t(basis[a].i), std::size_t(basis[a].j));
            if (other >= n)
                v[other - n] = c - u[node];
            else
                u[other] = c - v[node - n];
            queue.push_back(other);
        }
    }
    for (char s : seen)
        if (!s) throw SolverError("exact OT: basis tree is not spanning");
}

// Recomputes basic flows exactly by leaf elimination; the basis is a spanning
// tree so the system is triangular in some order.
inline void tree_flows(int n, int m, std::vector<BasisArc>& basis, Vec supply, Vec demand) {
    std::vector<std::vector<std::pair<int, int>>> adj(n + m);
    std::vector<int> degree(n + m, 0);
    for (int a = 0; a < int(basis.size()); ++a) {
        adj[basis[a].i].push_back({n + basis[a].j, a});
        adj[n + basis[a].j].push_back({basis[a].i, a});
        ++degree[basis[a].i];
        ++degree[n + basis[a].j];
    }
    std::vector<char> done_arc(basis.size(), 0), done_node(n + m, 0);
    std::deque<int> leaves;
    for (int node = 0; node < n + m; ++node)
        if (degree[node] == 1) leaves.push_back(node);
    int processed = 0;
    while (!leaves.empty()) {
        int node = leaves.front();
        leaves.pop_front();
        if (done_node[node]) continue;
        done_node[node] = 1;
        for (auto [other, a] : adj[node]) {
            if (done_arc[a]) continue;
            done_arc[a] = 1;
            ++processed;
            double& bal = node < n ? supply[node] : demand[node - n];
            basis[a].flow = bal;
            bal = 0;
            double& obal = other < n ? supply[other] : demand[other - n];
            obal -= basis[a].flow;
            if (--degree[other] == 1 && !done_node[other]) leaves.push_back(other);
            break;
        }
    }
    if (processed != int(basis.size())) throw SolverError("exact OT: flow recomputation failed");
    for (auto& a : basis) {
        if (a.flow < -1e-7) throw SolverError("exact OT: negative basic flow");
        a.flow = std::max(a.flow, 0.0);
    }
}

}  // namespace detail

// Transportation simplex on the bipartite graph. Entering arc: most negative
// reduced cost, ties by lowest flat index; after a run of degenerate pivots
// the entering rule falls back to Bland's to break cycling.
inline OtSolution solve_exact(const PositiveMeasure& mu, const PositiveMeasure& nu,
                              const CostMatrix& C, ExactOtConfig cfg = {}) {
    C.validate();
    const int n = int(C.n()), m = int(C.m());
    if (mu.size() != C.n() || nu.size() != C.m()) throw DimensionError("solve_exact: size mismatch");
    const double mass_mu = mu.mass(), mass_nu = nu.mass();
    if (mass_mu <= 0 || mass_nu <= 0) throw PreconditionError("solve_exact: null measure");
    check_balanced(mass_mu, mass_nu, cfg.mass_rtol);

    Vec supply = mu.values();
    Vec demand = nu.values();
    for (double& d : demand) d *= mass_mu / mass_nu;  // balance exactly

    // Northwest-corner initial basis: n+m-1 arcs, degenerate zeros included.
    std::vector<detail::BasisArc> basis;
    basis.reserve(std::size_t(n + m - 1));
    {
        Vec a = supply, b = demand;
        int i = 0, j = 0;
        for (int k = 0; k < n + m - 1; ++k) {
            double f = std::min(a[i], b[j]);
            basis.push_back({i, j, f});
            a[i] -= f;
            b[j] -= f;
            if (i == n - 1)
                ++j;
            else if (j == m - 1)
                ++i;
            else if (a[i] <= b[j])
                ++i;
            else
                ++j;
        }
    }

    std::vector<char> in_basis(std::size_t(n) * std::size_t(m), 0);
    for (const auto& a : basis) in_basis[std::size_t(a.i) * m + a.j] = 1;

    double cost_scale = 1.0;
    for (double c : C.values) cost_scale = std::max(cost_scale, std::abs(c));
    const double opt_tol = cfg.tol * cost_scale;
    const long max_pivots = cfg.max_pivots > 0 ? cfg.max_pivots : 1000 + 50L * n * m;

    Vec u, v;
    long pivots = 0;
    int degenerate_run = 0;
    const int bland_after = 3 * (n + m);

    while (true) {
        detail::tree_potentials(n, m, basis, C, u, v);

        int enter_i = -1, enter_j = -1;
        double best = -opt_tol;
        const bool bland = degenerate_run > bland_after;
        for (int i = 0; i < n && enter_i < 0; ++i)
            for (int j = 0; j < m; ++j) {
                if (in_basis[std::size_t(i) * m + j]) continue;
                double r = C.at(i, j) - u[i] - v[j];
                if (bland) {
                    if (r < -opt_tol) {
                        enter_i = i;
                        enter_j = j;
                        break;
                    }
                } else if (r < best) {
                    best = r;
                    enter_i = i;
                    enter_j = j;
                }
            }
        if (enter_i < 0) break;  // optimal

        if (++pivots > max_pivots) throw SolverError("solve_exact: pivot limit exceeded");

        // Path from the entering column node back to the entering row node.
        std::vector<std::vector<std::pair<int, int>>> adj(n + m);
        for (int a = 0; a < int(basis.size()); ++a) {
            adj[basis[a].i].push_back({n + basis[a].j, a});
            adj[n + basis[a].j].push_back({basis[a].i, a});
        }
        std::vector<int> parent(n + m, -1), parent_arc(n + m, -1);
        std::deque<int> queue{n + enter_j};
        parent[n + enter_j] = n + enter_j;
        while (!queue.empty()) {
            int node = queue.front();
            queue.pop_front();
            if (node == enter_i) break;
            for (auto [other, a] : adj[node])
                if (parent[other] < 0) {
                    parent[other] = node;
                    parent_arc[other] = a;
                    queue.push_back(other);
                }
        }
        if (parent[enter_i] < 0) throw SolverError("solve_exact: basis lost connectivity");

        // Arcs along the path alternate -, +, -, ... starting at enter_i.
        std::vector<int> minus_arcs, plus_arcs;
        int node = enter_i;
        bool minus = true;
        while (node != n + enter_j) {
            int a = parent_arc[node];
            (minus ? minus_arcs : plus_arcs).push_back(a);
            node = parent[node];
            minus = !minus;
        }
        double theta = kInf;
        int leave = -1;
        for (int a : minus_arcs)
            if (basis[a].flow < theta - 1e-15 ||
                (std::abs(basis[a].flow - theta) <= 1e-15 && (leave < 0 || basis[a].i * m + basis[a].j <
                                                                               basis[leave].i * m + basis[leave].j))) {
                theta = basis[a].flow;
                leave = a;
            }
        if (leave < 0) throw SolverError("solve_exact: no leaving arc");
        degenerate_run = theta <= 1e-15 ? degenerate_run + 1 : 0;

        for (int a : minus_arcs) basis[a].flow -= theta;
        for (int a : plus_arcs) basis[a].flow += theta;
        in_basis[std::size_t(basis[leave].i) * m + basis[leave].j] = 0;
        in_basis[std::size_t(enter_i) * m + enter_j] = 1;
        basis[leave] = {enter_i, enter_j, theta};
    }

    detail::tree_flows(n, m, basis, supply, demand);
    detail::tree_potentials(n, m, basis, C, u, v);

    OtSolution sol;
    sol.kind = ProblemKind::exact;
    sol.iterations = pivots;
    sol.plan = TransportPlan(C.n(), C.m());
    for (const auto& a : basis) sol.plan.at(std::size_t(a.i), std::size_t(a.j)) = a.flow;

    // phi = u shifted to zero mean; psi is the c-transform of phi.
    double shift = sum(u) / double(n);
    Vec phi(u);
    for (double& x : phi) x -= shift;
    sol.phi = LatticeVector(C.rows, std::move(phi));
    sol.psi = c_transform(sol.phi, C);
    sol.primal = sol.plan.cost_against(C);
    sol.dual = dot(sol.phi.values(), supply) - dot(sol.psi.values(), demand);
    sol.gap = sol.primal - sol.dual;
    return sol;
}

// Dual objective of the exact problem in minimization form:
// J_0(mu, phi) = <phi^c, nu> - <phi, mu>. Kantorovich potentials are its
// minimizers, and -min equals the transport cost.
inline double exact_dual_objective(const LatticeVector& phi, const PositiveMeasure& mu,
                                   const PositiveMeasure& nu, const CostMatrix& C) {
    return dot(c_transform(phi, C).values(), nu.values()) - dot(phi.values(), mu.values());
}

}  // namespace lot
