#pragma once

#include <atomic>
#include <memory>

#include "lot/functionals.hpp"

namespace lot {

struct CheckReport {
    bool passed = false;
    long n_trials = 0;
    long n_skipped = 0;             // trials with infinite right-hand side
    double worst_violation = 0.0;   // max over trials of LHS - RHS (or residual)
    std::optional<std::vector<Vec>> witness;
    double tolerance = 0.0;
    bool exhaustive = true;         // false when an inner search used descent only
    std::string note;

    void record(double violation, std::vector<Vec> inputs) {
        if (n_trials == 0 || violation > worst_violation) {
            worst_violation = violation;
            witness = std::move(inputs);
        }
        ++n_trials;
    }
    void finish(double tol) {
        tolerance = tol;
        passed = n_trials == 0 ? true : worst_violation <= tol;
    }
};

// Uniform box grid with a per-dimension level count.
struct GridSpec {
    Vec lo, hi;
    std::vector<int> levels;

    static GridSpec cube(std::size_t dim, double a, double b, int n) {
        return GridSpec{Vec(dim, a), Vec(dim, b), std::vector<int>(dim, n)};
    }
    std::size_t dim() const { return lo.size(); }
    std::size_t size() const {
        std::size_t s = 1;
        for (int l : levels) s *= std::size_t(l);
        return s;
    }
    void validate() const {
        if (lo.size() != hi.size() || lo.size() != levels.size())
            throw ValidationError("GridSpec: inconsistent field lengths");
        for (std::size_t i = 0; i < lo.size(); ++i) {
            if (levels[i] < 1) throw ValidationError("GridSpec: levels must be >= 1");
            if (lo[i] > hi[i]) throw ValidationError("GridSpec: lo > hi");
        }
    }
    Vec point(std::size_t flat) const {
        Vec x(lo.size());
        for (std::size_t i = 0; i < lo.size(); ++i) {
            int k = int(flat % std::size_t(levels[i]));
            flat /= std::size_t(levels[i]);
            x[i] = levels[i] == 1 ? lo[i] : lo[i] + (hi[i] - lo[i]) * k / double(levels[i] - 1);
        }
        return x;
    }
    bool on_boundary(std::size_t flat) const {
        for (std::size_t i = 0; i < lo.size(); ++i) {
            int k = int(flat % std::size_t(levels[i]));
            flat /= std::size_t(levels[i]);
            if (levels[i] > 1 && (k == 0 || k == levels[i] - 1)) return true;
        }
        return false;
    }
};

using VecSampler = std::function<Vec(Rng&)>;

inline VecSampler box_sampler(Vec lo, Vec hi) {
    if (lo.size() != hi.size()) throw ValidationError("box_sampler: bound length mismatch");
    return [lo = std::move(lo), hi = std::move(hi)](Rng& rng) {
        Vec x(lo.size());
        for (std::size_t i = 0; i < lo.size(); ++i)
            x[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
        return x;
    };
}

inline VecSampler box_sampler(std::size_t dim, double lo, double hi) {
    return box_sampler(Vec(dim, lo), Vec(dim, hi));
}

// Draws a pair with deliberate corner cases mixed in: equal inputs,
// comparable inputs (meet/join of two draws), and sign flips.
inline std::pair<Vec, Vec> sample_pair(Rng& rng, const VecSampler& sampler) {
    Vec a = sampler(rng), b = sampler(rng);
    switch (std::uniform_int_distribution<int>(0, 9)(rng)) {
        case 0:
            return {a, a};
        case 1:
        case 2: {
            Vec lo(a.size()), hi(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                lo[i] = std::min(a[i], b[i]);
                hi[i] = std::max(a[i], b[i]);
            }
            return {lo, hi};
        }
        case 3: {
            Vec c = a;
            for (double& x : c) x = -x;
            return {a, c};
        }
        default:
            return {a, b};
    }
}

// Checks E1(u ^ v) + E2(u v v) <= E1(u) + E2(v) on sampled pairs. With
// E1 = E2 this is the submodularity check.
inline CheckReport check_p_dominance(const Functional& E1, const Functional& E2,
                                     const VecSampler& sampler, long n_pairs, double tol,
                                     Rng rng = Rng(0)) {
    if (E1.dim != E2.dim) throw DimensionError("check_p_dominance: dimension mismatch");
    CheckReport rep;
    for (long k = 0; k < n_pairs; ++k) {
        auto [u, v] = sample_pair(rng, sampler);
        double rhs1 = E1(u), rhs2 = E2(v);
        if (rhs1 == kInf || rhs2 == kInf) {
            ++rep.n_skipped;
            continue;
        }
        Vec mt(u.size()), jn(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            mt[i] = std::min(u[i], v[i]);
            jn[i] = std::max(u[i], v[i]);
        }
        double lhs = E1(mt);
        if (lhs != kInf) {
            double l2 = E2(jn);
            lhs = l2 == kInf ? kInf : lhs + l2;
        }
        rep.record(lhs - (rhs1 + rhs2), {u, v});
    }
    rep.finish(tol);
    return rep;
}

// Four-point finite-difference estimate of the off-diagonal second derivative;
// submodularity of a C^2 function is equivalent to all of them being <= 0.
inline CheckReport check_cross_derivatives(const Functional& E, const std::vector<Vec>& points,
                                           double step, double tol) {
    CheckReport rep;
    for (const Vec& x : points) {
        if (x.size() != E.dim) throw DimensionError("check_cross_derivatives: bad point dimension");
        double e0 = E(x);
        if (e0 == kInf) throw Error("check_cross_derivatives: +inf at stencil center");
        for (std::size_t i = 0; i < E.dim; ++i)
            for (std::size_t j = i + 1; j < E.dim; ++j) {
                Vec xi = x, xj = x, xij = x;
                xi[i] += step;
                xj[j] += step;
                xij[i] += step;
                xij[j] += step;
                double a = E(xij), b = E(xi), c = E(xj);
                if (a == kInf || b == kInf || c == kInf)
                    throw Error("check_cross_derivatives: +inf inside stencil");
                double est = (a + e0 - b - c) / (step * step);
                Vec where = x;
                where.push_back(double(i));
                where.push_back(double(j));
                rep.record(est, {where});
            }
    }
    rep.finish(tol);
    return rep;
}

// Grid-based Legendre conjugate E*(mu) = max over grid phi of <phi,mu> - E(phi).
// Keeps the grid values around so callers can query the maximizer and the
// fraction of maximizers landing on the grid boundary (an undersized-grid
// diagnostic).
struct ConjugateData {
    std::vector<Vec> points;
    Vec minus_e;                 // -E(phi) per stored point
    std::vector<bool> boundary;
    std::size_t dim = 0;
    mutable std::atomic<std::uint64_t> evals{0};
    mutable std::atomic<std::uint64_t> boundary_hits{0};

    std::size_t argmax_index(std::span<const double> mu) const {
        double best = -kInf;
        std::size_t bi = 0;
        for (std::size_t k = 0; k < points.size(); ++k) {
            double v = minus_e[k];
            const Vec& p = points[k];
            for (std::size_t i = 0; i < dim; ++i) v += p[i] * mu[i];
            if (v > best) {
                best = v;
                bi = k;
            }
        }
        return bi;
    }
    double value_and_count(std::span<const double> mu) const {
        std::size_t k = argmax_index(mu);
        evals.fetch_add(1, std::memory_order_relaxed);
        if (boundary[k]) boundary_hits.fetch_add(1, std::memory_order_relaxed);
        return minus_e[k] + dot(points[k], mu);
    }
    double boundary_fraction() const {
        auto e = evals.load();
        return e == 0 ? 0.0 : double(boundary_hits.load()) / double(e);
    }
};

struct ConjugateFunctional {
    Functional fn;
    std::shared_ptr<ConjugateData> data;

    Vec argmax(std::span<const double> mu) const { return data->points[data->argmax_index(mu)]; }
};

inline ConjugateFunctional legendre_conjugate(const Functional& E, const GridSpec& grid) {
    grid.validate();
    if (grid.dim() != E.dim) throw DimensionError("legendre_conjugate: grid dimension mismatch");
    auto data = std::make_shared<ConjugateData>();
    data->dim = E.dim;
    const std::size_t total = grid.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        Vec phi = grid.point(flat);
        double e = E(phi);
        if (e == kInf) continue;
        data->points.push_back(std::move(phi));
        data->minus_e.push_back(-e);
        data->boundary.push_back(grid.on_boundary(flat));
    }
    if (data->points.empty()) throw Error("legendre_conjugate: E is +inf everywhere on the grid");
    Functional fn;
    fn.name = E.name + "*";
    fn.dim = E.dim;
    fn.convex = true;
    fn.domain_description = "grid conjugate (radius limited)";
    fn.eval = [data](std::span<const double> mu) { return data->value_and_count(mu); };
    return {std::move(fn), std::move(data)};
}

struct QSearchConfig {
    int levels = 32;                // exhaustive grid levels per active coordinate
    int max_active_exhaustive = 4;  // above this, fall back to projected descent
    int descent_restarts = 200;
    int descent_iters = 200;
    int n_t21 = 4;                  // random t21 draws per pair, besides corners
    double activity_tol = 1e-14;
};

namespace detail {

inline Vec positive_part_vec(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = std::max(a[i] - b[i], 0.0);
    return r;
}

// min over t12 in [0, box] of F1(mu1t - t12) + F2(mu2t + t12).
// Always tries 0, the full box, and the mass-matching proportional point;
// then either an exhaustive grid over active coordinates or projected descent.
struct InnerMinResult {
    double value = kInf;
    bool exhaustive = true;
};

inline InnerMinResult q_inner_min(const Functional& F1, const Functional& F2, const Vec& mu1t,
                                  const Vec& mu2t, const Vec& box, double t21_mass,
                                  const QSearchConfig& cfg, Rng& rng) {
    const std::size_t n = box.size();
    auto eval_at = [&](const Vec& t12) {
        Vec a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = mu1t[i] - t12[i];
            b[i] = mu2t[i] + t12[i];
        }
        double v1 = F1(a);
        if (v1 == kInf) return kInf;
        double v2 = F2(b);
        return v2 == kInf ? kInf : v1 + v2;
    };

    InnerMinResult out;
    Vec zero(n, 0.0);
    out.value = eval_at(zero);
    out.value = std::min(out.value, eval_at(box));
    double box_mass = sum(box);
    if (box_mass > 0) {
        Vec prop(n);
        double scale = std::clamp(t21_mass / box_mass, 0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) prop[i] = scale * box[i];
        out.value = std::min(out.value, eval_at(prop));
    }

    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n; ++i)
        if (box[i] > cfg.activity_tol) active.push_back(i);
    if (active.empty()) return out;

    if (int(active.size()) <= cfg.max_active_exhaustive) {
        std::size_t total = 1;
        for (std::size_t k = 0; k < active.size(); ++k) total *= std::size_t(cfg.levels);
        Vec t12(n, 0.0);
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rem = flat;
            for (std::size_t a : active) {
                int k = int(rem % std::size_t(cfg.levels));
                rem /= std::size_t(cfg.levels);
                t12[a] = box[a] * k / double(cfg.levels - 1);
            }
            out.value = std::min(out.value, eval_at(t12));
        }
        return out;
    }

    // Projected subgradient descent with numerical gradients; cannot refute,
    // only certify.
    out.exhaustive = false;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int r = 0; r < cfg.descent_restarts; ++r) {
        Vec t(n, 0.0);
        for (std::size_t a : active) t[a] = box[a] * unit(rng);
        double val = eval_at(t);
        for (int it = 1; it <= cfg.descent_iters; ++it) {
            Vec g(n, 0.0);
            bool ok = true;
            for (std::size_t a : active) {
                double h = std::max(1e-7, 1e-7 * box[a]);
                Vec tp = t, tm = t;
                tp[a] = std::min(t[a] + h, box[a]);
                tm[a] = std::max(t[a] - h, 0.0);
                double fp = eval_at(tp), fm = eval_at(tm);
                if (fp == kInf || fm == kInf) {
                    ok = false;
                    break;
                }
                g[a] = (fp - fm) / (tp[a] - tm[a]);
            }
            if (!ok) break;
            double gn = std::sqrt(dot(g, g));
            if (gn < 1e-14) break;
            double step = 0.5 / (gn * std::sqrt(double(it)));
            for (std::size_t a : active) t[a] = std::clamp(t[a] - step * g[a] * sum(box) * 0.2, 0.0, box[a]);
            double v = eval_at(t);
            val = std::min(val, v);
        }
        out.value = std::min(out.value, val);
    }
    return out;
}

}  // namespace detail

// For sampled (mu1, mu2) and t21 in [0,(mu2-mu1)+], certifies a t12 in
// [0,(mu1-mu2)+] with F1(mu1+t21-t12) + F2(mu2-t21+t12) <= F1(mu1) + F2(mu2)
// + tol. Residual per trial is (inner min of the left side) - RHS.
inline CheckReport check_q_dominance(const Functional& F1, const Functional& F2,
                                     const VecSampler& sampler, const QSearchConfig& cfg,
                                     double tol, Rng rng = Rng(0), long n_pairs = 100) {
    if (F1.dim != F2.dim) throw DimensionError("check_q_dominance: dimension mismatch");
    const std::size_t n = F1.dim;
    CheckReport rep;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (long pair = 0; pair < n_pairs; ++pair) {
        auto [mu1, mu2] = sample_pair(rng, sampler);
        double r1 = F1(mu1), r2 = F2(mu2);
        if (r1 == kInf || r2 == kInf) {
            ++rep.n_skipped;
            continue;
        }
        const double rhs = r1 + r2;
        Vec box21 = detail::positive_part_vec(mu2, mu1);
        Vec box12 = detail::positive_part_vec(mu1, mu2);

        std::vector<Vec> t21s;
        t21s.push_back(box21);  // full shift
        for (std::size_t i = 0; i < n; ++i)
            if (box21[i] > cfg.activity_tol) {
                Vec t(n, 0.0);
                t[i] = box21[i];
                t21s.push_back(std::move(t));  // single-coordinate corners
            }
        for (int k = 0; k < cfg.n_t21; ++k) {
            Vec t(n);
            for (std::size_t i = 0; i < n; ++i) t[i] = box21[i] * unit(rng);
            t21s.push_back(std::move(t));
        }

        for (const Vec& t21 : t21s) {
            Vec mu1t(n), mu2t(n);
            for (std::size_t i = 0; i < n; ++i) {
                mu1t[i] = mu1[i] + t21[i];
                mu2t[i] = mu2[i] - t21[i];
            }
            auto inner = detail::q_inner_min(F1, F2, mu1t, mu2t, box12, sum(t21), cfg, rng);
            if (!inner.exhaustive) rep.exhaustive = false;
            if (inner.value == kInf) {
                rep.record(kInf, {mu1, mu2, t21});
                rep.note = "inner search found no finite candidate";
                continue;
            }
            rep.record(inner.value - rhs, {mu1, mu2, t21});
        }
    }
    rep.finish(tol);
    if (!rep.passed && !rep.exhaustive) rep.note = "not certified: descent search only";
    return rep;
}

// Samples mu1, mu2 and h in [0,1]^n, reallocates mass along the density h and
// asserts H(mu1') + H(mu2') <= H(mu1) + H(mu2) + tol.
inline CheckReport check_totally_substitutable(const Functional& H, const VecSampler& sampler,
                                               long n_trials, double tol, Rng rng = Rng(0)) {
    const std::size_t n = H.dim;
    CheckReport rep;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (long k = 0; k < n_trials; ++k) {
        auto [mu1, mu2] = sample_pair(rng, sampler);
        double rhs1 = H(mu1), rhs2 = H(mu2);
        if (rhs1 == kInf || rhs2 == kInf) {
            ++rep.n_skipped;
            continue;
        }
        Vec h(n);
        int mode = std::uniform_int_distribution<int>(0, 9)(rng);
        for (std::size_t i = 0; i < n; ++i)
            h[i] = mode == 0 ? 0.0 : mode == 1 ? 1.0 : mode == 2 ? 0.5 : unit(rng);
        Vec m1(n), m2(n);
        for (std::size_t i = 0; i < n; ++i) {
            m1[i] = (1 - h[i]) * mu1[i] + h[i] * mu2[i];
            m2[i] = mu1[i] + mu2[i] - m1[i];
        }
        double lhs1 = H(m1);
        double lhs = lhs1 == kInf ? kInf : lhs1 + H(m2);
        rep.record(lhs - (rhs1 + rhs2), {mu1, mu2, h});
    }
    rep.finish(tol);
    return rep;
}

enum class DominanceMode { P, Q };

struct ArgminDominanceConfig {
    double member_tol = 1e-9;   // value slack defining the argmin set
    int t_levels = 17;          // t-grid resolution for the Q search
    std::size_t max_grid = 1000000;
    std::size_t max_pairs = 4000;
};

// Enumerates argmin sets on the grid and checks the strong set order (mode P:
// meet/join closure) or the mass-shift set order (mode Q: moved points remain
// minimizers). Membership is by value: E(x) <= min + member_tol.
inline CheckReport check_argmin_dominance(DominanceMode mode, const Functional& E1,
                                          const Functional& E2, const GridSpec& grid, double tol,
                                          ArgminDominanceConfig cfg = {}) {
    grid.validate();
    if (grid.dim() != E1.dim || E1.dim != E2.dim)
        throw DimensionError("check_argmin_dominance: dimension mismatch");
    if (grid.size() > cfg.max_grid) throw ValidationError("check_argmin_dominance: grid too large");

    const std::size_t total = grid.size();
    double min1 = kInf, min2 = kInf;
    std::vector<double> v1(total), v2(total);
    for (std::size_t k = 0; k < total; ++k) {
        Vec x = grid.point(k);
        v1[k] = E1(x);
        v2[k] = E2(x);
        min1 = std::min(min1, v1[k]);
        min2 = std::min(min2, v2[k]);
    }
    if (min1 == kInf || min2 == kInf) throw Error("check_argmin_dominance: a functional is +inf on the grid");
    std::vector<Vec> A1, A2;
    for (std::size_t k = 0; k < total; ++k) {
        if (v1[k] <= min1 + cfg.member_tol) A1.push_back(grid.point(k));
        if (v2[k] <= min2 + cfg.member_tol) A2.push_back(grid.point(k));
    }
    if (A1.size() * A2.size() > cfg.max_pairs)
        throw ValidationError("check_argmin_dominance: argmin sets too large to cross-check");

    CheckReport rep;
    const std::size_t n = E1.dim;
    if (mode == DominanceMode::P) {
        for (const Vec& a : A1)
            for (const Vec& b : A2) {
                Vec mt(n), jn(n);
                for (std::size_t i = 0; i < n; ++i) {
                    mt[i] = std::min(a[i], b[i]);
                    jn[i] = std::max(a[i], b[i]);
                }
                double viol = std::max(E1(mt) - (min1 + cfg.member_tol), E2(jn) - (min2 + cfg.member_tol));
                rep.record(viol, {a, b});
            }
    } else {
        // Mode Q, oriented so that singleton argmins collapse to A1 <= A2:
        // shifts t21 within [0,(a1-a2)+] move a2 up and a1 down; some t12 in
        // [0,(a2-a1)+] must land both back in their argmin sets.
        Rng rng(12345);
        for (const Vec& a1 : A1)
            for (const Vec& a2 : A2) {
                Vec box21 = detail::positive_part_vec(a1, a2);
                Vec box12 = detail::positive_part_vec(a2, a1);
                std::vector<Vec> t21s;
                t21s.push_back(box21);
                for (std::size_t i = 0; i < n; ++i)
                    if (box21[i] > 1e-14) {
                        Vec t(n, 0.0);
                        t[i] = box21[i];
                        t21s.push_back(std::move(t));
                    }
                for (const Vec& t21 : t21s) {
                    Vec hi_t(n), lo_t(n);
                    for (std::size_t i = 0; i < n; ++i) {
                        hi_t[i] = a2[i] + t21[i];
                        lo_t[i] = a1[i] - t21[i];
                    }
                    // exists t12 with E2(hi_t - t12) ~ min2 and E1(lo_t + t12) ~ min1
                    double best = kInf;
                    std::vector<std::size_t> active;
                    for (std::size_t i = 0; i < n; ++i)
                        if (box12[i] > 1e-14) active.push_back(i);
                    std::size_t tt = 1;
                    for (std::size_t q = 0; q < active.size(); ++q) tt *= std::size_t(cfg.t_levels);
                    Vec t12(n, 0.0);
                    for (std::size_t flat = 0; flat < tt; ++flat) {
                        std::size_t rem = flat;
                        for (std::size_t a : active) {
                            int kk = int(rem % std::size_t(cfg.t_levels));
                            rem /= std::size_t(cfg.t_levels);
                            t12[a] = box12[a] * kk / double(cfg.t_levels - 1);
                        }
                        Vec p1(n), p2(n);
                        for (std::size_t i = 0; i < n; ++i) {
                            p1[i] = lo_t[i] + t12[i];
                            p2[i] = hi_t[i] - t12[i];
                        }
                        double e1 = E1(p1), e2 = E2(p2);
                        if (e1 == kInf || e2 == kInf) continue;
                        best = std::min(best, std::max(e1 - (min1 + cfg.member_tol), e2 - (min2 + cfg.member_tol)));
                    }
                    rep.record(best, {a1, a2, t21});
                }
            }
    }
    rep.finish(tol);
    return rep;
}

struct DualityCheckConfig {
    long n_pairs_p = 2000;
    long n_pairs_q = 60;
    Vec mu_lo, mu_hi;   // sampling box for dual points; defaults derived from grid
    QSearchConfig q;
    double tol_p = 1e-9;
    double tol_q = 0.05;  // absorbs grid conjugation error
};

struct DualityVerdict {
    CheckReport primal;     // submodularity of E
    CheckReport dual;       // substitutability of the grid conjugate
    bool agree = false;
    double boundary_fraction = 0.0;
};

// Cross-checks the conjugation duality: E submodular iff E* substitutable.
// The conjugate is grid brute force, so the dual tolerance must absorb the
// grid error; the boundary fraction flags an undersized grid.
inline DualityVerdict verify_conjugate_duality(const Functional& E, const GridSpec& grid,
                                               DualityCheckConfig cfg, Rng rng = Rng(0)) {
    DualityVerdict out;
    out.primal = check_p_dominance(E, E, box_sampler(grid.lo, grid.hi), cfg.n_pairs_p, cfg.tol_p, rng);
    auto conj = legendre_conjugate(E, grid);
    Vec mlo = cfg.mu_lo, mhi = cfg.mu_hi;
    if (mlo.empty()) {
        mlo.assign(E.dim, -2.0);
        mhi.assign(E.dim, 2.0);
    }
    out.dual = check_q_dominance(conj.fn, conj.fn, box_sampler(mlo, mhi), cfg.q, cfg.tol_q, rng,
                                 cfg.n_pairs_q);
    out.agree = out.primal.passed == out.dual.passed;
    out.boundary_fraction = conj.data->boundary_fraction();
    return out;
}

}  // namespace lot
