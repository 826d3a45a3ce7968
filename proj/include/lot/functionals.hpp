#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "lot/common.hpp"
#include "lot/entropy.hpp"

namespace lot {

using Matrix = std::vector<Vec>;

// A proper function R^dim -> R u {+inf}. Evaluators encode "out of domain" as
// +inf and must never produce NaN.
struct Functional {
    std::string name;
    std::size_t dim = 0;
    std::function<double(std::span<const double>)> eval;
    bool convex = false;
    bool differentiable = false;
    std::string domain_description;

    double operator()(std::span<const double> x) const {
        if (x.size() != dim) throw DimensionError("Functional " + name + ": wrong input dimension");
        double v = eval(x);
        if (std::isnan(v)) throw Error("Functional " + name + ": evaluator returned NaN");
        return v;
    }
    double operator()(const Vec& x) const { return (*this)(std::span<const double>(x)); }
};

inline Functional sum_of(const Functional& a, const Functional& b) {
    if (a.dim != b.dim) throw DimensionError("sum_of: dimension mismatch");
    Functional s;
    s.name = a.name + "+" + b.name;
    s.dim = a.dim;
    s.convex = a.convex && b.convex;
    s.differentiable = a.differentiable && b.differentiable;
    auto ae = a.eval, be = b.eval;
    s.eval = [ae, be](std::span<const double> x) {
        double u = ae(x);
        if (u == kInf) return kInf;
        double v = be(x);
        return v == kInf ? kInf : u + v;
    };
    return s;
}

inline Functional quadratic_functional(const Matrix& A, const Vec& b) {
    const std::size_t n = A.size();
    if (n == 0) throw ValidationError("quadratic: empty matrix");
    for (const auto& row : A)
        if (row.size() != n) throw ValidationError("quadratic: matrix not square");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(A[i][j] - A[j][i]) > 1e-12) throw ValidationError("quadratic: matrix not symmetric");
    if (!b.empty() && b.size() != n) throw ValidationError("quadratic: linear term length mismatch");
    Functional f;
    f.name = "quadratic";
    f.dim = n;
    f.differentiable = true;
    f.eval = [A, b, n](std::span<const double> x) {
        double q = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double Ax = 0;
            for (std::size_t j = 0; j < n; ++j) Ax += A[i][j] * x[j];
            q += 0.5 * x[i] * Ax + (b.empty() ? 0.0 : b[i] * x[i]);
        }
        return q;
    };
    return f;
}

// E(x) = f(x_i - x_j) for a scalar convex f.
inline Functional convex_diff_functional(std::function<double(double)> f, std::size_t dim,
                                         std::size_t i, std::size_t j) {
    if (i >= dim || j >= dim || i == j) throw ValidationError("convex_diff: bad index pair");
    Functional e;
    e.name = "convex_diff";
    e.dim = dim;
    e.convex = true;
    e.eval = [f = std::move(f), i, j](std::span<const double> x) { return f(x[i] - x[j]); };
    return e;
}

// E(x) = g(sum_i w_i x_i) for a scalar concave g and nonnegative weights.
inline Functional concave_of_sum_functional(std::function<double(double)> g, Vec weights) {
    if (weights.empty()) throw ValidationError("concave_of_sum: empty weights");
    for (double w : weights)
        if (w < 0) throw ValidationError("concave_of_sum: weights must be >= 0");
    Functional e;
    e.name = "concave_of_sum";
    e.dim = weights.size();
    e.eval = [g = std::move(g), w = std::move(weights)](std::span<const double> x) {
        double s = 0;
        for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
        return g(s);
    };
    return e;
}

inline Functional sup_coord_functional(std::size_t dim) {
    if (dim == 0) throw ValidationError("sup_coord: dim must be >= 1");
    Functional e;
    e.name = "sup_coord";
    e.dim = dim;
    e.convex = true;
    e.eval = [](std::span<const double> x) {
        double m = -kInf;
        for (double v : x) m = std::max(m, v);
        return m;
    };
    return e;
}

struct Edge {
    std::size_t i = 0, j = 0;
    double w = 1.0;
};

// Graph Dirichlet energy: sum over edges of w (x_i - x_j)^2.
inline Functional dirichlet_functional(std::size_t dim, std::vector<Edge> edges) {
    for (const auto& e : edges) {
        if (e.i >= dim || e.j >= dim || e.i == e.j) throw ValidationError("dirichlet: bad edge");
        if (e.w < 0) throw ValidationError("dirichlet: negative edge weight");
    }
    Functional f;
    f.name = "dirichlet";
    f.dim = dim;
    f.convex = true;
    f.differentiable = true;
    f.eval = [edges = std::move(edges)](std::span<const double> x) {
        double s = 0;
        for (const auto& e : edges) {
            double d = x[e.i] - x[e.j];
            s += e.w * d * d;
        }
        return s;
    };
    return f;
}

// Discrete analogue of the fractional seminorm on a sampled point cloud:
// sum over distinct pairs of |x_i - x_j|^p / dist(p_i,p_j)^{n+sp}. Structural
// analogue only; no claim of approximating the continuum value.
inline Functional gagliardo_functional(const std::vector<Vec>& points, double s, double p) {
    if (points.size() < 2) throw ValidationError("gagliardo: need at least 2 points");
    if (!(s > 0 && s < 1)) throw ValidationError("gagliardo: s must lie in (0,1)");
    if (!(p > 1)) throw ValidationError("gagliardo: p must be > 1");
    const std::size_t n = points.size();
    const double ndim = double(points[0].size());
    Matrix kernel(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double d2 = 0;
            for (std::size_t k = 0; k < points[i].size(); ++k) {
                double d = points[i][k] - points[j][k];
                d2 += d * d;
            }
            if (d2 == 0) throw ValidationError("gagliardo: coincident points");
            kernel[i][j] = std::pow(std::sqrt(d2), -(ndim + s * p));
        }
    Functional f;
    f.name = "gagliardo";
    f.dim = n;
    f.convex = true;
    f.domain_description = "structural analogue on a sampled point cloud; no continuum value claim";
    f.eval = [kernel = std::move(kernel), p, n](std::span<const double> x) {
        double acc = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) acc += kernel[i][j] * std::pow(std::abs(x[i] - x[j]), p);
        return acc;
    };
    return f;
}

// Internal energy H_{f,m}: sum f(nu_j / m_j) m_j over supp(m); +inf off the
// positive cone or when mass sits outside supp(m).
inline Functional internal_energy_functional(const EntropyFunction& f, Vec m) {
    for (double x : m)
        if (x < 0) throw ValidationError("internal_energy: reference measure must be >= 0");
    Functional e;
    e.name = "internal_energy[" + f.name + "]";
    e.dim = m.size();
    e.convex = true;
    e.domain_description = "positive measures absolutely continuous w.r.t. m";
    e.eval = [f, m = std::move(m)](std::span<const double> nu) {
        double acc = 0;
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (nu[j] < 0) return kInf;
            if (m[j] == 0) {
                if (nu[j] > 0) return kInf;
                continue;
            }
            acc += f.value(nu[j] / m[j]) * m[j];
        }
        return acc;
    };
    return e;
}

// KL divergence against m with the density integrand s log s - s; the
// +1-normalized variant is available through internal_energy(kl_entropy(), m).
inline Functional kl_divergence_functional(Vec m) {
    for (double x : m)
        if (x < 0) throw ValidationError("kl: reference measure must be >= 0");
    Functional e;
    e.name = "kl_divergence";
    e.dim = m.size();
    e.convex = true;
    e.domain_description = "positive measures absolutely continuous w.r.t. m";
    e.eval = [m = std::move(m)](std::span<const double> nu) {
        double acc = 0;
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (nu[j] < 0) return kInf;
            if (m[j] == 0) {
                if (nu[j] > 0) return kInf;
                continue;
            }
            double r = nu[j] / m[j];
            acc += (r > 0 ? r * std::log(r) - r : 0.0) * m[j];
        }
        return acc;
    };
    return e;
}

inline Functional linear_functional(Vec mu) {
    Functional e;
    e.name = "linear";
    e.dim = mu.size();
    e.convex = true;
    e.differentiable = true;
    e.eval = [mu = std::move(mu)](std::span<const double> x) { return dot(mu, x); };
    return e;
}

inline Functional indicator_box_functional(Vec lo, Vec hi) {
    if (lo.size() != hi.size()) throw ValidationError("indicator_box: bound length mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (lo[i] > hi[i]) throw ValidationError("indicator_box: empty box");
    Functional e;
    e.name = "indicator_box";
    e.dim = lo.size();
    e.convex = true;
    e.eval = [lo = std::move(lo), hi = std::move(hi)](std::span<const double> x) {
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return kInf;
        return 0.0;
    };
    return e;
}

// Indicator of {x >= 0, sum x = mass} with a small feasibility slack.
inline Functional indicator_simplex_functional(std::size_t dim, double mass, double slack = 1e-9) {
    Functional e;
    e.name = "indicator_simplex";
    e.dim = dim;
    e.convex = true;
    e.eval = [mass, slack](std::span<const double> x) {
        double s = 0;
        for (double v : x) {
            if (v < -slack) return kInf;
            s += v;
        }
        return std::abs(s - mass) <= slack ? 0.0 : kInf;
    };
    return e;
}

}  // namespace lot
