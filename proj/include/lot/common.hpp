#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lot {

using Vec = std::vector<double>;
using Rng = std::mt19937_64;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Mismatched vector/space sizes.
struct DimensionError : Error {
    using Error::Error;
};
// Malformed descriptors, scenario files, out-of-range indices.
struct ValidationError : Error {
    using Error::Error;
};
// An operation's stated precondition does not hold for the given inputs.
struct PreconditionError : Error {
    using Error::Error;
};
// Solver nonconvergence or internal failure.
struct SolverError : Error {
    using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw PreconditionError(msg);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sum(std::span<const double> a) {
    double s = 0;
    for (double x : a) s += x;
    return s;
}

inline double linf_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

inline double l1_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

// log(sum_k exp(x_k)) with the max factored out; -inf entries drop out.
inline double logsumexp(std::span<const double> x) {
    double m = -kInf;
    for (double v : x) m = std::max(m, v);
    if (m == -kInf) return -kInf;
    double s = 0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

// Euclidean projection of y onto {x >= 0, sum x = mass}.
inline Vec project_simplex(std::span<const double> y, double mass) {
    const std::size_t n = y.size();
    if (mass <= 0) return Vec(n, 0.0);  // the target set degenerates to the origin
    Vec u(y.begin(), y.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0, tau = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        css += u[i];
        double t = (css - mass) / double(i + 1);
        if (u[i] - t > 0) {
            tau = t;
            k = i + 1;
        }
    }
    (void)k;
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::max(0.0, y[i] - tau);
    return x;
}

}  // namespace lot
