#pragma once

#include <random>
#include <vector>

#include "lot/common.hpp"

namespace lot::test {

inline Vec random_vec(Rng& rng, std::size_t n, double lo = -5.0, double hi = 5.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Vec v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

inline Vec random_positive(Rng& rng, std::size_t n, double lo = 0.05, double hi = 2.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Vec v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

// Random positive vector rescaled to the given total mass.
inline Vec random_mass(Rng& rng, std::size_t n, double mass) {
    Vec v = random_positive(rng, n);
    double s = 0;
    for (double x : v) s += x;
    for (auto& x : v) x *= mass / s;
    return v;
}

}  // namespace lot::test
