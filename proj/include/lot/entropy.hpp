#pragma once

#include <functional>

#include "lot/common.hpp"

namespace lot {

// Scalar entropy: proper convex superlinear f on [0, inf) together with its
// conjugate f*(r) = sup_{s >= 0} rs - f(s), which is finite and nondecreasing.
struct EntropyFunction {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> conj;
    std::function<double(double)> deriv;       // optional; null when unavailable
    std::function<double(double)> conj_deriv;  // optional; (f*)' = (f')^{-1} clamped to >= 0
    double deriv_floor = 1e-12;                // clamp for derivatives blowing up at 0

    double value(double s) const { return f(s); }
    double conjugate(double r) const { return conj(r); }
    bool has_derivative() const { return static_cast<bool>(deriv); }
    double derivative(double s) const { return deriv(std::max(s, deriv_floor)); }

    // Numeric derivative of the conjugate; used for flatness diagnostics.
    double conj_slope(double r, double h = 1e-6) const { return (conj(r + h) - conj(r - h)) / (2 * h); }
    double conj_derivative(double r) const { return conj_deriv ? conj_deriv(r) : conj_slope(r); }
};

// Sampled sanity checks for the entropy invariants: convexity (nondecreasing
// difference quotients), superlinearity (f(s)/s increasing in the tail), and a
// nondecreasing conjugate.
inline void validate_entropy(const EntropyFunction& e) {
    const Vec s_grid = {1e-6, 1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
    double prev_slope = -kInf;
    for (std::size_t i = 0; i + 1 < s_grid.size(); ++i) {
        double fa = e.f(s_grid[i]), fb = e.f(s_grid[i + 1]);
        if (std::isnan(fa) || std::isnan(fb)) throw ValidationError("entropy " + e.name + ": NaN value");
        if (fa < -1e-12 || fb < -1e-12) throw ValidationError("entropy " + e.name + ": negative value");
        double slope = (fb - fa) / (s_grid[i + 1] - s_grid[i]);
        if (slope < prev_slope - 1e-9) throw ValidationError("entropy " + e.name + ": not convex on samples");
        prev_slope = slope;
    }
    double q10 = e.f(10.0) / 10.0, q25 = e.f(25.0) / 25.0, q50 = e.f(50.0) / 50.0;
    if (!(q25 > q10 && q50 > q25))
        throw ValidationError("entropy " + e.name + ": f(s)/s not increasing in the tail");
    double prev = -kInf;
    for (double r = -10.0; r <= 10.0; r += 0.25) {
        double c = e.conj(r);
        if (std::isnan(c)) throw ValidationError("entropy " + e.name + ": NaN conjugate");
        if (c < prev - 1e-9) throw ValidationError("entropy " + e.name + ": conjugate not nondecreasing");
        prev = c;
    }
}

// f(s) = lambda (s log s - s + 1), f*(r) = lambda (e^{r/lambda} - 1).
inline EntropyFunction kl_entropy(double lambda = 1.0) {
    if (lambda <= 0) throw ValidationError("kl_entropy: lambda must be > 0");
    EntropyFunction e;
    e.name = "kl(" + std::to_string(lambda) + ")";
    e.f = [lambda](double s) { return s <= 0 ? lambda : lambda * (s * std::log(s) - s + 1); };
    e.conj = [lambda](double r) { return lambda * std::expm1(r / lambda); };
    e.deriv = [lambda](double s) { return lambda * std::log(s); };
    e.conj_deriv = [lambda](double r) { return std::exp(r / lambda); };
    validate_entropy(e);
    return e;
}

// f(s) = lambda (s - 1)^2; conjugate is flat at -lambda for r <= -2 lambda.
inline EntropyFunction quadratic_entropy(double lambda = 1.0) {
    if (lambda <= 0) throw ValidationError("quadratic_entropy: lambda must be > 0");
    EntropyFunction e;
    e.name = "quadratic(" + std::to_string(lambda) + ")";
    e.f = [lambda](double s) { return lambda * (s - 1) * (s - 1); };
    e.conj = [lambda](double r) { return r >= -2 * lambda ? r + r * r / (4 * lambda) : -lambda; };
    e.deriv = [lambda](double s) { return 2 * lambda * (s - 1); };
    e.conj_deriv = [lambda](double r) { return r >= -2 * lambda ? 1 + r / (2 * lambda) : 0.0; };
    e.deriv_floor = 0.0;
    validate_entropy(e);
    return e;
}

// f(s) = lambda s^2, f*(r) = (r+)^2 / (4 lambda).
inline EntropyFunction square_entropy(double lambda = 1.0) {
    if (lambda <= 0) throw ValidationError("square_entropy: lambda must be > 0");
    EntropyFunction e;
    e.name = "square(" + std::to_string(lambda) + ")";
    e.f = [lambda](double s) { return lambda * s * s; };
    e.conj = [lambda](double r) { return r > 0 ? r * r / (4 * lambda) : 0.0; };
    e.deriv = [lambda](double s) { return 2 * lambda * s; };
    e.conj_deriv = [lambda](double r) { return r > 0 ? r / (2 * lambda) : 0.0; };
    e.deriv_floor = 0.0;
    validate_entropy(e);
    return e;
}

}  // namespace lot
