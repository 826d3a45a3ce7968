#pragma once

#include "lot/common.hpp"

namespace lot {

// Accelerated projected gradient with backtracking and adaptive restart, for
// smooth convex objectives over a simple closed convex set.
struct FistaProblem {
    std::function<double(const Vec&)> value;
    std::function<void(const Vec&, Vec&)> gradient;
    std::function<void(Vec&)> project;                       // in place
    std::function<double(const Vec&, const Vec&)> kkt;      // residual from (x, grad)
};

struct FistaResult {
    Vec x;
    double value = 0;
    double kkt = kInf;
    long iterations = 0;
    bool converged = false;
};

inline FistaResult fista_run(const FistaProblem& p, Vec x0, double tol, long max_iters,
                             double lipschitz_init = 1.0) {
    p.project(x0);
    Vec x = x0, y = x0, x_prev = x0;
    Vec g(x.size()), trial(x.size());
    double L = lipschitz_init;
    double t = 1.0;
    double fx = p.value(x);
    FistaResult best{x, fx, kInf, 0, false};

    for (long it = 1; it <= max_iters; ++it) {
        double fy = p.value(y);
        p.gradient(y, g);

        // backtracking on the majorization at y
        double f_trial = 0;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t k = 0; k < x.size(); ++k) trial[k] = y[k] - g[k] / L;
            p.project(trial);
            f_trial = p.value(trial);
            double quad = fy;
            for (std::size_t k = 0; k < x.size(); ++k) {
                double d = trial[k] - y[k];
                quad += g[k] * d + 0.5 * L * d * d;
            }
            if (f_trial <= quad + 1e-14 * std::max(1.0, std::abs(quad))) break;
            L *= 2;
        }
        x_prev = x;
        x = trial;
        fx = f_trial;

        // adaptive restart on non-monotone progress
        double t_next = 0.5 * (1 + std::sqrt(1 + 4 * t * t));
        double momentum_dot = 0;
        for (std::size_t k = 0; k < x.size(); ++k)
            momentum_dot += (y[k] - x[k]) * (x[k] - x_prev[k]);
        if (momentum_dot > 0) {
            t = 1.0;
            y = x;
        } else {
            for (std::size_t k = 0; k < x.size(); ++k)
                y[k] = x[k] + (t - 1) / t_next * (x[k] - x_prev[k]);
            t = t_next;
        }
        L = std::max(L * 0.9, 1e-12);

        if (fx <= best.value) {
            best.x = x;
            best.value = fx;
        }
        if (it % 10 == 0 || it == max_iters) {
            p.gradient(best.x, g);
            best.kkt = p.kkt(best.x, g);
            best.iterations = it;
            if (best.kkt <= tol) {
                best.converged = true;
                return best;
            }
        }
    }
    p.gradient(best.x, g);
    best.kkt = p.kkt(best.x, g);
    best.iterations = max_iters;
    best.converged = best.kkt <= tol;
    return best;
}

// Accelerated descent can oscillate without progress near the solution; cold
// restarts from the incumbent (momentum and step estimate reset) break the
// plateau. The iteration budget is spread over the restart rounds.
inline FistaResult fista_minimize(const FistaProblem& p, Vec x0, double tol, long max_iters,
                                  double lipschitz_init = 1.0) {
    const int rounds = 8;
    const long chunk = std::max<long>(200, max_iters / rounds);
    FistaResult best;
    long spent = 0;
    Vec start = std::move(x0);
    for (int r = 0; r < rounds && spent < max_iters; ++r) {
        auto res = fista_run(p, start, tol, std::min(chunk, max_iters - spent), lipschitz_init);
        spent += res.iterations;
        if (r == 0 || res.value < best.value || res.kkt < best.kkt) {
            res.iterations = spent;
            best = std::move(res);
        } else {
            best.iterations = spent;
        }
        if (best.converged) return best;
        start = best.x;
    }
    return best;
}

}  // namespace lot
