#pragma once

#include "grownet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace grownet {

struct LbfgsConfig {
    /// Number of stored (s, y) curvature pairs.
    std::size_t memory = 10;
    std::size_t max_iter = 1000;
    /// Stop once |grad|_inf <= grad_tol_inf.
    double grad_tol_inf = 1e-6;
    /// Sufficient decrease: phi(a) <= phi(0) + c1 a phi'(0).
    double wolfe_c1 = 1e-4;
    /// Curvature: |phi'(a)| <= c2 |phi'(0)|.
    double wolfe_c2 = 0.9;
    /// Function evaluations allowed per line search.
    std::size_t max_line_search_steps = 25;

    void validate() const {
        if (memory < 1) { throw ConfigError("L-BFGS memory must be at least 1"); }
        if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
            throw ConfigError("Wolfe constants must satisfy 0 < c1 < c2 < 1");
        }
        if (!(grad_tol_inf >= 0.0)) { throw ConfigError("gradient tolerance must be non-negative"); }
        if (max_line_search_steps < 1) { throw ConfigError("line search needs at least one step"); }
    }
};

enum class Termination { GradTol, MaxIter, LineSearchFail, Custom };

inline const char* to_string(Termination t) noexcept {
    switch (t) {
    case Termination::GradTol: return "grad_tol";
    case Termination::MaxIter: return "max_iter";
    case Termination::LineSearchFail: return "line_search_fail";
    case Termination::Custom: return "custom";
    }
    return "?";
}

struct OptimResult {
    std::vector<double> x;
    double f = 0.0;
    double grad_norm = 0.0;
    std::size_t iterations = 0;
    /// f at the start point followed by f after every accepted step.
    std::vector<double> f_history;
    /// |grad|_inf matching each entry of f_history.
    std::vector<double> grad_history;
    Termination termination = Termination::MaxIter;
};

/// State passed to a stop hook after every accepted step.
struct IterationState {
    std::size_t iteration = 0;
    double f = 0.0;
    double f_prev = 0.0;
    double grad_norm = 0.0;
    double initial_grad_norm = 0.0;
    std::span<const double> x;
};

using StopHook = std::function<bool(const IterationState&)>;

struct LineSearchResult {
    double step = 0.0;
    double value = 0.0;
    double slope = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

// Minimiser of the cubic matching (a, fa, da) and (b, fb, db), or NaN.
inline double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    if (disc < 0.0) { return std::numeric_limits<double>::quiet_NaN(); }
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = db - da + 2.0 * d2;
    if (denom == 0.0) { return std::numeric_limits<double>::quiet_NaN(); }
    return b - (b - a) * (db + d2 - d1) / denom;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) { m = std::max(m, std::abs(x)); }
    return m;
}

inline bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace detail

/// Line search for a step satisfying the strong Wolfe conditions
/// (bracketing phase followed by cubic-interpolation zoom).
///
/// `phi(a)` returns the pair (phi(a), phi'(a)).
template <class Phi>
LineSearchResult line_search_strong_wolfe(Phi&& phi, double f0, double slope0, const LbfgsConfig& cfg,
                                          double initial_step = 1.0) {
    if (!(slope0 < 0.0)) { throw NonDescentDirection("line search requires a descent direction"); }
    const double c1 = cfg.wolfe_c1;
    const double c2 = cfg.wolfe_c2;
    std::size_t evals = 0;

    auto eval = [&](double a) {
        ++evals;
        const auto [v, d] = phi(a);
        if (!std::isfinite(v) || !std::isfinite(d)) {
            throw NumericalError("objective returned a non-finite value during line search");
        }
        return std::pair{v, d};
    };
    auto armijo = [&](double a, double v) { return v <= f0 + c1 * a * slope0; };
    auto curvature = [&](double d) { return std::abs(d) <= -c2 * slope0; };
    // Once the change in phi is at rounding level, function values can no
    // longer certify sufficient decrease; accept a non-increasing point whose
    // slope satisfies the curvature condition.
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f0);
    auto rounding_accept = [&](double v, double d) { return v < f0 && f0 - v <= noise && curvature(d); };

    auto zoom = [&](double lo, double f_lo, double d_lo, double hi, double f_hi, double d_hi) -> LineSearchResult {
        while (evals < cfg.max_line_search_steps) {
            const double width = hi - lo;
            if (std::abs(width) <= std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) {
                break;
            }
            double a = detail::cubic_minimizer(lo, f_lo, d_lo, hi, f_hi, d_hi);
            const double lower = std::min(lo, hi) + 0.1 * std::abs(width);
            const double upper = std::max(lo, hi) - 0.1 * std::abs(width);
            if (!std::isfinite(a) || a < lower || a > upper) { a = 0.5 * (lo + hi); }
            const auto [v, d] = eval(a);
            if (rounding_accept(v, d)) { return {a, v, d, evals}; }
            if (!armijo(a, v) || v >= f_lo) {
                hi = a;
                f_hi = v;
                d_hi = d;
            } else {
                if (curvature(d)) { return {a, v, d, evals}; }
                if (d * (hi - lo) >= 0.0) {
                    hi = lo;
                    f_hi = f_lo;
                    d_hi = d_lo;
                }
                lo = a;
                f_lo = v;
                d_lo = d;
            }
        }
        throw LineSearchFailure("zoom phase exhausted " + std::to_string(cfg.max_line_search_steps) + " evaluations");
    };

    double a_prev = 0.0, f_prev = f0, d_prev = slope0;
    double a = initial_step;
    for (std::size_t i = 0; evals < cfg.max_line_search_steps; ++i) {
        const auto [v, d] = eval(a);
        if (rounding_accept(v, d)) { return {a, v, d, evals}; }
        if (!armijo(a, v) || (i > 0 && v >= f_prev)) { return zoom(a_prev, f_prev, d_prev, a, v, d); }
        if (curvature(d)) { return {a, v, d, evals}; }
        if (d >= 0.0) { return zoom(a, v, d, a_prev, f_prev, d_prev); }
        double next = detail::cubic_minimizer(a_prev, f_prev, d_prev, a, v, d);
        if (!std::isfinite(next) || next < 1.1 * a || next > 4.0 * a) { next = 2.0 * a; }
        a_prev = a;
        f_prev = v;
        d_prev = d;
        a = next;
    }
    throw LineSearchFailure("bracketing phase exhausted " + std::to_string(cfg.max_line_search_steps) +
                            " evaluations");
}

/// Limited-memory BFGS with two-loop recursion and strong Wolfe line search.
///
/// `objective(x, grad)` returns f(x) and writes the gradient into `grad`.
/// Every accepted step satisfies the Armijo condition, so the returned
/// iterate is the best one seen.
template <class Objective>
OptimResult lbfgs_minimize(Objective&& objective, std::vector<double> x0, const LbfgsConfig& cfg,
                           const StopHook& stop_hook = {}) {
    cfg.validate();
    const std::size_t n = x0.size();
    OptimResult res;
    res.x = std::move(x0);
    std::vector<double> g(n), d(n), x_trial(n), g_trial(n), alpha(cfg.memory);

    res.f = objective(std::span<const double>{res.x}, std::span<double>{g});
    if (!std::isfinite(res.f) || !detail::all_finite(g)) {
        throw NumericalError("objective returned a non-finite value at the start point");
    }
    res.grad_norm = detail::inf_norm(g);
    res.f_history.push_back(res.f);
    res.grad_history.push_back(res.grad_norm);
    const double initial_grad_norm = res.grad_norm;

    if (res.grad_norm <= cfg.grad_tol_inf) {
        res.termination = Termination::GradTol;
        return res;
    }

    struct Pair {
        std::vector<double> s, y;
        double rho;
    };
    std::deque<Pair> history;

    auto phi_for = [&](std::span<const double> dir) {
        return [&, dir](double a) {
            for (std::size_t i = 0; i < n; ++i) { x_trial[i] = res.x[i] + a * dir[i]; }
            const double v = objective(std::span<const double>{x_trial}, std::span<double>{g_trial});
            return std::pair{v, detail::dot(g_trial, dir)};
        };
    };

    while (res.iterations < cfg.max_iter) {
        // Two-loop recursion: d = -H g.
        for (std::size_t i = 0; i < n; ++i) { d[i] = -g[i]; }
        for (std::size_t k = history.size(); k-- > 0;) {
            alpha[k] = history[k].rho * detail::dot(history[k].s, d);
            for (std::size_t i = 0; i < n; ++i) { d[i] -= alpha[k] * history[k].y[i]; }
        }
        if (!history.empty()) {
            const auto& last = history.back();
            const double gamma = detail::dot(last.s, last.y) / detail::dot(last.y, last.y);
            for (double& v : d) { v *= gamma; }
        }
        for (std::size_t k = 0; k < history.size(); ++k) {
            const double beta = history[k].rho * detail::dot(history[k].y, d);
            for (std::size_t i = 0; i < n; ++i) { d[i] += (alpha[k] - beta) * history[k].s[i]; }
        }

        double slope = detail::dot(g, d);
        if (!(slope < 0.0)) {
            history.clear();
            for (std::size_t i = 0; i < n; ++i) { d[i] = -g[i]; }
            slope = detail::dot(g, d);
        }
        const double initial_step = history.empty() ? std::min(1.0, 1.0 / std::sqrt(detail::dot(g, g))) : 1.0;

        LineSearchResult ls;
        try {
            ls = line_search_strong_wolfe(phi_for(d), res.f, slope, cfg, initial_step);
        } catch (const LineSearchFailure&) {
            if (history.empty()) {
                res.termination = Termination::LineSearchFail;
                return res;
            }
            // Retry once along steepest descent with fresh memory.
            history.clear();
            for (std::size_t i = 0; i < n; ++i) { d[i] = -g[i]; }
            slope = detail::dot(g, d);
            try {
                ls = line_search_strong_wolfe(phi_for(d), res.f, slope, cfg,
                                              std::min(1.0, 1.0 / std::sqrt(detail::dot(g, g))));
            } catch (const LineSearchFailure&) {
                res.termination = Termination::LineSearchFail;
                return res;
            }
        }

        // The accepted step is always the last one evaluated, so x_trial and
        // g_trial already hold the new iterate.
        const double f_new = ls.value;
        if (!detail::all_finite(g_trial)) { throw NumericalError("objective returned a non-finite gradient"); }

        Pair pair{std::vector<double>(n), std::vector<double>(n), 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            pair.s[i] = x_trial[i] - res.x[i];
            pair.y[i] = g_trial[i] - g[i];
        }
        const double sy = detail::dot(pair.s, pair.y);
        const double s_norm = std::sqrt(detail::dot(pair.s, pair.s));
        const double y_norm = std::sqrt(detail::dot(pair.y, pair.y));
        if (sy > 1e-10 * s_norm * y_norm) {
            pair.rho = 1.0 / sy;
            history.push_back(std::move(pair));
            if (history.size() > cfg.memory) { history.pop_front(); }
        }

        const double f_prev = res.f;
        res.x.swap(x_trial);
        g.swap(g_trial);
        res.f = f_new;
        res.grad_norm = detail::inf_norm(g);
        ++res.iterations;
        res.f_history.push_back(res.f);
        res.grad_history.push_back(res.grad_norm);

        if (res.grad_norm <= cfg.grad_tol_inf) {
            res.termination = Termination::GradTol;
            return res;
        }
        if (stop_hook &&
            stop_hook(IterationState{res.iterations, res.f, f_prev, res.grad_norm, initial_grad_norm, res.x})) {
            res.termination = Termination::Custom;
            return res;
        }
    }
    res.termination = Termination::MaxIter;
    return res;
}

} // namespace grownet
