#pragma once

// Shared generators and independent oracles for the test suites. Nothing in
// here calls into the library's evaluation paths except to build inputs.

#include "grownet/grownet.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace grownet::testkit {

inline ParamVector random_params(const Topology& t, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u{lo, hi};
    ParamVector theta{t};
    for (double& v : theta.flat()) { v = u(rng); }
    return theta;
}

inline Dataset random_dataset(std::size_t n, std::size_t m, std::size_t P, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u{-1.0, 1.0};
    Matrix X(P, n), Y(P, m);
    for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t i = 0; i < n; ++i) { X(p, i) = u(rng); }
        for (std::size_t r = 0; r < m; ++r) { Y(p, r) = u(rng); }
    }
    return make_dataset("random", std::move(X), std::move(Y));
}

/// Random topology with `depth` parameter layers and widths in [1, max_width].
inline Topology random_topology(std::size_t depth, std::size_t max_width, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> w{1, max_width};
    std::vector<std::size_t> sizes;
    for (std::size_t i = 0; i <= depth; ++i) { sizes.push_back(w(rng)); }
    return Topology{sizes};
}

/// Straight-line evaluator written directly from the layer recursion, reading
/// parameters through the flat layout formula only (no library accessors).
inline std::vector<double> oracle_forward(const std::vector<std::size_t>& sizes, const std::vector<double>& flat,
                                          const std::vector<double>& x) {
    std::vector<double> z = x;
    std::size_t offset = 0;
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        std::vector<double> a(sizes[l]);
        for (std::size_t j = 0; j < sizes[l]; ++j) {
            const std::size_t base = offset + j * (sizes[l - 1] + 1);
            double s = flat[base];
            for (std::size_t i = 0; i < sizes[l - 1]; ++i) { s += flat[base + 1 + i] * z[i]; }
            a[j] = s;
        }
        offset += sizes[l] * (sizes[l - 1] + 1);
        if (l + 1 < sizes.size()) {
            for (double& v : a) { v = std::tanh(v); }
        }
        z = std::move(a);
    }
    return z;
}

/// Max |a - b| over two equal-length spans.
inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) { m = std::max(m, std::abs(a[i] - b[i])); }
    return m;
}

/// Small regression set the narrow networks used below cannot interpolate,
/// so their stationary points keep a non-zero residual.
inline Dataset stationarity_dataset(std::uint64_t seed, std::size_t P = 12) {
    std::mt19937_64 rng{seed};
    std::uniform_real_distribution<double> u{-1.0, 1.0};
    Matrix X(P, 2), Y(P, 1);
    for (std::size_t p = 0; p < P; ++p) {
        X(p, 0) = u(rng);
        X(p, 1) = u(rng);
        Y(p, 0) = std::sin(3.0 * X(p, 0)) * std::cos(2.0 * X(p, 1)) + 0.3 * u(rng);
    }
    return make_dataset("stationarity", std::move(X), std::move(Y));
}

struct StationaryCase {
    ParamVector theta;
    Dataset data;
};

/// Stationary point on 20 noisy sinusoid samples, where minima keep a large
/// residual. Tries `restarts` seeded starts; nullopt if none settles.
inline std::optional<StationaryCase> noisy_stationary_point(const Topology& t, std::uint64_t seed,
                                                            double tol = 1e-8, std::size_t restarts = 10) {
    SyntheticOptions so;
    so.kind = SyntheticKind::Sinusoid;
    so.inputs = t.inputs();
    so.outputs = t.outputs();
    so.samples = 20;
    so.noise = 1.0;
    so.seed = seed;
    Dataset d = make_synthetic(so).data;
    for (std::uint64_t attempt = 0; attempt < restarts; ++attempt) {
        try {
            ParamVector theta = find_stationary_point(t, d, tol, 5000, seed + attempt);
            return StationaryCase{std::move(theta), std::move(d)};
        } catch (const NonConvergence&) {
        }
    }
    return std::nullopt;
}

inline double rosenbrock(std::span<const double> x, std::span<double> g) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
}

// f(x) = 1/2 x^T A x - b^T x with A = Q diag(1..10) Q^T.
struct Quadratic {
    std::vector<double> A, b;
    std::size_t n;

    explicit Quadratic(std::size_t dim, std::uint64_t seed) : A(dim * dim), b(dim), n{dim} {
        std::mt19937_64 rng{seed};
        std::normal_distribution<double> normal;
        // Random orthogonal Q by Gram-Schmidt.
        std::vector<double> Q(n * n);
        for (double& v : Q) { v = normal(rng); }
        for (std::size_t c = 0; c < n; ++c) {
            for (std::size_t k = 0; k < c; ++k) {
                double d = 0.0;
                for (std::size_t r = 0; r < n; ++r) { d += Q[r * n + c] * Q[r * n + k]; }
                for (std::size_t r = 0; r < n; ++r) { Q[r * n + c] -= d * Q[r * n + k]; }
            }
            double norm = 0.0;
            for (std::size_t r = 0; r < n; ++r) { norm += Q[r * n + c] * Q[r * n + c]; }
            norm = std::sqrt(norm);
            for (std::size_t r = 0; r < n; ++r) { Q[r * n + c] /= norm; }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) { s += Q[i * n + k] * static_cast<double>(k + 1) * Q[j * n + k]; }
                A[i * n + j] = s;
            }
        }
        for (double& v : b) { v = normal(rng); }
    }

    double operator()(std::span<const double> x, std::span<double> g) const {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double Ax = 0.0;
            for (std::size_t j = 0; j < n; ++j) { Ax += A[i * n + j] * x[j]; }
            g[i] = Ax - b[i];
            f += 0.5 * x[i] * Ax - b[i] * x[i];
        }
        return f;
    }
};

} // namespace grownet::testkit
