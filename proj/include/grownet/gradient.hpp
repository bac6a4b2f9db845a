#pragma once

#include "grownet/network.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace grownet {

struct RiskAndGradient {
    double risk = 0.0;
    GradientVector gradient;
};

/// Forward-mode risk gradient.
///
/// For every parameter layer l the sensitivities of the downstream
/// pre-activations with respect to the biases of layer l are carried forward
/// together, as one H_q x H_l Jacobian per layer q:
///
///     da^l/dsigma^l = I,
///     da^q/dsigma^l = W^q diag(g'(a^{q-1})) da^{q-1}/dsigma^l,   q = l+1..L.
///
/// The weight seeds differ from the bias seeds only by the factor
/// g(a_i^{l-1}) (x_i on the first layer), and the recursion is linear in the
/// seed, so da^q/dw^l_{ji} = g(a_i^{l-1}) da^q/dsigma^l_j. The risk partials
/// then follow as (1/P) sum_p sum_r L'_r(y^p, f) da^L_r/dparam.
inline RiskAndGradient risk_and_gradient(const ParamVector& theta, const Dataset& d, const Loss& loss = mse_loss(),
                                         const Activation& g = tanh_activation()) {
    check_compatible(theta, d);
    const Topology& t = theta.topology();
    const std::size_t L = t.depth();

    RiskAndGradient out{0.0, GradientVector{t}};
    auto grad = out.gradient.flat();

    // z[l] = g(a^l) for hidden layers, z[0] = x; gp[l] = g'(a^l).
    std::vector<std::vector<double>> z(L), gp(L), a(L + 1);
    for (std::size_t l = 1; l <= L; ++l) {
        a[l].assign(t.width(l), 0.0);
        if (l < L) {
            z[l].assign(t.width(l), 0.0);
            gp[l].assign(t.width(l), 0.0);
        }
    }
    std::vector<double> dloss(t.outputs());
    std::vector<double> jac, next, sens;

    for (std::size_t p = 0; p < d.size(); ++p) {
        z[0].assign(d.x(p).begin(), d.x(p).end());
        for (std::size_t l = 1; l <= L; ++l) {
            detail::affine(theta.block(l), t.width(l - 1), z[l - 1], a[l]);
            if (l < L) {
                for (std::size_t j = 0; j < a[l].size(); ++j) {
                    z[l][j] = g.value(a[l][j]);
                    gp[l][j] = g.derivative(a[l][j]);
                }
            }
        }
        out.risk += loss.value(d.y(p), a[L]);
        loss.derivative(d.y(p), a[L], dloss);

        for (std::size_t l = 1; l <= L; ++l) {
            const std::size_t hl = t.width(l);
            // jac is H_q x H_l, row-major; starts as the identity at q = l.
            jac.assign(hl * hl, 0.0);
            for (std::size_t k = 0; k < hl; ++k) { jac[k * hl + k] = 1.0; }
            std::size_t rows = hl;
            for (std::size_t q = l + 1; q <= L; ++q) {
                const std::size_t hq = t.width(q);
                const std::size_t fan_in = t.width(q - 1);
                const auto block = theta.block(q);
                next.assign(hq * hl, 0.0);
                for (std::size_t c = 0; c < hq; ++c) {
                    const double* w = block.data() + c * (fan_in + 1) + 1;
                    double* dst = next.data() + c * hl;
                    for (std::size_t h = 0; h < fan_in; ++h) {
                        const double coef = w[h] * gp[q - 1][h];
                        if (coef == 0.0) { continue; }
                        const double* src = jac.data() + h * hl;
                        for (std::size_t k = 0; k < hl; ++k) { dst[k] += coef * src[k]; }
                    }
                }
                jac.swap(next);
                rows = hq;
            }
            // sens_k = sum_r L'_r da^L_r / dsigma^l_k
            sens.assign(hl, 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                const double e = dloss[r];
                if (e == 0.0) { continue; }
                for (std::size_t k = 0; k < hl; ++k) { sens[k] += e * jac[r * hl + k]; }
            }
            const std::size_t fan_in = t.width(l - 1);
            const std::size_t base = t.layer_offset(l);
            for (std::size_t k = 0; k < hl; ++k) {
                double* row = grad.data() + base + k * (fan_in + 1);
                row[0] += sens[k];
                for (std::size_t i = 0; i < fan_in; ++i) { row[1 + i] += sens[k] * z[l - 1][i]; }
            }
        }
    }
    const double inv_p = 1.0 / static_cast<double>(d.size());
    out.risk *= inv_p;
    for (double& v : grad) { v *= inv_p; }
    return out;
}

inline GradientVector gradient_forward(const ParamVector& theta, const Dataset& d, const Loss& loss = mse_loss(),
                                       const Activation& g = tanh_activation()) {
    return risk_and_gradient(theta, d, loss, g).gradient;
}

/// Central differences (R(theta + h e_k) - R(theta - h e_k)) / 2h. Test oracle.
inline GradientVector gradient_finite_diff(const ParamVector& theta, const Dataset& d, const Loss& loss = mse_loss(),
                                           const Activation& g = tanh_activation(), double step = 1e-6) {
    if (!(step > 0.0)) { throw InvalidArgument("finite-difference step must be positive"); }
    check_compatible(theta, d);
    GradientVector out{theta.topology()};
    ParamVector probe = theta;
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const double orig = probe.flat()[k];
        probe.flat()[k] = orig + step;
        const double up = empirical_risk(probe, d, loss, g);
        probe.flat()[k] = orig - step;
        const double down = empirical_risk(probe, d, loss, g);
        probe.flat()[k] = orig;
        out.flat()[k] = (up - down) / (2.0 * step);
    }
    return out;
}

template <class Tag>
double norm_inf(const LayeredVector<Tag>& v) noexcept {
    double m = 0.0;
    for (double x : v.flat()) { m = std::max(m, std::abs(x)); }
    return m;
}

inline double grad_norm_inf(const GradientVector& gr) noexcept { return norm_inf(gr); }

/// Euclidean norm, scaled to avoid overflow.
template <class Tag>
double norm_2(const LayeredVector<Tag>& v) noexcept {
    const double scale = norm_inf(v);
    if (scale == 0.0 || !std::isfinite(scale)) { return scale; }
    double sum = 0.0;
    for (double x : v.flat()) { sum += (x / scale) * (x / scale); }
    return scale * std::sqrt(sum);
}

} // namespace grownet
