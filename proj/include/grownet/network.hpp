#pragma once

#include "grownet/dataset.hpp"
#include "grownet/errors.hpp"
#include "grownet/functions.hpp"
#include "grownet/topology.hpp"

#include <span>
#include <vector>

namespace grownet {

/// Pre-activations a^l for l = 1..L of one forward pass.
struct ActivationRecord {
    /// pre_activations[l - 1] holds a^l.
    std::vector<std::vector<double>> pre_activations;

    [[nodiscard]] const std::vector<double>& layer(std::size_t l) const { return pre_activations.at(l - 1); }
    /// Linear output units: f = a^L.
    [[nodiscard]] const std::vector<double>& output() const { return pre_activations.back(); }
};

namespace detail {

// a = W z + sigma for one layer, reading rows of (bias, weights) from `block`.
inline void affine(std::span<const double> block, std::size_t fan_in, std::span<const double> z,
                   std::span<double> a) {
    const std::size_t stride = fan_in + 1;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double* row = block.data() + j * stride;
        double sum = row[0];
        for (std::size_t i = 0; i < fan_in; ++i) { sum += row[1 + i] * z[i]; }
        a[j] = sum;
    }
}

} // namespace detail

/// Forward pass: a^1 = W^1 x + sigma^1, a^l = W^l g(a^{l-1}) + sigma^l, f = a^L.
inline ActivationRecord forward(const ParamVector& theta, std::span<const double> x,
                                const Activation& g = tanh_activation()) {
    const Topology& t = theta.topology();
    if (x.size() != t.inputs()) {
        throw DimensionError("input has " + std::to_string(x.size()) + " features, network expects " +
                             std::to_string(t.inputs()));
    }
    ActivationRecord rec;
    rec.pre_activations.resize(t.depth());
    std::vector<double> z(x.begin(), x.end());
    for (std::size_t l = 1; l <= t.depth(); ++l) {
        auto& a = rec.pre_activations[l - 1];
        a.assign(t.width(l), 0.0);
        detail::affine(theta.block(l), t.width(l - 1), z, a);
        if (l < t.depth()) {
            z.resize(a.size());
            for (std::size_t j = 0; j < a.size(); ++j) { z[j] = g.value(a[j]); }
        }
    }
    return rec;
}

inline void check_compatible(const ParamVector& theta, const Dataset& d) {
    if (d.size() == 0) { throw InvalidArgument("empty dataset"); }
    const Topology& t = theta.topology();
    if (d.input_dim() != t.inputs() || d.output_dim() != t.outputs()) {
        throw DimensionError("dataset " + std::to_string(d.input_dim()) + "->" + std::to_string(d.output_dim()) +
                             " does not match topology " + t.to_string());
    }
}

/// R_emp(theta) = (1/P) sum_p L(y^p, f(x^p, theta)).
inline double empirical_risk(const ParamVector& theta, const Dataset& d, const Loss& loss = mse_loss(),
                             const Activation& g = tanh_activation()) {
    check_compatible(theta, d);
    double sum = 0.0;
    for (std::size_t p = 0; p < d.size(); ++p) {
        const auto rec = forward(theta, d.x(p), g);
        sum += loss.value(d.y(p), rec.output());
    }
    return sum / static_cast<double>(d.size());
}

} // namespace grownet
