#pragma once

#include "grownet/errors.hpp"

#include <cmath>
#include <span>
#include <string>

namespace grownet {

/// Elementwise activation g with its derivative g'.
struct Activation {
    std::string name;
    double (*value)(double);
    double (*derivative)(double);
};

namespace detail {
inline double tanh_value(double t) { return std::tanh(t); }
inline double tanh_derivative(double t) {
    const double th = std::tanh(t);
    return 1.0 - th * th;
}
inline double logistic_value(double t) { return 1.0 / (1.0 + std::exp(-t)); }
inline double logistic_derivative(double t) {
    const double s = logistic_value(t);
    return s * (1.0 - s);
}
inline double identity_value(double t) { return t; }
inline double identity_derivative(double) { return 1.0; }
} // namespace detail

inline Activation tanh_activation() { return {"tanh", &detail::tanh_value, &detail::tanh_derivative}; }
inline Activation logistic_activation() {
    return {"logistic", &detail::logistic_value, &detail::logistic_derivative};
}
inline Activation identity_activation() {
    return {"identity", &detail::identity_value, &detail::identity_derivative};
}

inline Activation activation_by_name(const std::string& name) {
    if (name == "tanh") { return tanh_activation(); }
    if (name == "logistic") { return logistic_activation(); }
    if (name == "identity") { return identity_activation(); }
    throw ConfigError("unknown activation '" + name + "'");
}

/// Per-sample loss L(y, f) and its partials with respect to each model output f_r.
struct Loss {
    std::string name;
    double (*value)(std::span<const double> y, std::span<const double> f);
    /// Writes dL/df_r into `out` (size m).
    void (*derivative)(std::span<const double> y, std::span<const double> f, std::span<double> out);
};

namespace detail {
// Mean over the m outputs, as torch.nn.MSELoss does.
inline double mse_value(std::span<const double> y, std::span<const double> f) {
    double sum = 0.0;
    for (std::size_t r = 0; r < y.size(); ++r) {
        const double d = f[r] - y[r];
        sum += d * d;
    }
    return sum / static_cast<double>(y.size());
}
inline void mse_derivative(std::span<const double> y, std::span<const double> f, std::span<double> out) {
    const double scale = 2.0 / static_cast<double>(y.size());
    for (std::size_t r = 0; r < y.size(); ++r) { out[r] = scale * (f[r] - y[r]); }
}
} // namespace detail

/// L(y, f) = (1/m) sum_r (f_r - y_r)^2.
inline Loss mse_loss() { return {"mse", &detail::mse_value, &detail::mse_derivative}; }

} // namespace grownet
