#pragma once

#include "grownet/errors.hpp"
#include "grownet/functions.hpp"
#include "grownet/topology.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace grownet {

// Embedding maps that add K neurons to hidden layer `layer` (1..L-1) while
// leaving the network function unchanged. New neurons always occupy the
// indices H_layer .. H_layer + K - 1 of the grown layer.

enum class EmbeddingKind { Alpha, Beta, Gamma };

inline const char* to_string(EmbeddingKind k) noexcept {
    switch (k) {
    case EmbeddingKind::Alpha: return "alpha";
    case EmbeddingKind::Beta: return "beta";
    case EmbeddingKind::Gamma: return "gamma";
    }
    return "?";
}

inline EmbeddingKind embedding_kind_from_string(const std::string& s) {
    if (s == "alpha") { return EmbeddingKind::Alpha; }
    if (s == "beta") { return EmbeddingKind::Beta; }
    if (s == "gamma") { return EmbeddingKind::Gamma; }
    throw ConfigError("unknown embedding map '" + s + "' (expected alpha, beta or gamma)");
}

/// Free parameters of the alpha map.
struct AlphaParams {
    std::vector<double> zeta;     ///< K biases
    std::vector<double> incoming; ///< K x H_{layer-1}, row-major
};

/// Free parameters of the beta map.
struct BetaParams {
    std::vector<double> zeta;     ///< K biases
    std::vector<double> outgoing; ///< H_{layer+1} x K, row-major
};

/// Free parameters of the gamma map. `source` is zero-based.
struct GammaParams {
    std::size_t source = 0;
    std::vector<double> lambda; ///< K + 1 entries summing to 1; lambda[0] stays on the source
};

struct EmbeddingSpec {
    std::size_t layer = 1;
    std::size_t count = 0;
    std::variant<AlphaParams, BetaParams, GammaParams> params;

    [[nodiscard]] EmbeddingKind kind() const noexcept { return static_cast<EmbeddingKind>(params.index()); }

    [[nodiscard]] std::string describe() const {
        return std::string{to_string(kind())} + "(layer=" + std::to_string(layer) + ",K=" + std::to_string(count) +
               ")";
    }
};

/// K (H_{l-1} + 1) incoming parameters plus K H_{l+1} outgoing weights.
inline std::size_t count_embedding_growth(const Topology& t, std::size_t layer, std::size_t count) {
    if (layer < 1 || layer + 1 > t.depth()) {
        throw EmbeddingError("embedding layer " + std::to_string(layer) + " is not a hidden layer of " +
                             t.to_string());
    }
    return count * (t.width(layer - 1) + 1) + count * t.width(layer + 1);
}

namespace detail {

inline void check_layer(const Topology& t, std::size_t layer) {
    if (t.depth() < 2) { throw EmbeddingError("topology " + t.to_string() + " has no hidden layer"); }
    if (layer < 1 || layer + 1 > t.depth()) {
        throw EmbeddingError("embedding layer " + std::to_string(layer) + " outside hidden range 1.." +
                             std::to_string(t.depth() - 1));
    }
}

// Copies theta into the grown topology; new neurons start with zero bias,
// zero incoming row and zero outgoing weights.
inline ParamVector widen(const ParamVector& theta, std::size_t layer, std::size_t count) {
    const Topology& t = theta.topology();
    std::vector<std::size_t> sizes(t.sizes().begin(), t.sizes().end());
    sizes[layer] += count;
    ParamVector out{Topology{sizes}};
    for (std::size_t l = 1; l <= t.depth(); ++l) {
        for (std::size_t j = 0; j < t.width(l); ++j) {
            out.bias(l, j) = theta.bias(l, j);
            const auto src = theta.row(l, j);
            auto dst = out.row(l, j);
            // Rows of layer+1 gain `count` trailing zero weights.
            for (std::size_t i = 0; i < src.size(); ++i) { dst[i] = src[i]; }
        }
    }
    return out;
}

} // namespace detail

/// alpha: new neurons get biases zeta and incoming rows v, zero outgoing weights.
inline ParamVector embed_alpha(const ParamVector& theta, std::size_t layer, std::size_t count,
                               std::span<const double> zeta, std::span<const double> incoming) {
    const Topology& t = theta.topology();
    detail::check_layer(t, layer);
    const std::size_t fan_in = t.width(layer - 1);
    if (zeta.size() != count || incoming.size() != count * fan_in) {
        throw EmbeddingError("alpha parameters do not match K=" + std::to_string(count) +
                             " and fan-in " + std::to_string(fan_in));
    }
    if (count == 0) { return theta; }
    ParamVector out = detail::widen(theta, layer, count);
    const std::size_t h = t.width(layer);
    for (std::size_t k = 0; k < count; ++k) {
        out.bias(layer, h + k) = zeta[k];
        auto row = out.row(layer, h + k);
        for (std::size_t i = 0; i < fan_in; ++i) { row[i] = incoming[k * fan_in + i]; }
    }
    return out;
}

/// beta: new neurons get biases zeta, zero incoming rows and outgoing weights s;
/// the next layer's biases absorb the constant contribution s g(zeta).
inline ParamVector embed_beta(const ParamVector& theta, std::size_t layer, std::size_t count,
                              std::span<const double> zeta, std::span<const double> outgoing,
                              const Activation& g = tanh_activation()) {
    const Topology& t = theta.topology();
    detail::check_layer(t, layer);
    const std::size_t fan_out = t.width(layer + 1);
    if (zeta.size() != count || outgoing.size() != fan_out * count) {
        throw EmbeddingError("beta parameters do not match K=" + std::to_string(count) +
                             " and fan-out " + std::to_string(fan_out));
    }
    if (count == 0) { return theta; }
    ParamVector out = detail::widen(theta, layer, count);
    const std::size_t h = t.width(layer);
    for (std::size_t k = 0; k < count; ++k) { out.bias(layer, h + k) = zeta[k]; }
    for (std::size_t j = 0; j < fan_out; ++j) {
        double shift = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            const double s = outgoing[j * count + k];
            out.weight(layer + 1, j, h + k) = s;
            shift += s * g.value(zeta[k]);
        }
        out.bias(layer + 1, j) = theta.bias(layer + 1, j) - shift;
    }
    return out;
}

/// gamma: K replicas of neuron `source`; its outgoing weights are split as
/// lambda[0] w (source) and lambda[k] w (replica k).
inline ParamVector embed_gamma(const ParamVector& theta, std::size_t layer, std::size_t count, std::size_t source,
                               std::span<const double> lambda) {
    const Topology& t = theta.topology();
    detail::check_layer(t, layer);
    if (source >= t.width(layer)) {
        throw EmbeddingError("gamma source neuron " + std::to_string(source) + " out of range");
    }
    if (lambda.size() != count + 1) { throw EmbeddingError("gamma needs K+1 lambda coefficients"); }
    double total = 0.0;
    for (double v : lambda) { total += v; }
    if (std::abs(total - 1.0) > 1e-12) {
        throw EmbeddingError("gamma coefficients sum to " + std::to_string(total) + ", expected 1");
    }
    if (count == 0) { return theta; }
    ParamVector out = detail::widen(theta, layer, count);
    const std::size_t h = t.width(layer);
    const auto src_row = theta.row(layer, source);
    for (std::size_t k = 0; k < count; ++k) {
        out.bias(layer, h + k) = theta.bias(layer, source);
        auto row = out.row(layer, h + k);
        for (std::size_t i = 0; i < src_row.size(); ++i) { row[i] = src_row[i]; }
    }
    for (std::size_t j = 0; j < t.width(layer + 1); ++j) {
        const double w = theta.weight(layer + 1, j, source);
        out.weight(layer + 1, j, source) = lambda[0] * w;
        for (std::size_t k = 0; k < count; ++k) { out.weight(layer + 1, j, h + k) = lambda[k + 1] * w; }
    }
    return out;
}

inline ParamVector embed(const ParamVector& theta, const EmbeddingSpec& spec,
                         const Activation& g = tanh_activation()) {
    return std::visit(
        [&](const auto& p) -> ParamVector {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, AlphaParams>) {
                return embed_alpha(theta, spec.layer, spec.count, p.zeta, p.incoming);
            } else if constexpr (std::is_same_v<P, BetaParams>) {
                return embed_beta(theta, spec.layer, spec.count, p.zeta, p.outgoing, g);
            } else {
                return embed_gamma(theta, spec.layer, spec.count, p.source, p.lambda);
            }
        },
        spec.params);
}

/// One step of a composite plan: add `count` neurons to `layer` with map `kind`.
struct PlanStep {
    std::size_t layer = 1;
    std::size_t count = 1;
    EmbeddingKind kind = EmbeddingKind::Alpha;
};

/// Ordered steps over a set of distinct hidden layers.
struct CompositePlan {
    std::vector<PlanStep> steps;

    void validate(const Topology& t) const {
        std::set<std::size_t> seen;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (!seen.insert(steps[i].layer).second) {
                throw CompositeStepError(i, "layer " + std::to_string(steps[i].layer) + " appears twice in plan");
            }
            try {
                detail::check_layer(t, steps[i].layer);
            } catch (const EmbeddingError& e) {
                throw CompositeStepError(i, e.what());
            }
        }
    }
};

/// Supplies the free parameters for step `index` given the current parameters.
using ParamSource = std::function<EmbeddingSpec(std::size_t index, const PlanStep& step, const ParamVector& current)>;

/// Random parameter draws following the library defaults: alpha (zeta, v) and
/// beta zeta ~ U(0,1); beta outgoing weights zero unless `beta_outgoing_scale`
/// is non-zero; gamma source uniform over the layer with lambda = 1/(K+1),
/// or a random simplex point when `random_lambda` is set.
class RandomParamSource {
  public:
    explicit RandomParamSource(std::uint64_t seed) : rng_{seed} {}

    double beta_outgoing_scale = 0.0;
    bool random_lambda = false;

    EmbeddingSpec operator()(std::size_t, const PlanStep& step, const ParamVector& current) {
        const Topology& t = current.topology();
        detail::check_layer(t, step.layer);
        std::uniform_real_distribution<double> unit{0.0, 1.0};
        EmbeddingSpec spec{step.layer, step.count, AlphaParams{}};
        switch (step.kind) {
        case EmbeddingKind::Alpha: {
            AlphaParams p;
            p.zeta.resize(step.count);
            p.incoming.resize(step.count * t.width(step.layer - 1));
            for (double& v : p.zeta) { v = unit(rng_); }
            for (double& v : p.incoming) { v = unit(rng_); }
            spec.params = std::move(p);
            break;
        }
        case EmbeddingKind::Beta: {
            BetaParams p;
            p.zeta.resize(step.count);
            p.outgoing.assign(t.width(step.layer + 1) * step.count, 0.0);
            for (double& v : p.zeta) { v = unit(rng_); }
            if (beta_outgoing_scale != 0.0) {
                for (double& v : p.outgoing) { v = beta_outgoing_scale * (2.0 * unit(rng_) - 1.0); }
            }
            spec.params = std::move(p);
            break;
        }
        case EmbeddingKind::Gamma: {
            GammaParams p;
            std::uniform_int_distribution<std::size_t> pick{0, t.width(step.layer) - 1};
            p.source = pick(rng_);
            p.lambda = random_lambda ? random_simplex(step.count + 1)
                                     : std::vector<double>(step.count + 1, 1.0 / static_cast<double>(step.count + 1));
            spec.params = std::move(p);
            break;
        }
        }
        return spec;
    }

  private:
    std::vector<double> random_simplex(std::size_t n) {
        std::exponential_distribution<double> expo{1.0};
        std::vector<double> v(n);
        double total = 0.0;
        for (double& x : v) {
            x = expo(rng_);
            total += x;
        }
        for (double& x : v) { x /= total; }
        // Put the rounding residue on the first entry so the sum is 1 to ~ulp.
        double rest = 0.0;
        for (std::size_t i = 1; i < n; ++i) { rest += v[i]; }
        v[0] = 1.0 - rest;
        return v;
    }

    std::mt19937_64 rng_;
};

/// Applies pre-resolved specs in order.
inline ParamVector embed_chain(const ParamVector& theta, std::span<const EmbeddingSpec> specs,
                               const Activation& g = tanh_activation()) {
    ParamVector current = theta;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        try {
            current = embed(current, specs[i], g);
        } catch (const CompositeStepError&) {
            throw;
        } catch (const Error& e) {
            throw CompositeStepError(i, e.what());
        }
    }
    return current;
}

struct CompositeResult {
    ParamVector grown;
    std::vector<EmbeddingSpec> applied;
};

/// theta_i = xi^(i)(theta_{i-1}; r_i, K_{r_i}) for the steps of `plan`.
inline CompositeResult embed_composite(const ParamVector& theta, const CompositePlan& plan, const ParamSource& source,
                                       const Activation& g = tanh_activation()) {
    plan.validate(theta.topology());
    CompositeResult result{theta, {}};
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        try {
            EmbeddingSpec spec = source(i, plan.steps[i], result.grown);
            if (spec.kind() != plan.steps[i].kind || spec.layer != plan.steps[i].layer ||
                spec.count != plan.steps[i].count) {
                throw EmbeddingError("parameter source returned a spec that does not match the plan step");
            }
            result.grown = embed(result.grown, spec, g);
            result.applied.push_back(std::move(spec));
        } catch (const CompositeStepError&) {
            throw;
        } catch (const Error& e) {
            throw CompositeStepError(i, e.what());
        }
    }
    return result;
}

} // namespace grownet
