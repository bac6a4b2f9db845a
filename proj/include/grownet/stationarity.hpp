#pragma once

#include "grownet/embedding.hpp"
#include "grownet/errors.hpp"
#include "grownet/gradient.hpp"
#include "grownet/lbfgs.hpp"
#include "grownet/network.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace grownet {

/// Threshold on |R_hat - R| relative to (1 + |R|).
inline constexpr double kRiskInvarianceTol = 1e-10;
/// Slack factor on the gradient norm carried over by stationarity-preserving maps.
inline constexpr double kTransferFactor = 100.0;
/// Floor used in place of a source gradient norm that is already at rounding level.
inline constexpr double kGradientNoiseFloor = 1e3 * std::numeric_limits<double>::epsilon();

enum class CheckKind { LossInvariance, StationarityTransfer, Escape };
enum class Verdict { Pass, Fail };

inline const char* to_string(CheckKind c) noexcept {
    switch (c) {
    case CheckKind::LossInvariance: return "loss_invariance";
    case CheckKind::StationarityTransfer: return "stationarity_transfer";
    case CheckKind::Escape: return "escape";
    }
    return "?";
}
inline const char* to_string(Verdict v) noexcept { return v == Verdict::Pass ? "pass" : "fail"; }

/// Outcome of one numeric check of an embedding. The verdict is always
/// recomputed from the numeric fields.
struct StationarityReport {
    CheckKind check = CheckKind::LossInvariance;
    std::string map_used;
    std::string topology;
    double source_grad_norm = 0.0;
    double embedded_grad_norm = 0.0;
    double source_risk = 0.0;
    double embedded_risk = 0.0;
    /// Lower bound on embedded_grad_norm for escape checks; unused otherwise.
    double escape_threshold = 0.0;

    [[nodiscard]] double risk_gap() const noexcept { return std::abs(embedded_risk - source_risk); }

    [[nodiscard]] Verdict verdict() const noexcept {
        bool ok = false;
        switch (check) {
        case CheckKind::LossInvariance:
            ok = risk_gap() <= kRiskInvarianceTol * (1.0 + std::abs(source_risk));
            break;
        case CheckKind::StationarityTransfer:
            ok = embedded_grad_norm <= kTransferFactor * std::max(source_grad_norm, kGradientNoiseFloor);
            break;
        case CheckKind::Escape:
            ok = embedded_grad_norm > escape_threshold;
            break;
        }
        return ok ? Verdict::Pass : Verdict::Fail;
    }

    [[nodiscard]] nlohmann::ordered_json to_json() const {
        return {{"check", to_string(check)},
                {"map", map_used},
                {"topology", topology},
                {"source_risk", source_risk},
                {"embedded_risk", embedded_risk},
                {"risk_gap", risk_gap()},
                {"source_grad_norm", source_grad_norm},
                {"embedded_grad_norm", embedded_grad_norm},
                {"escape_threshold", escape_threshold},
                {"verdict", to_string(verdict())}};
    }

    /// One report per line.
    [[nodiscard]] std::string to_line() const { return to_json().dump(); }
};

inline std::string describe(std::span<const EmbeddingSpec> specs) {
    std::string out;
    for (const auto& s : specs) {
        if (!out.empty()) { out += '+'; }
        out += s.describe();
    }
    return out.empty() ? "identity" : out;
}

/// L-BFGS from a seeded U(0,1) start until |grad R|_inf <= tol.
/// Throws NonConvergence with the best norm reached otherwise.
inline ParamVector find_stationary_point(const Topology& t, const Dataset& d, double tol, std::size_t max_iter,
                                         std::uint64_t seed, const Loss& loss = mse_loss(),
                                         const Activation& g = tanh_activation()) {
    if (!(tol > 0.0)) { throw InvalidArgument("stationarity tolerance must be positive"); }
    std::mt19937_64 rng{seed};
    std::uniform_real_distribution<double> unit{0.0, 1.0};
    std::vector<double> x0(t.param_count());
    for (double& v : x0) { v = unit(rng); }

    auto objective = [&](std::span<const double> x, std::span<double> grad) {
        const ParamVector theta{t, std::vector<double>(x.begin(), x.end())};
        auto rg = risk_and_gradient(theta, d, loss, g);
        std::copy(rg.gradient.flat().begin(), rg.gradient.flat().end(), grad.begin());
        return rg.risk;
    };
    LbfgsConfig cfg;
    cfg.max_iter = max_iter;
    cfg.grad_tol_inf = tol;
    auto res = lbfgs_minimize(objective, std::move(x0), cfg);
    // A line-search stall right at the tolerance is retried from the current
    // point with fresh curvature memory.
    for (int restart = 0; restart < 3 && res.termination == Termination::LineSearchFail && res.iterations < max_iter;
         ++restart) {
        cfg.max_iter = max_iter - res.iterations;
        auto again = lbfgs_minimize(objective, res.x, cfg);
        if (again.iterations == 0) { break; }
        again.iterations += res.iterations;
        res = std::move(again);
    }
    if (res.grad_norm > tol) { throw NonConvergence(res.grad_norm); }
    return ParamVector{t, std::move(res.x)};
}

/// Compares R_emp before and after applying `specs` in order.
inline StationarityReport verify_loss_invariance(const ParamVector& theta, const Dataset& d,
                                                 std::span<const EmbeddingSpec> specs, const Loss& loss = mse_loss(),
                                                 const Activation& g = tanh_activation()) {
    const ParamVector grown = embed_chain(theta, specs, g);
    const auto before = risk_and_gradient(theta, d, loss, g);
    const auto after = risk_and_gradient(grown, d, loss, g);
    StationarityReport r;
    r.check = CheckKind::LossInvariance;
    r.map_used = describe(specs);
    r.topology = theta.topology().to_string() + "->" + grown.topology().to_string();
    r.source_risk = before.risk;
    r.embedded_risk = after.risk;
    r.source_grad_norm = grad_norm_inf(before.gradient);
    r.embedded_grad_norm = grad_norm_inf(after.gradient);
    return r;
}

/// True for beta with zero outgoing weights, alpha with zero incoming rows, and gamma.
inline bool preserves_stationarity(const EmbeddingSpec& spec) {
    const auto all_zero = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    };
    switch (spec.kind()) {
    case EmbeddingKind::Alpha: return all_zero(std::get<AlphaParams>(spec.params).incoming);
    case EmbeddingKind::Beta: return all_zero(std::get<BetaParams>(spec.params).outgoing);
    case EmbeddingKind::Gamma: return true;
    }
    return false;
}

/// Gradient norm of the grown network at an embedded stationary point.
/// Only stationarity-preserving maps are accepted unless
/// `allow_non_preserving` is set (negative controls).
inline StationarityReport verify_stationarity_transfer(const ParamVector& theta_star, const Dataset& d,
                                                       std::span<const EmbeddingSpec> specs,
                                                       const Loss& loss = mse_loss(),
                                                       const Activation& g = tanh_activation(),
                                                       bool allow_non_preserving = false) {
    if (!allow_non_preserving) {
        for (const auto& s : specs) {
            if (!preserves_stationarity(s)) {
                throw InvalidArgument(s.describe() + " does not preserve stationarity");
            }
        }
    }
    StationarityReport r = verify_loss_invariance(theta_star, d, specs, loss, g);
    r.check = CheckKind::StationarityTransfer;
    return r;
}

/// Escape check for alpha: the grown gradient must exceed `threshold`.
inline StationarityReport verify_escape(const ParamVector& theta_star, const Dataset& d,
                                        std::span<const EmbeddingSpec> specs, double threshold,
                                        const Loss& loss = mse_loss(), const Activation& g = tanh_activation()) {
    StationarityReport r = verify_loss_invariance(theta_star, d, specs, loss, g);
    r.check = CheckKind::Escape;
    r.escape_threshold = threshold;
    return r;
}

namespace detail {
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) { return 0; }
    k = std::min(k, n - k);
    std::uint64_t out = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        if (out > std::numeric_limits<std::uint64_t>::max() / num) {
            throw InvalidArgument("manifold family count overflows 64 bits");
        }
        out = out * num / i;
    }
    return out;
}
} // namespace detail

/// Number of families of stationary manifolds reachable with at most
/// `k_budget` added neurons: over nonempty sets R of hidden layers, per-layer
/// counts K_r >= 1 with sum <= k_budget, and a beta/gamma choice per layer.
///
///     sum_{t=1}^{L-1} C(L-1, t) * C(k_budget, t) * 2^t
///
/// (C(k_budget, t) counts the positive t-tuples with sum <= k_budget.)
inline std::uint64_t count_manifold_families(const Topology& t, std::uint64_t k_budget) {
    if (k_budget < 1) { throw InvalidArgument("neuron budget must be at least 1"); }
    const std::uint64_t hidden = t.depth() >= 1 ? t.depth() - 1 : 0;
    std::uint64_t total = 0;
    for (std::uint64_t s = 1; s <= hidden && s <= k_budget; ++s) {
        const std::uint64_t a = detail::binomial(hidden, s);
        const std::uint64_t b = detail::binomial(k_budget, s);
        if (s >= 63) { throw InvalidArgument("manifold family count overflows 64 bits"); }
        const std::uint64_t c = std::uint64_t{1} << s;
        const auto max = std::numeric_limits<std::uint64_t>::max();
        if (a > max / b || a * b > max / c) { throw InvalidArgument("manifold family count overflows 64 bits"); }
        const std::uint64_t term = a * b * c;
        if (total > max - term) { throw InvalidArgument("manifold family count overflows 64 bits"); }
        total += term;
    }
    return total;
}

} // namespace grownet
