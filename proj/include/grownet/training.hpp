#pragma once

#include "grownet/embedding.hpp"
#include "grownet/errors.hpp"
#include "grownet/gradient.hpp"
#include "grownet/lbfgs.hpp"
#include "grownet/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace grownet {

enum class GrowthRule { DoubleEach, FixedK, Schedule };

inline GrowthRule growth_rule_from_string(const std::string& s) {
    if (s == "double") { return GrowthRule::DoubleEach; }
    if (s == "fixed") { return GrowthRule::FixedK; }
    if (s == "schedule") { return GrowthRule::Schedule; }
    throw ConfigError("unknown growth rule '" + s + "' (expected double, fixed or schedule)");
}

struct ItaConfig {
    std::size_t h0 = 10;
    std::size_t h_max = 100;
    GrowthRule growth = GrowthRule::DoubleEach;
    /// K for GrowthRule::FixedK.
    std::size_t fixed_k = 10;
    /// K_0, K_1, ... for GrowthRule::Schedule; the last entry repeats.
    std::vector<std::size_t> schedule;
    /// Optional absolute per-stage tolerances tau_k; an intermediate stage also
    /// stops once |grad|_inf <= tau_k. The last entry repeats.
    std::vector<double> stage_tolerances;
    /// Intermediate stop: |grad|_inf <= factor * |grad at stage start|_inf.
    double intermediate_rel_grad_factor = 1e-1;
    /// Intermediate stop: |R_h - R_{h-1}| <= delta.
    double intermediate_loss_delta = 1e-2;
    /// Use |R_h - R_{h-1}| <= delta |R_{h-1}| instead.
    bool relative_loss_delta = false;
    double final_grad_tol = 1e-6;
    std::size_t maxit_per_stage = 1000;
    /// Cap on L-BFGS iterations summed over all stages; 0 means no cap.
    std::size_t total_epoch_budget = 0;
    std::uint64_t seed = 1;
    std::size_t embed_retry_limit = 10;
    /// Number of hidden layers; more than one requires `experimental_deep`.
    std::size_t hidden_layers = 1;
    bool experimental_deep = false;
    LbfgsConfig optimizer{};

    void validate() const {
        if (h0 < 1 || h0 > h_max) { throw ConfigError("ITA needs 1 <= h0 <= h_max"); }
        if (!(intermediate_rel_grad_factor > 0.0 && intermediate_rel_grad_factor <= 1.0)) {
            throw ConfigError("intermediate gradient factor must lie in (0, 1]");
        }
        if (!(intermediate_loss_delta >= 0.0)) { throw ConfigError("intermediate loss delta must be non-negative"); }
        if (!(final_grad_tol > 0.0)) { throw ConfigError("final gradient tolerance must be positive"); }
        if (embed_retry_limit < 1) { throw ConfigError("embed retry limit must be at least 1"); }
        if (growth == GrowthRule::FixedK && fixed_k < 1) { throw ConfigError("fixed growth needs K >= 1"); }
        if (growth == GrowthRule::Schedule) {
            if (schedule.empty()) { throw ConfigError("schedule growth needs at least one K"); }
            for (auto k : schedule) {
                if (k < 1) { throw ConfigError("schedule entries must be >= 1"); }
            }
        }
        if (hidden_layers < 1) { throw ConfigError("ITA needs at least one hidden layer"); }
        if (hidden_layers > 1 && !experimental_deep) {
            throw ConfigError("multi-hidden-layer ITA is experimental and must be enabled explicitly");
        }
        optimizer.validate();
    }

    /// K_k for stage k at width h.
    [[nodiscard]] std::size_t growth_at(std::size_t k, std::size_t h) const {
        switch (growth) {
        case GrowthRule::DoubleEach: return h;
        case GrowthRule::FixedK: return fixed_k;
        case GrowthRule::Schedule: return schedule[std::min(k, schedule.size() - 1)];
        }
        return h;
    }

    /// Hidden widths visited: H_{k+1} = min(H_k + K_k, H_max).
    [[nodiscard]] std::vector<std::size_t> stage_widths() const {
        std::vector<std::size_t> out{h0};
        while (out.back() < h_max) {
            const std::size_t k = out.size() - 1;
            out.push_back(std::min(out.back() + growth_at(k, out.back()), h_max));
        }
        return out;
    }
};

struct StageRecord {
    std::size_t width = 0;
    double start_risk = 0.0;
    double start_grad_norm = 0.0;
    double end_risk = 0.0;
    double end_grad_norm = 0.0;
    std::size_t iterations = 0;
    Termination termination = Termination::MaxIter;
    /// Alpha draws used to enter this stage (0 for the first stage).
    std::size_t embed_attempts = 0;
};

enum class EpochEvent { Init, Step, Grow };

inline const char* to_string(EpochEvent e) noexcept {
    switch (e) {
    case EpochEvent::Init: return "init";
    case EpochEvent::Step: return "step";
    case EpochEvent::Grow: return "grow";
    }
    return "?";
}

/// One metrics record. `epoch` counts L-BFGS iterations over all stages;
/// Init and Grow records do not consume an epoch.
struct EpochRecord {
    std::size_t stage = 0;
    std::size_t width = 0;
    std::size_t epoch = 0;
    double risk = 0.0;
    double grad_norm = 0.0;
    EpochEvent event = EpochEvent::Step;
};

using MetricsSink = std::function<void(const EpochRecord&)>;

struct TrainRun {
    std::vector<StageRecord> stages;
    ParamVector theta_final;
    std::size_t cumulative_epochs = 0;
    /// loss_trace[e] is the risk after e epochs (entry 0 is the start point).
    std::vector<double> loss_trace;
    std::vector<EpochRecord> records;

    [[nodiscard]] double final_risk() const { return loss_trace.back(); }
    /// Risk after `budget` epochs; runs that stopped earlier hold their final value.
    [[nodiscard]] double risk_at_epoch(std::size_t budget) const {
        return loss_trace[std::min(budget, loss_trace.size() - 1)];
    }
};

namespace detail {

inline auto make_objective(const Topology& t, const Dataset& d, const Loss& loss, const Activation& g) {
    return [t, &d, loss, g](std::span<const double> x, std::span<double> grad) {
        const ParamVector theta{t, std::vector<double>(x.begin(), x.end())};
        auto rg = risk_and_gradient(theta, d, loss, g);
        std::copy(rg.gradient.flat().begin(), rg.gradient.flat().end(), grad.begin());
        return rg.risk;
    };
}

inline ParamVector uniform_init(const Topology& t, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit{0.0, 1.0};
    ParamVector theta{t};
    for (double& v : theta.flat()) { v = unit(rng); }
    return theta;
}

inline Topology hidden_topology(const Dataset& d, std::size_t width, std::size_t hidden_layers) {
    if (d.size() == 0) { throw InvalidArgument("empty dataset"); }
    std::vector<std::size_t> sizes{d.input_dim()};
    for (std::size_t i = 0; i < hidden_layers; ++i) { sizes.push_back(width); }
    sizes.push_back(d.output_dim());
    return Topology{sizes};
}

class RunRecorder {
  public:
    RunRecorder(TrainRun& run, const MetricsSink& sink) : run_{run}, sink_{sink} {}

    void emit(const EpochRecord& rec) {
        run_.records.push_back(rec);
        if (sink_) { sink_(rec); }
    }

  private:
    TrainRun& run_;
    const MetricsSink& sink_;
};

// Runs one L-BFGS stage from `theta`, appending to the run's trace.
inline OptimResult run_stage(TrainRun& run, RunRecorder& rec, std::size_t stage, const ParamVector& theta,
                             const Dataset& d, const Loss& loss, const Activation& g, LbfgsConfig cfg,
                             const StopHook& hook) {
    const Topology& t = theta.topology();
    const std::size_t width = t.width(1);
    const std::size_t start_epoch = run.cumulative_epochs;
    auto wrapped = [&](const IterationState& s) {
        return hook && hook(s);
    };
    auto res = lbfgs_minimize(make_objective(t, d, loss, g), theta.values(), cfg, wrapped);
    for (std::size_t i = 1; i < res.f_history.size(); ++i) {
        run.loss_trace.push_back(res.f_history[i]);
        rec.emit({stage, width, start_epoch + i, res.f_history[i], res.grad_history[i], EpochEvent::Step});
    }
    run.cumulative_epochs += res.iterations;
    return res;
}

} // namespace detail

/// Single L-BFGS run of a [n, H, m] network from a U(0,1) start.
inline TrainRun standard_train(const Dataset& d, std::size_t hidden, double tol, std::size_t maxit,
                               std::uint64_t seed, const Loss& loss = mse_loss(),
                               const Activation& g = tanh_activation(), LbfgsConfig cfg = {},
                               const MetricsSink& sink = {}) {
    if (hidden < 1) { throw ConfigError("hidden width must be at least 1"); }
    if (!(tol > 0.0)) { throw ConfigError("tolerance must be positive"); }
    std::mt19937_64 rng{seed};
    const Topology t = detail::hidden_topology(d, hidden, 1);
    ParamVector theta = detail::uniform_init(t, rng);

    TrainRun run;
    detail::RunRecorder rec{run, sink};
    const auto start = risk_and_gradient(theta, d, loss, g);
    const double start_norm = grad_norm_inf(start.gradient);
    run.loss_trace.push_back(start.risk);
    rec.emit({0, hidden, 0, start.risk, start_norm, EpochEvent::Init});

    cfg.max_iter = maxit;
    cfg.grad_tol_inf = tol;
    auto res = detail::run_stage(run, rec, 0, theta, d, loss, g, cfg, {});
    run.stages.push_back({hidden, start.risk, start_norm, res.f, res.grad_norm, res.iterations, res.termination, 0});
    run.theta_final = ParamVector{t, std::move(res.x)};
    return run;
}

/// Incremental training: train a narrow network, grow its hidden layer with
/// the alpha map using U(0,1) parameters (risk unchanged, gradient generically
/// non-zero), retrain, and repeat until the width reaches h_max.
inline TrainRun ita_train(const Dataset& d, const ItaConfig& cfg, const Loss& loss = mse_loss(),
                          const Activation& g = tanh_activation(), const MetricsSink& sink = {}) {
    cfg.validate();
    check_compatible(ParamVector{detail::hidden_topology(d, cfg.h0, cfg.hidden_layers)}, d);
    std::mt19937_64 rng{cfg.seed};
    ParamVector theta = detail::uniform_init(detail::hidden_topology(d, cfg.h0, cfg.hidden_layers), rng);

    TrainRun run;
    detail::RunRecorder rec{run, sink};
    auto current = risk_and_gradient(theta, d, loss, g);
    run.loss_trace.push_back(current.risk);
    rec.emit({0, cfg.h0, 0, current.risk, grad_norm_inf(current.gradient), EpochEvent::Init});

    std::size_t embed_attempts = 0;
    for (std::size_t stage = 0;; ++stage) {
        const std::size_t width = theta.topology().width(1);
        const bool final_stage = width >= cfg.h_max;
        const double start_risk = current.risk;
        const double start_norm = grad_norm_inf(current.gradient);

        std::size_t remaining = cfg.maxit_per_stage;
        if (cfg.total_epoch_budget > 0) {
            const std::size_t left = cfg.total_epoch_budget - std::min(cfg.total_epoch_budget, run.cumulative_epochs);
            remaining = final_stage ? left : std::min(remaining, left);
        }

        LbfgsConfig opt = cfg.optimizer;
        opt.max_iter = remaining;
        opt.grad_tol_inf = cfg.final_grad_tol;
        StopHook hook;
        if (!final_stage) {
            const double tau =
                cfg.stage_tolerances.empty() ? 0.0 : cfg.stage_tolerances[std::min(stage, cfg.stage_tolerances.size() - 1)];
            hook = [&cfg, tau](const IterationState& s) {
                if (s.grad_norm <= cfg.intermediate_rel_grad_factor * s.initial_grad_norm) { return true; }
                if (s.grad_norm <= tau) { return true; }
                const double delta = std::abs(s.f - s.f_prev);
                const double limit =
                    cfg.relative_loss_delta ? cfg.intermediate_loss_delta * std::abs(s.f_prev) : cfg.intermediate_loss_delta;
                return delta <= limit;
            };
        }
        auto res = detail::run_stage(run, rec, stage, theta, d, loss, g, opt, hook);
        run.stages.push_back(
            {width, start_risk, start_norm, res.f, res.grad_norm, res.iterations, res.termination, embed_attempts});
        theta = ParamVector{theta.topology(), std::move(res.x)};

        const bool budget_spent = cfg.total_epoch_budget > 0 && run.cumulative_epochs >= cfg.total_epoch_budget;
        if (final_stage || budget_spent) { break; }

        // Grow every hidden layer by K_k with fresh U(0,1) alpha parameters.
        const std::size_t next_width = std::min(width + cfg.growth_at(stage, width), cfg.h_max);
        CompositePlan plan;
        for (std::size_t l = 1; l <= cfg.hidden_layers; ++l) {
            plan.steps.push_back({l, next_width - width, EmbeddingKind::Alpha});
        }
        // Escape test. With explicit tolerances: |grad|_inf > tau_k, as in the
        // stop test. Otherwise tau_k is the achieved norm, compared in the
        // Euclidean norm: alpha leaves the old components untouched, so this
        // holds exactly when the new components are not all zero.
        const bool explicit_tau = !cfg.stage_tolerances.empty();
        const double tau_k = explicit_tau ? cfg.stage_tolerances[std::min(stage, cfg.stage_tolerances.size() - 1)]
                                          : norm_2(risk_and_gradient(theta, d, loss, g).gradient);
        auto escapes = [&](const GradientVector& grad) {
            return explicit_tau ? grad_norm_inf(grad) > tau_k : norm_2(grad) > tau_k;
        };

        bool escaped = false;
        embed_attempts = 0;
        while (embed_attempts < cfg.embed_retry_limit) {
            ++embed_attempts;
            RandomParamSource source{rng()};
            ParamVector grown = embed_composite(theta, plan, std::ref(source), g).grown;
            auto grown_rg = risk_and_gradient(grown, d, loss, g);
            if (std::abs(grown_rg.risk - res.f) > 1e-12 * (1.0 + std::abs(res.f))) {
                throw EmbeddingError("alpha embedding changed the risk from " + std::to_string(res.f) + " to " +
                                     std::to_string(grown_rg.risk));
            }
            if (escapes(grown_rg.gradient)) {
                theta = std::move(grown);
                current = std::move(grown_rg);
                escaped = true;
                break;
            }
        }
        if (!escaped) {
            throw EmbedEscapeFailure("grown gradient stayed at or below " + std::to_string(tau_k) + " after " +
                                     std::to_string(cfg.embed_retry_limit) + " alpha draws at width " +
                                     std::to_string(width));
        }
        rec.emit({stage + 1, next_width, run.cumulative_epochs, current.risk, grad_norm_inf(current.gradient),
                  EpochEvent::Grow});
    }
    run.theta_final = std::move(theta);
    return run;
}

} // namespace grownet
