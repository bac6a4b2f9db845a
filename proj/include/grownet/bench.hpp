#pragma once

#include "grownet/dataset.hpp"
#include "grownet/errors.hpp"
#include "grownet/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace grownet {

/// Lower clamp on the best value of a row, so a solver that reaches exactly
/// zero risk still yields finite ratios.
inline constexpr double kRatioFloor = 1e-15;

/// Performance indices t_ps: one row per problem, one column per solver.
/// An empty optional marks a failed cell.
struct ResultsTable {
    std::vector<std::string> problems;
    std::vector<std::string> solvers;
    /// Problem-row metadata for export: source problem name and replica index.
    std::vector<std::string> problem_names;
    std::vector<std::size_t> replicas;
    std::size_t budget = 0;
    std::vector<std::optional<double>> cells;

    ResultsTable() = default;
    ResultsTable(std::vector<std::string> problem_ids, std::vector<std::string> solver_ids)
        : problems{std::move(problem_ids)}, solvers{std::move(solver_ids)},
          cells(problems.size() * solvers.size()) {
        problem_names = problems;
        replicas.assign(problems.size(), 0);
    }

    [[nodiscard]] std::size_t num_problems() const noexcept { return problems.size(); }
    [[nodiscard]] std::size_t num_solvers() const noexcept { return solvers.size(); }
    [[nodiscard]] const std::optional<double>& at(std::size_t p, std::size_t s) const {
        return cells.at(p * solvers.size() + s);
    }
    [[nodiscard]] std::optional<double>& at(std::size_t p, std::size_t s) { return cells.at(p * solvers.size() + s); }

    void validate() const {
        if (cells.size() != problems.size() * solvers.size()) { throw DimensionError("results table shape mismatch"); }
        for (const auto& c : cells) {
            if (c && (!std::isfinite(*c) || *c < 0.0)) {
                throw InvalidArgument("performance indices must be finite and non-negative");
            }
        }
    }
};

struct RatioMatrix {
    std::size_t problems = 0;
    std::size_t solvers = 0;
    /// r_ps row-major; failed cells are +inf.
    std::vector<double> ratios;
    /// Problems whose best value was clamped up to kRatioFloor.
    std::vector<std::size_t> clamped_rows;

    [[nodiscard]] double at(std::size_t p, std::size_t s) const { return ratios.at(p * solvers + s); }
};

/// r_ps = t_ps / max(min_s t_ps, kRatioFloor).
inline RatioMatrix performance_ratio(const ResultsTable& table) {
    table.validate();
    RatioMatrix r;
    r.problems = table.num_problems();
    r.solvers = table.num_solvers();
    r.ratios.assign(r.problems * r.solvers, std::numeric_limits<double>::infinity());
    for (std::size_t p = 0; p < r.problems; ++p) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < r.solvers; ++s) {
            if (const auto& c = table.at(p, s)) { best = std::min(best, *c); }
        }
        if (!std::isfinite(best)) {
            throw InvalidArgument("every solver failed on problem '" + table.problems[p] + "'");
        }
        if (best < kRatioFloor) {
            best = kRatioFloor;
            r.clamped_rows.push_back(p);
        }
        for (std::size_t s = 0; s < r.solvers; ++s) {
            if (const auto& c = table.at(p, s)) {
                // Values below the floor tie with the best.
                r.ratios[p * r.solvers + s] = std::max(*c, kRatioFloor) / best;
            }
        }
    }
    return r;
}

struct ProfileCurve {
    std::vector<std::string> solvers;
    std::vector<double> alphas;
    /// rho[s][k] = fraction of problems with r_ps <= alphas[k].
    std::vector<std::vector<double>> rho;
};

/// rho_s(alpha) = |{p : r_ps <= alpha}| / n_p.
inline ProfileCurve performance_profile(const RatioMatrix& r, const std::vector<double>& alphas,
                                        std::vector<std::string> solver_names = {}) {
    if (r.problems == 0 || r.solvers == 0) { throw InvalidArgument("empty ratio matrix"); }
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        if (!(alphas[k] >= 1.0) || (k > 0 && !(alphas[k] > alphas[k - 1]))) {
            throw InvalidArgument("profile alphas must be >= 1 and strictly increasing");
        }
    }
    if (solver_names.empty()) {
        for (std::size_t s = 0; s < r.solvers; ++s) { solver_names.push_back("solver" + std::to_string(s)); }
    }
    ProfileCurve curve{std::move(solver_names), alphas, {}};
    curve.rho.assign(r.solvers, std::vector<double>(alphas.size(), 0.0));
    for (std::size_t s = 0; s < r.solvers; ++s) {
        for (std::size_t k = 0; k < alphas.size(); ++k) {
            std::size_t count = 0;
            for (std::size_t p = 0; p < r.problems; ++p) {
                if (r.at(p, s) <= alphas[k]) { ++count; }
            }
            curve.rho[s][k] = static_cast<double>(count) / static_cast<double>(r.problems);
        }
    }
    return curve;
}

/// A training method under comparison. `run` receives the dataset, the epoch
/// budget and the replica seed.
struct SolverSpec {
    std::string id;
    std::function<TrainRun(const Dataset&, std::size_t max_epochs, std::uint64_t seed)> run;
};

inline SolverSpec make_standard_solver(std::size_t hidden = 100, double tol = 1e-6, LbfgsConfig cfg = {}) {
    return {"standard", [=](const Dataset& d, std::size_t budget, std::uint64_t seed) {
                return standard_train(d, hidden, tol, budget, seed, mse_loss(), tanh_activation(), cfg);
            }};
}

inline SolverSpec make_ita_solver(ItaConfig base = {}) {
    return {"ita", [=](const Dataset& d, std::size_t budget, std::uint64_t seed) {
                ItaConfig cfg = base;
                cfg.seed = seed;
                cfg.total_epoch_budget = budget;
                return ita_train(d, cfg);
            }};
}

/// splitmix64 finaliser; mixes the base seed with problem and replica indices.
inline std::uint64_t cell_seed(std::uint64_t base, std::uint64_t problem, std::uint64_t replica) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(base) ^ problem) ^ (replica << 32 | replica));
}

struct CellRun {
    std::size_t problem = 0;
    std::size_t replica = 0;
    std::size_t solver = 0;
    std::uint64_t seed = 0;
    std::optional<TrainRun> run;
    std::string error;
    double seconds = 0.0;
};

struct BenchmarkResult {
    /// One table per epoch budget, in the order the budgets were given.
    std::vector<ResultsTable> tables;
    /// All cells in (problem, replica, solver) order.
    std::vector<CellRun> cells;
};

struct BenchmarkOptions {
    std::size_t replicas = 10;
    std::vector<std::size_t> budgets{100, 500, 1000};
    std::uint64_t base_seed = 1;
    std::size_t jobs = 1;
};

/// Runs every (problem, replica, solver) cell once with the largest budget
/// and reads smaller budgets off the per-epoch loss trace, so every table is
/// a prefix snapshot of the same runs. Cell failures are recorded, not thrown.
/// Both solvers of a replica share the replica seed.
inline BenchmarkResult run_benchmark(const std::vector<Dataset>& problems, const std::vector<SolverSpec>& solvers,
                                     const BenchmarkOptions& opt) {
    if (problems.empty()) { throw InvalidArgument("benchmark needs at least one problem"); }
    if (solvers.empty()) { throw InvalidArgument("benchmark needs at least one solver"); }
    if (opt.replicas == 0) { throw InvalidArgument("benchmark needs at least one replica"); }
    if (opt.budgets.empty()) { throw InvalidArgument("benchmark needs at least one epoch budget"); }
    const std::size_t max_budget = *std::max_element(opt.budgets.begin(), opt.budgets.end());

    BenchmarkResult out;
    for (std::size_t p = 0; p < problems.size(); ++p) {
        for (std::size_t r = 0; r < opt.replicas; ++r) {
            for (std::size_t s = 0; s < solvers.size(); ++s) {
                out.cells.push_back({p, r, s, cell_seed(opt.base_seed, p, r), std::nullopt, {}, 0.0});
            }
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < out.cells.size(); i = next++) {
            CellRun& cell = out.cells[i];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                cell.run = solvers[cell.solver].run(problems[cell.problem], max_budget, cell.seed);
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(opt.jobs, out.cells.size()));
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) { pool.emplace_back(worker); }
    worker();
    for (auto& t : pool) { t.join(); }

    std::vector<std::string> problem_ids, names, solver_ids;
    std::vector<std::size_t> replicas;
    for (std::size_t p = 0; p < problems.size(); ++p) {
        for (std::size_t r = 0; r < opt.replicas; ++r) {
            problem_ids.push_back(problems[p].name + "#" + std::to_string(r));
            names.push_back(problems[p].name);
            replicas.push_back(r);
        }
    }
    for (const auto& s : solvers) { solver_ids.push_back(s.id); }
    for (std::size_t budget : opt.budgets) {
        ResultsTable table{problem_ids, solver_ids};
        table.problem_names = names;
        table.replicas = replicas;
        table.budget = budget;
        for (const auto& cell : out.cells) {
            if (cell.run) {
                const double v = cell.run->risk_at_epoch(budget);
                if (std::isfinite(v)) { table.at(cell.problem * opt.replicas + cell.replica, cell.solver) = v; }
            }
        }
        out.tables.push_back(std::move(table));
    }
    return out;
}

/// Five-number summary with quartiles by linear interpolation between order
/// statistics: Q(q) = x_(floor(h)) + (h - floor(h)) (x_(floor(h)+1) - x_(floor(h))),
/// h = q (N - 1), zero-based.
struct FiveNumberSummary {
    std::size_t count = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

inline double quantile_linear(std::vector<double> sorted, double q) {
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline FiveNumberSummary summary_stats(std::vector<double> values) {
    if (values.empty()) { throw InvalidArgument("summary of an empty sample"); }
    std::sort(values.begin(), values.end());
    FiveNumberSummary s;
    s.count = values.size();
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile_linear(values, 0.25);
    s.median = quantile_linear(values, 0.5);
    s.q3 = quantile_linear(values, 0.75);
    return s;
}

struct CellSummary {
    std::string problem;
    std::string solver;
    std::size_t budget = 0;
    FiveNumberSummary stats;
};

/// Per (problem, solver) summary of final risks across replicas of a table.
inline std::vector<CellSummary> summarize_table(const ResultsTable& table) {
    std::vector<std::string> order;
    std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
    for (std::size_t p = 0; p < table.num_problems(); ++p) {
        const auto& name = table.problem_names[p];
        if (std::find(order.begin(), order.end(), name) == order.end()) { order.push_back(name); }
        for (std::size_t s = 0; s < table.num_solvers(); ++s) {
            if (const auto& c = table.at(p, s)) { groups[{name, s}].push_back(*c); }
        }
    }
    std::vector<CellSummary> out;
    for (const auto& name : order) {
        for (std::size_t s = 0; s < table.num_solvers(); ++s) {
            auto it = groups.find({name, s});
            if (it == groups.end()) { continue; }
            out.push_back({name, table.solvers[s], table.budget, summary_stats(it->second)});
        }
    }
    return out;
}

} // namespace grownet
