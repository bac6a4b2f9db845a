// grownet command-line front end.
//
//   grownet train   --data iris.csv --hidden 100 --tol 1e-6 --maxit 1000 --seed 1 --out runs/std
//   grownet ita     --data iris.csv --h0 10 --hmax 100 --seed 1 --out runs/ita
//   grownet embed   --model runs/ita/model.bin --map gamma --layer 1 --count 2 --out runs/grown
//   grownet verify  --out runs/verify [--negative-controls] [--map alpha --expect-escape]
//   grownet bench   --synthetic teacher_net,polynomial --replicas 2 --budgets 100,500 --out runs/bench
//   grownet profile --results runs/bench/results_500.csv --out runs/profile
//   grownet synth   --kind sinusoid --samples 200 --out runs/data
//
// Exit codes: 0 success, 1 runtime failure, 2 usage, configuration or I/O error.

#include "grownet/grownet.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace grownet;
using json = nlohmann::ordered_json;

namespace {

// Configuration problems detected after parsing; reported with exit code 2.
struct UsageError : Error {
    using Error::Error;
};

std::ofstream open_output(const fs::path& dir, const std::string& name) {
    std::ofstream os{dir / name, std::ios::binary};
    if (!os) { throw IoError("cannot write '" + (dir / name).string() + "'"); }
    return os;
}

fs::path prepare_out_dir(const std::string& out, const CLI::App& cmd) {
    const fs::path dir{out};
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) { throw IoError("cannot create output directory '" + out + "': " + ec.message()); }
    auto os = open_output(dir, "config.ini");
    os << "# effective configuration; reusable with --config\n";
    os << '[' << cmd.get_name() << "]\n" << cmd.config_to_str(true, false);
    return dir;
}

void save_model_files(const fs::path& dir, const ParamVector& theta) {
    save_model((dir / "model.bin").string(), theta);
    auto os = open_output(dir, "model.txt");
    write_model_text(os, theta);
}

// ---------------------------------------------------------------------------
// Dataset selection shared by train and ita
// ---------------------------------------------------------------------------

struct DataArgs {
    std::string path;
    std::string synthetic;
    std::string targets = "last";
    bool no_header = false;
    char delimiter = ',';
    bool raw = false;
    std::size_t samples = 100;
    std::size_t inputs = 2;
    std::size_t outputs = 1;
    double noise = 0.0;
    std::uint64_t data_seed = 1;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--data", path, "delimited data file");
        cmd->add_option("--synthetic", synthetic, "synthetic problem: teacher_net, polynomial, sinusoid");
        cmd->add_option("--targets", targets, "target columns: last, last-k or an index list")->capture_default_str();
        cmd->add_flag("--no-header", no_header, "data file has no header row");
        cmd->add_option("--delimiter", delimiter, "field delimiter")->capture_default_str();
        cmd->add_flag("--raw", raw, "skip input standardization");
        cmd->add_option("--samples", samples, "synthetic sample count")->capture_default_str();
        cmd->add_option("--inputs", inputs, "synthetic input dimension")->capture_default_str();
        cmd->add_option("--outputs", outputs, "synthetic output dimension")->capture_default_str();
        cmd->add_option("--noise", noise, "synthetic target noise level")->capture_default_str();
        cmd->add_option("--data-seed", data_seed, "synthetic generator seed")->capture_default_str();
    }

    void validate() const {
        if (path.empty() == synthetic.empty()) { throw UsageError("give exactly one of --data and --synthetic"); }
        TargetColumns::parse(targets);
        if (!synthetic.empty()) { synthetic_kind_from_string(synthetic); }
    }

    [[nodiscard]] Dataset load() const {
        Dataset d = [&] {
            if (!path.empty()) {
                LoadOptions opt;
                opt.has_header = !no_header;
                opt.delimiter = delimiter;
                opt.targets = TargetColumns::parse(targets);
                return load_delimited(path, opt);
            }
            SyntheticOptions opt;
            opt.kind = synthetic_kind_from_string(synthetic);
            opt.samples = samples;
            opt.inputs = inputs;
            opt.outputs = outputs;
            opt.noise = noise;
            opt.seed = data_seed;
            return make_synthetic(opt).data;
        }();
        return raw || d.size() < 2 ? d : standardize(d);
    }
};

struct OptimizerArgs {
    LbfgsConfig cfg;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--memory", cfg.memory, "L-BFGS memory")->capture_default_str();
        cmd->add_option("--wolfe-c1", cfg.wolfe_c1, "sufficient decrease constant")->capture_default_str();
        cmd->add_option("--wolfe-c2", cfg.wolfe_c2, "curvature constant")->capture_default_str();
        cmd->add_option("--line-search-steps", cfg.max_line_search_steps, "line search evaluation budget")
            ->capture_default_str();
    }
};

class MetricsWriter {
  public:
    explicit MetricsWriter(const fs::path& dir) : os_{open_output(dir, "metrics.jsonl")} {}
    void operator()(const EpochRecord& r) { os_ << to_json(r).dump() << '\n'; }

  private:
    std::ofstream os_;
};

json run_summary(const TrainRun& run) {
    const auto& last = run.stages.back();
    return {{"final_risk", run.final_risk()},
            {"final_grad_norm", last.end_grad_norm},
            {"epochs", run.cumulative_epochs},
            {"final_width", last.width},
            {"stages", run.stages.size()},
            {"termination", to_string(last.termination)}};
}

// ---------------------------------------------------------------------------
// train / ita
// ---------------------------------------------------------------------------

struct TrainArgs {
    DataArgs data;
    OptimizerArgs optimizer;
    std::size_t hidden = 100;
    double tol = 1e-6;
    std::size_t maxit = 1000;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_train(const TrainArgs& a, const CLI::App& cmd) {
    if (a.hidden < 1) { throw UsageError("--hidden must be at least 1"); }
    if (!(a.tol > 0.0)) { throw UsageError("--tol must be positive"); }
    a.optimizer.cfg.validate();
    a.data.validate();
    const Dataset d = a.data.load();
    const fs::path dir = prepare_out_dir(a.out, cmd);
    MetricsWriter metrics{dir};
    const TrainRun run = standard_train(d, a.hidden, a.tol, a.maxit, a.seed, mse_loss(), tanh_activation(),
                                        a.optimizer.cfg, std::ref(metrics));
    save_model_files(dir, run.theta_final);
    const json summary = run_summary(run);
    open_output(dir, "summary.json") << summary.dump(2) << '\n';
    std::cout << summary.dump() << '\n';
    return 0;
}

struct ItaArgs {
    DataArgs data;
    OptimizerArgs optimizer;
    ItaConfig cfg;
    std::string growth = "double";
    std::string out;
};

int cmd_ita(ItaArgs a, const CLI::App& cmd) {
    a.cfg.growth = growth_rule_from_string(a.growth);
    a.cfg.optimizer = a.optimizer.cfg;
    a.cfg.validate();
    a.data.validate();
    const Dataset d = a.data.load();
    const fs::path dir = prepare_out_dir(a.out, cmd);
    MetricsWriter metrics{dir};
    const TrainRun run = ita_train(d, a.cfg, mse_loss(), tanh_activation(), std::ref(metrics));
    save_model_files(dir, run.theta_final);
    {
        auto os = open_output(dir, "stages.csv");
        write_stages_csv(os, run);
    }
    const json summary = run_summary(run);
    open_output(dir, "summary.json") << summary.dump(2) << '\n';
    std::cout << summary.dump() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

struct EmbedArgs {
    std::string model;
    std::string map = "gamma";
    std::size_t layer = 1;
    std::size_t count = 1;
    std::optional<std::size_t> source;
    bool random_lambda = false;
    double beta_scale = 0.0;
    std::uint64_t seed = 1;
    std::string data_path;
    std::string targets = "last";
    std::string out;
};

int cmd_embed(const EmbedArgs& a, const CLI::App& cmd) {
    const EmbeddingKind kind = embedding_kind_from_string(a.map);
    if (a.source && kind != EmbeddingKind::Gamma) { throw UsageError("--source only applies to the gamma map"); }
    const ParamVector theta = load_model(a.model);
    detail::check_layer(theta.topology(), a.layer);

    RandomParamSource params{a.seed};
    params.random_lambda = a.random_lambda;
    params.beta_outgoing_scale = a.beta_scale;
    EmbeddingSpec spec = params(0, PlanStep{a.layer, a.count, kind}, theta);
    if (a.source) {
        if (*a.source >= theta.topology().width(a.layer)) { throw UsageError("--source is not a neuron of --layer"); }
        std::get<GammaParams>(spec.params).source = *a.source;
    }
    const ParamVector grown = embed(theta, spec);

    const fs::path dir = prepare_out_dir(a.out, cmd);
    save_model_files(dir, grown);
    json report{{"map", spec.describe()},
                {"from", theta.topology().to_string()},
                {"to", grown.topology().to_string()},
                {"preserves_stationarity", preserves_stationarity(spec)}};
    if (!a.data_path.empty()) {
        LoadOptions opt;
        opt.targets = TargetColumns::parse(a.targets);
        const Dataset d = load_delimited(a.data_path, opt);
        const auto r = verify_loss_invariance(theta, d, std::span{&spec, 1});
        report["source_risk"] = r.source_risk;
        report["embedded_risk"] = r.embedded_risk;
        report["risk_gap"] = r.risk_gap();
        report["source_grad_norm"] = r.source_grad_norm;
        report["embedded_grad_norm"] = r.embedded_grad_norm;
    }
    open_output(dir, "report.json") << report.dump(2) << '\n';
    std::cout << report.dump() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyArgs {
    std::vector<std::string> topologies{"2,1,1", "3,2,2", "2,2,2,1"};
    std::vector<std::string> maps{"alpha", "beta", "gamma"};
    std::size_t seeds = 10;
    std::uint64_t seed = 1;
    std::size_t samples = 20;
    double noise = 1.0;
    double stationary_tol = 1e-8;
    std::size_t stationary_maxit = 5000;
    std::size_t stationary_restarts = 10;
    std::size_t max_count = 3;
    bool negative_controls = false;
    bool expect_escape = false;
    std::size_t escape_draws = 50;
    double escape_threshold = 1e-3;
    double escape_fraction = 0.9;
    std::string out;
};

Topology parse_topology(const std::string& text) {
    std::vector<std::size_t> sizes;
    for (auto field : detail::split(text, ',')) {
        const auto v = detail::parse_number(field);
        if (!v || *v < 1 || *v != std::floor(*v)) { throw UsageError("bad topology '" + text + "'"); }
        sizes.push_back(static_cast<std::size_t>(*v));
    }
    if (sizes.size() < 3) { throw UsageError("topology '" + text + "' needs at least one hidden layer"); }
    return Topology{sizes};
}

// Stationary point of a small net, restarting from fresh uniform starts when
// a search diverges (weights growing without bound) or stalls.
std::optional<ParamVector> stationary_point(const Topology& t, const Dataset& d, const VerifyArgs& a,
                                            std::uint64_t seed) {
    for (std::uint64_t attempt = 0; attempt < a.stationary_restarts; ++attempt) {
        try {
            return find_stationary_point(t, d, a.stationary_tol, a.stationary_maxit, seed + attempt);
        } catch (const NonConvergence&) {
        }
    }
    return std::nullopt;
}

// Alpha growth used for escape draws: every hidden layer at once, as in
// incremental training of deep networks.
CompositePlan alpha_everywhere(const Topology& t, std::size_t count) {
    CompositePlan plan;
    for (std::size_t l = 1; l < t.depth(); ++l) { plan.steps.push_back({l, count, EmbeddingKind::Alpha}); }
    return plan;
}

json report_line(std::size_t index, std::uint64_t seed, const char* expected, const StationarityReport& r) {
    json j{{"case", index}, {"seed", seed}, {"expected", expected}};
    const json fields = r.to_json();
    for (const auto& [k, v] : fields.items()) { j[k] = v; }
    return j;
}

int cmd_verify(const VerifyArgs& a, const CLI::App& cmd) {
    std::vector<Topology> topologies;
    for (const auto& s : a.topologies) { topologies.push_back(parse_topology(s)); }
    std::vector<EmbeddingKind> maps;
    for (const auto& m : a.maps) { maps.push_back(embedding_kind_from_string(m)); }
    if (a.expect_escape && (maps.size() != 1 || maps[0] != EmbeddingKind::Alpha)) {
        throw UsageError("--expect-escape requires --map alpha");
    }
    if (a.seeds < 1 || a.max_count < 1 || a.escape_draws < 1) {
        throw UsageError("--seeds, --max-count and --escape-draws must be positive");
    }

    const fs::path dir = prepare_out_dir(a.out, cmd);
    auto report = open_output(dir, "report.jsonl");
    std::size_t index = 0, failures = 0, unexpected_controls = 0, skipped = 0;
    auto emit = [&](const json& j) {
        report << j.dump() << '\n';
        std::cout << j.dump() << '\n';
    };

    for (std::size_t ti = 0; ti < topologies.size(); ++ti) {
        const Topology& t = topologies[ti];
        const std::size_t hidden_layers = t.depth() - 1;
        // Seeds whose searches never settle are skipped, up to a fixed cap.
        std::size_t found = 0;
        for (std::size_t s = 0; found < a.seeds && s < 4 * a.seeds; ++s) {
            const std::uint64_t seed = cell_seed(a.seed, ti, s);
            SyntheticOptions so;
            so.kind = SyntheticKind::Sinusoid;
            so.inputs = t.inputs();
            so.outputs = t.outputs();
            so.samples = a.samples;
            so.noise = a.noise;
            so.seed = seed;
            const Dataset d = make_synthetic(so).data;
            const auto stationary = stationary_point(t, d, a, seed);
            if (!stationary) {
                ++skipped;
                continue;
            }
            ++found;
            const ParamVector& theta = *stationary;

            std::mt19937_64 rng{seed ^ 0x5eedULL};
            std::uniform_int_distribution<std::size_t> pick_layer{1, hidden_layers};
            std::uniform_int_distribution<std::size_t> pick_count{1, a.max_count};
            auto draw = [&](EmbeddingKind kind, RandomParamSource& src) {
                return src(0, PlanStep{pick_layer(rng), pick_count(rng), kind}, theta);
            };

            if (a.expect_escape) {
                RandomParamSource src{rng()};
                std::size_t escaped = 0;
                for (std::size_t k = 0; k < a.escape_draws; ++k) {
                    const auto grown = embed_composite(theta, alpha_everywhere(t, pick_count(rng)), std::ref(src));
                    if (verify_escape(theta, d, grown.applied, a.escape_threshold).verdict() == Verdict::Pass) {
                        ++escaped;
                    }
                }
                const double fraction = static_cast<double>(escaped) / static_cast<double>(a.escape_draws);
                const bool ok = fraction >= a.escape_fraction;
                failures += ok ? 0 : 1;
                emit(json{{"case", index++},
                          {"seed", seed},
                          {"check", "escape_rate"},
                          {"topology", t.to_string()},
                          {"source_grad_norm", grad_norm_inf(risk_and_gradient(theta, d).gradient)},
                          {"draws", a.escape_draws},
                          {"escaped", escaped},
                          {"fraction", fraction},
                          {"threshold", a.escape_threshold},
                          {"required_fraction", a.escape_fraction},
                          {"verdict", ok ? "pass" : "fail"}});
                continue;
            }

            for (EmbeddingKind kind : maps) {
                RandomParamSource src{rng()};
                src.random_lambda = true;
                const EmbeddingSpec spec = draw(kind, src);
                const auto r = kind == EmbeddingKind::Alpha
                                   ? verify_loss_invariance(theta, d, std::span{&spec, 1})
                                   : verify_stationarity_transfer(theta, d, std::span{&spec, 1});
                failures += r.verdict() == Verdict::Pass ? 0 : 1;
                emit(report_line(index++, seed, "pass", r));
            }

            if (a.negative_controls) {
                // Alpha on the last hidden layer with its outgoing weights set
                // to one: the output, and so the risk, changes.
                RandomParamSource src{rng()};
                const std::size_t last = hidden_layers;
                const EmbeddingSpec alpha = src(0, PlanStep{last, pick_count(rng), EmbeddingKind::Alpha}, theta);
                ParamVector broken = embed(theta, alpha);
                for (std::size_t j = 0; j < t.outputs(); ++j) {
                    for (std::size_t i = t.width(last); i < broken.topology().width(last); ++i) {
                        broken.weight(last + 1, j, i) = 1.0;
                    }
                }
                const auto before = risk_and_gradient(theta, d);
                const auto after = risk_and_gradient(broken, d);
                StationarityReport r;
                r.check = CheckKind::LossInvariance;
                r.map_used = alpha.describe() + "+corrupted_outgoing";
                r.topology = t.to_string() + "->" + broken.topology().to_string();
                r.source_risk = before.risk;
                r.embedded_risk = after.risk;
                r.source_grad_norm = grad_norm_inf(before.gradient);
                r.embedded_grad_norm = grad_norm_inf(after.gradient);
                unexpected_controls += r.verdict() == Verdict::Fail ? 0 : 1;
                emit(report_line(index++, seed, "fail", r));

                // Alpha with non-zero incoming weights keeps the risk but not
                // stationarity.
                const auto grown = embed_composite(theta, alpha_everywhere(t, pick_count(rng)), std::ref(src));
                const auto ra =
                    verify_stationarity_transfer(theta, d, grown.applied, mse_loss(), tanh_activation(), true);
                unexpected_controls += ra.verdict() == Verdict::Fail ? 0 : 1;
                emit(report_line(index++, seed, "fail", ra));
            }
        }
        if (found < a.seeds) {
            ++failures;
            emit(json{{"case", index++},
                      {"check", "stationary_search"},
                      {"topology", t.to_string()},
                      {"found", found},
                      {"required", a.seeds},
                      {"verdict", "fail"}});
        }
    }
    std::cerr << index << " checks, " << failures << " unexpected failures, " << unexpected_controls
              << " negative controls that passed, " << skipped << " seeds without a stationary point\n";
    return failures == 0 && unexpected_controls == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// bench / profile
// ---------------------------------------------------------------------------

struct BenchArgs {
    std::vector<std::string> synthetic{"teacher_net", "polynomial"};
    std::vector<std::string> data;
    std::size_t samples = 100;
    std::size_t inputs = 2;
    std::size_t outputs = 1;
    double noise = 0.0;
    std::size_t replicas = 10;
    std::vector<std::size_t> budgets{100, 500, 1000};
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    std::size_t hidden = 100;
    double tol = 1e-6;
    ItaConfig ita;
    bool traces = false;
    std::string out;
};

double max_continuity_gap(const TrainRun& run) {
    double gap = 0.0;
    for (std::size_t i = 1; i < run.records.size(); ++i) {
        if (run.records[i].event == EpochEvent::Grow) {
            const double before = run.records[i - 1].risk;
            gap = std::max(gap, std::abs(run.records[i].risk - before) / (1.0 + std::abs(before)));
        }
    }
    return gap;
}

int cmd_bench(BenchArgs a, const CLI::App& cmd) {
    if (a.replicas < 1) { throw UsageError("--replicas must be at least 1"); }
    if (a.budgets.empty()) { throw UsageError("--budgets must list at least one budget"); }
    if (a.synthetic.empty() && a.data.empty()) { throw UsageError("no problems selected"); }
    if (a.hidden < 1 || !(a.tol > 0.0)) { throw UsageError("--hidden must be >= 1 and --tol positive"); }
    a.ita.final_grad_tol = a.tol;
    a.ita.validate();

    std::vector<Dataset> problems;
    for (std::size_t i = 0; i < a.synthetic.size(); ++i) {
        SyntheticOptions so;
        so.kind = synthetic_kind_from_string(a.synthetic[i]);
        so.samples = a.samples;
        so.inputs = a.inputs;
        so.outputs = a.outputs;
        so.noise = a.noise;
        so.seed = cell_seed(a.seed, 1000 + i, 0);
        Dataset d = make_synthetic(so).data;
        d.name = a.synthetic[i] + "_" + std::to_string(i);
        problems.push_back(standardize(d));
    }
    for (const auto& path : a.data) { problems.push_back(standardize(load_delimited(path))); }

    const fs::path dir = prepare_out_dir(a.out, cmd);
    BenchmarkOptions opt;
    opt.replicas = a.replicas;
    opt.budgets = a.budgets;
    opt.base_seed = a.seed;
    opt.jobs = a.jobs;
    const auto result = run_benchmark(problems, {make_standard_solver(a.hidden, a.tol), make_ita_solver(a.ita)}, opt);

    for (const auto& table : result.tables) {
        const std::string b = std::to_string(table.budget);
        {
            auto os = open_output(dir, "results_" + b + ".csv");
            write_results_csv(os, table);
        }
        {
            auto os = open_output(dir, "summary_" + b + ".csv");
            write_summary_csv(os, summarize_table(table));
        }
        auto os = open_output(dir, "profile_" + b + ".csv");
        write_profile_csv(os, performance_profile(performance_ratio(table), default_alpha_grid(), table.solvers));
    }

    auto cells = open_output(dir, "cells.jsonl");
    auto timings = open_output(dir, "timings.csv");
    std::optional<std::ofstream> traces;
    if (a.traces) { traces = open_output(dir, "traces.jsonl"); }
    timings << "problem,replica,solver,seconds\n";
    std::size_t failed = 0;
    double worst_gap = 0.0;
    for (const auto& c : result.cells) {
        const std::string& problem = problems[c.problem].name;
        const std::string& solver = c.solver == 0 ? "standard" : "ita";
        json j{{"problem", problem}, {"replica", c.replica}, {"solver", solver}, {"seed", c.seed}};
        if (c.run) {
            j["final_risk"] = c.run->final_risk();
            j["epochs"] = c.run->cumulative_epochs;
            j["final_width"] = c.run->stages.back().width;
            j["continuity_gap"] = max_continuity_gap(*c.run);
            worst_gap = std::max(worst_gap, max_continuity_gap(*c.run));
            if (traces) {
                for (std::size_t e = 0; e < c.run->loss_trace.size(); ++e) {
                    *traces << json{{"problem", problem}, {"replica", c.replica}, {"solver", solver},
                                    {"epoch", e},         {"risk", c.run->loss_trace[e]}}
                                   .dump()
                            << '\n';
                }
            }
        } else {
            j["error"] = c.error;
            ++failed;
        }
        cells << j.dump() << '\n';
        timings << problem << ',' << c.replica << ',' << solver << ',' << c.seconds << '\n';
    }
    std::cout << json{{"cells", result.cells.size()}, {"failed", failed}, {"max_continuity_gap", worst_gap},
                      {"tables", result.tables.size()}}
                     .dump()
              << '\n';
    return 0;
}

struct ProfileArgs {
    std::string results;
    std::vector<double> alphas;
    std::string out;
};

int cmd_profile(const ProfileArgs& a, const CLI::App& cmd) {
    std::ifstream is{a.results};
    if (!is) { throw IoError("cannot open '" + a.results + "'"); }
    const ResultsTable table = read_results_csv(is);
    const auto alphas = a.alphas.empty() ? default_alpha_grid() : a.alphas;
    const RatioMatrix ratios = performance_ratio(table);
    const ProfileCurve curve = performance_profile(ratios, alphas, table.solvers);
    const fs::path dir = prepare_out_dir(a.out, cmd);
    auto os = open_output(dir, "profile.csv");
    write_profile_csv(os, curve);
    json summary{{"problems", table.num_problems()}, {"solvers", table.solvers}, {"clamped", ratios.clamped_rows}};
    for (std::size_t s = 0; s < curve.solvers.size(); ++s) { summary["rho_at_1"][curve.solvers[s]] = curve.rho[s][0]; }
    std::cout << summary.dump() << '\n';
    return 0;
}

struct SynthArgs {
    std::string kind = "teacher_net";
    SyntheticOptions opt;
    std::string out;
};

int cmd_synth(SynthArgs a, const CLI::App& cmd) {
    a.opt.kind = synthetic_kind_from_string(a.kind);
    const Dataset d = make_synthetic(a.opt).data;
    const fs::path dir = prepare_out_dir(a.out, cmd);
    auto os = open_output(dir, "data.csv");
    write_dataset_csv(os, d);
    std::cout << json{{"name", d.name}, {"samples", d.size()}, {"inputs", d.input_dim()}, {"outputs", d.output_dim()}}
                     .dump()
              << '\n';
    return 0;
}

bool is_usage_error(const std::exception& e) {
    return dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
           dynamic_cast<const IoError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
           dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const DimensionError*>(&e) ||
           dynamic_cast<const EmbeddingError*>(&e);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grownet: incremental training of feedforward networks via embedding maps"};
    app.set_config("--config", "", "INI/TOML file with option values (command-line flags take precedence)");
    app.require_subcommand(1);

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "train a single-hidden-layer network with L-BFGS");
    train.data.add_to(train_cmd);
    train.optimizer.add_to(train_cmd);
    train_cmd->add_option("--hidden", train.hidden, "hidden width")->capture_default_str();
    train_cmd->add_option("--tol", train.tol, "gradient tolerance (infinity norm)")->capture_default_str();
    train_cmd->add_option("--maxit", train.maxit, "iteration limit")->capture_default_str();
    train_cmd->add_option("--seed", train.seed, "initialization seed")->capture_default_str();
    train_cmd->add_option("--out", train.out, "output directory")->required();

    ItaArgs ita;
    auto* ita_cmd = app.add_subcommand("ita", "incremental training: grow the hidden layer between stages");
    ita.data.add_to(ita_cmd);
    ita.optimizer.add_to(ita_cmd);
    ita_cmd->add_option("--h0", ita.cfg.h0, "initial hidden width")->capture_default_str();
    ita_cmd->add_option("--hmax", ita.cfg.h_max, "final hidden width")->capture_default_str();
    ita_cmd->add_option("--growth", ita.growth, "growth rule: double, fixed, schedule")->capture_default_str();
    ita_cmd->add_option("--fixed-k", ita.cfg.fixed_k, "neurons added per stage for --growth fixed")
        ->capture_default_str();
    ita_cmd->add_option("--schedule", ita.cfg.schedule, "neurons added per stage for --growth schedule")
        ->delimiter(',');
    ita_cmd->add_option("--stage-tol", ita.cfg.stage_tolerances, "absolute per-stage gradient tolerances")
        ->delimiter(',');
    ita_cmd->add_option("--rel-grad-factor", ita.cfg.intermediate_rel_grad_factor,
                        "intermediate stop at this fraction of the stage's initial gradient")
        ->capture_default_str();
    ita_cmd->add_option("--loss-delta", ita.cfg.intermediate_loss_delta, "intermediate stop on |R_h - R_{h-1}|")
        ->capture_default_str();
    ita_cmd->add_flag("--relative-delta", ita.cfg.relative_loss_delta, "make --loss-delta relative to R_{h-1}");
    ita_cmd->add_option("--tol", ita.cfg.final_grad_tol, "final-stage gradient tolerance")->capture_default_str();
    ita_cmd->add_option("--maxit-per-stage", ita.cfg.maxit_per_stage, "iteration limit per stage")
        ->capture_default_str();
    ita_cmd->add_option("--epochs", ita.cfg.total_epoch_budget, "total iteration budget over all stages (0: none)")
        ->capture_default_str();
    ita_cmd->add_option("--seed", ita.cfg.seed, "initialization and growth seed")->capture_default_str();
    ita_cmd->add_option("--embed-retries", ita.cfg.embed_retry_limit, "alpha re-draws before giving up")
        ->capture_default_str();
    ita_cmd->add_option("--hidden-layers", ita.cfg.hidden_layers, "hidden layer count")->capture_default_str();
    ita_cmd->add_flag("--experimental-deep", ita.cfg.experimental_deep, "allow more than one hidden layer");
    ita_cmd->add_option("--out", ita.out, "output directory")->required();

    EmbedArgs emb;
    auto* embed_cmd = app.add_subcommand("embed", "apply an embedding map to a saved model");
    embed_cmd->add_option("--model", emb.model, "input model (.bin)")->required();
    embed_cmd->add_option("--map", emb.map, "alpha, beta or gamma")->capture_default_str();
    embed_cmd->add_option("--layer", emb.layer, "hidden layer to grow")->capture_default_str();
    embed_cmd->add_option("--count", emb.count, "neurons to add")->capture_default_str();
    embed_cmd->add_option("--source", emb.source, "neuron replicated by gamma (default: random)");
    embed_cmd->add_flag("--random-lambda", emb.random_lambda, "random split coefficients for gamma");
    embed_cmd->add_option("--beta-scale", emb.beta_scale, "scale of random beta outgoing weights (0: zero)")
        ->capture_default_str();
    embed_cmd->add_option("--seed", emb.seed, "parameter seed")->capture_default_str();
    embed_cmd->add_option("--data", emb.data_path, "dataset for a before/after risk report");
    embed_cmd->add_option("--targets", emb.targets, "target columns of --data")->capture_default_str();
    embed_cmd->add_option("--out", emb.out, "output directory")->required();

    VerifyArgs ver;
    auto* verify_cmd = app.add_subcommand("verify", "randomized checks of loss invariance and stationarity transfer");
    verify_cmd->add_option("--topology", ver.topologies, "layer sizes, e.g. 2,3,1 (repeatable)")
        ->capture_default_str();
    verify_cmd->add_option("--map", ver.maps, "maps to check (repeatable)")->capture_default_str();
    verify_cmd->add_option("--seeds", ver.seeds, "seeds per topology")->capture_default_str();
    verify_cmd->add_option("--seed", ver.seed, "base seed")->capture_default_str();
    verify_cmd->add_option("--samples", ver.samples, "samples in each regression set")->capture_default_str();
    verify_cmd->add_option("--noise", ver.noise, "target noise of each regression set")->capture_default_str();
    verify_cmd->add_option("--stationary-tol", ver.stationary_tol, "gradient tolerance of stationary points")
        ->capture_default_str();
    verify_cmd->add_option("--stationary-maxit", ver.stationary_maxit, "iteration limit of the stationary search")
        ->capture_default_str();
    verify_cmd->add_option("--stationary-restarts", ver.stationary_restarts, "fresh starts per seed")
        ->capture_default_str();
    verify_cmd->add_option("--max-count", ver.max_count, "largest K drawn per embedding")->capture_default_str();
    verify_cmd->add_flag("--negative-controls", ver.negative_controls, "also run corrupted embeddings expected to fail");
    verify_cmd->add_flag("--expect-escape", ver.expect_escape, "check that alpha leaves stationary points");
    verify_cmd->add_option("--escape-draws", ver.escape_draws, "alpha draws per stationary point")
        ->capture_default_str();
    verify_cmd->add_option("--escape-threshold", ver.escape_threshold, "gradient norm counted as an escape")
        ->capture_default_str();
    verify_cmd->add_option("--escape-fraction", ver.escape_fraction, "required escape rate")->capture_default_str();
    verify_cmd->add_option("--out", ver.out, "output directory")->required();

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "benchmark standard training against incremental training");
    bench_cmd->add_option("--synthetic", bench.synthetic, "synthetic problems")->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--data", bench.data, "data files (last column is the target)")->delimiter(',');
    bench_cmd->add_option("--samples", bench.samples, "synthetic sample count")->capture_default_str();
    bench_cmd->add_option("--inputs", bench.inputs, "synthetic input dimension")->capture_default_str();
    bench_cmd->add_option("--outputs", bench.outputs, "synthetic output dimension")->capture_default_str();
    bench_cmd->add_option("--noise", bench.noise, "synthetic target noise")->capture_default_str();
    bench_cmd->add_option("--replicas", bench.replicas, "replicas per problem")->capture_default_str();
    bench_cmd->add_option("--budgets", bench.budgets, "epoch budgets")->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "base seed")->capture_default_str();
    bench_cmd->add_option("--jobs", bench.jobs, "worker threads")->capture_default_str();
    bench_cmd->add_option("--hidden", bench.hidden, "hidden width of the standard solver")->capture_default_str();
    bench_cmd->add_option("--tol", bench.tol, "gradient tolerance of both solvers")->capture_default_str();
    bench_cmd->add_option("--h0", bench.ita.h0, "initial ITA width")->capture_default_str();
    bench_cmd->add_option("--hmax", bench.ita.h_max, "final ITA width")->capture_default_str();
    bench_cmd->add_flag("--traces", bench.traces, "write per-epoch loss traces");
    bench_cmd->add_option("--out", bench.out, "output directory")->required();

    ProfileArgs prof;
    auto* profile_cmd = app.add_subcommand("profile", "performance profile of a results table");
    profile_cmd->add_option("--results", prof.results, "results CSV")->required();
    profile_cmd->add_option("--alphas", prof.alphas, "alpha grid (default 1..10 step 0.05, then log to 1000)")
        ->delimiter(',');
    profile_cmd->add_option("--out", prof.out, "output directory")->required();

    SynthArgs syn;
    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset as CSV");
    synth_cmd->add_option("--kind", syn.kind, "teacher_net, polynomial or sinusoid")->capture_default_str();
    synth_cmd->add_option("--samples", syn.opt.samples, "sample count")->capture_default_str();
    synth_cmd->add_option("--inputs", syn.opt.inputs, "input dimension")->capture_default_str();
    synth_cmd->add_option("--outputs", syn.opt.outputs, "output dimension")->capture_default_str();
    synth_cmd->add_option("--noise", syn.opt.noise, "target noise")->capture_default_str();
    synth_cmd->add_option("--seed", syn.opt.seed, "generator seed")->capture_default_str();
    synth_cmd->add_option("--out", syn.out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*train_cmd) { return cmd_train(train, *train_cmd); }
        if (*ita_cmd) { return cmd_ita(ita, *ita_cmd); }
        if (*embed_cmd) { return cmd_embed(emb, *embed_cmd); }
        if (*verify_cmd) { return cmd_verify(ver, *verify_cmd); }
        if (*bench_cmd) { return cmd_bench(bench, *bench_cmd); }
        if (*profile_cmd) { return cmd_profile(prof, *profile_cmd); }
        if (*synth_cmd) { return cmd_synth(syn, *synth_cmd); }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_usage_error(e) ? 2 : 1;
    }
    return 2;
}
