#pragma once

#include "grownet/bench.hpp"
#include "grownet/data.hpp"
#include "grownet/errors.hpp"
#include "grownet/stationarity.hpp"
#include "grownet/topology.hpp"
#include "grownet/training.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace grownet {

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_double(double v) {
    if (std::isnan(v)) { return "nan"; }
    if (std::isinf(v)) { return v > 0 ? "inf" : "-inf"; }
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

// ---------------------------------------------------------------------------
// Model files
//
// Binary layout, all integers and doubles little-endian:
//   8 bytes   magic "GRNTMDL\0"
//   u32       format version (1)
//   u32       number of layer sizes (L + 1)
//   u64 x (L+1) layer sizes H_0 .. H_L
//   u64       parameter count q
//   f64 x q   flat parameter vector (per layer, per neuron: bias, weights)
// ---------------------------------------------------------------------------

inline constexpr std::array<char, 8> kModelMagic{'G', 'R', 'N', 'T', 'M', 'D', 'L', '\0'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

template <class T>
void put_le(std::ostream& os, T value) {
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) { bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff); }
    os.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> bytes{};
    is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!is) { throw IoError("model file truncated"); }
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) { value |= static_cast<T>(bytes[i]) << (8 * i); }
    return value;
}

} // namespace detail

inline void write_model(std::ostream& os, const ParamVector& theta) {
    os.write(kModelMagic.data(), kModelMagic.size());
    detail::put_le<std::uint32_t>(os, kModelVersion);
    const auto sizes = theta.topology().sizes();
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(sizes.size()));
    for (auto s : sizes) { detail::put_le<std::uint64_t>(os, s); }
    detail::put_le<std::uint64_t>(os, theta.size());
    for (double v : theta.flat()) { detail::put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v)); }
}

inline ParamVector read_model(std::istream& is) {
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kModelMagic) { throw IoError("not a model file (bad magic)"); }
    const auto version = detail::get_le<std::uint32_t>(is);
    if (version != kModelVersion) { throw IoError("unsupported model version " + std::to_string(version)); }
    const auto count = detail::get_le<std::uint32_t>(is);
    if (count < 2 || count > 1024) { throw IoError("implausible layer count in model file"); }
    std::vector<std::size_t> sizes(count);
    for (auto& s : sizes) { s = static_cast<std::size_t>(detail::get_le<std::uint64_t>(is)); }
    Topology t{sizes};
    const auto q = detail::get_le<std::uint64_t>(is);
    if (q != t.param_count()) { throw IoError("model parameter count does not match its topology"); }
    std::vector<double> flat(q);
    for (auto& v : flat) { v = std::bit_cast<double>(detail::get_le<std::uint64_t>(is)); }
    return ParamVector{std::move(t), std::move(flat)};
}

inline void save_model(const std::string& path, const ParamVector& theta) {
    std::ofstream os{path, std::ios::binary};
    if (!os) { throw IoError("cannot write '" + path + "'"); }
    write_model(os, theta);
}

inline ParamVector load_model(const std::string& path) {
    std::ifstream is{path, std::ios::binary};
    if (!is) { throw IoError("cannot open '" + path + "'"); }
    return read_model(is);
}

/// Plain-text export: a topology line, then one line per neuron with its
/// bias and incoming weights.
inline void write_model_text(std::ostream& os, const ParamVector& theta) {
    const Topology& t = theta.topology();
    os << "# grownet model v" << kModelVersion << "\n";
    os << "topology";
    for (auto s : t.sizes()) { os << ' ' << s; }
    os << "\n";
    for (std::size_t l = 1; l <= t.depth(); ++l) {
        for (std::size_t j = 0; j < t.width(l); ++j) {
            os << "layer " << l << " neuron " << j << " bias " << format_double(theta.bias(l, j)) << " weights";
            for (double w : theta.row(l, j)) { os << ' ' << format_double(w); }
            os << "\n";
        }
    }
}

/// Writes a dataset as CSV with columns x0..x{n-1}, y0..y{m-1}.
inline void write_dataset_csv(std::ostream& os, const Dataset& d) {
    for (std::size_t i = 0; i < d.input_dim(); ++i) { os << (i ? "," : "") << 'x' << i; }
    for (std::size_t r = 0; r < d.output_dim(); ++r) { os << ",y" << r; }
    os << "\n";
    for (std::size_t p = 0; p < d.size(); ++p) {
        const auto x = d.x(p);
        const auto y = d.y(p);
        for (std::size_t i = 0; i < x.size(); ++i) { os << (i ? "," : "") << format_double(x[i]); }
        for (double v : y) { os << ',' << format_double(v); }
        os << "\n";
    }
}

// ---------------------------------------------------------------------------
// Metrics and reports
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const EpochRecord& r) {
    return {{"stage", r.stage},   {"width", r.width},         {"epoch", r.epoch},
            {"risk", r.risk},     {"grad_norm", r.grad_norm}, {"event", to_string(r.event)}};
}

inline EpochRecord epoch_record_from_json(const nlohmann::json& j) {
    EpochRecord r;
    r.stage = j.at("stage").get<std::size_t>();
    r.width = j.at("width").get<std::size_t>();
    r.epoch = j.at("epoch").get<std::size_t>();
    r.risk = j.at("risk").get<double>();
    r.grad_norm = j.at("grad_norm").get<double>();
    const auto ev = j.at("event").get<std::string>();
    r.event = ev == "init" ? EpochEvent::Init : ev == "grow" ? EpochEvent::Grow : EpochEvent::Step;
    return r;
}

inline void write_stages_csv(std::ostream& os, const TrainRun& run) {
    os << "stage,width,start_risk,start_grad_norm,end_risk,end_grad_norm,iterations,termination,embed_attempts\n";
    for (std::size_t k = 0; k < run.stages.size(); ++k) {
        const auto& s = run.stages[k];
        os << k << ',' << s.width << ',' << format_double(s.start_risk) << ',' << format_double(s.start_grad_norm)
           << ',' << format_double(s.end_risk) << ',' << format_double(s.end_grad_norm) << ',' << s.iterations << ','
           << to_string(s.termination) << ',' << s.embed_attempts << "\n";
    }
}

// ---------------------------------------------------------------------------
// Benchmark tables
//
// results CSV:  problem,solver,replica,budget,final_risk   (final_risk empty
//               for failed cells)
// profile CSV:  alpha,<solver_1>,...,<solver_k>
// summary CSV:  problem,solver,budget,count,min,q1,median,q3,max
// ---------------------------------------------------------------------------

inline void write_results_csv(std::ostream& os, const ResultsTable& table) {
    os << "problem,solver,replica,budget,final_risk\n";
    for (std::size_t p = 0; p < table.num_problems(); ++p) {
        for (std::size_t s = 0; s < table.num_solvers(); ++s) {
            os << table.problem_names[p] << ',' << table.solvers[s] << ',' << table.replicas[p] << ','
               << table.budget << ',';
            if (const auto& c = table.at(p, s)) { os << format_double(*c); }
            os << "\n";
        }
    }
}

inline ResultsTable read_results_csv(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) { throw ParseError(1, "empty results table"); }
    ++line_no;
    if (detail::trim(line) != "problem,solver,replica,budget,final_risk") {
        throw ParseError(1, "unexpected results header '" + line + "'");
    }
    struct Row {
        std::string problem, solver;
        std::size_t replica;
        std::size_t budget;
        std::optional<double> value;
    };
    std::vector<Row> rows;
    while (std::getline(is, line)) {
        ++line_no;
        if (detail::trim(line).empty()) { continue; }
        auto f = detail::split(line, ',');
        if (f.size() != 5) { throw ParseError(line_no, "expected 5 fields"); }
        Row r;
        r.problem = std::string{detail::trim(f[0])};
        r.solver = std::string{detail::trim(f[1])};
        const auto rep = detail::parse_number(f[2]);
        const auto bud = detail::parse_number(f[3]);
        if (!rep || !bud || *rep < 0 || *bud < 0) { throw ParseError(line_no, "bad replica or budget"); }
        r.replica = static_cast<std::size_t>(*rep);
        r.budget = static_cast<std::size_t>(*bud);
        if (!detail::trim(f[4]).empty()) {
            r.value = detail::parse_number(f[4]);
            if (!r.value) { throw ParseError(line_no, "bad final_risk value"); }
        }
        rows.push_back(std::move(r));
    }
    if (rows.empty()) { throw ParseError(line_no, "results table has no rows"); }

    std::vector<std::string> problem_ids, names, solvers;
    std::vector<std::size_t> replicas;
    std::map<std::string, std::size_t> problem_index, solver_index;
    for (const auto& r : rows) {
        const std::string id = r.problem + "#" + std::to_string(r.replica);
        if (problem_index.emplace(id, problem_ids.size()).second) {
            problem_ids.push_back(id);
            names.push_back(r.problem);
            replicas.push_back(r.replica);
        }
        if (solver_index.emplace(r.solver, solvers.size()).second) { solvers.push_back(r.solver); }
    }
    ResultsTable table{problem_ids, solvers};
    table.problem_names = names;
    table.replicas = replicas;
    table.budget = rows.front().budget;
    for (const auto& r : rows) {
        table.at(problem_index.at(r.problem + "#" + std::to_string(r.replica)), solver_index.at(r.solver)) = r.value;
    }
    return table;
}

inline void write_profile_csv(std::ostream& os, const ProfileCurve& curve) {
    os << "alpha";
    for (const auto& s : curve.solvers) { os << ',' << s; }
    os << "\n";
    for (std::size_t k = 0; k < curve.alphas.size(); ++k) {
        os << format_double(curve.alphas[k]);
        for (std::size_t s = 0; s < curve.solvers.size(); ++s) { os << ',' << format_double(curve.rho[s][k]); }
        os << "\n";
    }
}

inline void write_summary_csv(std::ostream& os, const std::vector<CellSummary>& rows) {
    os << "problem,solver,budget,count,min,q1,median,q3,max\n";
    for (const auto& r : rows) {
        os << r.problem << ',' << r.solver << ',' << r.budget << ',' << r.stats.count << ','
           << format_double(r.stats.min) << ',' << format_double(r.stats.q1) << ','
           << format_double(r.stats.median) << ',' << format_double(r.stats.q3) << ','
           << format_double(r.stats.max) << "\n";
    }
}

/// Default alpha grid: 1 to 10 in steps of 0.05, then up to 1000 on a log grid.
inline std::vector<double> default_alpha_grid() {
    std::vector<double> out;
    for (int i = 0; i <= 180; ++i) { out.push_back(1.0 + 0.05 * i); }
    for (int i = 1; i <= 40; ++i) { out.push_back(10.0 * std::pow(10.0, i / 20.0)); }
    return out;
}

} // namespace grownet
