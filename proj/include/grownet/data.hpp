#pragma once

#include "grownet/dataset.hpp"
#include "grownet/errors.hpp"
#include "grownet/network.hpp"
#include "grownet/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace grownet {

/// Which columns of a delimited file are targets: explicit zero-based
/// indices, or the last k columns.
struct TargetColumns {
    std::vector<std::size_t> indices;
    std::size_t last_k = 1;

    static TargetColumns last(std::size_t k) { return TargetColumns{{}, k}; }
    static TargetColumns at(std::vector<std::size_t> idx) { return TargetColumns{std::move(idx), 0}; }

    /// Parses "last-k", "last", or a comma-separated index list such as "0,3".
    static TargetColumns parse(const std::string& text) {
        if (text == "last") { return last(1); }
        if (text.rfind("last-", 0) == 0) {
            std::size_t k = 0;
            const auto tail = std::string_view{text}.substr(5);
            auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), k);
            if (ec != std::errc{} || ptr != tail.data() + tail.size() || k == 0) {
                throw ConfigError("bad target spec '" + text + "'");
            }
            return last(k);
        }
        TargetColumns out{{}, 0};
        std::stringstream ss{text};
        std::string item;
        while (std::getline(ss, item, ',')) {
            std::size_t v = 0;
            auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (ec != std::errc{} || ptr != item.data() + item.size()) {
                throw ConfigError("bad target spec '" + text + "'");
            }
            out.indices.push_back(v);
        }
        if (out.indices.empty()) { throw ConfigError("empty target spec"); }
        return out;
    }
};

struct LoadOptions {
    bool has_header = true;
    char delimiter = ',';
    TargetColumns targets = TargetColumns::last(1);
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) { s.remove_prefix(1); }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) { s.remove_suffix(1); }
    return s;
}

inline std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) { return std::nullopt; }
    if (s.front() == '+') { s.remove_prefix(1); }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) { return std::nullopt; }
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace detail

/// Reads a delimited text file. Input columns must be numeric; a target
/// column holding any non-numeric value is treated as categorical and
/// one-hot encoded (classes in order of first appearance).
inline Dataset load_delimited(const std::string& path, const LoadOptions& opt = {}) {
    std::ifstream in{path};
    if (!in) { throw IoError("cannot open '" + path + "'"); }

    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
    std::string line;
    std::size_t line_no = 0;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) { continue; }
        if (opt.has_header && line_no == 1) { continue; }
        auto fields = detail::split(line, opt.delimiter);
        if (columns == 0) {
            columns = fields.size();
        } else if (fields.size() != columns) {
            throw ParseError(line_no, "expected " + std::to_string(columns) + " fields, found " +
                                          std::to_string(fields.size()));
        }
        std::vector<std::string> row;
        row.reserve(fields.size());
        for (auto f : fields) { row.emplace_back(detail::trim(f)); }
        rows.push_back(std::move(row));
        line_numbers.push_back(line_no);
    }
    if (rows.empty()) { throw ParseError(line_no, "file '" + path + "' contains no data rows"); }

    std::vector<bool> is_target(columns, false);
    std::vector<std::size_t> target_cols;
    if (!opt.targets.indices.empty()) {
        target_cols = opt.targets.indices;
    } else {
        if (opt.targets.last_k == 0 || opt.targets.last_k >= columns) {
            throw ConfigError("target spec leaves no input columns");
        }
        for (std::size_t c = columns - opt.targets.last_k; c < columns; ++c) { target_cols.push_back(c); }
    }
    for (std::size_t c : target_cols) {
        if (c >= columns) { throw ConfigError("target column " + std::to_string(c) + " out of range"); }
        if (is_target[c]) { throw ConfigError("target column listed twice"); }
        is_target[c] = true;
    }
    if (target_cols.size() == columns) { throw ConfigError("target spec leaves no input columns"); }

    // A target column is categorical if any of its cells fails to parse.
    std::vector<bool> categorical(columns, false);
    std::vector<std::vector<std::string>> classes(columns);
    for (std::size_t c : target_cols) {
        for (const auto& row : rows) {
            if (!detail::parse_number(row[c])) {
                categorical[c] = true;
                break;
            }
        }
        if (categorical[c]) {
            for (const auto& row : rows) {
                if (std::find(classes[c].begin(), classes[c].end(), row[c]) == classes[c].end()) {
                    classes[c].push_back(row[c]);
                }
            }
        }
    }

    const std::size_t n = columns - target_cols.size();
    std::size_t m = 0;
    for (std::size_t c : target_cols) { m += categorical[c] ? classes[c].size() : 1; }

    Matrix inputs(rows.size(), n), targets(rows.size(), m);
    for (std::size_t p = 0; p < rows.size(); ++p) {
        std::size_t xi = 0;
        for (std::size_t c = 0; c < columns; ++c) {
            if (is_target[c]) { continue; }
            const auto v = detail::parse_number(rows[p][c]);
            if (!v) {
                throw ParseError(line_numbers[p], "column " + std::to_string(c) + ": '" + rows[p][c] +
                                                      "' is not a number");
            }
            inputs(p, xi++) = *v;
        }
        std::size_t yi = 0;
        for (std::size_t c : target_cols) {
            if (categorical[c]) {
                const auto it = std::find(classes[c].begin(), classes[c].end(), rows[p][c]);
                targets(p, yi + static_cast<std::size_t>(it - classes[c].begin())) = 1.0;
                yi += classes[c].size();
            } else {
                targets(p, yi++) = *detail::parse_number(rows[p][c]);
            }
        }
    }

    std::string name = path;
    if (const auto slash = name.find_last_of('/'); slash != std::string::npos) { name = name.substr(slash + 1); }
    if (const auto dot = name.find_last_of('.'); dot != std::string::npos && dot > 0) { name = name.substr(0, dot); }
    Dataset d = make_dataset(name, std::move(inputs), std::move(targets));
    for (std::size_t c : target_cols) {
        for (const auto& cls : classes[c]) { d.class_labels.push_back(cls); }
    }
    return d;
}

/// Column-wise z-score of the inputs using the sample standard deviation
/// (n - 1 denominator). Constant columns map to 0. Targets are untouched.
inline Dataset standardize(const Dataset& d) {
    if (d.size() < 2) { throw InvalidArgument("standardize needs at least two samples"); }
    Dataset out = d;
    const std::size_t P = d.size();
    FeatureStats stats;
    stats.mean.assign(d.input_dim(), 0.0);
    stats.scale.assign(d.input_dim(), 1.0);
    for (std::size_t c = 0; c < d.input_dim(); ++c) {
        double mean = 0.0;
        for (std::size_t p = 0; p < P; ++p) { mean += d.inputs(p, c); }
        mean /= static_cast<double>(P);
        double ss = 0.0;
        for (std::size_t p = 0; p < P; ++p) {
            const double dv = d.inputs(p, c) - mean;
            ss += dv * dv;
        }
        const double sd = std::sqrt(ss / static_cast<double>(P - 1));
        stats.mean[c] = mean;
        // Constant columns: scale 0 in the stats, output 0.
        stats.scale[c] = sd > 0.0 ? sd : 0.0;
        for (std::size_t p = 0; p < P; ++p) {
            out.inputs(p, c) = sd > 0.0 ? (d.inputs(p, c) - mean) / sd : 0.0;
        }
    }
    out.feature_stats = std::move(stats);
    return out;
}

enum class SyntheticKind { TeacherNet, Polynomial, Sinusoid };

inline SyntheticKind synthetic_kind_from_string(const std::string& s) {
    if (s == "teacher_net" || s == "teacher") { return SyntheticKind::TeacherNet; }
    if (s == "polynomial") { return SyntheticKind::Polynomial; }
    if (s == "sinusoid") { return SyntheticKind::Sinusoid; }
    throw ConfigError("unknown synthetic kind '" + s + "'");
}

inline const char* to_string(SyntheticKind k) noexcept {
    switch (k) {
    case SyntheticKind::TeacherNet: return "teacher_net";
    case SyntheticKind::Polynomial: return "polynomial";
    case SyntheticKind::Sinusoid: return "sinusoid";
    }
    return "?";
}

struct SyntheticOptions {
    SyntheticKind kind = SyntheticKind::TeacherNet;
    std::size_t inputs = 2;
    std::size_t outputs = 1;
    std::size_t samples = 100;
    double noise = 0.0;
    std::uint64_t seed = 1;
    /// Hidden width of the teacher network (teacher_net only).
    std::size_t teacher_width = 3;
};

struct SyntheticProblem {
    Dataset data;
    /// The generating network for teacher_net problems; a student of the same
    /// width reaches risk 0 when noise is 0.
    std::optional<ParamVector> teacher;
};

/// Reproducible synthetic regression problems with inputs drawn from
/// U(-1, 1) (U(-pi, pi) for sinusoids) and optional Gaussian target noise.
///
///  - teacher_net: y = f(x, theta_T) for a random [n, width, m] tanh network
///    with N(0, 1) parameters.
///  - polynomial:  y_r = sum_i c_{ri} x_i + sum_{i<=k} d_{rik} x_i x_k + 0.5 x_1^3,
///    coefficients from N(0, 1).
///  - sinusoid:    y_r = sin(sum_i x_i + r).
inline SyntheticProblem make_synthetic(const SyntheticOptions& opt) {
    if (opt.samples < 1) { throw InvalidArgument("synthetic problem needs at least one sample"); }
    if (opt.inputs < 1 || opt.outputs < 1) { throw InvalidArgument("synthetic problem needs n, m >= 1"); }
    std::mt19937_64 rng{opt.seed};
    std::normal_distribution<double> normal{0.0, 1.0};
    const double span = opt.kind == SyntheticKind::Sinusoid ? std::numbers::pi : 1.0;
    std::uniform_real_distribution<double> unif{-span, span};

    const std::size_t n = opt.inputs, m = opt.outputs, P = opt.samples;
    SyntheticProblem out;
    Matrix X(P, n), Y(P, m);

    std::vector<double> lin, quad;
    if (opt.kind == SyntheticKind::TeacherNet) {
        ParamVector teacher{Topology{{n, opt.teacher_width, m}}};
        for (double& v : teacher.flat()) { v = normal(rng); }
        out.teacher = std::move(teacher);
    } else if (opt.kind == SyntheticKind::Polynomial) {
        lin.resize(m * n);
        quad.resize(m * n * n);
        for (double& v : lin) { v = normal(rng); }
        for (double& v : quad) { v = normal(rng); }
    }

    for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t i = 0; i < n; ++i) { X(p, i) = unif(rng); }
        const auto x = X.row(p);
        switch (opt.kind) {
        case SyntheticKind::TeacherNet: {
            const auto rec = forward(*out.teacher, x);
            for (std::size_t r = 0; r < m; ++r) { Y(p, r) = rec.output()[r]; }
            break;
        }
        case SyntheticKind::Polynomial:
            for (std::size_t r = 0; r < m; ++r) {
                double y = 0.5 * x[0] * x[0] * x[0];
                for (std::size_t i = 0; i < n; ++i) {
                    y += lin[r * n + i] * x[i];
                    for (std::size_t k = i; k < n; ++k) { y += quad[(r * n + i) * n + k] * x[i] * x[k]; }
                }
                Y(p, r) = y;
            }
            break;
        case SyntheticKind::Sinusoid: {
            double s = 0.0;
            for (double v : x) { s += v; }
            for (std::size_t r = 0; r < m; ++r) { Y(p, r) = std::sin(s + static_cast<double>(r)); }
            break;
        }
        }
    }
    if (opt.noise > 0.0) {
        for (std::size_t p = 0; p < P; ++p) {
            for (std::size_t r = 0; r < m; ++r) { Y(p, r) += opt.noise * normal(rng); }
        }
    }
    out.data = make_dataset(std::string{to_string(opt.kind)} + "_n" + std::to_string(n) + "_s" +
                                std::to_string(opt.seed),
                            std::move(X), std::move(Y));
    return out;
}

} // namespace grownet
