#pragma once

#include "grownet/errors.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace grownet {

/// Dense row-major matrix of doubles.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_{rows}, cols_{cols}, data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_{rows}, cols_{cols}, data_{std::move(data)} {
        if (data_.size() != rows_ * cols_) { throw DimensionError("matrix data size mismatch"); }
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    [[nodiscard]] double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const {
        return std::span<const double>{data_}.subspan(r * cols_, cols_);
    }
    [[nodiscard]] std::span<double> row(std::size_t r) { return std::span<double>{data_}.subspan(r * cols_, cols_); }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Per-column affine normalisation x' = (x - mean) / scale.
struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> scale;
};

/// P paired samples (x^p in R^n, y^p in R^m).
struct Dataset {
    std::string name;
    Matrix inputs;
    Matrix targets;
    FeatureStats feature_stats;
    /// Names of one-hot classes when the targets came from a categorical column.
    std::vector<std::string> class_labels;

    [[nodiscard]] std::size_t size() const noexcept { return inputs.rows(); }
    [[nodiscard]] std::size_t input_dim() const noexcept { return inputs.cols(); }
    [[nodiscard]] std::size_t output_dim() const noexcept { return targets.cols(); }
    [[nodiscard]] std::span<const double> x(std::size_t p) const { return inputs.row(p); }
    [[nodiscard]] std::span<const double> y(std::size_t p) const { return targets.row(p); }
};

/// Builds a dataset and checks the invariants (P >= 1, matching rows, finite values).
inline Dataset make_dataset(std::string name, Matrix inputs, Matrix targets) {
    if (inputs.rows() == 0) { throw InvalidArgument("dataset must contain at least one sample"); }
    if (inputs.rows() != targets.rows()) { throw DimensionError("inputs and targets have different row counts"); }
    for (double v : inputs.values()) {
        if (!std::isfinite(v)) { throw InvalidArgument("non-finite input value"); }
    }
    for (double v : targets.values()) {
        if (!std::isfinite(v)) { throw InvalidArgument("non-finite target value"); }
    }
    Dataset d;
    d.name = std::move(name);
    d.inputs = std::move(inputs);
    d.targets = std::move(targets);
    return d;
}

} // namespace grownet
