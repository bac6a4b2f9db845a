#pragma once

#include "grownet/errors.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace grownet {

/// Layer widths [H_0 = n, H_1, ..., H_L = m] of a dense feedforward network.
///
/// Layer 0 is the input; layers 1..L carry parameters. Layers 1..L-1 are
/// hidden (tanh by default) and layer L is the linear output layer.
class Topology {
  public:
    Topology() = default;

    explicit Topology(std::vector<std::size_t> layer_sizes) : sizes_{std::move(layer_sizes)} {
        if (sizes_.size() < 2) {
            throw DimensionError("topology needs at least an input and an output layer");
        }
        for (std::size_t s : sizes_) {
            if (s == 0) { throw DimensionError("topology layer sizes must be positive"); }
        }
        offsets_.assign(sizes_.size() + 1, 0);
        // offsets_[l] is the flat index of the first parameter of layer l (l >= 1).
        for (std::size_t l = 1; l < sizes_.size(); ++l) {
            offsets_[l + 1] = offsets_[l] + sizes_[l] * (sizes_[l - 1] + 1);
        }
    }

    /// Number of non-input layers L.
    [[nodiscard]] std::size_t depth() const noexcept { return sizes_.empty() ? 0 : sizes_.size() - 1; }
    [[nodiscard]] std::size_t width(std::size_t layer) const { return sizes_.at(layer); }
    [[nodiscard]] std::size_t inputs() const { return sizes_.front(); }
    [[nodiscard]] std::size_t outputs() const { return sizes_.back(); }
    [[nodiscard]] std::span<const std::size_t> sizes() const noexcept { return sizes_; }

    [[nodiscard]] std::size_t param_count() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }

    /// Flat offset of the parameter block of `layer` (1..L).
    [[nodiscard]] std::size_t layer_offset(std::size_t layer) const { return offsets_.at(layer); }
    /// Stride between consecutive neurons of `layer`: one bias plus H_{layer-1} weights.
    [[nodiscard]] std::size_t row_stride(std::size_t layer) const { return sizes_.at(layer - 1) + 1; }

    [[nodiscard]] std::string to_string() const {
        std::string out = "[";
        for (std::size_t i = 0; i < sizes_.size(); ++i) {
            if (i) { out += ','; }
            out += std::to_string(sizes_[i]);
        }
        return out + "]";
    }

    friend bool operator==(const Topology& a, const Topology& b) noexcept { return a.sizes_ == b.sizes_; }

  private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> offsets_;
};

inline Topology build_topology(std::vector<std::size_t> layer_sizes) { return Topology{std::move(layer_sizes)}; }

/// q = sum_{i<L} H_i H_{i+1} + sum_{i>=1} H_i.
inline std::size_t param_count(const Topology& t) noexcept { return t.param_count(); }

struct ParamTag {};
struct GradientTag {};

/// Flat vector laid out per layer (ascending), per neuron: the bias followed
/// by the incoming weight row. Neuron and input indices are zero-based;
/// layers are numbered 1..L.
template <class Tag>
class LayeredVector {
  public:
    LayeredVector() = default;

    explicit LayeredVector(Topology topology)
        : topology_{std::move(topology)}, flat_(topology_.param_count(), 0.0) {}

    LayeredVector(Topology topology, std::vector<double> flat)
        : topology_{std::move(topology)}, flat_{std::move(flat)} {
        if (flat_.size() != topology_.param_count()) {
            throw DimensionError("flat vector has " + std::to_string(flat_.size()) +
                                 " entries, topology " + topology_.to_string() + " needs " +
                                 std::to_string(topology_.param_count()));
        }
    }

    [[nodiscard]] const Topology& topology() const noexcept { return topology_; }
    [[nodiscard]] std::size_t size() const noexcept { return flat_.size(); }
    [[nodiscard]] std::span<const double> flat() const noexcept { return flat_; }
    [[nodiscard]] std::span<double> flat() noexcept { return flat_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return flat_; }

    [[nodiscard]] std::size_t bias_index(std::size_t layer, std::size_t j) const {
        check(layer, j);
        return topology_.layer_offset(layer) + j * topology_.row_stride(layer);
    }
    [[nodiscard]] std::size_t weight_index(std::size_t layer, std::size_t j, std::size_t i) const {
        if (i >= topology_.width(layer - 1)) { throw DimensionError("weight input index out of range"); }
        return bias_index(layer, j) + 1 + i;
    }

    [[nodiscard]] double bias(std::size_t layer, std::size_t j) const { return flat_[bias_index(layer, j)]; }
    [[nodiscard]] double& bias(std::size_t layer, std::size_t j) { return flat_[bias_index(layer, j)]; }
    [[nodiscard]] double weight(std::size_t layer, std::size_t j, std::size_t i) const {
        return flat_[weight_index(layer, j, i)];
    }
    [[nodiscard]] double& weight(std::size_t layer, std::size_t j, std::size_t i) {
        return flat_[weight_index(layer, j, i)];
    }

    /// Incoming weight row of neuron j in `layer` (without the bias).
    [[nodiscard]] std::span<const double> row(std::size_t layer, std::size_t j) const {
        return std::span<const double>{flat_}.subspan(bias_index(layer, j) + 1, topology_.width(layer - 1));
    }
    [[nodiscard]] std::span<double> row(std::size_t layer, std::size_t j) {
        return std::span<double>{flat_}.subspan(bias_index(layer, j) + 1, topology_.width(layer - 1));
    }

    /// Whole block of `layer`: H_layer rows of (bias, weights...).
    [[nodiscard]] std::span<const double> block(std::size_t layer) const {
        return std::span<const double>{flat_}.subspan(topology_.layer_offset(layer),
                                                      topology_.layer_offset(layer + 1) -
                                                          topology_.layer_offset(layer));
    }

    friend bool operator==(const LayeredVector& a, const LayeredVector& b) noexcept {
        return a.topology_ == b.topology_ && a.flat_ == b.flat_;
    }

  private:
    void check(std::size_t layer, std::size_t j) const {
        if (layer == 0 || layer > topology_.depth()) { throw DimensionError("layer index out of range"); }
        if (j >= topology_.width(layer)) { throw DimensionError("neuron index out of range"); }
    }

    Topology topology_;
    std::vector<double> flat_;
};

using ParamVector = LayeredVector<ParamTag>;
using GradientVector = LayeredVector<GradientTag>;

} // namespace grownet
