#pragma once

#include "yescert/matrix.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace yescert {

// Both kinds are 1-Lipschitz and act as the identity on their own range
// (nonnegative orthant for ReLU, all reals for Identity).
enum class Activation { ReLU, Identity };

std::string_view to_string(Activation a) noexcept;
Activation activation_from_string(std::string_view name);

double apply(Activation a, double v) noexcept;
void apply_inplace(Activation a, Matrix& m) noexcept;
// True when every entry lies in the range of the activation.
bool in_range(Activation a, const Matrix& m) noexcept;

struct Layer {
    Matrix weight; // out x in
    std::optional<std::vector<double>> bias;
    Activation activation = Activation::ReLU;
};

struct MlpParams {
    std::vector<Layer> layers;

    std::size_t depth() const noexcept { return layers.size(); }
    std::size_t input_dim() const { return layers.front().weight.cols(); }
    std::size_t output_dim() const { return layers.back().weight.rows(); }
    bool has_bias() const noexcept;
    std::size_t parameter_count() const noexcept;
    std::vector<Activation> activations() const;
};

// Gradients share the parameter layout.
using Gradients = MlpParams;

// Weights ~ N(0, 1/fan_in), biases zero. `layer_dims` = {in, h1, ..., out}.
MlpParams init_params(std::span<const std::size_t> layer_dims, bool use_bias,
                      std::span<const Activation> activations, std::uint64_t seed);

// Throws DimensionError naming the offending layer when dims do not chain.
void validate(const MlpParams& params);

struct ForwardResult {
    Matrix output;
    // layer_outputs[0] is the input; layer_outputs[k] is the output after layer k.
    std::vector<Matrix> layer_outputs;
};

ForwardResult forward(const MlpParams& params, const Matrix& x);
// Output only, without keeping intermediates.
Matrix predict(const MlpParams& params, const Matrix& x);

// ||output - y||_F^2 / d with d = number of columns.
double loss_mse(const Matrix& output, const Matrix& y);

// Exact gradient of loss_mse(forward(params, x).output, y). ReLU'(0) = 0.
Gradients backward(const MlpParams& params, const Matrix& x, const Matrix& y);

// sqrt(sum of squared parameter differences / total parameter count).
double weight_change_norm(const MlpParams& prev, const MlpParams& next);

} // namespace yescert
