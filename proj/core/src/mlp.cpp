#include "yescert/mlp.hpp"

#include "yescert/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace yescert {

std::string_view to_string(Activation a) noexcept {
    switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Identity: return "identity";
    }
    return "identity";
}

Activation activation_from_string(std::string_view name) {
    if (name == "relu" || name == "ReLU") return Activation::ReLU;
    if (name == "identity" || name == "Identity" || name == "linear") return Activation::Identity;
    throw ConfigError("", "unknown activation '" + std::string(name) + "' (expected relu or identity)");
}

double apply(Activation a, double v) noexcept {
    return a == Activation::ReLU ? (v > 0.0 ? v : 0.0) : v;
}

void apply_inplace(Activation a, Matrix& m) noexcept {
    if (a == Activation::Identity) return;
    for (double& v : m.data()) v = v > 0.0 ? v : 0.0;
}

bool in_range(Activation a, const Matrix& m) noexcept {
    if (a == Activation::Identity) return true;
    return std::all_of(m.data().begin(), m.data().end(), [](double v) { return v >= 0.0; });
}

bool MlpParams::has_bias() const noexcept {
    return std::any_of(layers.begin(), layers.end(), [](const Layer& l) { return l.bias.has_value(); });
}

std::size_t MlpParams::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.size() + (l.bias ? l.bias->size() : 0);
    return n;
}

std::vector<Activation> MlpParams::activations() const {
    std::vector<Activation> out;
    out.reserve(layers.size());
    for (const auto& l : layers) out.push_back(l.activation);
    return out;
}

MlpParams init_params(std::span<const std::size_t> layer_dims, bool use_bias,
                      std::span<const Activation> activations, std::uint64_t seed) {
    if (layer_dims.size() < 2) throw ConfigError("network.layers", "need at least an input and an output size");
    if (activations.size() != layer_dims.size() - 1) {
        throw ConfigError("network.activations", "expected " + std::to_string(layer_dims.size() - 1) +
                                                     " activations, got " + std::to_string(activations.size()));
    }
    for (std::size_t i = 0; i < layer_dims.size(); ++i) {
        if (layer_dims[i] == 0) throw ConfigError("network.layers[" + std::to_string(i) + "]", "layer size must be positive");
    }
    std::mt19937_64 rng(seed);
    MlpParams p;
    for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k) {
        const std::size_t fan_in = layer_dims[k];
        const std::size_t fan_out = layer_dims[k + 1];
        std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
        Matrix w(fan_out, fan_in);
        for (double& v : w.data()) v = dist(rng);
        Layer layer{std::move(w), std::nullopt, activations[k]};
        if (use_bias) layer.bias = std::vector<double>(fan_out, 0.0);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

void validate(const MlpParams& params) {
    if (params.layers.empty()) throw DimensionError("network has no layers");
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        const Layer& l = params.layers[k];
        if (k > 0 && l.weight.cols() != params.layers[k - 1].weight.rows()) {
            throw DimensionError("layer " + std::to_string(k + 1) + " expects " + std::to_string(l.weight.cols()) +
                                 " inputs but layer " + std::to_string(k) + " produces " +
                                 std::to_string(params.layers[k - 1].weight.rows()));
        }
        if (l.bias && l.bias->size() != l.weight.rows()) {
            throw DimensionError("layer " + std::to_string(k + 1) + " bias length " + std::to_string(l.bias->size()) +
                                 " does not match " + std::to_string(l.weight.rows()) + " outputs");
        }
    }
}

namespace {

Matrix affine(const Layer& layer, const Matrix& in, std::size_t index) {
    if (layer.weight.cols() != in.rows()) {
        throw DimensionError("layer " + std::to_string(index + 1) + ": weight " + layer.weight.shape_string() +
                             " cannot consume input " + in.shape_string());
    }
    Matrix z = matmul(layer.weight, in);
    if (layer.bias) {
        for (std::size_t r = 0; r < z.rows(); ++r) {
            const double b = (*layer.bias)[r];
            for (double& v : z.row(r)) v += b;
        }
    }
    return z;
}

} // namespace

ForwardResult forward(const MlpParams& params, const Matrix& x) {
    ForwardResult out{x, {}};
    out.layer_outputs.reserve(params.layers.size() + 1);
    out.layer_outputs.push_back(x);
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        Matrix z = affine(params.layers[k], out.layer_outputs.back(), k);
        apply_inplace(params.layers[k].activation, z);
        out.layer_outputs.push_back(std::move(z));
    }
    out.output = out.layer_outputs.back();
    return out;
}

Matrix predict(const MlpParams& params, const Matrix& x) {
    Matrix h = x;
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        h = affine(params.layers[k], h, k);
        apply_inplace(params.layers[k].activation, h);
    }
    return h;
}

double loss_mse(const Matrix& output, const Matrix& y) {
    return frob_dist_sq(output, y) / static_cast<double>(y.cols());
}

Gradients backward(const MlpParams& params, const Matrix& x, const Matrix& y) {
    const ForwardResult fw = forward(params, x);
    if (fw.output.rows() != y.rows() || fw.output.cols() != y.cols()) {
        throw DimensionError("backward: network output " + fw.output.shape_string() + " vs target " + y.shape_string());
    }
    const double scale = 2.0 / static_cast<double>(y.cols());
    // delta = dL/d(layer output), propagated backwards through activations.
    Matrix delta = fw.output - y;
    delta *= scale;

    Gradients g = params;
    for (std::size_t kk = params.layers.size(); kk-- > 0;) {
        const Layer& layer = params.layers[kk];
        const Matrix& out = fw.layer_outputs[kk + 1];
        if (layer.activation == Activation::ReLU) {
            auto dd = delta.data();
            const auto od = out.data();
            for (std::size_t i = 0; i < dd.size(); ++i)
                if (od[i] <= 0.0) dd[i] = 0.0;
        }
        g.layers[kk].weight = matmul_nt(delta, fw.layer_outputs[kk]);
        if (layer.bias) {
            auto& gb = *g.layers[kk].bias;
            for (std::size_t r = 0; r < delta.rows(); ++r) {
                double acc = 0.0;
                for (double v : delta.row(r)) acc += v;
                gb[r] = acc;
            }
        }
        if (kk > 0) delta = matmul_tn(layer.weight, delta);
    }
    return g;
}

double weight_change_norm(const MlpParams& prev, const MlpParams& next) {
    if (prev.layers.size() != next.layers.size()) throw DimensionError("weight_change_norm: layer count differs");
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < prev.layers.size(); ++k) {
        const Layer& a = prev.layers[k];
        const Layer& b = next.layers[k];
        acc += frob_dist_sq(a.weight, b.weight);
        count += a.weight.size();
        if (a.bias.has_value() != b.bias.has_value()) {
            throw DimensionError("weight_change_norm: bias presence differs at layer " + std::to_string(k + 1));
        }
        if (a.bias) {
            if (a.bias->size() != b.bias->size()) throw DimensionError("weight_change_norm: bias length differs");
            for (std::size_t i = 0; i < a.bias->size(); ++i) {
                const double d = (*a.bias)[i] - (*b.bias)[i];
                acc += d * d;
            }
            count += a.bias->size();
        }
    }
    return count == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(count));
}

} // namespace yescert
