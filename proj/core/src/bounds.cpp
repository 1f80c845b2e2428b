#include "yescert/bounds.hpp"

#include "yescert/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace yescert {

std::string_view to_string(CloudRegion r) noexcept {
    switch (r) {
    case CloudRegion::Red: return "red";
    case CloudRegion::Yellow: return "yellow";
    case CloudRegion::Green: return "green";
    }
    return "red";
}

CloudRegion region_from_string(std::string_view s) {
    if (s == "red") return CloudRegion::Red;
    if (s == "yellow") return CloudRegion::Yellow;
    if (s == "green") return CloudRegion::Green;
    throw ValidationError("unknown region '" + std::string(s) + "'");
}

Matrix least_squares_map(const Matrix& target, const Matrix& source, std::optional<double> rcond) {
    if (target.cols() != source.cols()) {
        throw DimensionError("least_squares_map: target " + target.shape_string() + " and source " +
                             source.shape_string() + " disagree on the sample count");
    }
    return matmul(target, pinv(source, rcond.value_or(default_rcond(source))));
}

namespace {

// Relative to the error of the zero predictor, ||Y||^2 / d.
constexpr double kTieTolerance = 1e-12;

Matrix with_bias_row(const Matrix& m, bool use_bias) { return use_bias ? augment_ones(m) : m; }

} // namespace

BoundEngine::BoundEngine(Matrix x, Matrix y, BoundOptions options)
    : x_(std::move(x)), y_(std::move(y)), options_(std::move(options)),
      x_projector_([&] {
          const Matrix src = with_bias_row(x_, options_.use_bias);
          return RowSpaceProjector(src, options_.rcond.value_or(default_rcond(src)));
      }()) {
    if (options_.activations.empty()) throw ConfigError("network", "bound engine needs at least one layer");
    if (x_.cols() != y_.cols()) {
        throw DimensionError("bounds: X " + x_.shape_string() + " and Y " + y_.shape_string() +
                             " disagree on the sample count");
    }
    if (!in_range(options_.activations.back(), y_)) {
        std::size_t negatives = 0;
        double worst = 0.0;
        for (double v : y_.data()) {
            if (v < 0.0) {
                ++negatives;
                worst = std::min(worst, v);
            }
        }
        throw ValidationError("targets are infeasible for the final " +
                              std::string(to_string(options_.activations.back())) + " activation: " +
                              std::to_string(negatives) + " entries are negative (most negative " +
                              std::to_string(worst) + ")");
    }
}

RowSpaceProjector BoundEngine::projector(const Matrix& current) const {
    const Matrix src = with_bias_row(current, options_.use_bias);
    return RowSpaceProjector(src, options_.rcond.value_or(default_rcond(src)));
}

// Omega_layer(target * pinv(Y_cur) * Y_cur), layer numbered from 1.
Matrix BoundEngine::step(const Matrix& target, const RowSpaceProjector& proj, std::size_t layer) const {
    Matrix next = proj.project(target);
    apply_inplace(options_.activations[layer - 1], next);
    return next;
}

double BoundEngine::error(const Matrix& last) const {
    return frob_dist_sq(y_, last) / static_cast<double>(y_.cols());
}

Yes0Trace BoundEngine::yes0_trace() const {
    Yes0Trace trace;
    const std::size_t k_layers = depth();
    trace.per_layer_error.reserve(k_layers);
    Matrix current = step(y_, x_projector_, 1);
    trace.per_layer_error.push_back(error(current));
    for (std::size_t layer = 2; layer <= k_layers; ++layer) {
        current = step(y_, projector(current), layer);
        trace.per_layer_error.push_back(error(current));
    }
    trace.bound = trace.per_layer_error.back();
    return trace;
}

void BoundEngine::check_outputs(std::span<const Matrix> layer_outputs) const {
    const std::size_t k_layers = depth();
    if (layer_outputs.size() != k_layers + 1) {
        throw DimensionError("bounds: expected " + std::to_string(k_layers + 1) +
                             " captured layer outputs (input first), got " + std::to_string(layer_outputs.size()));
    }
    for (std::size_t t = 2; t <= k_layers; ++t) {
        if (layer_outputs[t - 1].cols() != y_.cols()) {
            throw DimensionError("bounds: layer output " + std::to_string(t - 1) + " is " +
                                 layer_outputs[t - 1].shape_string() + ", expected " + std::to_string(y_.cols()) +
                                 " columns");
        }
    }
}

double BoundEngine::checkpoint_error(std::span<const Matrix> layer_outputs, const CheckpointSet& checkpoints) const {
    check_outputs(layer_outputs);
    const std::size_t k_layers = depth();
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 2 || checkpoints[i] > k_layers || (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
            throw ValidationError("checkpoint set must be strictly increasing within {2, ..., K}");
        }
    }
    Matrix current = x_;
    auto next_cp = checkpoints.begin();
    for (std::size_t layer = 1; layer <= k_layers; ++layer) {
        while (next_cp != checkpoints.end() && *next_cp <= layer) ++next_cp;
        const Matrix& target = next_cp == checkpoints.end() ? y_ : layer_outputs[*next_cp - 1];
        current = layer == 1 ? step(target, x_projector_, 1) : step(target, projector(current), layer);
    }
    return error(current);
}

// Depth-first over checkpoint sets sharing prefixes. `current` is Y_start (the
// input to layer `start`), `proj` its projector. Children pick the next
// checkpoint in ascending order, so the first set reaching a minimum is the
// lexicographically smallest one of that degree.
void BoundEngine::walk(std::span<const Matrix> outputs, std::size_t start, const Matrix& /*current*/,
                       const RowSpaceProjector& proj, CheckpointSet& chosen, std::size_t max_degree,
                       Enumeration& acc) const {
    const std::size_t k_layers = depth();

    // No further checkpoints: project every remaining layer toward Y.
    {
        Matrix y_cur = step(y_, proj, start);
        for (std::size_t layer = start + 1; layer <= k_layers; ++layer) y_cur = step(y_, projector(y_cur), layer);
        const double e = error(y_cur);
        const std::size_t degree = chosen.size();
        if (e < acc.best[degree] - acc.tie_tolerance) {
            acc.best[degree] = e;
            acc.argbest[degree] = chosen;
        }
    }
    if (chosen.size() >= max_degree) return;

    for (std::size_t t = start + 1; t <= k_layers; ++t) {
        const Matrix& target = outputs[t - 1];
        Matrix y_cur = step(target, proj, start);
        for (std::size_t layer = start + 1; layer < t; ++layer) y_cur = step(target, projector(y_cur), layer);
        chosen.push_back(t);
        walk(outputs, t, y_cur, projector(y_cur), chosen, max_degree, acc);
        chosen.pop_back();
    }
}

BoundEngine::Enumeration BoundEngine::enumerate(std::span<const Matrix> layer_outputs, std::size_t max_degree) const {
    check_outputs(layer_outputs);
    Enumeration acc;
    acc.best.assign(max_degree + 1, std::numeric_limits<double>::infinity());
    acc.argbest.assign(max_degree + 1, {});
    acc.tie_tolerance = kTieTolerance * frob_norm_sq(y_) / static_cast<double>(y_.cols());
    CheckpointSet chosen;
    walk(layer_outputs, 1, x_, x_projector_, chosen, max_degree, acc);
    return acc;
}

YesKResult BoundEngine::yes_k(std::span<const Matrix> layer_outputs, std::size_t degree) const {
    if (degree < 1 || degree + 1 > depth()) {
        throw ValidationError("YES-k degree " + std::to_string(degree) + " out of range [1, " +
                              std::to_string(depth() - 1) + "]");
    }
    // The walk visits lower degrees on the way; only `degree` is reported.
    Enumeration acc = enumerate(layer_outputs, degree);
    return {acc.best[degree], std::move(acc.argbest[degree])};
}

YesBoundSet BoundEngine::bound_set(std::span<const Matrix> layer_outputs, std::size_t max_degree, bool monotone) const {
    if (max_degree < 1 || max_degree + 1 > depth()) {
        throw ValidationError("max_degree " + std::to_string(max_degree) + " out of range [1, " +
                              std::to_string(depth() - 1) + "]");
    }
    Enumeration acc = enumerate(layer_outputs, max_degree);
    YesBoundSet out;
    out.yes0 = acc.best[0];
    out.monotone = monotone;
    out.yes_k_raw.assign(acc.best.begin() + 1, acc.best.end());
    out.best_per_degree.assign(acc.argbest.begin() + 1, acc.argbest.end());
    out.yes_k = out.yes_k_raw;
    if (monotone) {
        for (std::size_t k = 1; k < out.yes_k.size(); ++k) out.yes_k[k] = std::min(out.yes_k[k], out.yes_k[k - 1]);
    }
    out.cloud_top = out.yes0;
    out.cloud_bottom = out.yes0;
    for (std::size_t k = 0; k < out.yes_k_raw.size(); ++k) {
        if (out.yes_k_raw[k] < out.cloud_bottom) {
            out.cloud_bottom = out.yes_k_raw[k];
            out.best_checkpoints = out.best_per_degree[k];
        }
    }
    return out;
}

Yes0Trace yes0_trace(const Matrix& x, const Matrix& y, const BoundOptions& options) {
    return BoundEngine(x, y, options).yes0_trace();
}

YesKResult yes_k_bound(std::span<const Matrix> layer_outputs, const Matrix& x, const Matrix& y, std::size_t degree,
                       const BoundOptions& options) {
    return BoundEngine(x, y, options).yes_k(layer_outputs, degree);
}

YesBoundSet yes_bound_set(std::span<const Matrix> layer_outputs, const Matrix& x, const Matrix& y,
                          std::size_t max_degree, const BoundOptions& options, bool monotone) {
    return BoundEngine(x, y, options).bound_set(layer_outputs, max_degree, monotone);
}

CloudRegion classify_region(double loss, const YesBoundSet& bounds) {
    if (loss > bounds.cloud_top) return CloudRegion::Red;
    if (loss > bounds.cloud_bottom) return CloudRegion::Yellow;
    return CloudRegion::Green;
}

double guidance_distance(double loss, const YesBoundSet& bounds) {
    return std::max(loss - bounds.cloud_bottom, 0.0);
}

} // namespace yescert
