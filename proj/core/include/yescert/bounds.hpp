#pragma once

#include "yescert/matrix.hpp"
#include "yescert/mlp.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace yescert {

// Checkpoint indices t in {2, ..., K}. Index t selects the live model's output
// after layer t-1 as the projection target for every layer j < t that has not
// yet reached an earlier checkpoint. Strictly increasing.
using CheckpointSet = std::vector<std::size_t>;

struct BoundOptions {
    std::vector<Activation> activations; // one per layer; K = activations.size()
    bool use_bias = false;
    // Relative singular-value cutoff. Unset: 1e-12 * max(rows, cols) of each
    // projected matrix.
    std::optional<double> rcond;
};

struct Yes0Trace {
    // Normalized error ||Y - Y_{k+1}||_F^2 / d after each of the K projections.
    std::vector<double> per_layer_error;
    double bound = 0.0;
};

struct YesKResult {
    double bound = 0.0;
    CheckpointSet best;
};

struct YesBoundSet {
    double yes0 = 0.0;
    // yes_k[k-1] is the reported degree-k bound (running minimum over degrees
    // when `monotone`); yes_k_raw holds the per-degree minima before that.
    std::vector<double> yes_k;
    std::vector<double> yes_k_raw;
    std::vector<CheckpointSet> best_per_degree;
    bool monotone = false;
    double cloud_top = 0.0;
    double cloud_bottom = 0.0;
    CheckpointSet best_checkpoints; // empty when YES-0 is the bottom
};

enum class CloudRegion { Red, Yellow, Green };

std::string_view to_string(CloudRegion r) noexcept;
CloudRegion region_from_string(std::string_view s);

// target * pinv(source): the minimizer of ||target - A * source||_F.
Matrix least_squares_map(const Matrix& target, const Matrix& source, std::optional<double> rcond = std::nullopt);

// Evaluates the layer-wise projection bounds for fixed training data. The
// projector of the (augmented) input is built once; each call only factors the
// intermediate matrices, which depend on the live model.
class BoundEngine {
public:
    // Throws ValidationError when y leaves the range of the final activation,
    // DimensionError when x and y disagree on the sample count.
    BoundEngine(Matrix x, Matrix y, BoundOptions options);

    std::size_t depth() const noexcept { return options_.activations.size(); }
    const Matrix& x() const noexcept { return x_; }
    const Matrix& y() const noexcept { return y_; }
    const BoundOptions& options() const noexcept { return options_; }

    Yes0Trace yes0_trace() const;

    // Minimum over all checkpoint sets of exactly `degree` elements.
    // `layer_outputs` is the forward capture (K + 1 matrices, input first).
    YesKResult yes_k(std::span<const Matrix> layer_outputs, std::size_t degree) const;

    // Every degree 1..max_degree in one pass over the checkpoint tree, plus
    // YES-0 and the cloud.
    YesBoundSet bound_set(std::span<const Matrix> layer_outputs, std::size_t max_degree, bool monotone) const;

    // Error of one explicit checkpoint set (empty set = YES-0).
    double checkpoint_error(std::span<const Matrix> layer_outputs, const CheckpointSet& checkpoints) const;

private:
    struct Enumeration {
        std::vector<double> best;            // per degree 0..max_degree
        std::vector<CheckpointSet> argbest;  // per degree
        // Errors within this of the incumbent count as ties, so rounding noise
        // cannot pull a lexicographically later set ahead of an exact tie.
        double tie_tolerance = 0.0;
    };

    void check_outputs(std::span<const Matrix> layer_outputs) const;
    RowSpaceProjector projector(const Matrix& current) const;
    Matrix step(const Matrix& target, const RowSpaceProjector& proj, std::size_t layer) const;
    double error(const Matrix& last) const;
    void walk(std::span<const Matrix> outputs, std::size_t start, const Matrix& current,
              const RowSpaceProjector& proj, CheckpointSet& chosen, std::size_t max_degree,
              Enumeration& acc) const;
    Enumeration enumerate(std::span<const Matrix> layer_outputs, std::size_t max_degree) const;

    Matrix x_;
    Matrix y_;
    BoundOptions options_;
    RowSpaceProjector x_projector_;
};

// Convenience wrappers over BoundEngine for one-off evaluations.
Yes0Trace yes0_trace(const Matrix& x, const Matrix& y, const BoundOptions& options);
YesKResult yes_k_bound(std::span<const Matrix> layer_outputs, const Matrix& x, const Matrix& y, std::size_t degree,
                       const BoundOptions& options);
YesBoundSet yes_bound_set(std::span<const Matrix> layer_outputs, const Matrix& x, const Matrix& y,
                          std::size_t max_degree, const BoundOptions& options, bool monotone);

// Above the cloud: Red. Inside (bottom, top]: Yellow. At or below the bottom: Green.
CloudRegion classify_region(double loss, const YesBoundSet& bounds);

// max(loss - cloud_bottom, 0): the only bound-derived quantity the trainer may see.
double guidance_distance(double loss, const YesBoundSet& bounds);

} // namespace yescert
