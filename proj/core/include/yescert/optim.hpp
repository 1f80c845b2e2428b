#pragma once

#include "yescert/matrix.hpp"
#include "yescert/mlp.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace yescert {

enum class OptimizerKind { SGD, Adam };

std::string_view to_string(OptimizerKind k) noexcept;
OptimizerKind optimizer_from_string(std::string_view name);

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Adam;
    AdamHyper hyper;
    std::uint64_t step = 0;
    // Moment accumulators, shaped like the parameters (Adam only).
    MlpParams first;
    MlpParams second;
};

OptimizerState make_optimizer(OptimizerKind kind, const MlpParams& like, AdamHyper hyper = {});

// One update in place. lr = 0 leaves the parameters untouched. Throws
// TrainingFault when a gradient entry is non-finite or an update produces a
// non-finite parameter.
void optimizer_step(MlpParams& params, const Gradients& grads, OptimizerState& state, double lr);

// Step decay: eta(e) = eta0 * decay_factor^floor(e / period_epochs), e counted
// from the schedule origin (0 for the first epoch).
struct LrSchedule {
    double eta0 = 1e-3;
    double decay_factor = 1.0;
    std::size_t period_epochs = 1;

    double at(std::size_t epochs_since_origin) const;
};

void validate(const LrSchedule& s);

// One pass over a seeded random permutation of the columns, one optimizer
// step per mini-batch. Returns nothing about bounds: the training path only
// ever sees data, parameters, optimizer state and a scalar learning rate.
void train_epoch(MlpParams& params, OptimizerState& state, const Matrix& x, const Matrix& y,
                 std::size_t batch_size, double lr, std::mt19937_64& rng);

} // namespace yescert
