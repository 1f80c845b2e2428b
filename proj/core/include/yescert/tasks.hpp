#pragma once

#include "yescert/matrix.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace yescert {

struct DatasetMeta {
    std::string task;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> params;
};

// x is n x d (inputs), y is m x d (targets); column i is sample i.
struct Dataset {
    Matrix x;
    Matrix y;
    DatasetMeta meta;

    std::size_t samples() const noexcept { return x.cols(); }
};

// Which side of a measurement model the network learns.
enum class Direction {
    Inverse, // measurement -> signal (b -> x)
    Forward, // signal -> measurement (x -> b)
};

std::string_view to_string(Direction d) noexcept;
Direction direction_from_string(std::string_view s);

// The n x n sensing matrix A ~ N(0, 1/n) used by gen_phase_retrieval for `seed`.
Matrix phase_retrieval_operator(std::size_t n, std::uint64_t seed);

// b_i = |A x_i| with A = phase_retrieval_operator(n, seed), x_i ~ N(0, 1).
Dataset gen_phase_retrieval(std::size_t n, std::size_t d, std::uint64_t seed, Direction direction = Direction::Inverse);

// How the second parameter of N(0, p) is read for the denoising noise.
enum class NoiseParam { Variance, StdDev };

std::string_view to_string(NoiseParam p) noexcept;
NoiseParam noise_param_from_string(std::string_view s);

// num_signals fixed signals x ~ N(0, 1), each repeated noise_per_signal times
// with independent noise. Columns come in blocks: signal s occupies columns
// [s * noise_per_signal, (s + 1) * noise_per_signal).
Dataset gen_denoising(std::size_t n, std::size_t num_signals, std::size_t noise_per_signal, double noise_param,
                      std::uint64_t seed, NoiseParam interpretation = NoiseParam::Variance);

} // namespace yescert
