#include "yescert/tasks.hpp"

#include "yescert/error.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace yescert {

std::string_view to_string(Direction d) noexcept { return d == Direction::Inverse ? "inverse" : "forward"; }

Direction direction_from_string(std::string_view s) {
    if (s == "inverse") return Direction::Inverse;
    if (s == "forward") return Direction::Forward;
    throw ConfigError("task.direction", "expected 'inverse' or 'forward', got '" + std::string(s) + "'");
}

std::string_view to_string(NoiseParam p) noexcept { return p == NoiseParam::Variance ? "variance" : "stddev"; }

NoiseParam noise_param_from_string(std::string_view s) {
    if (s == "variance") return NoiseParam::Variance;
    if (s == "stddev" || s == "std") return NoiseParam::StdDev;
    throw ConfigError("task.noise_interpretation", "expected 'variance' or 'stddev', got '" + std::string(s) + "'");
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void fill_normal(Matrix& m, std::mt19937_64& rng, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& v : m.data()) v = dist(rng);
}

} // namespace

Matrix phase_retrieval_operator(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Matrix a(n, n);
    fill_normal(a, rng, 1.0 / std::sqrt(static_cast<double>(n)));
    return a;
}

Dataset gen_phase_retrieval(std::size_t n, std::size_t d, std::uint64_t seed, Direction direction) {
    if (n == 0 || d == 0) throw ConfigError("task", "phase retrieval needs n >= 1 and d >= 1");
    std::mt19937_64 rng(seed);
    Matrix a(n, n);
    fill_normal(a, rng, 1.0 / std::sqrt(static_cast<double>(n)));
    Matrix signals(n, d);
    fill_normal(signals, rng, 1.0);
    Matrix meas = matmul(a, signals);
    for (double& v : meas.data()) v = std::abs(v);

    DatasetMeta meta{"phase_retrieval", seed, {{"n", std::to_string(n)}, {"d", std::to_string(d)},
                                               {"direction", std::string(to_string(direction))}}};
    if (direction == Direction::Inverse) return Dataset{std::move(meas), std::move(signals), std::move(meta)};
    return Dataset{std::move(signals), std::move(meas), std::move(meta)};
}

Dataset gen_denoising(std::size_t n, std::size_t num_signals, std::size_t noise_per_signal, double noise_param,
                      std::uint64_t seed, NoiseParam interpretation) {
    if (n == 0 || num_signals == 0 || noise_per_signal == 0) {
        throw ConfigError("task", "denoising needs n, num_signals and noise_per_signal >= 1");
    }
    if (!(noise_param >= 0.0)) throw ConfigError("task.noise", "noise parameter must be >= 0");
    const double stddev = interpretation == NoiseParam::Variance ? std::sqrt(noise_param) : noise_param;
    const std::size_t d = num_signals * noise_per_signal;

    std::mt19937_64 rng(seed);
    Matrix base(n, num_signals);
    fill_normal(base, rng, 1.0);
    Matrix clean(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s < num_signals; ++s)
            for (std::size_t j = 0; j < noise_per_signal; ++j) clean(r, s * noise_per_signal + j) = base(r, s);
    Matrix noisy = clean;
    if (stddev > 0.0) {
        std::normal_distribution<double> dist(0.0, stddev);
        // Column-major draw order: one full noise vector per sample.
        for (std::size_t c = 0; c < d; ++c)
            for (std::size_t r = 0; r < n; ++r) noisy(r, c) += dist(rng);
    }
    DatasetMeta meta{"denoising", seed,
                     {{"n", std::to_string(n)},
                      {"num_signals", std::to_string(num_signals)},
                      {"noise_per_signal", std::to_string(noise_per_signal)},
                      {"noise_param", fmt(noise_param)},
                      {"noise_interpretation", std::string(to_string(interpretation))}}};
    return Dataset{std::move(noisy), std::move(clean), std::move(meta)};
}

} // namespace yescert
