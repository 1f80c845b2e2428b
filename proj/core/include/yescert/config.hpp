#pragma once

#include "yescert/mlp.hpp"
#include "yescert/optim.hpp"
#include "yescert/tasks.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace yescert {

enum class TaskKind { PhaseRetrieval, Denoising, QuadraticImage, Mnist, SyntheticDigits };

std::string_view to_string(TaskKind k) noexcept;
TaskKind task_from_string(std::string_view s);

struct TaskSpec {
    TaskKind kind = TaskKind::PhaseRetrieval;
    std::uint64_t seed = 1;
    Direction direction = Direction::Inverse;
    // phase retrieval / denoising
    std::size_t n = 20;
    std::size_t d = 1000;
    std::size_t num_signals = 50;
    std::size_t noise_per_signal = 20;
    double noise_param = 0.2;
    NoiseParam noise_interpretation = NoiseParam::Variance;
    // quadratic image; empty image_path means a synthetic test image
    std::string image_path;
    std::size_t image_width = 128;
    std::size_t image_height = 128;
    std::size_t patch_size = 8;
    double noise_std = 0.0;
    std::string sensing = "gaussian";
    double blur_sigma = 1.0;
    std::uint64_t sensing_seed = 11;
    // mnist / synthetic digits
    std::string mnist_images;
    std::string mnist_labels;
    std::size_t count = 5000;
    double jitter = 0.15;
};

struct NetworkSpec {
    // {in, h1, ..., out}; empty means five layers at the task's input width.
    std::vector<std::size_t> layers;
    Activation hidden_activation = Activation::ReLU;
    Activation output_activation = Activation::Identity;
    // Unset: off for phase retrieval, on for every other task.
    std::optional<bool> bias;
};

struct OptimizerSpec {
    OptimizerKind kind = OptimizerKind::Adam;
    double lr = 1e-3;
    double decay_factor = 0.9;
    std::size_t decay_period = 50;
    AdamHyper adam;
    // Diagnostic: the learning rate is forced to 0 for every epoch after this one.
    std::optional<std::size_t> freeze_after_epoch;
};

struct BoundSpec {
    std::size_t cadence = 1;
    // 0 means K - 1.
    std::size_t max_degree = 0;
    bool monotone = true;
    std::optional<double> rcond;
};

// effective lr = base_lr * (1 + gain * min(d_k / scale, cap))
struct GuidanceRule {
    double gain = 1.0;
    double scale = 1.0;
    double cap = 1.0;
};

struct GuidanceSpec {
    bool enabled = false;
    GuidanceRule rule;
};

struct StopSpec {
    bool enabled = true;
    double weight_change_threshold = 1e-5;
    std::size_t window = 10;
};

struct PlateauSpec {
    double rel_threshold = 1e-4;
    std::size_t window = 20;
};

struct OutputSpec {
    std::string jsonl;
    std::string csv;
    std::string weights;
};

struct SessionConfig {
    TaskSpec task;
    NetworkSpec network;
    OptimizerSpec optimizer;
    std::size_t batch_size = 20;
    std::size_t max_epochs = 2000;
    std::uint64_t seed = 7;
    BoundSpec bounds;
    GuidanceSpec guidance;
    StopSpec stop;
    PlateauSpec plateau;
    OutputSpec output;
};

// Parses a config object. Missing keys keep their defaults; unknown keys and
// ill-typed values raise ConfigError with the offending field path.
SessionConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SessionConfig& c);
SessionConfig load_config(const std::filesystem::path& path);

// Checks everything that does not need the dataset.
void validate(const SessionConfig& c);

// Resolved layer dims / bias / activations, given the dataset's shapes.
std::vector<std::size_t> resolved_layers(const SessionConfig& c, std::size_t in_dim, std::size_t out_dim);
bool resolved_bias(const SessionConfig& c);
std::vector<Activation> resolved_activations(const SessionConfig& c, std::size_t layer_count);

// Builds the dataset described by the task spec.
Dataset build_dataset(const TaskSpec& task);

} // namespace yescert
