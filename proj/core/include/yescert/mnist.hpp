#pragma once

#include "yescert/matrix.hpp"
#include "yescert/tasks.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace yescert::mnist {

inline constexpr std::uint32_t kImageMagic = 0x00000803;
inline constexpr std::uint32_t kLabelMagic = 0x00000801;
inline constexpr std::size_t kSide = 28;
inline constexpr std::size_t kPixels = kSide * kSide;
inline constexpr std::size_t kClasses = 10;

struct Images {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels; // count * rows * cols
};

Images parse_images(std::span<const std::uint8_t> bytes, std::size_t max_count);
std::vector<std::uint8_t> parse_labels(std::span<const std::uint8_t> bytes, std::size_t max_count);

std::vector<std::uint8_t> encode_idx_images(const Images& images);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);

// 784-vector: one at the (digit, digit) diagonal entry of a 28 x 28 grid,
// flattened row-major (index digit * 28 + digit).
std::vector<double> encode_label(int digit);
// Argmax over the ten diagonal positions; ties go to the smaller digit.
int decode_label(std::span<const double> output);

// Inputs are flattened images scaled to [0, 1]; targets are encode_label.
Dataset to_dataset(const Images& images, std::span<const std::uint8_t> labels, std::size_t count);

Dataset load(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
             std::size_t count = 5000);

// Fraction of columns whose decoded output equals the decoded target.
double success_rate(const Matrix& outputs, const Matrix& targets);

// Offline stand-in for MNIST: ten blocky digit glyphs drawn on a 7 x 7 grid,
// jittered per sample on that coarse grid and upsampled 4x to 28 x 28. The
// coarse grid keeps rank(X) <= 49, so with more than 49 samples a linear map
// cannot interpolate the targets.
struct Synthetic {
    Images images;
    std::vector<std::uint8_t> labels;
};
Synthetic synthetic_digits(std::size_t count, std::uint64_t seed, double jitter = 0.15);

} // namespace yescert::mnist
