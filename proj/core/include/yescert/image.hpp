#pragma once

#include "yescert/matrix.hpp"
#include "yescert/tasks.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace yescert {

// 8-bit grayscale image, row-major.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;
};

// Binary PGM (P5, maxval 255). Comments after '#' are skipped on read.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
GrayImage parse_pgm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_pgm(const GrayImage& image);

enum class SensingKind {
    Gaussian, // entries ~ N(0, 1/p^2) for a p x p patch
    Blur,     // separable discrete Gaussian blur over the patch
};

struct ImagePatchPlan {
    std::size_t width = 128;
    std::size_t height = 128;
    std::size_t patch_size = 8;
    std::uint64_t sensing_seed = 0;
    double noise_std = 0.0;
    SensingKind sensing = SensingKind::Gaussian;
    double blur_sigma = 1.0;
    Direction direction = Direction::Inverse;
};

// Non-overlapping patches, row-major patch order; each patch is flattened
// row-major into one column scaled to [0, 1]. Result is (p*p) x (#patches).
Matrix patchify(const GrayImage& image, std::size_t patch_size);
// Inverse of patchify; values are clamped to [0, 1] and rounded to bytes.
GrayImage depatchify(const Matrix& patches, std::size_t width, std::size_t height, std::size_t patch_size);

// p^2 x p^2 sensing operator for the plan.
Matrix sensing_matrix(const ImagePatchPlan& plan);

// b_i = (A x_i)^2 + n_i elementwise for every patch x_i.
Dataset gen_quadratic_image(const GrayImage& image, const ImagePatchPlan& plan, std::uint64_t noise_seed);

// Smooth deterministic test image (sum of a few Gaussian blobs and a ramp)
// for runs that do not have a photograph at hand.
GrayImage synthetic_image(std::size_t width, std::size_t height, std::uint64_t seed);

} // namespace yescert
