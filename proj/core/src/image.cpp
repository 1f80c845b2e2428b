#include "yescert/image.hpp"

#include "yescert/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

namespace yescert {

namespace {

struct PgmCursor {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    void skip_space_and_comments() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    }

    std::size_t read_uint(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos;
        std::size_t value = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
            ++pos;
        }
        if (pos == start) throw IngestError(std::string("PGM: expected ") + what, start);
        return value;
    }
};

} // namespace

GrayImage parse_pgm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw IngestError("PGM: missing P5 magic", 0);
    PgmCursor cur{bytes, 2};
    GrayImage img;
    img.width = cur.read_uint("width");
    img.height = cur.read_uint("height");
    const std::size_t maxval = cur.read_uint("maxval");
    if (maxval != 255) throw IngestError("PGM: only maxval 255 is supported, got " + std::to_string(maxval), cur.pos);
    if (img.width == 0 || img.height == 0) throw IngestError("PGM: zero-sized image", cur.pos);
    if (cur.pos >= bytes.size() || !std::isspace(bytes[cur.pos])) throw IngestError("PGM: expected whitespace after header", cur.pos);
    ++cur.pos;
    const std::size_t need = img.width * img.height;
    if (bytes.size() - cur.pos < need) {
        throw IngestError("PGM: truncated pixel data, need " + std::to_string(need) + " bytes", bytes.size());
    }
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(cur.pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(cur.pos + need));
    return img;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
    if (image.pixels.size() != image.width * image.height) throw DimensionError("PGM: pixel count does not match dims");
    const std::string header = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), image.pixels.begin(), image.pixels.end());
    return out;
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open PGM file " + path.string(), 0);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_pgm(bytes);
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
    const auto bytes = encode_pgm(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write PGM file " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

namespace {

void check_divisible(std::size_t width, std::size_t height, std::size_t patch_size) {
    if (patch_size == 0 || width % patch_size != 0 || height % patch_size != 0) {
        throw ConfigError("task.patch_size", "image " + std::to_string(width) + "x" + std::to_string(height) +
                                                 " is not divisible into " + std::to_string(patch_size) + "x" +
                                                 std::to_string(patch_size) + " patches");
    }
}

} // namespace

Matrix patchify(const GrayImage& image, std::size_t patch_size) {
    check_divisible(image.width, image.height, patch_size);
    const std::size_t pw = image.width / patch_size;
    const std::size_t ph = image.height / patch_size;
    Matrix out(patch_size * patch_size, pw * ph);
    for (std::size_t by = 0; by < ph; ++by)
        for (std::size_t bx = 0; bx < pw; ++bx) {
            const std::size_t col = by * pw + bx;
            for (std::size_t y = 0; y < patch_size; ++y)
                for (std::size_t x = 0; x < patch_size; ++x) {
                    const std::size_t src = (by * patch_size + y) * image.width + bx * patch_size + x;
                    out(y * patch_size + x, col) = image.pixels[src] / 255.0;
                }
        }
    return out;
}

GrayImage depatchify(const Matrix& patches, std::size_t width, std::size_t height, std::size_t patch_size) {
    check_divisible(width, height, patch_size);
    const std::size_t pw = width / patch_size;
    const std::size_t ph = height / patch_size;
    if (patches.rows() != patch_size * patch_size || patches.cols() != pw * ph) {
        throw DimensionError("depatchify: " + patches.shape_string() + " does not tile a " + std::to_string(width) +
                             "x" + std::to_string(height) + " image");
    }
    GrayImage img{width, height, std::vector<std::uint8_t>(width * height)};
    for (std::size_t by = 0; by < ph; ++by)
        for (std::size_t bx = 0; bx < pw; ++bx) {
            const std::size_t col = by * pw + bx;
            for (std::size_t y = 0; y < patch_size; ++y)
                for (std::size_t x = 0; x < patch_size; ++x) {
                    const double v = std::clamp(patches(y * patch_size + x, col), 0.0, 1.0);
                    img.pixels[(by * patch_size + y) * width + bx * patch_size + x] =
                        static_cast<std::uint8_t>(std::lround(v * 255.0));
                }
        }
    return img;
}

Matrix sensing_matrix(const ImagePatchPlan& plan) {
    const std::size_t p = plan.patch_size;
    const std::size_t n = p * p;
    if (plan.sensing == SensingKind::Gaussian) {
        std::mt19937_64 rng(plan.sensing_seed);
        std::normal_distribution<double> dist(0.0, 1.0 / static_cast<double>(p));
        Matrix a(n, n);
        for (double& v : a.data()) v = dist(rng);
        return a;
    }
    if (!(plan.blur_sigma > 0.0)) throw ConfigError("task.blur_sigma", "must be > 0");
    // 1-D kernel rows normalized to unit sum; the 2-D operator is K (x) K.
    Matrix k1(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double dist = static_cast<double>(i) - static_cast<double>(j);
            k1(i, j) = std::exp(-dist * dist / (2.0 * plan.blur_sigma * plan.blur_sigma));
            total += k1(i, j);
        }
        for (std::size_t j = 0; j < p; ++j) k1(i, j) /= total;
    }
    Matrix a(n, n);
    for (std::size_t yi = 0; yi < p; ++yi)
        for (std::size_t xi = 0; xi < p; ++xi)
            for (std::size_t yj = 0; yj < p; ++yj)
                for (std::size_t xj = 0; xj < p; ++xj) a(yi * p + xi, yj * p + xj) = k1(yi, yj) * k1(xi, xj);
    return a;
}

Dataset gen_quadratic_image(const GrayImage& image, const ImagePatchPlan& plan, std::uint64_t noise_seed) {
    if (image.width != plan.width || image.height != plan.height) {
        throw ConfigError("task.image", "image is " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                                            " but the plan expects " + std::to_string(plan.width) + "x" +
                                            std::to_string(plan.height));
    }
    Matrix signal = patchify(image, plan.patch_size);
    Matrix meas = matmul(sensing_matrix(plan), signal);
    for (double& v : meas.data()) v *= v;
    if (plan.noise_std > 0.0) {
        std::mt19937_64 rng(noise_seed);
        std::normal_distribution<double> dist(0.0, plan.noise_std);
        for (double& v : meas.data()) v += dist(rng);
    }
    DatasetMeta meta{"quadratic_image", noise_seed,
                     {{"width", std::to_string(plan.width)},
                      {"height", std::to_string(plan.height)},
                      {"patch_size", std::to_string(plan.patch_size)},
                      {"sensing", plan.sensing == SensingKind::Gaussian ? "gaussian" : "blur"},
                      {"sensing_seed", std::to_string(plan.sensing_seed)},
                      {"direction", std::string(to_string(plan.direction))}}};
    if (plan.direction == Direction::Inverse) return Dataset{std::move(meas), std::move(signal), std::move(meta)};
    return Dataset{std::move(signal), std::move(meas), std::move(meta)};
}

GrayImage synthetic_image(std::size_t width, std::size_t height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, static_cast<double>(width));
    std::uniform_real_distribution<double> uy(0.0, static_cast<double>(height));
    std::uniform_real_distribution<double> amp(0.3, 1.0);
    std::uniform_real_distribution<double> spread(0.05, 0.2);
    struct Blob { double cx, cy, a, s; };
    std::vector<Blob> blobs;
    const double scale = static_cast<double>(std::max(width, height));
    for (int i = 0; i < 6; ++i) blobs.push_back({ux(rng), uy(rng), amp(rng), spread(rng) * scale});
    GrayImage img{width, height, std::vector<std::uint8_t>(width * height)};
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            double v = 0.25 * static_cast<double>(x + y) / static_cast<double>(width + height);
            for (const auto& b : blobs) {
                const double dx = static_cast<double>(x) - b.cx;
                const double dy = static_cast<double>(y) - b.cy;
                v += b.a * std::exp(-(dx * dx + dy * dy) / (2.0 * b.s * b.s));
            }
            img.pixels[y * width + x] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        }
    return img;
}

} // namespace yescert
