#include "yescert/mnist.hpp"

#include "yescert/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

namespace yescert::mnist {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset, const char* what) {
    if (bytes.size() < offset + 4) throw IngestError(std::string("IDX: truncated header (") + what + ")", bytes.size());
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex(std::uint32_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s = "0x";
    for (int shift = 28; shift >= 0; shift -= 4) s += digits[(v >> shift) & 0xf];
    return s;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open " + path.string(), 0);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

Images parse_images(std::span<const std::uint8_t> bytes, std::size_t max_count) {
    const std::uint32_t magic = read_be32(bytes, 0, "magic");
    if (magic != kImageMagic) throw IngestError("IDX images: bad magic number " + hex(magic) + ", expected " + hex(kImageMagic), 0);
    Images img;
    const std::size_t available = read_be32(bytes, 4, "count");
    img.rows = read_be32(bytes, 8, "rows");
    img.cols = read_be32(bytes, 12, "cols");
    img.count = std::min(available, max_count);
    const std::size_t per = img.rows * img.cols;
    const std::size_t need = 16 + img.count * per;
    if (bytes.size() < need) {
        throw IngestError("IDX images: truncated pixel data, header promises " + std::to_string(img.count) + " images",
                          bytes.size());
    }
    img.pixels.assign(bytes.begin() + 16, bytes.begin() + static_cast<std::ptrdiff_t>(need));
    return img;
}

std::vector<std::uint8_t> parse_labels(std::span<const std::uint8_t> bytes, std::size_t max_count) {
    const std::uint32_t magic = read_be32(bytes, 0, "magic");
    if (magic != kLabelMagic) throw IngestError("IDX labels: bad magic number " + hex(magic) + ", expected " + hex(kLabelMagic), 0);
    const std::size_t available = read_be32(bytes, 4, "count");
    const std::size_t count = std::min(available, max_count);
    if (bytes.size() < 8 + count) {
        throw IngestError("IDX labels: truncated label data, header promises " + std::to_string(count) + " labels",
                          bytes.size());
    }
    std::vector<std::uint8_t> labels(bytes.begin() + 8, bytes.begin() + static_cast<std::ptrdiff_t>(8 + count));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 9) throw IngestError("IDX labels: label " + std::to_string(labels[i]) + " is not a digit", 8 + i);
    }
    return labels;
}

std::vector<std::uint8_t> encode_idx_images(const Images& images) {
    std::vector<std::uint8_t> out;
    out.reserve(16 + images.pixels.size());
    write_be32(out, kImageMagic);
    write_be32(out, static_cast<std::uint32_t>(images.count));
    write_be32(out, static_cast<std::uint32_t>(images.rows));
    write_be32(out, static_cast<std::uint32_t>(images.cols));
    out.insert(out.end(), images.pixels.begin(), images.pixels.end());
    return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.size());
    write_be32(out, kLabelMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

std::vector<double> encode_label(int digit) {
    if (digit < 0 || digit > 9) throw ValidationError("encode_label: digit " + std::to_string(digit) + " out of range 0-9");
    std::vector<double> v(kPixels, 0.0);
    const auto i = static_cast<std::size_t>(digit);
    v[i * kSide + i] = 1.0;
    return v;
}

int decode_label(std::span<const double> output) {
    if (output.size() != kPixels) {
        throw DimensionError("decode_label: expected " + std::to_string(kPixels) + " values, got " +
                             std::to_string(output.size()));
    }
    int best = 0;
    for (int j = 1; j < 10; ++j) {
        const auto i = static_cast<std::size_t>(j);
        if (output[i * kSide + i] > output[static_cast<std::size_t>(best) * (kSide + 1)]) best = j;
    }
    return best;
}

Dataset to_dataset(const Images& images, std::span<const std::uint8_t> labels, std::size_t count) {
    if (images.rows * images.cols != kPixels) {
        throw IngestError("IDX images: expected 28x28 images, got " + std::to_string(images.rows) + "x" +
                              std::to_string(images.cols), 8);
    }
    const std::size_t n = std::min({count, images.count, labels.size()});
    if (n == 0) throw IngestError("MNIST: no samples available", 4);
    Matrix x(kPixels, n);
    Matrix y(kPixels, n);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t p = 0; p < kPixels; ++p) x(p, s) = images.pixels[s * kPixels + p] / 255.0;
        const std::size_t diag = std::size_t{labels[s]} * (kSide + 1);
        y(diag, s) = 1.0;
    }
    return Dataset{std::move(x), std::move(y), DatasetMeta{"mnist", 0, {{"count", std::to_string(n)}}}};
}

Dataset load(const std::filesystem::path& images_path, const std::filesystem::path& labels_path, std::size_t count) {
    const auto image_bytes = slurp(images_path);
    const auto label_bytes = slurp(labels_path);
    const Images images = parse_images(image_bytes, count);
    const auto labels = parse_labels(label_bytes, count);
    return to_dataset(images, labels, count);
}

double success_rate(const Matrix& outputs, const Matrix& targets) {
    if (outputs.rows() != kPixels || targets.rows() != kPixels || outputs.cols() != targets.cols()) {
        throw DimensionError("success_rate: expected two 784 x d matrices, got " + outputs.shape_string() + " and " +
                             targets.shape_string());
    }
    std::size_t hits = 0;
    std::vector<double> a(kPixels);
    std::vector<double> b(kPixels);
    for (std::size_t c = 0; c < outputs.cols(); ++c) {
        for (std::size_t r = 0; r < kPixels; ++r) {
            a[r] = outputs(r, c);
            b[r] = targets(r, c);
        }
        if (decode_label(a) == decode_label(b)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(outputs.cols());
}

namespace {

// 7 x 7 glyphs, '#' = ink.
constexpr std::array<std::array<const char*, 7>, 10> kGlyphs{{
    {{" ##### ", "##   ##", "##   ##", "##   ##", "##   ##", "##   ##", " ##### "}},
    {{"   ##  ", "  ###  ", "   ##  ", "   ##  ", "   ##  ", "   ##  ", " ######"}},
    {{" ##### ", "##   ##", "     ##", "   ### ", "  ##   ", " ##    ", "#######"}},
    {{" ##### ", "##   ##", "     ##", "  #### ", "     ##", "##   ##", " ##### "}},
    {{"   ### ", "  # ## ", " #  ## ", "#######", "    ## ", "    ## ", "    ## "}},
    {{"#######", "##     ", "###### ", "     ##", "     ##", "##   ##", " ##### "}},
    {{" ##### ", "##     ", "##     ", "###### ", "##   ##", "##   ##", " ##### "}},
    {{"#######", "     ##", "    ## ", "   ##  ", "  ##   ", "  ##   ", "  ##   "}},
    {{" ##### ", "##   ##", "##   ##", " ##### ", "##   ##", "##   ##", " ##### "}},
    {{" ##### ", "##   ##", "##   ##", " ######", "     ##", "     ##", " ##### "}},
}};

} // namespace

Synthetic synthetic_digits(std::size_t count, std::uint64_t seed, double jitter) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, jitter);
    std::uniform_real_distribution<double> ink(0.7, 1.0);
    std::bernoulli_distribution inverted(0.5);
    Synthetic out;
    out.images.count = count;
    out.images.rows = kSide;
    out.images.cols = kSide;
    out.images.pixels.assign(count * kPixels, 0);
    out.labels.resize(count);
    for (std::size_t s = 0; s < count; ++s) {
        const auto digit = static_cast<std::size_t>(s % 10);
        out.labels[s] = static_cast<std::uint8_t>(digit);
        const double level = ink(rng);
        // Half of the glyphs are drawn light-on-dark and half dark-on-light, so
        // every class has the same mean image and no linear map of the pixels
        // separates the classes; a ReLU network can.
        const bool flip = inverted(rng);
        std::array<double, 49> coarse{};
        for (std::size_t r = 0; r < 7; ++r)
            for (std::size_t c = 0; c < 7; ++c) {
                const double base = kGlyphs[digit][r][c] == '#' ? level : 0.0;
                const double v = std::clamp(base + noise(rng), 0.0, 1.0);
                coarse[r * 7 + c] = flip ? 1.0 - v : v;
            }
        for (std::size_t r = 0; r < kSide; ++r)
            for (std::size_t c = 0; c < kSide; ++c) {
                const double v = coarse[(r / 4) * 7 + c / 4];
                out.images.pixels[s * kPixels + r * kSide + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
    }
    return out;
}

} // namespace yescert::mnist
