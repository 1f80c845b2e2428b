#include "support/oracles.hpp"

#include <yescert/error.hpp>
#include <yescert/image.hpp>
#include <yescert/mnist.hpp>
#include <yescert/tasks.hpp>

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace yescert;

namespace {

std::vector<std::uint8_t> be32(std::uint32_t v) {
    return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8),
            static_cast<std::uint8_t>(v)};
}

std::vector<std::uint8_t> idx_images(std::uint32_t magic, std::uint32_t count, std::size_t payload) {
    std::vector<std::uint8_t> b;
    for (auto v : {magic, count, 28u, 28u}) {
        const auto w = be32(v);
        b.insert(b.end(), w.begin(), w.end());
    }
    b.resize(b.size() + payload, 0);
    return b;
}

} // namespace

TEST_SUITE("tasks") {

TEST_CASE("phase retrieval: shapes, nonnegative inputs, operator variance") {
    const Dataset ds = gen_phase_retrieval(20, 1000, 5);
    CHECK(ds.x.rows() == 20);
    CHECK(ds.y.rows() == 20);
    CHECK(ds.samples() == 1000);
    for (double v : ds.x.data()) CHECK(v >= 0.0);
    bool any_negative = false;
    for (double v : ds.y.data()) any_negative |= v < 0.0;
    CHECK(any_negative);

    const Matrix a = phase_retrieval_operator(20, 5);
    CHECK(a.size() == 400);
    double mean = 0.0;
    for (double v : a.data()) mean += v;
    mean /= 400.0;
    double var = 0.0;
    for (double v : a.data()) var += (v - mean) * (v - mean);
    var /= 399.0;
    CHECK(std::abs(var - 1.0 / 20.0) < 0.15 / 20.0);

    // Inputs are exactly |A x|.
    const oracle::Mat want = (oracle::to_eigen(a) * oracle::to_eigen(ds.y)).cwiseAbs();
    CHECK((oracle::to_eigen(ds.x) - want).norm() < 1e-12 * want.norm());
}

TEST_CASE("phase retrieval: deterministic, direction flag swaps roles") {
    const Dataset a = gen_phase_retrieval(6, 30, 9);
    const Dataset b = gen_phase_retrieval(6, 30, 9);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    const Dataset f = gen_phase_retrieval(6, 30, 9, Direction::Forward);
    CHECK(f.x == a.y);
    CHECK(f.y == a.x);
    CHECK(gen_phase_retrieval(6, 30, 10).x != a.x);
}

TEST_CASE("denoising: block structure, zero noise, noise second moment") {
    const Dataset ds = gen_denoising(20, 50, 20, 0.2, 3);
    CHECK(ds.samples() == 1000);
    for (std::size_t s = 0; s < 50; ++s)
        for (std::size_t j = 1; j < 20; ++j)
            for (std::size_t r = 0; r < 20; ++r) CHECK(ds.y(r, s * 20 + j) == ds.y(r, s * 20));
    CHECK(ds.y(0, 0) != ds.y(0, 20));

    const Dataset clean = gen_denoising(20, 50, 20, 0.0, 3);
    CHECK(clean.x == clean.y);

    const Matrix noise = ds.x - ds.y;
    const double second = frob_norm_sq(noise) / static_cast<double>(noise.size());
    CHECK(std::abs(second - 0.2) < 0.02);

    const Dataset sd = gen_denoising(20, 50, 20, 0.2, 3, NoiseParam::StdDev);
    const double second_sd = frob_norm_sq(sd.x - sd.y) / static_cast<double>(noise.size());
    CHECK(std::abs(second_sd - 0.04) < 0.004);
    CHECK(gen_denoising(20, 50, 20, 0.2, 3).x == ds.x);
}

TEST_CASE("image patches: round trip, counts, divisibility") {
    const GrayImage img = synthetic_image(128, 128, 4);
    const Matrix p = patchify(img, 8);
    CHECK(p.rows() == 64);
    CHECK(p.cols() == 256);
    const GrayImage back = depatchify(p, 128, 128, 8);
    CHECK(back.pixels == img.pixels);
    CHECK_THROWS_AS(patchify(synthetic_image(30, 32, 1), 8), ConfigError);

    // Patch (row 0, col 1) holds pixel (0, 8) at its first entry.
    CHECK(p(0, 1) == img.pixels[8] / 255.0);
    CHECK(p(9, 16) == img.pixels[(8 + 1) * 128 + 1] / 255.0);
}

TEST_CASE("quadratic image model") {
    ImagePatchPlan plan;
    plan.width = plan.height = 16;
    plan.patch_size = 8;
    plan.sensing_seed = 3;
    GrayImage zero{16, 16, std::vector<std::uint8_t>(256, 0)};
    const Dataset z = gen_quadratic_image(zero, plan, 1);
    CHECK(frob_norm_sq(z.x) == 0.0);
    CHECK(frob_norm_sq(z.y) == 0.0);

    const GrayImage img = synthetic_image(16, 16, 2);
    const Dataset ds = gen_quadratic_image(img, plan, 1);
    const oracle::Mat a = oracle::to_eigen(sensing_matrix(plan));
    const oracle::Mat want = (a * oracle::to_eigen(ds.y)).array().square().matrix();
    CHECK((oracle::to_eigen(ds.x) - want).norm() < 1e-12 * want.norm());

    plan.noise_std = 0.1;
    const Dataset noisy = gen_quadratic_image(img, plan, 1);
    CHECK(noisy.x != ds.x);
    CHECK(gen_quadratic_image(img, plan, 1).x == noisy.x);

    plan.sensing = SensingKind::Blur;
    const Matrix blur = sensing_matrix(plan);
    for (std::size_t r = 0; r < blur.rows(); ++r)
        for (std::size_t c = 0; c < blur.cols(); ++c) CHECK(blur(r, c) >= 0.0);
    CHECK(blur(0, 0) > blur(0, 63));
}

TEST_CASE("PGM round trip and malformed input") {
    const GrayImage img = synthetic_image(12, 8, 1);
    const auto bytes = encode_pgm(img);
    const std::string head(bytes.begin(), bytes.begin() + 12);
    CHECK(head == "P5\n12 8\n255\n");
    const GrayImage back = parse_pgm(bytes);
    CHECK(back.width == 12);
    CHECK(back.height == 8);
    CHECK(back.pixels == img.pixels);

    std::string with_comment = "P5\n# made by hand\n2 1\n255\n";
    std::vector<std::uint8_t> c(with_comment.begin(), with_comment.end());
    c.push_back(7);
    c.push_back(200);
    CHECK(parse_pgm(c).pixels == std::vector<std::uint8_t>{7, 200});

    std::vector<std::uint8_t> bad(bytes);
    bad[1] = '2';
    CHECK_THROWS_AS(parse_pgm(bad), IngestError);
    std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 5);
    try {
        parse_pgm(truncated);
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(e.offset() == truncated.size());
    }

    const auto path = std::filesystem::temp_directory_path() / "yescert_test_roundtrip.pgm";
    write_pgm(path, img);
    CHECK(read_pgm(path).pixels == img.pixels);
    std::filesystem::remove(path);
}

} // TEST_SUITE

TEST_SUITE("mnist") {

TEST_CASE("label encoding") {
    const auto e0 = mnist::encode_label(0);
    CHECK(e0.size() == 784);
    CHECK(e0[0] == 1.0);
    const auto e9 = mnist::encode_label(9);
    CHECK(e9[261] == 1.0);
    double sum = 0.0;
    for (double v : e9) sum += v;
    CHECK(sum == 1.0);
    for (int d = 0; d < 10; ++d) CHECK(mnist::decode_label(mnist::encode_label(d)) == d);
    CHECK(mnist::decode_label(std::vector<double>(784, 0.0)) == 0);
    CHECK_THROWS_AS(mnist::encode_label(10), ValidationError);
    CHECK_THROWS_AS(mnist::encode_label(-1), ValidationError);
    CHECK_THROWS_AS(mnist::decode_label(std::vector<double>(10, 0.0)), DimensionError);
}

TEST_CASE("decoding survives perturbations below the diagonal gap") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int d = 0; d < 10; ++d) {
        for (int trial = 0; trial < 20; ++trial) {
            auto v = mnist::encode_label(d);
            for (double& x : v) x += u(rng);
            // gap between the true entry (>= 0.8) and any other (<= 0.2)
            CHECK(mnist::decode_label(v) == d);
        }
    }
}

TEST_CASE("IDX parsing: magic numbers, truncation, labels") {
    const auto good = idx_images(0x803, 1, 784);
    const mnist::Images im = mnist::parse_images(good, 5000);
    CHECK(im.count == 1);
    CHECK_THROWS_AS(mnist::parse_images(idx_images(0x802, 1, 784), 5000), IngestError);
    try {
        mnist::parse_images(idx_images(0x803, 2, 784 + 10), 5000);
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(e.offset() == 16 + 784 + 10);
    }

    std::vector<std::uint8_t> labels;
    for (auto v : {0x801u, 3u}) {
        const auto w = be32(v);
        labels.insert(labels.end(), w.begin(), w.end());
    }
    labels.insert(labels.end(), {1, 12, 3});
    try {
        mnist::parse_labels(labels, 5000);
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(e.offset() == 9);
    }
    labels[9] = 2;
    CHECK(mnist::parse_labels(labels, 5000) == std::vector<std::uint8_t>{1, 2, 3});
    labels[3] = 0x03;
    CHECK_THROWS_AS(mnist::parse_labels(labels, 5000), IngestError);
}

TEST_CASE("dataset conversion: scaling, count, targets") {
    mnist::Images im;
    im.count = 2;
    im.rows = im.cols = 28;
    im.pixels.assign(2 * 784, 0);
    im.pixels[0] = 255;
    im.pixels[784 + 5] = 51;
    const std::vector<std::uint8_t> labels{3, 7};
    const Dataset one = mnist::to_dataset(im, labels, 1);
    CHECK(one.x.rows() == 784);
    CHECK(one.x.cols() == 1);
    CHECK(one.x(0, 0) == 1.0);
    const Dataset two = mnist::to_dataset(im, labels, 5000);
    CHECK(two.samples() == 2);
    CHECK(two.x(5, 1) == doctest::Approx(0.2));
    CHECK(two.y(3 * 29, 0) == 1.0);
    CHECK(two.y(7 * 29, 1) == 1.0);
    CHECK(mnist::success_rate(two.y, two.y) == 1.0);
}

TEST_CASE("IDX files round-trip through load") {
    const mnist::Synthetic s = mnist::synthetic_digits(30, 2);
    const auto dir = std::filesystem::temp_directory_path();
    const auto ip = dir / "yescert_test_images.idx";
    const auto lp = dir / "yescert_test_labels.idx";
    {
        const auto ib = mnist::encode_idx_images(s.images);
        const auto lb = mnist::encode_idx_labels(s.labels);
        std::ofstream(ip, std::ios::binary).write(reinterpret_cast<const char*>(ib.data()), static_cast<std::streamsize>(ib.size()));
        std::ofstream(lp, std::ios::binary).write(reinterpret_cast<const char*>(lb.data()), static_cast<std::streamsize>(lb.size()));
    }
    const Dataset ds = mnist::load(ip, lp, 20);
    CHECK(ds.samples() == 20);
    const Dataset direct = mnist::to_dataset(s.images, s.labels, 20);
    CHECK(ds.x == direct.x);
    CHECK(ds.y == direct.y);
    CHECK_THROWS_AS(mnist::load(dir / "yescert_missing.idx", lp, 20), IngestError);
    std::filesystem::remove(ip);
    std::filesystem::remove(lp);
}

TEST_CASE("synthetic digits are deterministic, balanced and low rank") {
    const mnist::Synthetic a = mnist::synthetic_digits(100, 3);
    const mnist::Synthetic b = mnist::synthetic_digits(100, 3);
    CHECK(a.images.pixels == b.images.pixels);
    CHECK(a.labels == b.labels);
    for (std::size_t i = 0; i < 100; ++i) CHECK(a.labels[i] == i % 10);
    const Dataset ds = mnist::to_dataset(a.images, a.labels, 100);
    const Eigen::FullPivLU<oracle::Mat> lu(oracle::to_eigen(ds.x));
    CHECK(lu.rank() <= 49);
}

} // TEST_SUITE
