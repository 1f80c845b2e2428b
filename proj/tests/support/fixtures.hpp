#pragma once

#include <yescert/config.hpp>
#include <yescert/mlp.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace fixture {

// A small denoising run: 100 samples of width 20, five layers, no stop rule.
inline yescert::SessionConfig small_denoising(std::size_t epochs = 30) {
    yescert::SessionConfig c;
    c.task.kind = yescert::TaskKind::Denoising;
    c.task.num_signals = 10;
    c.task.noise_per_signal = 10;
    c.task.seed = 5;
    c.batch_size = 10;
    c.max_epochs = epochs;
    c.seed = 11;
    c.stop.enabled = false;
    return c;
}

inline std::vector<double> flatten(const yescert::MlpParams& p) {
    std::vector<double> out;
    for (const auto& l : p.layers) {
        out.insert(out.end(), l.weight.data().begin(), l.weight.data().end());
        if (l.bias) out.insert(out.end(), l.bias->begin(), l.bias->end());
    }
    return out;
}

// A fresh scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
        : path_(std::filesystem::temp_directory_path() / ("yescert_" + tag + "_" + std::to_string(::getpid()))) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace fixture
