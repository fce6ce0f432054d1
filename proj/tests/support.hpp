#pragma once

#include "rk/dataset.hpp"
#include "rk/scoreset.hpp"

#include <atomic>
#include <filesystem>
#include <span>
#include <string>
#include <unistd.h>

namespace test {

inline std::filesystem::path source_dir() { return RK_SOURCE_DIR; }

// Scratch directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("rk-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

// Continuous columns f0..f{cols-1} from a row-major matrix.
inline rk::TabularDataset numeric_dataset(std::span<const double> x, std::size_t cols, std::span<const int> y) {
    std::vector<rk::ColumnSpec> spec(cols);
    for (std::size_t j = 0; j < cols; ++j) spec[j].name = "f" + std::to_string(j);
    std::vector<std::vector<rk::Cell>> rows(x.size() / cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t j = 0; j < cols; ++j) rows[r].emplace_back(x[r * cols + j]);
    }
    return rk::TabularDataset(std::move(spec), std::move(rows), std::vector<int>(y.begin(), y.end()), "fixture");
}

inline rk::ScoreSet scores(std::vector<double> p, std::vector<int> y) { return rk::make_scoreset(std::move(p), std::move(y)); }

} // namespace test
