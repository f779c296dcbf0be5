#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tgdfer/random.hpp"
#include "tgdfer/tensor.hpp"

namespace tgdfer::testing {

inline Tensor random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double stddev = 1.0,
                            bool requires_grad = false) {
    return normal_tensor(rng, {rows, cols}, stddev, requires_grad);
}

// Central differences of `loss` with respect to every element of `leaf`.
inline std::vector<double> numeric_grad(const std::function<double()>& loss, Tensor leaf, double h = 1e-5) {
    auto values = leaf.mutable_values();
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double original = values[i];
        values[i] = original + h;
        const double up = loss();
        values[i] = original - h;
        const double down = loss();
        values[i] = original;
        out[i] = (up - down) / (2.0 * h);
    }
    return out;
}

inline double relative_error(std::span<const double> a, std::span<const double> b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double scale = std::max(std::sqrt(na), std::sqrt(nb));
    return scale < 1e-10 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 counter(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("tgdfer_" + tag + "_" + std::to_string(counter()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace tgdfer::testing
