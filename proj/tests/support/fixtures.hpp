#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include <Eigen/Dense>

#include "felis/feature_matrix.hpp"

namespace fixture {

// Standard normal n x d matrix from a fixed seed.
inline Eigen::MatrixXd normal(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = dist(rng);
    }
    return m;
}

inline Eigen::MatrixXd random_orthogonal(Eigen::Index d, std::uint64_t seed) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(normal(d, d, seed));
    return qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
}

inline std::vector<std::string> ids(std::size_t n, const std::string& prefix = "pair") {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

inline felis::FeatureMatrix features(const Eigen::MatrixXd& m) {
    return felis::FeatureMatrix(m, ids(static_cast<std::size_t>(m.rows())));
}

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("felis_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
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
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

}  // namespace fixture
