#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ttkm/tensor_ops.hpp"

namespace ttkm::testing {

/// Seeded source of random shapes and matrices for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    Index integer(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng_); }
    double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

    Matrix matrix(Index rows, Index cols) {
        Matrix m(rows, cols);
        for (Index c = 0; c < cols; ++c)
            for (Index r = 0; r < rows; ++r) m(r, c) = normal();
        return m;
    }
    Vector vector(Index n) { return matrix(n, 1).col(0); }

    TTWeights weights(const std::vector<Index>& ranks, Index basis) {
        const std::size_t dims = ranks.size() + 1;
        std::vector<TTCore> cores;
        for (std::size_t d = 0; d < dims; ++d) {
            const Index left = d == 0 ? 1 : ranks[d - 1];
            const Index right = d + 1 == dims ? 1 : ranks[d];
            cores.emplace_back(left, basis, right, vector(left * basis * right));
        }
        return TTWeights(std::move(cores));
    }

    std::vector<Matrix> features(std::size_t dims, Index rows, Index basis) {
        std::vector<Matrix> out;
        for (std::size_t d = 0; d < dims; ++d) out.push_back(matrix(rows, basis));
        return out;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

/// Dense N x prod(I) feature matrix built entry by entry from nested index loops.
inline Matrix dense_features(const std::vector<Matrix>& phi) {
    const Index rows = phi.front().rows();
    Index total = 1;
    for (const auto& p : phi) total *= p.cols();
    Matrix out(rows, total);
    for (Index n = 0; n < rows; ++n) {
        for (Index lin = 0; lin < total; ++lin) {
            Index rest = lin;
            double v = 1.0;
            for (const auto& p : phi) {
                v *= p(n, rest % p.cols());
                rest /= p.cols();
            }
            out(n, lin) = v;
        }
    }
    return out;
}

/// Full weight tensor by explicit slice products V1(i1) V2(i2) ... VD(iD).
inline Vector chain_oracle(const TTWeights& w) {
    Index total = 1;
    for (const auto& c : w.cores()) total *= c.mode_size();
    Vector out(total);
    for (Index lin = 0; lin < total; ++lin) {
        Index rest = lin;
        Matrix running = Matrix::Ones(1, 1);
        for (const auto& c : w.cores()) {
            const Index i = rest % c.mode_size();
            rest /= c.mode_size();
            Matrix slice(c.left_rank(), c.right_rank());
            for (Index a = 0; a < c.left_rank(); ++a)
                for (Index b = 0; b < c.right_rank(); ++b) slice(a, b) = c(a, i, b);
            running = running * slice;
        }
        out[lin] = running(0, 0);
    }
    return out;
}

inline std::string temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("ttkm_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace ttkm::testing
