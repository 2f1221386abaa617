#pragma once

#include <cstdint>
#include <vector>

#include "ttkm/tensor_ops.hpp"

namespace ttkm {

/// Squared-exponential kernel sigma_f^2 exp(-|x - x'|^2 / (2 l^2)) plus Gaussian noise of precision beta.
struct GPConfig {
    double signal_variance = 1.0;
    double lengthscale = 1.0;
    double noise_precision = 1.0;

    bool operator==(const GPConfig&) const = default;
};

void validate(const GPConfig& config);

Matrix se_kernel(const Matrix& a, const Matrix& b, const GPConfig& config);

struct GPPrediction {
    Vector mean;
    Vector latent_variance;  // k** - k*^T (K + 1/beta I)^-1 k*, clamped at 0
    Vector variance;         // latent_variance + 1/beta
    int clamped = 0;         // latent variances that round-off pushed below zero
};

/// Exact zero-mean GP regression with a Cholesky factorization of K + 1/beta I.
class GaussianProcess {
public:
    /// Jitter 1e-10, 1e-8, 1e-6 is added to the diagonal in turn if the factorization fails.
    static GaussianProcess fit(const Matrix& inputs, const Vector& targets, const GPConfig& config);

    GPPrediction predict(const Matrix& test_inputs) const;

    const GPConfig& config() const noexcept { return config_; }
    double jitter() const noexcept { return jitter_; }
    Index rows() const noexcept { return inputs_.rows(); }

private:
    GPConfig config_;
    Matrix inputs_;
    Eigen::LLT<Matrix> factor_;
    Vector weights_;  // (K + 1/beta I)^-1 y
    double jitter_ = 0.0;
};

/// Grid search on held-out log likelihood over a seeded 80/20 split of (inputs, targets).
/// Ties keep the earliest grid entry.
GPConfig gp_select_hypers(const Matrix& inputs, const Vector& targets, const std::vector<GPConfig>& grid,
                          std::uint64_t seed = 0);

/// Grid used by the comparison harness on standardized data.
std::vector<GPConfig> default_gp_grid();

}  // namespace ttkm
