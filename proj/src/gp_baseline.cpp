#include "ttkm/gp_baseline.hpp"

#include <cmath>
#include <limits>

#include "ttkm/data_io.hpp"
#include "ttkm/error.hpp"
#include "ttkm/metrics.hpp"

namespace ttkm {

void validate(const GPConfig& config) {
    if (!(config.signal_variance > 0.0) || !(config.lengthscale > 0.0) || !(config.noise_precision > 0.0)) {
        fail(ErrorKind::Validation, "GP hyperparameters must be positive");
    }
}

Matrix se_kernel(const Matrix& a, const Matrix& b, const GPConfig& config) {
    if (a.cols() != b.cols()) fail(ErrorKind::Shape, "kernel inputs have different widths");
    const Vector a_sq = a.rowwise().squaredNorm();
    const Vector b_sq = b.rowwise().squaredNorm();
    Matrix dist = (-2.0 * a * b.transpose()).colwise() + a_sq;
    dist.rowwise() += b_sq.transpose();
    const double scale = -0.5 / (config.lengthscale * config.lengthscale);
    return config.signal_variance * (dist.array().max(0.0) * scale).exp().matrix();
}

GaussianProcess GaussianProcess::fit(const Matrix& inputs, const Vector& targets, const GPConfig& config) {
    validate(config);
    if (inputs.rows() < 1) fail(ErrorKind::Validation, "GP needs at least one training point");
    if (inputs.rows() != targets.size()) fail(ErrorKind::Shape, "GP inputs and targets differ in length");

    GaussianProcess gp;
    gp.config_ = config;
    gp.inputs_ = inputs;
    Matrix gram = se_kernel(inputs, inputs, config);
    gram.diagonal().array() += 1.0 / config.noise_precision;

    constexpr double kJitter[] = {0.0, 1e-10, 1e-8, 1e-6};
    for (double jitter : kJitter) {
        Matrix attempt = gram;
        attempt.diagonal().array() += jitter;
        gp.factor_.compute(attempt);
        if (gp.factor_.info() == Eigen::Success) {
            gp.jitter_ = jitter;
            gp.weights_ = gp.factor_.solve(targets);
            return gp;
        }
    }
    fail(ErrorKind::NotPositiveDefinite, "GP kernel matrix could not be factorized even with 1e-6 jitter");
}

GPPrediction GaussianProcess::predict(const Matrix& test_inputs) const {
    const Matrix cross = se_kernel(inputs_, test_inputs, config_);  // N x M
    GPPrediction out;
    out.mean = cross.transpose() * weights_;
    const Matrix solved = factor_.matrixL().solve(cross);
    out.latent_variance = (config_.signal_variance - solved.colwise().squaredNorm().array()).matrix().transpose();
    for (Index m = 0; m < out.latent_variance.size(); ++m) {
        if (out.latent_variance[m] < 0.0) {
            out.latent_variance[m] = 0.0;
            ++out.clamped;
        }
    }
    out.variance = out.latent_variance.array() + 1.0 / config_.noise_precision;
    return out;
}

GPConfig gp_select_hypers(const Matrix& inputs, const Vector& targets, const std::vector<GPConfig>& grid,
                          std::uint64_t seed) {
    if (grid.empty()) fail(ErrorKind::Validation, "GP hyperparameter grid is empty");
    if (grid.size() == 1) return grid.front();
    if (inputs.rows() < 2) fail(ErrorKind::Validation, "GP selection needs at least two points");

    const auto n = static_cast<std::size_t>(inputs.rows());
    const auto order = shuffled_indices(n, seed);
    const std::size_t n_fit = std::min(n - 1, static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(n) - 1e-9)));
    Matrix fit_x(static_cast<Index>(n_fit), inputs.cols());
    Vector fit_y(static_cast<Index>(n_fit));
    Matrix held_x(static_cast<Index>(n - n_fit), inputs.cols());
    Vector held_y(static_cast<Index>(n - n_fit));
    for (std::size_t k = 0; k < n; ++k) {
        const auto src = static_cast<Index>(order[k]);
        if (k < n_fit) {
            fit_x.row(static_cast<Index>(k)) = inputs.row(src);
            fit_y[static_cast<Index>(k)] = targets[src];
        } else {
            held_x.row(static_cast<Index>(k - n_fit)) = inputs.row(src);
            held_y[static_cast<Index>(k - n_fit)] = targets[src];
        }
    }

    GPConfig best = grid.front();
    double best_nll = std::numeric_limits<double>::infinity();
    for (const GPConfig& candidate : grid) {
        double nll = std::numeric_limits<double>::infinity();
        try {
            const GPPrediction p = GaussianProcess::fit(fit_x, fit_y, candidate).predict(held_x);
            nll = negative_log_likelihood(p.mean, p.variance, held_y);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
        }
        if (nll < best_nll) {
            best_nll = nll;
            best = candidate;
        }
    }
    return best;
}

std::vector<GPConfig> default_gp_grid() {
    std::vector<GPConfig> grid;
    for (double sf : {0.5, 1.0, 2.0})
        for (double l : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0})
            for (double b : {1.0, 10.0, 100.0, 1000.0}) grid.push_back({sf, l, b});
    return grid;
}

}  // namespace ttkm
