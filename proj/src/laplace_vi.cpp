#include "ttkm/laplace_vi.hpp"

#include <cmath>
#include <string>

#include "ttkm/error.hpp"

namespace ttkm {

Matrix design_matrix(const TTWeights& weights, std::span<const Matrix> features, std::size_t d) {
    const std::size_t dims = weights.order();
    if (features.size() != dims) fail(ErrorKind::Shape, "one feature matrix per core is required");
    if (d >= dims) fail(ErrorKind::Bounds, "core index out of range");
    const Index rows = features.front().rows();

    Matrix left = Matrix::Ones(rows, 1);
    for (std::size_t k = 0; k < d; ++k) {
        left = khatri_rao_rows(features[k], left) * weights.core(k).left_unfolding();
    }
    Matrix right = Matrix::Ones(rows, 1);
    for (std::size_t k = dims - 1; k > d; --k) {
        const TTCore& core = weights.core(k);
        Matrix next = Matrix::Zero(rows, core.left_rank());
        for (Index i = 0; i < core.mode_size(); ++i) {
            next += features[k].col(i).asDiagonal() * (right * core.slice(i).transpose());
        }
        right = std::move(next);
    }
    return khatri_rao_rows(right, khatri_rao_rows(features[d], left));
}

CorePosterior laplace_posterior(const Matrix& design, const Vector& y, double beta, double gamma,
                                std::size_t core) {
    if (!(beta > 0.0) || !(gamma >= 0.0)) fail(ErrorKind::Validation, "precisions must satisfy beta > 0, gamma >= 0");
    CorePosterior post;
    post.core = core;
    post.mean = solve_regularized_normal(design, y, gamma / beta);

    Matrix hessian = beta * (design.transpose() * design);
    hessian.diagonal().array() += gamma;
    Eigen::LLT<Matrix> llt(hessian);
    if (llt.info() != Eigen::Success) {
        fail(ErrorKind::NotPositiveDefinite, "Laplace Hessian is not positive definite; use gamma > 0");
    }
    Matrix cov = llt.solve(Matrix::Identity(hessian.rows(), hessian.cols()));
    post.covariance = 0.5 * (cov + cov.transpose());
    return post;
}

CorePosterior laplace_posterior(const SweepState& state, const Vector& y, double beta, double gamma) {
    const std::size_t d = state.current_core();
    return laplace_posterior(state.design_matrix(d), y, beta, gamma, d);
}

PredictiveDistribution predict_from_design(const Matrix& test_design, const CorePosterior& posterior,
                                           double beta, CovarianceMode mode) {
    if (test_design.cols() != posterior.mean.size()) fail(ErrorKind::Shape, "design does not match posterior size");
    PredictiveDistribution out;
    out.mean = test_design * posterior.mean;
    const Matrix projected = test_design * posterior.covariance;
    const double noise = 1.0 / beta;
    if (mode == CovarianceMode::Full) {
        Matrix cov = projected * test_design.transpose();
        cov = 0.5 * (cov + cov.transpose());
        cov.diagonal().array() += noise;
        out.variance = cov.diagonal();
        out.covariance = std::move(cov);
    } else {
        out.variance = projected.cwiseProduct(test_design).rowwise().sum().array() + noise;
    }
    return out;
}

double expected_residual_sq(const Matrix& design, const CorePosterior& posterior, const Vector& y) {
    const double fit = (y - design * posterior.mean).squaredNorm();
    const double spread = (posterior.covariance.cwiseProduct(design.transpose() * design)).sum();
    return fit + spread;
}

double expected_residual_sq(const SweepState& state, const CorePosterior& posterior, const Vector& y) {
    return expected_residual_sq(state.design_matrix(posterior.core), posterior, y);
}

double expected_weight_sq(const TTWeights& weights, const CorePosterior& posterior) {
    double total = 0.0;
    for (std::size_t k = 0; k < weights.order(); ++k) {
        if (k != posterior.core) total += weights.core(k).entries().squaredNorm();
    }
    return total + posterior.mean.squaredNorm() + posterior.covariance.trace();
}

PrecisionPosterior vi_update_precisions(const PrecisionPosterior& current, Index rows, Index parameter_count,
                                        double expected_residual, double expected_weight) {
    PrecisionPosterior next = current;
    next.beta.shape = current.beta_prior.shape + 0.5 * static_cast<double>(rows);
    next.beta.rate = current.beta_prior.rate + 0.5 * expected_residual;
    next.gamma.shape = current.gamma_prior.shape + 0.5 * static_cast<double>(parameter_count);
    next.gamma.rate = current.gamma_prior.rate + 0.5 * expected_weight;
    return next;
}

namespace {

SweepSchedule schedule_for(const TrainConfig& config) {
    return {config.epochs, config.bayesian_core - 1, config.convergence_tol};
}

}  // namespace

BayesianFit fit_fixed(std::vector<Matrix> features, const Vector& y, const TrainConfig& config, Index basis_count,
                      double beta, double gamma) {
    validate(config, features.size());
    TTWeights initial = init_weights(config.ranks, features.size(), basis_count, config.init_seed);
    SweepState state(std::move(initial), std::move(features));
    state.set_precisions(beta, gamma);
    const SweepResult run = sweep(state, y, schedule_for(config));

    BayesianFit fit;
    fit.posterior = laplace_posterior(state, y, beta, gamma);
    fit.weights = state.weights();
    fit.beta = beta;
    fit.gamma = gamma;
    fit.noise_precision = beta;
    fit.precisions = PrecisionPosterior::from_priors({beta, 1.0}, {gamma, 1.0});
    fit.trace.push_back({run.objective_trace.empty() ? objective(state, y) : run.objective_trace.back(), beta, gamma});
    fit.outer_iterations = 1;
    fit.als_updates = static_cast<int>(run.update_order.size());
    return fit;
}

BayesianFit fit_vi(std::vector<Matrix> features, const Vector& y, const TrainConfig& config, Index basis_count,
                   const ViOptions& options) {
    if (options.max_outer < 1) fail(ErrorKind::Validation, "VI needs at least one outer iteration");
    validate(config, features.size());
    TTWeights initial = init_weights(config.ranks, features.size(), basis_count, config.init_seed);
    SweepState state(std::move(initial), std::move(features));

    BayesianFit fit;
    fit.precisions = PrecisionPosterior::from_priors(options.beta_prior, options.gamma_prior);
    const SweepSchedule schedule = schedule_for(config);

    for (int t = 0; t < options.max_outer; ++t) {
        const double beta = fit.precisions.mean_beta();
        const double gamma = fit.precisions.mean_gamma();
        state.set_precisions(beta, gamma);
        const SweepResult run = sweep(state, y, schedule);
        fit.als_updates += static_cast<int>(run.update_order.size());

        fit.posterior = laplace_posterior(state, y, beta, gamma);
        fit.beta = beta;
        fit.gamma = gamma;

        const double er2 = expected_residual_sq(state, fit.posterior, y);
        const double ev2 = expected_weight_sq(state.weights(), fit.posterior);
        fit.precisions = vi_update_precisions(fit.precisions, state.rows(), state.weights().parameter_count(), er2, ev2);

        const double next_beta = fit.precisions.mean_beta();
        const double next_gamma = fit.precisions.mean_gamma();
        if (!std::isfinite(next_beta) || !std::isfinite(next_gamma) || next_beta <= 0.0 || next_gamma <= 0.0) {
            fail(ErrorKind::NonFinite, "variational precisions became non-finite at iteration " + std::to_string(t + 1));
        }
        fit.trace.push_back({run.objective_trace.back(), next_beta, next_gamma});
        fit.outer_iterations = t + 1;

        const bool settled = std::abs(next_beta - beta) / next_beta < options.tolerance &&
                             std::abs(next_gamma - gamma) / next_gamma < options.tolerance;
        if (settled) break;
    }
    fit.weights = state.weights();
    fit.noise_precision = fit.precisions.mean_beta();
    return fit;
}

}  // namespace ttkm
