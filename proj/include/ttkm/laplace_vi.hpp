#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ttkm/als.hpp"

namespace ttkm {

/// Gaussian posterior over the Bayesian core d*; every other core is a point estimate.
struct CorePosterior {
    std::size_t core = 0;  // 0-based
    Vector mean;
    Matrix covariance;
};

struct GammaParams {
    double shape = 1e-6;
    double rate = 1e-6;

    double mean() const noexcept { return shape / rate; }
};

/// q(beta) and q(gamma) together with the priors they were updated from.
struct PrecisionPosterior {
    GammaParams beta_prior;
    GammaParams gamma_prior;
    GammaParams beta;
    GammaParams gamma;

    static PrecisionPosterior from_priors(GammaParams beta_prior, GammaParams gamma_prior) {
        return {beta_prior, gamma_prior, beta_prior, gamma_prior};
    }
    double mean_beta() const noexcept { return beta.mean(); }
    double mean_gamma() const noexcept { return gamma.mean(); }
};

enum class CovarianceMode { Diagonal, Full };

struct PredictiveDistribution {
    Vector mean;
    Vector variance;                  // diagonal of the predictive covariance
    std::optional<Matrix> covariance; // only in CovarianceMode::Full
};

/// A^(d) for arbitrary inputs, with P^(d) and Q^(d) contracted from scratch.
Matrix design_matrix(const TTWeights& weights, std::span<const Matrix> features, std::size_t d);

/// mu = (A^T A + gamma/beta I)^-1 A^T y and C = (beta A^T A + gamma I)^-1 at the state's current core.
CorePosterior laplace_posterior(const SweepState& state, const Vector& y, double beta, double gamma);
CorePosterior laplace_posterior(const Matrix& design, const Vector& y, double beta, double gamma,
                                std::size_t core);

/// N(A* mu, 1/beta I + A* C A*^T).
PredictiveDistribution predict_from_design(const Matrix& test_design, const CorePosterior& posterior,
                                           double beta, CovarianceMode mode = CovarianceMode::Diagonal);

/// E ||y - A v||^2 under v ~ N(mu, C): ||y - A mu||^2 + tr(C A^T A).
double expected_residual_sq(const Matrix& design, const CorePosterior& posterior, const Vector& y);
double expected_residual_sq(const SweepState& state, const CorePosterior& posterior, const Vector& y);

/// E v^T v with the Bayesian core random: sum_{k != d*} ||v_k||^2 + ||mu||^2 + tr(C).
double expected_weight_sq(const TTWeights& weights, const CorePosterior& posterior);

/// Conjugate Gamma updates; shapes are recomputed from the priors on every call.
PrecisionPosterior vi_update_precisions(const PrecisionPosterior& current, Index rows, Index parameter_count,
                                        double expected_residual, double expected_weight);

struct ViOptions {
    int max_outer = 10;
    double tolerance = 1e-4;  // relative change of E[beta] and E[gamma]
    GammaParams beta_prior;
    GammaParams gamma_prior;
};

struct ViTraceEntry {
    double objective = 0.0;   // J at the precisions used for this iteration's sweep
    double mean_beta = 0.0;   // after the update
    double mean_gamma = 0.0;
};

/// Trained weights with the Laplace posterior of the terminal core.
struct BayesianFit {
    TTWeights weights;
    CorePosterior posterior;
    PrecisionPosterior precisions;
    double beta = 1.0;   // precisions the posterior was computed at
    double gamma = 1.0;
    double noise_precision = 1.0;  // beta used in the predictive; E[beta] after the last VI update
    std::vector<ViTraceEntry> trace;
    int outer_iterations = 0;
    int als_updates = 0;
};

/// ALS at fixed (beta, gamma) followed by one Laplace step at the terminal core.
BayesianFit fit_fixed(std::vector<Matrix> features, const Vector& y, const TrainConfig& config, Index basis_count,
                      double beta, double gamma);

/// Coordinate ascent: ALS with lambda = E[gamma]/E[beta], Laplace at d*, Gamma updates; repeated.
BayesianFit fit_vi(std::vector<Matrix> features, const Vector& y, const TrainConfig& config, Index basis_count,
                   const ViOptions& options);

}  // namespace ttkm
