#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ttkm/tensor_ops.hpp"

namespace ttkm {

/// Interior-rank layouts used by the core-selection ablation.
enum class RankPattern {
    Uniform,   // [R, ..., R]
    PeakHigh,  // R everywhere, middle rank P > R
    PeakLow,   // R everywhere, middle rank P < R
};

/// Ranks R_1..R_{D-1}; the "middle" rank is index ceil((D-1)/2) in 1-based rank numbering.
std::vector<Index> rank_pattern(RankPattern pattern, std::size_t dims, Index rank, Index middle_rank);

struct TrainConfig {
    std::vector<Index> ranks;         // R_1..R_{D-1}
    int epochs = 10;                  // hard cap on full sweeps
    std::size_t bayesian_core = 1;    // 1-based core index d*, also the terminal ALS core
    std::uint64_t init_seed = 0;
    double convergence_tol = 1e-8;    // relative objective decrease over one sweep
};

void validate(const TrainConfig& config, std::size_t dims);

/// i.i.d. N(0, 1/(I R_{d-1} R_d)) core entries drawn from a seeded generator.
TTWeights init_weights(const std::vector<Index>& ranks, std::size_t dims, Index basis_count,
                       std::uint64_t seed);

/// One forward-backward pass in 0-based core indices: 0, 1, ..., D-1, ..., 1.
std::vector<std::size_t> full_sweep_order(std::size_t dims);

/// Continuation after a full pass (which ends on core 1) so that the last update is `terminal`.
std::vector<std::size_t> terminal_walk(std::size_t dims, std::size_t terminal);

/// Full schedule for `epochs` sweeps without early stopping.
std::vector<std::size_t> sweep_schedule(std::size_t dims, int epochs, std::size_t terminal);

/// Solves (A^T A + lambda I) v = A^T y with a Cholesky factorization.
Vector solve_regularized_normal(const Matrix& design, const Vector& y, double lambda);

/// ALS working state: weights, per-dimension feature matrices and the cached
/// left (P) / right (Q) interface matrices.
///
/// P[d] is N x R_{d-1} and valid for d <= left_valid(); Q[d] is N x R_d and valid for
/// d >= right_valid(). Updating core d invalidates P beyond d and Q before d; moving
/// one core to either side extends the caches by a single recurrence step.
class SweepState {
public:
    SweepState(TTWeights weights, std::vector<Matrix> features);

    const TTWeights& weights() const noexcept { return weights_; }
    std::span<const Matrix> features() const noexcept { return features_; }
    std::size_t order() const noexcept { return weights_.order(); }
    Index rows() const noexcept { return rows_; }

    void set_precisions(double beta, double gamma);
    double beta() const noexcept { return beta_; }
    double gamma() const noexcept { return gamma_; }
    double regularization() const noexcept { return gamma_ / beta_; }

    std::size_t current_core() const noexcept { return current_; }
    bool caches_valid_for(std::size_t d) const noexcept { return left_valid_ >= d && right_valid_ <= d; }
    const Matrix& left_interface(std::size_t d) const;
    const Matrix& right_interface(std::size_t d) const;

    /// A^(d) = Q^(d) (.)_R Phi^(d) (.)_R P^(d); columns ordered like vec(core d).
    Matrix design_matrix(std::size_t d) const;

    /// Regularized least-squares update of core d against targets y. Returns J after the update,
    /// computed from the design matrix of core d.
    double update_core(std::size_t d, const Vector& y);

    /// Extends the caches so that core d can be updated next.
    void move_to(std::size_t d);

    /// Replaces core d directly (used to install a posterior mean); invalidates caches like an update.
    void set_core(std::size_t d, const Vector& entries);

private:
    void step_left_cache(std::size_t d);   // P[d+1] from P[d] and core d
    void step_right_cache(std::size_t d);  // Q[d-1] from Q[d] and core d

    TTWeights weights_;
    std::vector<Matrix> features_;
    Index rows_ = 0;
    std::vector<Matrix> left_;
    std::vector<Matrix> right_;
    std::size_t left_valid_ = 0;
    std::size_t right_valid_ = 0;
    std::size_t current_ = 0;
    double beta_ = 1.0;
    double gamma_ = 1.0;
};

/// J(v) = beta/2 ||y - Phi g(v)||^2 + gamma/2 ||v||^2, evaluated via tt_dot_features.
double objective(const TTWeights& weights, std::span<const Matrix> features, const Vector& y, double beta,
                 double gamma);
double objective(const SweepState& state, const Vector& y);

struct SweepSchedule {
    int epochs = 10;
    std::size_t terminal_core = 0;  // 0-based
    double convergence_tol = 1e-8;
};

struct SweepResult {
    std::vector<std::size_t> update_order;  // 0-based cores in update order
    std::vector<double> objective_trace;    // J after every core update
    int epochs_run = 0;
    bool converged = false;
};

/// Runs forward-backward sweeps 0..D-1..1 until the epoch cap or convergence, then walks
/// to the terminal core so it is the last one updated.
SweepResult sweep(SweepState& state, const Vector& y, const SweepSchedule& schedule);

}  // namespace ttkm
