#include "ttkm/als.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "ttkm/error.hpp"

namespace ttkm {

std::vector<Index> rank_pattern(RankPattern pattern, std::size_t dims, Index rank, Index middle_rank) {
    if (dims < 1) fail(ErrorKind::Validation, "dimension count must be positive");
    if (rank < 1) fail(ErrorKind::Validation, "rank must be positive");
    std::vector<Index> ranks(dims - 1, rank);
    if (pattern == RankPattern::Uniform || ranks.empty()) return ranks;
    if (middle_rank < 1) fail(ErrorKind::Validation, "middle rank must be positive");
    if (pattern == RankPattern::PeakHigh && middle_rank <= rank) {
        fail(ErrorKind::Validation, "pattern 2 needs a middle rank larger than the base rank");
    }
    if (pattern == RankPattern::PeakLow && middle_rank >= rank) {
        fail(ErrorKind::Validation, "pattern 3 needs a middle rank smaller than the base rank");
    }
    const std::size_t middle = (dims - 1 + 1) / 2;  // ceil((D-1)/2), 1-based
    ranks[middle - 1] = middle_rank;
    return ranks;
}

void validate(const TrainConfig& config, std::size_t dims) {
    if (dims < 1) fail(ErrorKind::Validation, "dataset must have at least one input column");
    if (config.ranks.size() != dims - 1) {
        fail(ErrorKind::Validation, "expected " + std::to_string(dims - 1) + " interior ranks, got " +
                                        std::to_string(config.ranks.size()));
    }
    for (Index r : config.ranks) {
        if (r < 1) fail(ErrorKind::Validation, "ranks must be positive");
    }
    if (config.epochs < 1) fail(ErrorKind::Validation, "epochs must be at least 1");
    if (config.bayesian_core < 1 || config.bayesian_core > dims) {
        fail(ErrorKind::Validation, "bayesian core must lie in 1.." + std::to_string(dims));
    }
    if (!(config.convergence_tol >= 0.0)) fail(ErrorKind::Validation, "convergence tolerance must be >= 0");
}

TTWeights init_weights(const std::vector<Index>& ranks, std::size_t dims, Index basis_count,
                       std::uint64_t seed) {
    if (ranks.size() + 1 != dims) fail(ErrorKind::Validation, "rank list does not match dimension count");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<TTCore> cores;
    cores.reserve(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        const Index left = d == 0 ? 1 : ranks[d - 1];
        const Index right = d + 1 == dims ? 1 : ranks[d];
        const double scale = 1.0 / std::sqrt(static_cast<double>(basis_count * left * right));
        Vector entries(left * basis_count * right);
        for (Index k = 0; k < entries.size(); ++k) entries[k] = scale * normal(rng);
        cores.emplace_back(left, basis_count, right, std::move(entries));
    }
    return TTWeights(std::move(cores));
}

std::vector<std::size_t> full_sweep_order(std::size_t dims) {
    std::vector<std::size_t> order;
    for (std::size_t d = 0; d < dims; ++d) order.push_back(d);
    for (std::size_t d = dims - 1; d-- > 1;) order.push_back(d);
    return order;
}

std::vector<std::size_t> terminal_walk(std::size_t dims, std::size_t terminal) {
    if (terminal >= dims) fail(ErrorKind::Validation, "terminal core out of range");
    std::vector<std::size_t> walk;
    if (dims == 1) return walk;
    // A full pass ends on core 1 (or on core 1 == D-1 when D == 2).
    if (terminal == 1) return walk;
    walk.push_back(0);
    for (std::size_t d = 1; d <= terminal; ++d) walk.push_back(d);
    return walk;
}

std::vector<std::size_t> sweep_schedule(std::size_t dims, int epochs, std::size_t terminal) {
    std::vector<std::size_t> schedule;
    const auto pass = full_sweep_order(dims);
    for (int e = 0; e < epochs; ++e) schedule.insert(schedule.end(), pass.begin(), pass.end());
    const auto tail = terminal_walk(dims, terminal);
    schedule.insert(schedule.end(), tail.begin(), tail.end());
    return schedule;
}

Vector solve_regularized_normal(const Matrix& design, const Vector& y, double lambda) {
    if (!(lambda >= 0.0)) fail(ErrorKind::Validation, "regularization must be non-negative");
    Matrix gram = Matrix::Zero(design.cols(), design.cols());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
    gram.diagonal().array() += lambda;
    Eigen::LLT<Matrix, Eigen::Lower> llt(gram);
    const bool singular = llt.info() != Eigen::Success || (lambda == 0.0 && llt.rcond() < 1e-13);
    if (singular) {
        fail(ErrorKind::RankDeficient,
             "normal matrix is singular or rank deficient; use a positive regularization (gamma > 0)");
    }
    return llt.solve(design.transpose() * y);
}

SweepState::SweepState(TTWeights weights, std::vector<Matrix> features)
    : weights_(std::move(weights)), features_(std::move(features)) {
    const std::size_t dims = weights_.order();
    if (features_.size() != dims) fail(ErrorKind::Shape, "one feature matrix per core is required");
    rows_ = features_.front().rows();
    for (std::size_t d = 0; d < dims; ++d) {
        if (features_[d].rows() != rows_ || features_[d].cols() != weights_.core(d).mode_size()) {
            fail(ErrorKind::Shape, "feature matrix " + std::to_string(d) + " does not match core shape");
        }
    }
    left_.resize(dims);
    right_.resize(dims);
    left_[0] = Matrix::Ones(rows_, 1);
    right_[dims - 1] = Matrix::Ones(rows_, 1);
    for (std::size_t d = dims - 1; d > 0; --d) step_right_cache(d);
    left_valid_ = 0;
    right_valid_ = 0;
    current_ = 0;
}

void SweepState::set_precisions(double beta, double gamma) {
    if (!(beta > 0.0) || !(gamma >= 0.0) || !std::isfinite(beta) || !std::isfinite(gamma)) {
        fail(ErrorKind::Validation, "precisions must satisfy beta > 0, gamma >= 0");
    }
    beta_ = beta;
    gamma_ = gamma;
}

const Matrix& SweepState::left_interface(std::size_t d) const {
    if (d >= order() || d > left_valid_) fail(ErrorKind::Internal, "stale left interface cache for core " + std::to_string(d));
    return left_[d];
}

const Matrix& SweepState::right_interface(std::size_t d) const {
    if (d >= order() || d < right_valid_) fail(ErrorKind::Internal, "stale right interface cache for core " + std::to_string(d));
    return right_[d];
}

Matrix SweepState::design_matrix(std::size_t d) const {
    if (d >= order()) fail(ErrorKind::Bounds, "core index out of range");
    if (!caches_valid_for(d)) {
        fail(ErrorKind::Internal, "stale interface cache: core " + std::to_string(d) + " is not reachable");
    }
    const std::size_t last = order() - 1;
    Matrix local = d == 0 ? features_[d] : khatri_rao_rows(features_[d], left_[d]);
    return d == last ? local : khatri_rao_rows(right_[d], local);
}

double SweepState::update_core(std::size_t d, const Vector& y) {
    if (y.size() != rows_) fail(ErrorKind::Shape, "target length does not match feature rows");
    const Matrix design = design_matrix(d);
    const Vector solution = solve_regularized_normal(design, y, regularization());
    set_core(d, solution);
    const double fit = (y - design * solution).squaredNorm();
    return 0.5 * beta_ * fit + 0.5 * gamma_ * weights_.squared_norm();
}

void SweepState::set_core(std::size_t d, const Vector& entries) {
    if (!caches_valid_for(d)) fail(ErrorKind::Internal, "stale interface cache for core " + std::to_string(d));
    weights_.core(d).set_entries(entries);
    left_valid_ = d;
    right_valid_ = d;
    current_ = d;
}

void SweepState::move_to(std::size_t d) {
    if (d >= order()) fail(ErrorKind::Bounds, "core index out of range");
    while (left_valid_ < d) {
        step_left_cache(left_valid_);
        ++left_valid_;
    }
    while (right_valid_ > d) {
        step_right_cache(right_valid_);
        --right_valid_;
    }
    current_ = d;
}

void SweepState::step_left_cache(std::size_t d) {
    const TTCore& core = weights_.core(d);
    const Matrix local = d == 0 ? features_[d] : khatri_rao_rows(features_[d], left_[d]);
    left_[d + 1] = local * core.left_unfolding();
}

void SweepState::step_right_cache(std::size_t d) {
    const TTCore& core = weights_.core(d);
    Matrix next = Matrix::Zero(rows_, core.left_rank());
    for (Index i = 0; i < core.mode_size(); ++i) {
        next += features_[d].col(i).asDiagonal() * (right_[d] * core.slice(i).transpose());
    }
    right_[d - 1] = std::move(next);
}

double objective(const TTWeights& weights, std::span<const Matrix> features, const Vector& y, double beta,
                 double gamma) {
    const Vector residual = y - tt_dot_features(weights, features);
    return 0.5 * beta * residual.squaredNorm() + 0.5 * gamma * weights.squared_norm();
}

double objective(const SweepState& state, const Vector& y) {
    return objective(state.weights(), state.features(), y, state.beta(), state.gamma());
}

SweepResult sweep(SweepState& state, const Vector& y, const SweepSchedule& schedule) {
    const std::size_t dims = state.order();
    if (schedule.terminal_core >= dims) fail(ErrorKind::Validation, "terminal core out of range");
    if (schedule.epochs < 1) fail(ErrorKind::Validation, "epochs must be at least 1");

    SweepResult result;
    auto run = [&](std::size_t d) {
        state.move_to(d);
        const double j = state.update_core(d, y);
        result.update_order.push_back(d);
        if (!std::isfinite(j)) fail(ErrorKind::NonFinite, "objective became non-finite during ALS");
        result.objective_trace.push_back(j);
    };

    const auto pass = full_sweep_order(dims);
    double previous = objective(state, y);
    for (int e = 0; e < schedule.epochs; ++e) {
        for (std::size_t d : pass) run(d);
        ++result.epochs_run;
        const double current = result.objective_trace.back();
        const double scale = std::max(std::abs(previous), std::numeric_limits<double>::min());
        if ((previous - current) / scale < schedule.convergence_tol) {
            result.converged = true;
            break;
        }
        previous = current;
    }
    for (std::size_t d : terminal_walk(dims, schedule.terminal_core)) run(d);
    return result;
}

}  // namespace ttkm
