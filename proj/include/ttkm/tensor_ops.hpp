#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ttkm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Default ceiling on the number of entries a full expansion may produce.
inline constexpr std::size_t kDefaultExpansionCap = 1'000'000;

/// Zero-based multi-index <-> linear index map with the first mode fastest.
class MultiIndexMap {
public:
    explicit MultiIndexMap(std::vector<std::size_t> mode_sizes);

    const std::vector<std::size_t>& mode_sizes() const noexcept { return sizes_; }
    std::size_t order() const noexcept { return sizes_.size(); }
    std::size_t total_size() const noexcept { return total_; }

    std::size_t flatten(std::span<const std::size_t> indices) const;
    std::vector<std::size_t> unflatten(std::size_t linear) const;

private:
    std::vector<std::size_t> sizes_;
    std::size_t total_ = 1;
};

/// kron(b, a)[i + j*I] = a[i] * b[j]; the left operand is the slower index.
Vector kron(const Vector& b, const Vector& a);

/// Row-wise Khatri-Rao product: row n is kron(B.row(n), A.row(n)).
Matrix khatri_rao_rows(const Matrix& b, const Matrix& a);

/// One TT-core of shape left_rank x mode_size x right_rank, stored as vec(core)
/// with the left rank index fastest and the right rank index slowest.
class TTCore {
public:
    TTCore() = default;
    TTCore(Index left_rank, Index mode_size, Index right_rank);
    TTCore(Index left_rank, Index mode_size, Index right_rank, Vector entries);

    Index left_rank() const noexcept { return left_; }
    Index mode_size() const noexcept { return mode_; }
    Index right_rank() const noexcept { return right_; }
    Index size() const noexcept { return entries_.size(); }

    const Vector& entries() const noexcept { return entries_; }
    Vector& entries() noexcept { return entries_; }
    void set_entries(const Vector& entries);

    double operator()(Index r_left, Index i, Index r_right) const {
        return entries_[r_left + left_ * (i + mode_ * r_right)];
    }
    double& operator()(Index r_left, Index i, Index r_right) {
        return entries_[r_left + left_ * (i + mode_ * r_right)];
    }

    /// The R_{d-1} x R_d matrix V(i).
    Matrix slice(Index i) const;

    /// vec(core) viewed as a (left_rank * mode_size) x right_rank matrix.
    Eigen::Map<const Matrix> left_unfolding() const {
        return {entries_.data(), left_ * mode_, right_};
    }

private:
    Index left_ = 0;
    Index mode_ = 0;
    Index right_ = 0;
    Vector entries_;
};

/// Ordered chain of TT-cores with boundary ranks 1.
class TTWeights {
public:
    TTWeights() = default;
    explicit TTWeights(std::vector<TTCore> cores);

    std::size_t order() const noexcept { return cores_.size(); }
    const TTCore& core(std::size_t d) const { return cores_.at(d); }
    TTCore& core(std::size_t d) { return cores_.at(d); }
    const std::vector<TTCore>& cores() const noexcept { return cores_; }

    /// Interior ranks R_1..R_{D-1}.
    std::vector<Index> ranks() const;
    std::vector<std::size_t> mode_sizes() const;
    /// Total number of parameters, I * sum_d R_{d-1} R_d for uniform I.
    Index parameter_count() const;
    double squared_norm() const;

private:
    std::vector<TTCore> cores_;
};

/// Expands the TT into the full weight vector w = g(v); guarded by `cap`.
Vector tt_full_vector(const TTWeights& w, std::size_t cap = kDefaultExpansionCap);

/// Model response Phi * g(v) evaluated without forming Phi; phi[d] is N x I_d.
Vector tt_dot_features(const TTWeights& w, std::span<const Matrix> phi);

}  // namespace ttkm
