#include "ttkm/tensor_ops.hpp"

#include <string>

#include "ttkm/error.hpp"

namespace ttkm {

MultiIndexMap::MultiIndexMap(std::vector<std::size_t> mode_sizes) : sizes_(std::move(mode_sizes)) {
    if (sizes_.empty()) fail(ErrorKind::Shape, "multi-index map needs at least one mode");
    for (std::size_t s : sizes_) {
        if (s == 0) fail(ErrorKind::Shape, "mode sizes must be positive");
        total_ *= s;
    }
}

std::size_t MultiIndexMap::flatten(std::span<const std::size_t> indices) const {
    if (indices.size() != sizes_.size()) {
        fail(ErrorKind::Shape, "expected " + std::to_string(sizes_.size()) + " indices, got " +
                                   std::to_string(indices.size()));
    }
    std::size_t linear = 0;
    std::size_t stride = 1;
    for (std::size_t d = 0; d < sizes_.size(); ++d) {
        if (indices[d] >= sizes_[d]) {
            fail(ErrorKind::Bounds, "index " + std::to_string(indices[d]) + " out of range for mode " +
                                        std::to_string(d) + " of size " + std::to_string(sizes_[d]));
        }
        linear += indices[d] * stride;
        stride *= sizes_[d];
    }
    return linear;
}

std::vector<std::size_t> MultiIndexMap::unflatten(std::size_t linear) const {
    if (linear >= total_) {
        fail(ErrorKind::Bounds, "linear index " + std::to_string(linear) + " out of range");
    }
    std::vector<std::size_t> out(sizes_.size());
    for (std::size_t d = 0; d < sizes_.size(); ++d) {
        out[d] = linear % sizes_[d];
        linear /= sizes_[d];
    }
    return out;
}

Vector kron(const Vector& b, const Vector& a) {
    const Index n_a = a.size();
    Vector out(n_a * b.size());
    for (Index j = 0; j < b.size(); ++j) out.segment(j * n_a, n_a) = b[j] * a;
    return out;
}

Matrix khatri_rao_rows(const Matrix& b, const Matrix& a) {
    if (a.rows() != b.rows()) {
        fail(ErrorKind::Shape, "khatri-rao row mismatch: " + std::to_string(b.rows()) + " vs " +
                                   std::to_string(a.rows()));
    }
    const Index n_a = a.cols();
    Matrix out(a.rows(), n_a * b.cols());
    for (Index j = 0; j < b.cols(); ++j) {
        out.middleCols(j * n_a, n_a) = a.array().colwise() * b.col(j).array();
    }
    return out;
}

TTCore::TTCore(Index left_rank, Index mode_size, Index right_rank)
    : TTCore(left_rank, mode_size, right_rank, Vector::Zero(left_rank * mode_size * right_rank)) {}

TTCore::TTCore(Index left_rank, Index mode_size, Index right_rank, Vector entries)
    : left_(left_rank), mode_(mode_size), right_(right_rank), entries_(std::move(entries)) {
    if (left_ <= 0 || mode_ <= 0 || right_ <= 0) fail(ErrorKind::Shape, "core dimensions must be positive");
    if (entries_.size() != left_ * mode_ * right_) fail(ErrorKind::Shape, "core entry count does not match shape");
}

void TTCore::set_entries(const Vector& entries) {
    if (entries.size() != entries_.size()) fail(ErrorKind::Shape, "core entry count does not match shape");
    entries_ = entries;
}

Matrix TTCore::slice(Index i) const {
    Matrix out(left_, right_);
    for (Index r1 = 0; r1 < right_; ++r1)
        for (Index r0 = 0; r0 < left_; ++r0) out(r0, r1) = (*this)(r0, i, r1);
    return out;
}

TTWeights::TTWeights(std::vector<TTCore> cores) : cores_(std::move(cores)) {
    if (cores_.empty()) fail(ErrorKind::Shape, "a tensor train needs at least one core");
    if (cores_.front().left_rank() != 1 || cores_.back().right_rank() != 1) {
        fail(ErrorKind::Shape, "boundary ranks must be 1");
    }
    for (std::size_t d = 0; d + 1 < cores_.size(); ++d) {
        if (cores_[d].right_rank() != cores_[d + 1].left_rank()) {
            fail(ErrorKind::Shape, "rank mismatch between cores " + std::to_string(d) + " and " +
                                       std::to_string(d + 1));
        }
    }
}

std::vector<Index> TTWeights::ranks() const {
    std::vector<Index> out;
    for (std::size_t d = 0; d + 1 < cores_.size(); ++d) out.push_back(cores_[d].right_rank());
    return out;
}

std::vector<std::size_t> TTWeights::mode_sizes() const {
    std::vector<std::size_t> out;
    for (const auto& c : cores_) out.push_back(static_cast<std::size_t>(c.mode_size()));
    return out;
}

Index TTWeights::parameter_count() const {
    Index n = 0;
    for (const auto& c : cores_) n += c.size();
    return n;
}

double TTWeights::squared_norm() const {
    double s = 0.0;
    for (const auto& c : cores_) s += c.entries().squaredNorm();
    return s;
}

Vector tt_full_vector(const TTWeights& w, std::size_t cap) {
    std::size_t total = 1;
    for (const auto& c : w.cores()) {
        total *= static_cast<std::size_t>(c.mode_size());
        if (total > cap) {
            fail(ErrorKind::ExpansionTooLarge,
                 "expansion too large: full vector exceeds cap of " + std::to_string(cap) + " entries");
        }
    }
    // Left-to-right accumulation: block k holds the 1 x R_d row for prefix index k.
    Matrix prefix = Matrix::Ones(1, 1);
    for (const auto& c : w.cores()) {
        const Index rows = prefix.rows();
        Matrix next(rows * c.mode_size(), c.right_rank());
        for (Index i = 0; i < c.mode_size(); ++i) {
            next.middleRows(i * rows, rows) = prefix * c.slice(i);
        }
        prefix = std::move(next);
    }
    return prefix.col(0);
}

Vector tt_dot_features(const TTWeights& w, std::span<const Matrix> phi) {
    if (phi.size() != w.order()) {
        fail(ErrorKind::Shape, "expected " + std::to_string(w.order()) + " feature matrices, got " +
                                   std::to_string(phi.size()));
    }
    const Index n = phi.front().rows();
    Matrix running = Matrix::Ones(n, 1);
    for (std::size_t d = 0; d < w.order(); ++d) {
        const TTCore& c = w.core(d);
        if (phi[d].rows() != n || phi[d].cols() != c.mode_size()) {
            fail(ErrorKind::Shape, "feature matrix " + std::to_string(d) + " has wrong shape");
        }
        running = khatri_rao_rows(phi[d], running) * c.left_unfolding();
    }
    return running.col(0);
}

}  // namespace ttkm
