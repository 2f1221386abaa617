#include "ttkm/feature_maps.hpp"

#include <cmath>
#include <numbers>

#include "ttkm/error.hpp"

namespace ttkm {

const char* to_string(FeatureFamily family) noexcept {
    return family == FeatureFamily::Fourier ? "fourier" : "polynomial";
}

FeatureFamily parse_feature_family(const std::string& name) {
    if (name == "polynomial" || name == "poly") return FeatureFamily::UnitNormPolynomial;
    if (name == "fourier") return FeatureFamily::Fourier;
    fail(ErrorKind::Validation, "unknown feature family '" + name + "' (expected polynomial|fourier)");
}

namespace {

Matrix raw_polynomial(const Eigen::Ref<const Vector>& x, double lower, double upper, Index basis_count) {
    Matrix out(x.size(), basis_count);
    for (Index n = 0; n < x.size(); ++n) {
        const double t = 2.0 * (x[n] - lower) / (upper - lower) - 1.0;
        double p = 1.0;
        for (Index i = 0; i < basis_count; ++i) {
            out(n, i) = p;
            p *= t;
        }
    }
    return out;
}

Matrix fourier(const Eigen::Ref<const Vector>& x, double lower, double upper, Index basis_count) {
    Matrix out(x.size(), basis_count);
    const double period = upper - lower;
    for (Index n = 0; n < x.size(); ++n) {
        const double phase = 2.0 * std::numbers::pi * (x[n] - lower) / period;
        out(n, 0) = 1.0;
        for (Index i = 1; i < basis_count; ++i) {
            const double k = static_cast<double>((i + 1) / 2);
            out(n, i) = (i % 2 == 1) ? std::cos(k * phase) : std::sin(k * phase);
        }
    }
    return out;
}

}  // namespace

FeatureMapSpec fit_feature_map(const Matrix& train_inputs, FeatureFamily family, Index basis_count) {
    if (train_inputs.rows() < 1) fail(ErrorKind::Validation, "feature fitting needs at least one row");
    if (basis_count < 1) fail(ErrorKind::Validation, "basis count must be at least 1");

    FeatureMapSpec spec;
    spec.family = family;
    spec.basis_count = basis_count;
    const Index dims = train_inputs.cols();
    spec.lower.resize(dims);
    spec.upper.resize(dims);
    if (family == FeatureFamily::UnitNormPolynomial) spec.norms.resize(dims, basis_count);

    const double sqrt_n = std::sqrt(static_cast<double>(train_inputs.rows()));
    for (Index d = 0; d < dims; ++d) {
        const double a = train_inputs.col(d).minCoeff();
        const double b = train_inputs.col(d).maxCoeff();
        if (!(b > a)) {
            fail(ErrorKind::DegenerateFeature,
                 "degenerate feature: input column " + std::to_string(d) + " is constant on the training rows");
        }
        spec.lower[d] = a;
        spec.upper[d] = b;
        if (family == FeatureFamily::UnitNormPolynomial) {
            const Matrix raw = raw_polynomial(train_inputs.col(d), a, b, basis_count);
            for (Index i = 0; i < basis_count; ++i) spec.norms(d, i) = raw.col(i).norm() / sqrt_n;
        }
    }
    return spec;
}

Matrix eval_features(const FeatureMapSpec& spec, const Matrix& inputs, std::size_t d) {
    if (!spec.fitted()) fail(ErrorKind::Usage, "feature map has not been fitted");
    if (d >= spec.dims() || static_cast<Index>(d) >= inputs.cols()) {
        fail(ErrorKind::Shape, "feature dimension " + std::to_string(d) + " out of range");
    }
    const auto column = inputs.col(static_cast<Index>(d));
    if (spec.family == FeatureFamily::Fourier) {
        return fourier(column, spec.lower[d], spec.upper[d], spec.basis_count);
    }
    Matrix out = raw_polynomial(column, spec.lower[d], spec.upper[d], spec.basis_count);
    for (Index i = 0; i < spec.basis_count; ++i) out.col(i) /= spec.norms(static_cast<Index>(d), i);
    return out;
}

std::vector<Matrix> eval_all_features(const FeatureMapSpec& spec, const Matrix& inputs) {
    if (static_cast<std::size_t>(inputs.cols()) != spec.dims()) {
        fail(ErrorKind::Shape, "input has " + std::to_string(inputs.cols()) + " columns, feature map expects " +
                                   std::to_string(spec.dims()));
    }
    std::vector<Matrix> out;
    out.reserve(spec.dims());
    for (std::size_t d = 0; d < spec.dims(); ++d) out.push_back(eval_features(spec, inputs, d));
    return out;
}

Vector full_feature_row(const FeatureMapSpec& spec, const Vector& x, std::size_t cap) {
    if (static_cast<std::size_t>(x.size()) != spec.dims()) fail(ErrorKind::Shape, "input length mismatch");
    std::size_t total = 1;
    for (std::size_t d = 0; d < spec.dims(); ++d) {
        total *= static_cast<std::size_t>(spec.basis_count);
        if (total > cap) fail(ErrorKind::ExpansionTooLarge, "expansion too large: feature row exceeds cap");
    }
    const Matrix row = x.transpose();
    Vector out = eval_features(spec, row, 0).row(0).transpose();
    for (std::size_t d = 1; d < spec.dims(); ++d) {
        out = kron(eval_features(spec, row, d).row(0).transpose(), out);
    }
    return out;
}

}  // namespace ttkm
