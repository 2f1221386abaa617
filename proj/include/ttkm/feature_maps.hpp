#pragma once

#include <string>
#include <vector>

#include "ttkm/tensor_ops.hpp"

namespace ttkm {

enum class FeatureFamily { UnitNormPolynomial, Fourier };

const char* to_string(FeatureFamily family) noexcept;
FeatureFamily parse_feature_family(const std::string& name);

/// Fitted per-dimension feature maps with a uniform basis count.
///
/// Polynomial: x~ = 2(x - a_d)/(b_d - a_d) - 1 and phi_i = x~^i / c_{d,i}, where c_{d,i}
/// is the RMS of the raw column over the training rows (unit RMS after fitting).
/// Fourier: [1, cos(2 pi t), sin(2 pi t), cos(4 pi t), sin(4 pi t), ...] with
/// t = (x - a_d)/(b_d - a_d), truncated to I entries.
struct FeatureMapSpec {
    FeatureFamily family = FeatureFamily::UnitNormPolynomial;
    Index basis_count = 0;
    std::vector<double> lower;  // a_d
    std::vector<double> upper;  // b_d
    Matrix norms;               // D x I, polynomial only

    std::size_t dims() const noexcept { return lower.size(); }
    bool fitted() const noexcept { return basis_count > 0 && !lower.empty(); }
};

FeatureMapSpec fit_feature_map(const Matrix& train_inputs, FeatureFamily family, Index basis_count);

/// M x I feature matrix for column `d` of `inputs`. Inputs outside [a_d, b_d] are not clipped.
Matrix eval_features(const FeatureMapSpec& spec, const Matrix& inputs, std::size_t d);

/// One feature matrix per input dimension.
std::vector<Matrix> eval_all_features(const FeatureMapSpec& spec, const Matrix& inputs);

/// phi(x) = phi_D(x_D) kron ... kron phi_1(x_1); test-only path, guarded by `cap`.
Vector full_feature_row(const FeatureMapSpec& spec, const Vector& x,
                        std::size_t cap = kDefaultExpansionCap);

}  // namespace ttkm
