#pragma once

#include "ttkm/tensor_ops.hpp"

namespace ttkm {

/// Mean Gaussian negative log-likelihood: (1/M) sum [ln(2 pi v_m)/2 + (y_m - mu_m)^2 / (2 v_m)].
double negative_log_likelihood(const Vector& mean, const Vector& variance, const Vector& truth);

double root_mean_squared_error(const Vector& mean, const Vector& truth);

}  // namespace ttkm
