#include "ttkm/metrics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ttkm/error.hpp"

namespace ttkm {

double negative_log_likelihood(const Vector& mean, const Vector& variance, const Vector& truth) {
    if (mean.size() != truth.size() || variance.size() != truth.size()) {
        fail(ErrorKind::Shape, "prediction and truth lengths differ");
    }
    if (truth.size() == 0) fail(ErrorKind::Validation, "NLL needs at least one point");
    double total = 0.0;
    for (Index m = 0; m < truth.size(); ++m) {
        const double v = variance[m];
        if (!(v > 0.0)) fail(ErrorKind::Validation, "predictive variance must be positive (row " + std::to_string(m) + ")");
        const double r = truth[m] - mean[m];
        total += 0.5 * std::log(2.0 * std::numbers::pi * v) + r * r / (2.0 * v);
    }
    return total / static_cast<double>(truth.size());
}

double root_mean_squared_error(const Vector& mean, const Vector& truth) {
    if (mean.size() != truth.size()) fail(ErrorKind::Shape, "prediction and truth lengths differ");
    if (truth.size() == 0) fail(ErrorKind::Validation, "RMSE needs at least one point");
    return std::sqrt((truth - mean).squaredNorm() / static_cast<double>(truth.size()));
}

}  // namespace ttkm
