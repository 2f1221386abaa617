#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ttkm/als.hpp"
#include "ttkm/data_io.hpp"
#include "ttkm/feature_maps.hpp"
#include "ttkm/laplace_vi.hpp"

namespace ttkm {

enum class InferenceMode { Vi, Cv, Fixed };

const char* to_string(InferenceMode mode) noexcept;
InferenceMode parse_inference_mode(const std::string& name);

/// Everything needed to fit one model on a training split.
struct ModelSettings {
    FeatureFamily family = FeatureFamily::UnitNormPolynomial;
    Index basis_count = 4;
    TrainConfig train;
    ViOptions vi;
    double beta = 1.0;   // fixed mode, standardized target scale
    double gamma = 1.0;
};

/// A trained Bayesian TT kernel machine; precisions live on the standardized target scale.
struct TTModel {
    FeatureMapSpec feature_map;
    Standardizer standardizer;
    std::vector<std::string> input_names;
    std::string target_name;
    InferenceMode inference = InferenceMode::Vi;
    TrainConfig train;
    BayesianFit fit;

    /// E[beta] expressed in original target units.
    double noise_precision_original() const {
        return fit.noise_precision / (standardizer.target_std() * standardizer.target_std());
    }
};

/// Standardize (train statistics only), fit feature maps, then ALS + Laplace in fixed or VI mode.
/// InferenceMode::Cv is resolved by the caller into a fixed fit.
TTModel train_model(const Dataset& train, const ModelSettings& settings, InferenceMode mode);

/// Predictive mean and variance on the original target scale.
PredictiveDistribution predict(const TTModel& model, const Matrix& inputs,
                               CovarianceMode mode = CovarianceMode::Diagonal);

nlohmann::json to_json(const TTModel& model);
TTModel model_from_json(const nlohmann::json& doc);

void save_model(const TTModel& model, const std::string& path);
TTModel load_model(const std::string& path);

}  // namespace ttkm
