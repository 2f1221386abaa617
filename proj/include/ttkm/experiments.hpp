#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttkm/data_io.hpp"
#include "ttkm/model.hpp"

namespace ttkm::experiments {

/// Flat run configuration; JSON keys are the field names.
struct RunConfig {
    // data
    std::string data;
    std::string target = "y";
    std::string delimiter = ",";
    double test_fraction = 0.1;
    std::uint64_t split_seed = 0;

    // model
    std::string family = "polynomial";
    Index basis = 4;
    Index rank = 2;
    std::vector<Index> ranks;        // explicit R_1..R_{D-1}; overrides `rank`
    Index rank_high = 0;             // pattern 2 middle rank, default rank + 1
    Index rank_low = 0;              // pattern 3 middle rank, default rank - 1
    std::vector<int> patterns{1, 2, 3};
    std::size_t bayesian_core = 1;
    int epochs = 10;
    double convergence_tol = 1e-8;

    // inference
    std::string mode = "vi";
    double beta = 1.0;
    double gamma = 1.0;
    int vi_max_outer = 10;
    double vi_tol = 1e-4;
    double prior_shape = 1e-6;
    double prior_rate = 1e-6;
    std::vector<double> cv_grid{0.001, 0.01, 0.1, 1.0, 10.0};
    int folds = 5;
    bool parallel = false;

    // runs
    std::uint64_t seed = 0;
    int restarts = 10;
    std::vector<std::size_t> shifts;  // empty: 0..min(D, 4)-1
    Index gp_max_rows = 5000;
    std::string out_dir = "out";

    // predict / metrics
    std::string model;
    std::string predictions;
    std::string truth;

    // synth
    Index synth_rows = 2000;
    std::size_t synth_dims = 6;
    double synth_noise = 0.1;
};

/// Unknown keys are rejected so that typos surface as validation errors.
RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& config);

/// Per-restart model settings derived from the config for a D-dimensional dataset.
ModelSettings model_settings(const RunConfig& config, std::size_t dims, const std::vector<Index>& ranks,
                             std::uint64_t init_seed);
std::vector<Index> resolve_ranks(const RunConfig& config, std::size_t dims);

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation; only meaningful for count >= 2
    std::size_t count = 0;
};
Summary summarize(const std::vector<double>& values);

/// "a/c" entry: 1-based argmin core over c candidates. Ties keep the lower core.
std::string best_core_entry(const std::vector<double>& nll_by_core);

/// Seeded zero-mean TT model over Legendre features of x ~ U[-1, 1]^D, scaled to unit RMS, plus N(0, noise^2).
Dataset generate_synthetic(Index rows, std::size_t dims, Index basis, Index rank, double noise, std::uint64_t seed);

struct CvSelection {
    double gamma = 1.0;
    double beta = 1.0;
    int fold_trainings = 0;
    std::vector<double> gammas;        // grid order, gamma outer / beta inner
    std::vector<double> betas;
    std::vector<double> validation_nll;
};

/// K-fold validation NLL for every (gamma, beta) pair; ties keep grid order.
CvSelection cv_select(const Dataset& train, const ModelSettings& base, const std::vector<double>& grid, int folds,
                      std::uint64_t fold_seed, bool parallel);

/// Runs one CLI command; artifacts are written under config.out_dir and a JSON summary returned.
nlohmann::json run_command(const std::string& command, const RunConfig& config);

nlohmann::json cmd_train(const RunConfig& config);
nlohmann::json cmd_cv(const RunConfig& config);
nlohmann::json cmd_predict(const RunConfig& config);
nlohmann::json cmd_metrics(const RunConfig& config);
nlohmann::json cmd_ablate_core(const RunConfig& config);
nlohmann::json cmd_ablate_shift(const RunConfig& config);
nlohmann::json cmd_compare_gp(const RunConfig& config);
nlohmann::json cmd_synth(const RunConfig& config);

const std::vector<std::string>& command_names();

}  // namespace ttkm::experiments
