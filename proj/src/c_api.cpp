#include "ttkm/ttkm.h"

#include <exception>
#include <memory>
#include <new>
#include <string>

#include "ttkm/error.hpp"
#include "ttkm/experiments.hpp"
#include "ttkm/metrics.hpp"
#include "ttkm/model.hpp"

struct ttkm_dataset {
    ttkm::Dataset data;
};

struct ttkm_model {
    ttkm::TTModel model;
    std::string info;
};

struct ttkm_result {
    std::string json;
};

namespace {

thread_local std::string g_last_error;

ttkm_status status_of(ttkm::ErrorKind kind) {
    using ttkm::ErrorKind;
    switch (kind) {
        case ErrorKind::Bounds: return TTKM_ERR_BOUNDS;
        case ErrorKind::Shape: return TTKM_ERR_SHAPE;
        case ErrorKind::Usage:
        case ErrorKind::Validation:
        case ErrorKind::DegenerateFeature:
        case ErrorKind::ExpansionTooLarge: return TTKM_ERR_VALIDATION;
        case ErrorKind::RankDeficient:
        case ErrorKind::NotPositiveDefinite:
        case ErrorKind::NonFinite: return TTKM_ERR_NUMERICAL;
        case ErrorKind::Parse: return TTKM_ERR_PARSE;
        case ErrorKind::Io: return TTKM_ERR_IO;
        case ErrorKind::Internal: return TTKM_ERR_INTERNAL;
    }
    return TTKM_ERR_INTERNAL;
}

template <typename F>
ttkm_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return TTKM_OK;
    } catch (const ttkm::Error& e) {
        g_last_error = std::string(ttkm::to_string(e.kind())) + ": " + e.what();
        return status_of(e.kind());
    } catch (const nlohmann::json::exception& e) {
        g_last_error = std::string("parse: ") + e.what();
        return TTKM_ERR_PARSE;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return TTKM_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = std::string("internal: ") + e.what();
        return TTKM_ERR_INTERNAL;
    }
}

ttkm_status null_argument(const char* what) {
    g_last_error = std::string("invalid argument: ") + what + " is null";
    return TTKM_ERR_INVALID_ARGUMENT;
}

ttkm::experiments::RunConfig parse_config(const char* config_json) {
    if (config_json == nullptr || *config_json == '\0') return {};
    return ttkm::experiments::config_from_json(nlohmann::json::parse(config_json));
}

}  // namespace

extern "C" {

const char* ttkm_version(void) { return "0.1.0"; }

const char* ttkm_last_error(void) { return g_last_error.c_str(); }

const char* ttkm_status_name(ttkm_status status) {
    switch (status) {
        case TTKM_OK: return "ok";
        case TTKM_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case TTKM_ERR_VALIDATION: return "validation";
        case TTKM_ERR_SHAPE: return "shape";
        case TTKM_ERR_BOUNDS: return "bounds";
        case TTKM_ERR_NUMERICAL: return "numerical";
        case TTKM_ERR_PARSE: return "parse";
        case TTKM_ERR_IO: return "io";
        case TTKM_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

int ttkm_status_is_usage(ttkm_status status) {
    return status == TTKM_ERR_INVALID_ARGUMENT || status == TTKM_ERR_VALIDATION || status == TTKM_ERR_PARSE;
}

ttkm_status ttkm_dataset_load_csv(const char* path, const char* target, char delimiter, ttkm_dataset** out) {
    if (path == nullptr) return null_argument("path");
    if (out == nullptr) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        auto* handle = new ttkm_dataset{ttkm::load_csv(path, target ? target : "y", delimiter ? delimiter : ',')};
        *out = handle;
    });
}

ttkm_status ttkm_dataset_from_arrays(const double* inputs, const double* targets, size_t rows, size_t cols,
                                     ttkm_dataset** out) {
    if (inputs == nullptr) return null_argument("inputs");
    if (targets == nullptr) return null_argument("targets");
    if (out == nullptr) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        ttkm::Matrix x = Eigen::Map<const RowMajor>(inputs, static_cast<ttkm::Index>(rows), static_cast<ttkm::Index>(cols));
        ttkm::Vector y = Eigen::Map<const ttkm::Vector>(targets, static_cast<ttkm::Index>(rows));
        *out = new ttkm_dataset{ttkm::make_dataset(std::move(x), std::move(y), {}, "y", "arrays")};
    });
}

size_t ttkm_dataset_rows(const ttkm_dataset* data) { return data ? static_cast<size_t>(data->data.rows()) : 0; }

size_t ttkm_dataset_cols(const ttkm_dataset* data) { return data ? static_cast<size_t>(data->data.dims()) : 0; }

void ttkm_dataset_free(ttkm_dataset* data) { delete data; }

ttkm_status ttkm_model_train(const ttkm_dataset* data, const char* config_json, ttkm_model** out) {
    if (data == nullptr) return null_argument("data");
    if (out == nullptr) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        namespace ex = ttkm::experiments;
        const ex::RunConfig config = parse_config(config_json);
        const auto dims = static_cast<std::size_t>(data->data.dims());
        const auto settings = ex::model_settings(config, dims, ex::resolve_ranks(config, dims), config.seed);
        const ttkm::InferenceMode mode = ttkm::parse_inference_mode(config.mode);
        auto handle = std::make_unique<ttkm_model>();
        if (mode == ttkm::InferenceMode::Cv) {
            const auto sel = ex::cv_select(data->data, settings, config.cv_grid, config.folds, config.seed, config.parallel);
            auto chosen = settings;
            chosen.gamma = sel.gamma;
            chosen.beta = sel.beta;
            handle->model = ttkm::train_model(data->data, chosen, ttkm::InferenceMode::Fixed);
            handle->model.inference = ttkm::InferenceMode::Cv;
        } else {
            handle->model = ttkm::train_model(data->data, settings, mode);
        }
        *out = handle.release();
    });
}

ttkm_status ttkm_model_predict(const ttkm_model* model, const double* inputs, size_t rows, size_t cols, double* mean,
                               double* variance) {
    if (model == nullptr) return null_argument("model");
    if (inputs == nullptr) return null_argument("inputs");
    if (mean == nullptr) return null_argument("mean");
    if (variance == nullptr) return null_argument("variance");
    return guarded([&] {
        if (cols != model->model.input_names.size()) {
            ttkm::fail(ttkm::ErrorKind::Shape, "model expects " + std::to_string(model->model.input_names.size()) +
                                                   " input columns, got " + std::to_string(cols));
        }
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        const ttkm::Matrix x =
            Eigen::Map<const RowMajor>(inputs, static_cast<ttkm::Index>(rows), static_cast<ttkm::Index>(cols));
        const auto p = ttkm::predict(model->model, x);
        for (size_t m = 0; m < rows; ++m) {
            mean[m] = p.mean[static_cast<ttkm::Index>(m)];
            variance[m] = p.variance[static_cast<ttkm::Index>(m)];
        }
    });
}

ttkm_status ttkm_model_save(const ttkm_model* model, const char* path) {
    if (model == nullptr) return null_argument("model");
    if (path == nullptr) return null_argument("path");
    return guarded([&] { ttkm::save_model(model->model, path); });
}

ttkm_status ttkm_model_load(const char* path, ttkm_model** out) {
    if (path == nullptr) return null_argument("path");
    if (out == nullptr) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        auto handle = std::make_unique<ttkm_model>();
        handle->model = ttkm::load_model(path);
        *out = handle.release();
    });
}

const char* ttkm_model_info(ttkm_model* model) {
    if (model == nullptr) return "";
    const auto& m = model->model;
    const nlohmann::json info = {{"inference", ttkm::to_string(m.inference)},
                                 {"bayesian_core", m.fit.posterior.core + 1},
                                 {"ranks", m.train.ranks},
                                 {"parameters", m.fit.weights.parameter_count()},
                                 {"mean_beta", m.fit.precisions.mean_beta()},
                                 {"mean_gamma", m.fit.precisions.mean_gamma()},
                                 {"noise_precision_original", m.noise_precision_original()},
                                 {"outer_iterations", m.fit.outer_iterations}};
    model->info = info.dump();
    return model->info.c_str();
}

void ttkm_model_free(ttkm_model* model) { delete model; }

ttkm_status ttkm_metrics(const double* mean, const double* variance, const double* truth, size_t rows, double* nll,
                         double* rmse) {
    if (mean == nullptr) return null_argument("mean");
    if (variance == nullptr) return null_argument("variance");
    if (truth == nullptr) return null_argument("truth");
    return guarded([&] {
        const auto n = static_cast<ttkm::Index>(rows);
        const Eigen::Map<const ttkm::Vector> mu(mean, n), var(variance, n), y(truth, n);
        if (nll) *nll = ttkm::negative_log_likelihood(mu, var, y);
        if (rmse) *rmse = ttkm::root_mean_squared_error(mu, y);
    });
}

const char* ttkm_config_defaults(void) {
    static const std::string defaults = ttkm::experiments::to_json(ttkm::experiments::RunConfig{}).dump();
    return defaults.c_str();
}

ttkm_status ttkm_run_command(const char* command, const char* config_json, ttkm_result** out) {
    if (command == nullptr) return null_argument("command");
    if (out == nullptr) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        const auto config = parse_config(config_json);
        *out = new ttkm_result{ttkm::experiments::run_command(command, config).dump(2)};
    });
}

const char* ttkm_result_json(const ttkm_result* result) { return result ? result->json.c_str() : ""; }

void ttkm_result_free(ttkm_result* result) { delete result; }

}  // extern "C"
