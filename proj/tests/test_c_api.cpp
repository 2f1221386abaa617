#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "ttkm/ttkm.h"

namespace {

// Row-major inputs on a grid with a smooth target.
struct Arrays {
    std::vector<double> x;
    std::vector<double> y;
    size_t rows = 0;
    size_t cols = 2;
};

Arrays make_arrays(size_t rows) {
    Arrays a;
    a.rows = rows;
    for (size_t n = 0; n < rows; ++n) {
        const double u = -1.0 + 2.0 * static_cast<double>(n) / static_cast<double>(rows - 1);
        const double v = std::sin(3.0 * static_cast<double>(n));
        a.x.push_back(u);
        a.x.push_back(v);
        a.y.push_back(u * v + 0.5 * u);
    }
    return a;
}

std::string temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "ttkm_test_capi";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

}  // namespace

TEST_CASE("status names and usage classification") {
    CHECK(std::string(ttkm_status_name(TTKM_OK)) == "ok");
    CHECK(std::string(ttkm_status_name(TTKM_ERR_NUMERICAL)) == "numerical");
    CHECK(ttkm_status_is_usage(TTKM_ERR_VALIDATION));
    CHECK(ttkm_status_is_usage(TTKM_ERR_PARSE));
    CHECK(!ttkm_status_is_usage(TTKM_ERR_IO));
    CHECK(!ttkm_status_is_usage(TTKM_ERR_NUMERICAL));
    CHECK(std::string(ttkm_version()).size() > 0);
}

TEST_CASE("null arguments are reported, not dereferenced") {
    ttkm_dataset* data = nullptr;
    CHECK(ttkm_dataset_load_csv(nullptr, "y", ',', &data) == TTKM_ERR_INVALID_ARGUMENT);
    CHECK(std::string(ttkm_last_error()).find("path") != std::string::npos);
    CHECK(ttkm_model_train(nullptr, nullptr, nullptr) == TTKM_ERR_INVALID_ARGUMENT);
    CHECK(ttkm_run_command(nullptr, nullptr, nullptr) == TTKM_ERR_INVALID_ARGUMENT);
    CHECK(ttkm_dataset_rows(nullptr) == 0);
    CHECK(std::string(ttkm_model_info(nullptr)).empty());
    ttkm_dataset_free(nullptr);
    ttkm_model_free(nullptr);
    ttkm_result_free(nullptr);
}

TEST_CASE("train, predict, save and load through handles") {
    const Arrays a = make_arrays(80);
    ttkm_dataset* data = nullptr;
    REQUIRE(ttkm_dataset_from_arrays(a.x.data(), a.y.data(), a.rows, a.cols, &data) == TTKM_OK);
    CHECK(ttkm_dataset_rows(data) == 80);
    CHECK(ttkm_dataset_cols(data) == 2);

    ttkm_model* model = nullptr;
    REQUIRE(ttkm_model_train(data, R"({"basis": 3, "rank": 2, "epochs": 3, "vi_max_outer": 3})", &model) == TTKM_OK);
    std::vector<double> mean(a.rows), var(a.rows);
    REQUIRE(ttkm_model_predict(model, a.x.data(), a.rows, a.cols, mean.data(), var.data()) == TTKM_OK);
    double nll = 0.0, rmse = 0.0;
    REQUIRE(ttkm_metrics(mean.data(), var.data(), a.y.data(), a.rows, &nll, &rmse) == TTKM_OK);
    CHECK(rmse < 0.2);
    for (double v : var) CHECK(v > 0.0);

    const auto info = std::string(ttkm_model_info(model));
    CHECK(info.find("\"inference\":\"vi\"") != std::string::npos);

    const auto path = temp_path("model.json");
    REQUIRE(ttkm_model_save(model, path.c_str()) == TTKM_OK);
    ttkm_model* loaded = nullptr;
    REQUIRE(ttkm_model_load(path.c_str(), &loaded) == TTKM_OK);
    std::vector<double> mean2(a.rows), var2(a.rows);
    REQUIRE(ttkm_model_predict(loaded, a.x.data(), a.rows, a.cols, mean2.data(), var2.data()) == TTKM_OK);
    CHECK(mean2 == mean);
    CHECK(var2 == var);

    CHECK(ttkm_model_predict(model, a.x.data(), a.rows, 3, mean.data(), var.data()) == TTKM_ERR_SHAPE);

    ttkm_model* cv = nullptr;
    REQUIRE(ttkm_model_train(data, R"({"basis": 3, "mode": "cv", "cv_grid": [0.1, 1], "folds": 2, "epochs": 2})", &cv) ==
            TTKM_OK);
    CHECK(std::string(ttkm_model_info(cv)).find("\"inference\":\"cv\"") != std::string::npos);

    ttkm_model_free(cv);
    ttkm_model_free(loaded);
    ttkm_model_free(model);
    ttkm_dataset_free(data);
}

TEST_CASE("errors map to statuses") {
    const Arrays a = make_arrays(20);
    ttkm_dataset* data = nullptr;
    REQUIRE(ttkm_dataset_from_arrays(a.x.data(), a.y.data(), a.rows, a.cols, &data) == TTKM_OK);
    ttkm_model* model = nullptr;
    CHECK(ttkm_model_train(data, "{not json", &model) == TTKM_ERR_PARSE);
    CHECK(model == nullptr);
    CHECK(ttkm_model_train(data, R"({"basis": 0})", &model) == TTKM_ERR_VALIDATION);
    CHECK(ttkm_model_train(data, R"({"colour": 1})", &model) == TTKM_ERR_VALIDATION);
    CHECK(std::string(ttkm_last_error()).find("colour") != std::string::npos);
    CHECK(ttkm_model_train(data, R"({"mode": "fixed", "gamma": 0, "rank": 4, "basis": 8})", &model) ==
          TTKM_ERR_NUMERICAL);
    CHECK(ttkm_model_load(temp_path("absent.json").c_str(), &model) == TTKM_ERR_IO);
    ttkm_dataset_free(data);

    ttkm_dataset* missing = nullptr;
    CHECK(ttkm_dataset_load_csv(temp_path("absent.csv").c_str(), "y", ',', &missing) == TTKM_ERR_IO);
    CHECK(missing == nullptr);

    std::vector<double> mu{0.0}, var{0.0}, y{0.0};
    double nll = 0.0;
    CHECK(ttkm_metrics(mu.data(), var.data(), y.data(), 1, &nll, nullptr) == TTKM_ERR_VALIDATION);
    std::vector<double> bad{1.0, NAN};
    CHECK(ttkm_dataset_from_arrays(bad.data(), y.data(), 1, 2, &missing) == TTKM_ERR_NUMERICAL);
}

TEST_CASE("commands run through the C interface") {
    const auto out = temp_path("synth");
    const std::string config = R"({"synth_rows": 50, "synth_dims": 2, "basis": 3, "out_dir": ")" + out + "\"}";
    ttkm_result* result = nullptr;
    REQUIRE(ttkm_run_command("synth", config.c_str(), &result) == TTKM_OK);
    CHECK(std::string(ttkm_result_json(result)).find("\"synth\"") != std::string::npos);
    ttkm_result_free(result);
    CHECK(std::filesystem::exists(std::filesystem::path(out) / "data.csv"));
    CHECK(std::filesystem::exists(std::filesystem::path(out) / "manifest.json"));

    CHECK(ttkm_run_command("fly", "{}", &result) == TTKM_ERR_VALIDATION);
    CHECK(result == nullptr);

    const std::string defaults = ttkm_config_defaults();
    CHECK(defaults.find("\"cv_grid\"") != std::string::npos);
}
