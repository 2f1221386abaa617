#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "ttkm/error.hpp"
#include "ttkm/experiments.hpp"
#include "ttkm/metrics.hpp"
#include "ttkm/model.hpp"

using namespace ttkm;
using namespace ttkm::experiments;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t line_count(const fs::path& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

// Small synthetic CSV shared by the command tests.
std::string small_dataset(const std::string& name, Index rows = 120, std::size_t dims = 3) {
    const auto dir = ttkm::testing::temp_dir(name);
    const auto path = (fs::path(dir) / "data.csv").string();
    write_csv(generate_synthetic(rows, dims, 3, 2, 0.1, 5), path);
    return path;
}

RunConfig quick(const std::string& data, const std::string& out) {
    RunConfig c;
    c.data = data;
    c.out_dir = out;
    c.basis = 3;
    c.rank = 2;
    c.epochs = 2;
    c.vi_max_outer = 2;
    c.restarts = 2;
    c.test_fraction = 0.2;
    return c;
}

}  // namespace

TEST_CASE("config JSON round trip and validation") {
    RunConfig c;
    c.rank = 5;
    c.cv_grid = {0.5, 2.0};
    c.shifts = {0, 2};
    const auto back = config_from_json(to_json(c));
    CHECK(back.rank == 5);
    CHECK(back.cv_grid == c.cv_grid);
    CHECK(back.shifts == c.shifts);
    CHECK(to_json(back) == to_json(c));

    try {
        config_from_json(nlohmann::json{{"rnak", 3}});
        FAIL("unknown key accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        CHECK(std::string(e.what()).find("rnak") != std::string::npos);
    }
    CHECK_THROWS(config_from_json(nlohmann::json{{"rank", "two"}}));
    CHECK_THROWS(config_from_json(nlohmann::json::array()));
}

TEST_CASE("rank resolution and model settings") {
    RunConfig c;
    c.rank = 3;
    CHECK(resolve_ranks(c, 4) == std::vector<Index>{3, 3, 3});
    CHECK(resolve_ranks(c, 1).empty());
    c.ranks = {2, 4};
    CHECK(resolve_ranks(c, 3) == std::vector<Index>{2, 4});
    CHECK_THROWS_AS(resolve_ranks(c, 4), Error);

    RunConfig d;
    d.bayesian_core = 2;
    d.prior_shape = 0.5;
    const auto s = model_settings(d, 3, {2, 2}, 17);
    CHECK(s.train.init_seed == 17);
    CHECK(s.train.bayesian_core == 2);
    CHECK(s.vi.beta_prior.shape == 0.5);
    CHECK(s.basis_count == 4);
}

TEST_CASE("summaries and best-core entries") {
    const auto s = summarize({1.0, 2.0, 3.0, 4.0});
    CHECK(s.mean == 2.5);
    CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.count == 4);
    CHECK(summarize({7.0}).std == 0.0);

    CHECK(best_core_entry({0.3, -0.1, 0.2}) == "2/3");
    CHECK(best_core_entry({-1.0, -1.0, 0.0, 0.5}) == "1/4");
    CHECK(best_core_entry({2.0}) == "1/1");
}

TEST_CASE("synthetic generator") {
    const auto a = generate_synthetic(200, 4, 3, 2, 0.1, 9);
    const auto b = generate_synthetic(200, 4, 3, 2, 0.1, 9);
    CHECK(a.inputs == b.inputs);
    CHECK(a.targets == b.targets);
    CHECK(a.inputs.cwiseAbs().maxCoeff() <= 1.0);

    // Without noise the targets have zero mean, unit RMS and exact TT structure of the stated rank.
    const auto clean = generate_synthetic(300, 3, 3, 2, 0.0, 4);
    CHECK(std::abs(clean.targets.mean()) < 1e-12);
    CHECK(clean.targets.norm() / std::sqrt(300.0) == doctest::Approx(1.0));

    const auto [train, test] = split(clean, 0.2, 1);
    ModelSettings s;
    s.basis_count = 3;
    s.train.ranks = {2, 2};
    s.train.epochs = 30;
    s.train.convergence_tol = 0.0;
    s.gamma = 1e-10;
    s.beta = 1.0;
    const auto model = train_model(train, s, InferenceMode::Fixed);
    const auto p = predict(model, test.inputs);
    CHECK(root_mean_squared_error(p.mean, test.targets) < 1e-4);
}

TEST_CASE("model JSON round trip preserves predictions") {
    const auto data = generate_synthetic(80, 3, 3, 2, 0.1, 2);
    ModelSettings s;
    s.basis_count = 3;
    s.train.ranks = {2, 2};
    s.train.epochs = 3;
    s.train.bayesian_core = 2;
    s.vi.max_outer = 2;
    const auto model = train_model(data, s, InferenceMode::Vi);
    const auto dir = ttkm::testing::temp_dir("model_rt");
    const auto path = (fs::path(dir) / "model.json").string();
    save_model(model, path);
    const auto loaded = load_model(path);
    const auto p0 = predict(model, data.inputs);
    const auto p1 = predict(loaded, data.inputs);
    CHECK(p0.mean == p1.mean);
    CHECK(p0.variance == p1.variance);
    CHECK(loaded.fit.posterior.core == 1);
    CHECK(loaded.inference == InferenceMode::Vi);
    CHECK(to_json(loaded) == to_json(model));
    CHECK_THROWS_AS(load_model((fs::path(dir) / "missing.json").string()), Error);
}

TEST_CASE("predictions are returned on the original target scale") {
    auto data = generate_synthetic(100, 2, 3, 2, 0.05, 3);
    data.targets = data.targets * 50.0;
    data.targets.array() += 1000.0;
    ModelSettings s;
    s.basis_count = 3;
    s.train.ranks = {2};
    const auto model = train_model(data, s, InferenceMode::Vi);
    const auto p = predict(model, data.inputs);
    CHECK(std::abs(p.mean.mean() - 1000.0) < 10.0);
    CHECK(root_mean_squared_error(p.mean, data.targets) < 10.0);
    CHECK(model.noise_precision_original() == doctest::Approx(model.fit.noise_precision / (model.standardizer.target_std() * model.standardizer.target_std())));
}

TEST_CASE("cross-validation bookkeeping") {
    const auto data = generate_synthetic(60, 2, 3, 2, 0.1, 6);
    ModelSettings s;
    s.basis_count = 3;
    s.train.ranks = {2};
    s.train.epochs = 2;
    const auto sel = cv_select(data, s, {0.01, 0.1, 1.0, 10.0, 100.0}, 5, 0, false);
    CHECK(sel.fold_trainings == 125);
    CHECK(sel.validation_nll.size() == 25);
    CHECK(sel.gammas.front() == 0.01);
    CHECK(sel.betas[1] == 0.1);
    CHECK(sel.gammas[1] == 0.01);
    const auto best = std::min_element(sel.validation_nll.begin(), sel.validation_nll.end()) - sel.validation_nll.begin();
    CHECK(sel.gamma == sel.gammas[static_cast<std::size_t>(best)]);
    CHECK(sel.beta == sel.betas[static_cast<std::size_t>(best)]);

    const auto par = cv_select(data, s, {0.01, 0.1, 1.0, 10.0, 100.0}, 5, 0, true);
    CHECK(par.validation_nll == sel.validation_nll);

    const auto one = cv_select(data, s, {0.5}, 3, 0, false);
    CHECK(one.fold_trainings == 3);
    CHECK(one.gamma == 0.5);
    CHECK(one.beta == 0.5);
    CHECK_THROWS_AS(cv_select(data, s, {}, 5, 0, false), Error);
}

TEST_CASE("cv with a single grid value equals a fixed fit") {
    const auto path = small_dataset("cv_one");
    const auto root = ttkm::testing::temp_dir("cv_one_out");
    auto c = quick(path, root + "/cv");
    c.cv_grid = {0.5};
    c.restarts = 1;
    const auto cv = cmd_cv(c);
    auto f = quick(path, root + "/fixed");
    f.mode = "fixed";
    f.beta = 0.5;
    f.gamma = 0.5;
    f.restarts = 1;
    const auto fixed = cmd_train(f);
    CHECK(cv["nll"]["mean"] == fixed["nll"]["mean"]);
    CHECK(slurp(root + "/cv/predictions.csv") == slurp(root + "/fixed/predictions.csv"));
    CHECK(cv["runs"][0]["fold_trainings"] == 5);
}

TEST_CASE("train writes reproducible artifacts and a manifest") {
    const auto path = small_dataset("train_det");
    const auto root = ttkm::testing::temp_dir("train_det_out");
    const auto a = cmd_train(quick(path, root + "/a"));
    const auto b = cmd_train(quick(path, root + "/b"));
    for (const char* name : {"report.json", "model.json", "predictions.csv", "predictions_r0.csv", "predictions_r1.csv"}) {
        REQUIRE(fs::exists(fs::path(root) / "a" / name));
        CHECK(slurp(fs::path(root) / "a" / name) == slurp(fs::path(root) / "b" / name));
    }
    const auto manifest = nlohmann::json::parse(slurp(fs::path(root) / "a" / "manifest.json"));
    CHECK(manifest["files"].size() == 5);
    CHECK(manifest["files"]["report.json"].get<std::string>().size() == 64);
    CHECK(manifest.contains("timing"));
    CHECK(slurp(fs::path(root) / "a" / "report.json").find("seconds") == std::string::npos);
    CHECK(a["runs"].size() == 2);
    CHECK(a["nll"]["count"] == 2);
    CHECK(a["dataset"]["test_rows"] == 24);
    CHECK(line_count(fs::path(root) / "a" / "predictions.csv") == 25);
    CHECK(b["files"] == a["files"]);
}

TEST_CASE("predict and metrics commands agree with training") {
    const auto path = small_dataset("predict");
    const auto root = ttkm::testing::temp_dir("predict_out");
    auto c = quick(path, root + "/train");
    c.restarts = 1;
    const auto trained = cmd_train(c);

    RunConfig p;
    p.model = root + "/train/model.json";
    p.data = path;
    p.out_dir = root + "/predict";
    const auto predicted = cmd_predict(p);
    CHECK(predicted["rows"] == 120);

    RunConfig m;
    m.predictions = root + "/train/predictions.csv";
    m.out_dir = root + "/metrics";
    const auto metrics = cmd_metrics(m);
    CHECK(metrics["nll"].get<double>() == doctest::Approx(trained["nll"]["mean"].get<double>()).epsilon(1e-12));
    CHECK(metrics["rmse"].get<double>() == doctest::Approx(trained["rmse"]["mean"].get<double>()).epsilon(1e-12));
    CHECK(fs::exists(fs::path(root) / "metrics" / "metrics.json"));
}

TEST_CASE("ablation grids have one row per core and one column per pattern") {
    const auto path = small_dataset("ablate", 100, 4);
    const auto root = ttkm::testing::temp_dir("ablate_out");
    auto c = quick(path, root + "/core");
    c.restarts = 1;
    c.vi_max_outer = 1;
    c.epochs = 1;
    const auto core = cmd_ablate_core(c);
    REQUIRE(core["nll"].size() == 3);
    for (const auto& [label, column] : core["nll"].items()) {
        REQUIRE(column.size() == 4);
        std::vector<double> values = column.get<std::vector<double>>();
        CHECK(core["best"][label] == best_core_entry(values));
    }
    CHECK(line_count(fs::path(root) / "core" / "ablate_core_nll.csv") == 5);
    CHECK(line_count(fs::path(root) / "core" / "ablate_core_best.csv") == 4);
    CHECK(line_count(fs::path(root) / "core" / "ablate_core_predictions.csv") == 1 + 3 * 4 * 1 * 20);

    auto s = quick(path, root + "/shift");
    s.restarts = 1;
    s.vi_max_outer = 1;
    s.epochs = 1;
    s.shifts = {0, 1};
    const auto shift = cmd_ablate_shift(s);
    CHECK(shift["nll"]["shift_0"] == core["nll"]["pattern_1"]);
    CHECK(shift["test_digests"]["shift_0"] == shift["test_digests"]["shift_1"]);

    auto bad = s;
    bad.shifts = {4};
    CHECK_THROWS_AS(cmd_ablate_shift(bad), Error);
    auto cvmode = c;
    cvmode.mode = "cv";
    CHECK_THROWS_AS(cmd_ablate_core(cvmode), Error);
}

TEST_CASE("GP comparison refuses oversized training sets") {
    const auto path = small_dataset("gp_cap");
    auto c = quick(path, ttkm::testing::temp_dir("gp_cap_out"));
    c.gp_max_rows = 50;
    try {
        cmd_compare_gp(c);
        FAIL("oversized GP accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
    }
}

TEST_CASE("GP comparison writes one row per model") {
    const auto path = small_dataset("gp_cmp");
    const auto root = ttkm::testing::temp_dir("gp_cmp_out");
    auto c = quick(path, root);
    c.cv_grid = {0.1, 1.0};
    c.folds = 2;
    const auto r = cmd_compare_gp(c);
    REQUIRE(r["models"].size() == 3);
    CHECK(r["models"][2]["model"] == "Full GP");
    for (const auto& m : r["models"]) CHECK(m["test_digest"] == r["models"][0]["test_digest"]);
    CHECK(line_count(fs::path(root) / "compare_gp.csv") == 4);
    CHECK(line_count(fs::path(root) / "compare_gp_predictions.csv") == 1 + 3 * 24);
}

TEST_CASE("commands validate their inputs") {
    RunConfig c;
    CHECK_THROWS_AS(cmd_train(c), Error);  // no data
    c.data = small_dataset("validate");
    c.out_dir = ttkm::testing::temp_dir("validate_out");
    c.basis = 0;
    CHECK_THROWS_AS(cmd_train(c), Error);
    c.basis = 3;
    c.bayesian_core = 7;
    CHECK_THROWS_AS(cmd_train(c), Error);
    CHECK_THROWS_AS(run_command("bogus", RunConfig{}), Error);
    CHECK(command_names().size() == 8);
}
