#include "ttkm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "ttkm/error.hpp"
#include "ttkm/gp_baseline.hpp"
#include "ttkm/hash.hpp"
#include "ttkm/metrics.hpp"

namespace ttkm::experiments {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

namespace {

template <typename T>
void read_field(const json& doc, const char* key, T& field) {
    const auto it = doc.find(key);
    if (it == doc.end()) return;
    try {
        field = it->get<T>();
    } catch (const json::exception&) {
        fail(ErrorKind::Validation, std::string("config field '") + key + "' has the wrong type");
    }
}

}  // namespace

RunConfig config_from_json(const json& doc) {
    if (!doc.is_object()) fail(ErrorKind::Validation, "config must be a JSON object");
    RunConfig c;
    const json defaults = to_json(c);
    for (const auto& [key, value] : doc.items()) {
        if (!defaults.contains(key)) fail(ErrorKind::Validation, "unknown config field '" + key + "'");
    }
    read_field(doc, "data", c.data);
    read_field(doc, "target", c.target);
    read_field(doc, "delimiter", c.delimiter);
    read_field(doc, "test_fraction", c.test_fraction);
    read_field(doc, "split_seed", c.split_seed);
    read_field(doc, "family", c.family);
    read_field(doc, "basis", c.basis);
    read_field(doc, "rank", c.rank);
    read_field(doc, "ranks", c.ranks);
    read_field(doc, "rank_high", c.rank_high);
    read_field(doc, "rank_low", c.rank_low);
    read_field(doc, "patterns", c.patterns);
    read_field(doc, "bayesian_core", c.bayesian_core);
    read_field(doc, "epochs", c.epochs);
    read_field(doc, "convergence_tol", c.convergence_tol);
    read_field(doc, "mode", c.mode);
    read_field(doc, "beta", c.beta);
    read_field(doc, "gamma", c.gamma);
    read_field(doc, "vi_max_outer", c.vi_max_outer);
    read_field(doc, "vi_tol", c.vi_tol);
    read_field(doc, "prior_shape", c.prior_shape);
    read_field(doc, "prior_rate", c.prior_rate);
    read_field(doc, "cv_grid", c.cv_grid);
    read_field(doc, "folds", c.folds);
    read_field(doc, "parallel", c.parallel);
    read_field(doc, "seed", c.seed);
    read_field(doc, "restarts", c.restarts);
    read_field(doc, "shifts", c.shifts);
    read_field(doc, "gp_max_rows", c.gp_max_rows);
    read_field(doc, "out_dir", c.out_dir);
    read_field(doc, "model", c.model);
    read_field(doc, "predictions", c.predictions);
    read_field(doc, "truth", c.truth);
    read_field(doc, "synth_rows", c.synth_rows);
    read_field(doc, "synth_dims", c.synth_dims);
    read_field(doc, "synth_noise", c.synth_noise);
    return c;
}

json to_json(const RunConfig& c) {
    return {
        {"data", c.data},
        {"target", c.target},
        {"delimiter", c.delimiter},
        {"test_fraction", c.test_fraction},
        {"split_seed", c.split_seed},
        {"family", c.family},
        {"basis", c.basis},
        {"rank", c.rank},
        {"ranks", c.ranks},
        {"rank_high", c.rank_high},
        {"rank_low", c.rank_low},
        {"patterns", c.patterns},
        {"bayesian_core", c.bayesian_core},
        {"epochs", c.epochs},
        {"convergence_tol", c.convergence_tol},
        {"mode", c.mode},
        {"beta", c.beta},
        {"gamma", c.gamma},
        {"vi_max_outer", c.vi_max_outer},
        {"vi_tol", c.vi_tol},
        {"prior_shape", c.prior_shape},
        {"prior_rate", c.prior_rate},
        {"cv_grid", c.cv_grid},
        {"folds", c.folds},
        {"parallel", c.parallel},
        {"seed", c.seed},
        {"restarts", c.restarts},
        {"shifts", c.shifts},
        {"gp_max_rows", c.gp_max_rows},
        {"out_dir", c.out_dir},
        {"model", c.model},
        {"predictions", c.predictions},
        {"truth", c.truth},
        {"synth_rows", c.synth_rows},
        {"synth_dims", c.synth_dims},
        {"synth_noise", c.synth_noise},
    };
}

namespace {

char delimiter_of(const RunConfig& c) {
    if (c.delimiter.size() != 1) fail(ErrorKind::Validation, "delimiter must be a single character");
    return c.delimiter[0];
}

void validate_common(const RunConfig& c) {
    if (c.basis < 1) fail(ErrorKind::Validation, "basis must be at least 1");
    if (c.rank < 1) fail(ErrorKind::Validation, "rank must be at least 1");
    if (c.epochs < 1) fail(ErrorKind::Validation, "epochs must be at least 1");
    if (c.restarts < 1) fail(ErrorKind::Validation, "restarts must be at least 1");
    if (c.folds < 2) fail(ErrorKind::Validation, "folds must be at least 2");
    if (c.vi_max_outer < 1) fail(ErrorKind::Validation, "vi_max_outer must be at least 1");
    if (!(c.prior_shape > 0.0) || !(c.prior_rate > 0.0)) fail(ErrorKind::Validation, "Gamma priors must be positive");
    if (!(c.beta > 0.0) || !(c.gamma > 0.0)) fail(ErrorKind::Validation, "beta and gamma must be positive");
    if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) fail(ErrorKind::Validation, "test_fraction must lie in (0, 1)");
    if (c.cv_grid.empty()) fail(ErrorKind::Validation, "cv_grid must not be empty");
    for (double g : c.cv_grid) {
        if (!(g > 0.0)) fail(ErrorKind::Validation, "cv_grid values must be positive");
    }
    parse_feature_family(c.family);
    parse_inference_mode(c.mode);
    delimiter_of(c);
}

void require_data(const RunConfig& c) {
    if (c.data.empty()) fail(ErrorKind::Validation, "a dataset path is required (--data)");
}

}  // namespace

std::vector<Index> resolve_ranks(const RunConfig& config, std::size_t dims) {
    if (!config.ranks.empty()) {
        if (config.ranks.size() + 1 != dims) {
            fail(ErrorKind::Validation, "ranks must list " + std::to_string(dims - 1) + " interior ranks for " +
                                            std::to_string(dims) + " input columns");
        }
        return config.ranks;
    }
    return rank_pattern(RankPattern::Uniform, dims, config.rank, 0);
}

ModelSettings model_settings(const RunConfig& config, std::size_t dims, const std::vector<Index>& ranks,
                             std::uint64_t init_seed) {
    ModelSettings s;
    s.family = parse_feature_family(config.family);
    s.basis_count = config.basis;
    s.train.ranks = ranks;
    s.train.epochs = config.epochs;
    s.train.bayesian_core = config.bayesian_core;
    s.train.init_seed = init_seed;
    s.train.convergence_tol = config.convergence_tol;
    s.vi.max_outer = config.vi_max_outer;
    s.vi.tolerance = config.vi_tol;
    s.vi.beta_prior = {config.prior_shape, config.prior_rate};
    s.vi.gamma_prior = {config.prior_shape, config.prior_rate};
    s.beta = config.beta;
    s.gamma = config.gamma;
    validate(s.train, dims);
    return s;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

std::string best_core_entry(const std::vector<double>& nll_by_core) {
    if (nll_by_core.empty()) fail(ErrorKind::Validation, "no cores to compare");
    std::size_t best = 0;
    for (std::size_t d = 1; d < nll_by_core.size(); ++d) {
        if (nll_by_core[d] < nll_by_core[best]) best = d;
    }
    return std::to_string(best + 1) + "/" + std::to_string(nll_by_core.size());
}

Dataset generate_synthetic(Index rows, std::size_t dims, Index basis, Index rank, double noise, std::uint64_t seed) {
    if (rows < 2) fail(ErrorKind::Validation, "synthetic data needs at least 2 rows");
    if (dims < 1 || basis < 1 || rank < 1) fail(ErrorKind::Validation, "synthetic dims, basis and rank must be positive");
    if (!(noise >= 0.0)) fail(ErrorKind::Validation, "noise level must be non-negative");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    Matrix inputs(rows, static_cast<Index>(dims));
    for (Index n = 0; n < rows; ++n)
        for (Index d = 0; d < static_cast<Index>(dims); ++d) inputs(n, d) = uniform(rng);

    std::vector<Matrix> features(dims, Matrix(rows, basis));
    for (std::size_t d = 0; d < dims; ++d) {
        for (Index n = 0; n < rows; ++n) {
            const double x = inputs(n, static_cast<Index>(d));
            double prev = 1.0, cur = x;
            features[d](n, 0) = 1.0;
            if (basis > 1) features[d](n, 1) = x;
            for (Index i = 2; i < basis; ++i) {
                const double next = ((2.0 * i - 1.0) * x * cur - (i - 1.0) * prev) / static_cast<double>(i);
                prev = cur;
                cur = next;
                features[d](n, i) = cur;
            }
        }
    }

    // Rank channel 0 carries the constant function through every core, so adding a constant to
    // the signal (as target centering does) leaves the TT rank unchanged.
    TTWeights truth = init_weights(rank_pattern(RankPattern::Uniform, dims, rank, 0), dims, basis, seed + 1);
    if (dims > 1) {
        for (std::size_t d = 0; d < dims; ++d) {
            TTCore& core = truth.core(d);
            const bool first = d == 0;
            const Index right = d + 1 == dims ? 1 : core.right_rank();
            for (Index i = 0; i < basis; ++i)
                for (Index b = 0; b < right; ++b) {
                    if (first && b > 0) continue;  // the first core feeds every channel freely
                    core(0, i, b) = (i == 0 && b == 0) ? 1.0 : 0.0;
                }
        }
    }
    Vector signal = tt_dot_features(truth, features);
    signal.array() -= signal.mean();
    const double rms = std::sqrt(signal.squaredNorm() / static_cast<double>(rows));
    if (!(rms > 0.0)) fail(ErrorKind::Internal, "synthetic signal is identically zero");
    signal /= rms;

    Vector targets(rows);
    for (Index n = 0; n < rows; ++n) targets[n] = signal[n] + noise * normal(rng);
    return make_dataset(std::move(inputs), std::move(targets), {}, "y", "synthetic");
}

namespace {

struct Evaluation {
    PredictiveDistribution prediction;
    double nll = 0.0;
    double rmse = 0.0;
};

Evaluation evaluate(const TTModel& model, const Dataset& test) {
    Evaluation e;
    e.prediction = predict(model, test.inputs);
    e.nll = negative_log_likelihood(e.prediction.mean, e.prediction.variance, test.targets);
    e.rmse = root_mean_squared_error(e.prediction.mean, test.targets);
    return e;
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int folds, std::uint64_t seed) {
    if (n < static_cast<std::size_t>(folds)) fail(ErrorKind::Validation, "fewer training rows than CV folds");
    const auto order = shuffled_indices(n, seed);
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
    for (std::size_t k = 0; k < out.size(); ++k) {
        const std::size_t begin = k * n / out.size();
        const std::size_t end = (k + 1) * n / out.size();
        out[k].assign(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

double fold_nll(const Dataset& train, const std::vector<std::vector<std::size_t>>& folds, ModelSettings settings,
                double gamma, double beta) {
    settings.gamma = gamma;
    settings.beta = beta;
    double total = 0.0;
    for (std::size_t k = 0; k < folds.size(); ++k) {
        std::vector<std::size_t> fit_rows;
        for (std::size_t j = 0; j < folds.size(); ++j) {
            if (j != k) fit_rows.insert(fit_rows.end(), folds[j].begin(), folds[j].end());
        }
        const Dataset fit_part = select_rows(train, fit_rows);
        const Dataset held_part = select_rows(train, folds[k]);
        const TTModel model = train_model(fit_part, settings, InferenceMode::Fixed);
        total += evaluate(model, held_part).nll;
    }
    return total / static_cast<double>(folds.size());
}

}  // namespace

CvSelection cv_select(const Dataset& train, const ModelSettings& base, const std::vector<double>& grid, int folds,
                      std::uint64_t fold_seed, bool parallel) {
    if (grid.empty()) fail(ErrorKind::Validation, "CV grid is empty");
    const auto partition = make_folds(static_cast<std::size_t>(train.rows()), folds, fold_seed);

    CvSelection sel;
    for (double g : grid)
        for (double b : grid) {
            sel.gammas.push_back(g);
            sel.betas.push_back(b);
        }
    sel.validation_nll.resize(sel.gammas.size());

    if (parallel) {
        std::vector<std::future<double>> jobs;
        for (std::size_t k = 0; k < sel.gammas.size(); ++k) {
            jobs.push_back(std::async(std::launch::async, fold_nll, std::cref(train), std::cref(partition), base,
                                      sel.gammas[k], sel.betas[k]));
        }
        for (std::size_t k = 0; k < jobs.size(); ++k) sel.validation_nll[k] = jobs[k].get();
    } else {
        for (std::size_t k = 0; k < sel.gammas.size(); ++k) {
            sel.validation_nll[k] = fold_nll(train, partition, base, sel.gammas[k], sel.betas[k]);
        }
    }
    sel.fold_trainings = static_cast<int>(sel.gammas.size()) * folds;

    std::size_t best = 0;
    for (std::size_t k = 1; k < sel.validation_nll.size(); ++k) {
        if (sel.validation_nll[k] < sel.validation_nll[best]) best = k;
    }
    sel.gamma = sel.gammas[best];
    sel.beta = sel.betas[best];
    return sel;
}

// ---------------------------------------------------------------------------
// Artifacts

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Collects written files; the manifest holds their hashes plus non-reproducible metadata.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::string dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) fail(ErrorKind::Io, "cannot create output directory '" + dir_ + "': " + ec.message());
    }

    std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

    void text(const std::string& name, const std::string& content) {
        std::ofstream out(path(name), std::ios::binary);
        if (!out) fail(ErrorKind::Io, "cannot write '" + path(name) + "'");
        out << content;
        out.close();
        files_.push_back(name);
    }

    void json_file(const std::string& name, const json& doc) { text(name, doc.dump(2) + "\n"); }

    void adopt(const std::string& name) { files_.push_back(name); }

    void timing(const std::string& key, json value) { timing_[key] = std::move(value); }

    json finish(const std::string& command) {
        json hashes = json::object();
        for (const auto& f : files_) hashes[f] = sha256_file(path(f));
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm utc{};
        gmtime_r(&now, &utc);
        std::ostringstream stamp;
        stamp << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
        const json manifest = {{"command", command},
                               {"created_at", stamp.str()},
                               {"out_dir", dir_},
                               {"timing", timing_},
                               {"files", hashes}};
        std::ofstream out(path("manifest.json"), std::ios::binary);
        if (!out) fail(ErrorKind::Io, "cannot write manifest");
        out << manifest.dump(2) << '\n';
        return hashes;
    }

private:
    std::string dir_;
    std::vector<std::string> files_;
    json timing_ = json::object();
};

std::string predictions_csv(const Dataset& test, const PredictiveDistribution& p) {
    std::ostringstream out;
    out << "row_id,y,mean,variance,std\n";
    for (Index m = 0; m < test.rows(); ++m) {
        out << test.row_ids[static_cast<std::size_t>(m)] << ',' << format_double(test.targets[m]) << ','
            << format_double(p.mean[m]) << ',' << format_double(p.variance[m]) << ','
            << format_double(std::sqrt(p.variance[m])) << '\n';
    }
    return out.str();
}

json summary_json(const std::vector<double>& values) {
    const Summary s = summarize(values);
    json out = {{"mean", s.mean}, {"count", s.count}};
    if (s.count >= 2) out["std"] = s.std;
    return out;
}

json dataset_json(const Dataset& train, const Dataset& test) {
    return {{"train_rows", train.rows()},
            {"test_rows", test.rows()},
            {"dims", train.dims()},
            {"test_digest", row_ids_digest(test.row_ids)}};
}

json config_echo(const RunConfig& c) {
    json j = to_json(c);
    j.erase("out_dir");
    return j;
}

struct Prepared {
    Dataset train;
    Dataset test;
    std::vector<Index> ranks;
};

Prepared prepare(const RunConfig& c) {
    validate_common(c);
    require_data(c);
    const Dataset data = load_csv(c.data, c.target, delimiter_of(c));
    auto [train, test] = split(data, c.test_fraction, c.split_seed);
    if (test.rows() < 1) fail(ErrorKind::Validation, "test split is empty; increase test_fraction");
    const auto ranks = resolve_ranks(c, static_cast<std::size_t>(data.dims()));
    return {std::move(train), std::move(test), ranks};
}

struct TrainedRun {
    TTModel model;
    Evaluation eval;
    double seconds = 0.0;
    json extra = json::object();
};

/// One restart of train/cv, selecting by config.mode (or forcing CV).
TrainedRun train_once(const RunConfig& c, const Prepared& p, std::uint64_t init_seed, InferenceMode mode) {
    ModelSettings settings = model_settings(c, static_cast<std::size_t>(p.train.dims()), p.ranks, init_seed);
    TrainedRun run;
    const auto start = Clock::now();
    if (mode == InferenceMode::Cv) {
        const CvSelection sel = cv_select(p.train, settings, c.cv_grid, c.folds, init_seed, c.parallel);
        settings.gamma = sel.gamma;
        settings.beta = sel.beta;
        run.model = train_model(p.train, settings, InferenceMode::Fixed);
        run.model.inference = InferenceMode::Cv;
        json grid = json::array();
        for (std::size_t k = 0; k < sel.gammas.size(); ++k) {
            grid.push_back({{"gamma", sel.gammas[k]}, {"beta", sel.betas[k]}, {"validation_nll", sel.validation_nll[k]}});
        }
        run.extra = {{"best_gamma", sel.gamma},
                     {"best_beta", sel.beta},
                     {"fold_trainings", sel.fold_trainings},
                     {"folds", c.folds},
                     {"grid", grid}};
    } else {
        run.model = train_model(p.train, settings, mode);
    }
    run.seconds = seconds_since(start);
    run.eval = evaluate(run.model, p.test);
    return run;
}

json run_json(const TrainedRun& run, std::uint64_t seed) {
    json j = {{"seed", seed},
              {"nll", run.eval.nll},
              {"rmse", run.eval.rmse},
              {"bayesian_core", run.model.fit.posterior.core + 1},
              {"outer_iterations", run.model.fit.outer_iterations},
              {"als_updates", run.model.fit.als_updates},
              {"mean_beta", run.model.fit.precisions.mean_beta()},
              {"mean_gamma", run.model.fit.precisions.mean_gamma()},
              {"noise_precision_original", run.model.noise_precision_original()}};
    for (const auto& [k, v] : run.extra.items()) j[k] = v;
    return j;
}

json train_like(const RunConfig& c, InferenceMode mode, const std::string& command) {
    const Prepared p = prepare(c);
    ArtifactWriter out(c.out_dir);
    json runs = json::array();
    std::vector<double> nll, rmse, seconds;
    for (int r = 0; r < c.restarts; ++r) {
        const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(r);
        const TrainedRun run = train_once(c, p, seed, mode);
        nll.push_back(run.eval.nll);
        rmse.push_back(run.eval.rmse);
        seconds.push_back(run.seconds);
        runs.push_back(run_json(run, seed));
        out.text("predictions_r" + std::to_string(r) + ".csv", predictions_csv(p.test, run.eval.prediction));
        if (r == 0) {
            out.json_file("model.json", to_json(run.model));
            out.text("predictions.csv", predictions_csv(p.test, run.eval.prediction));
        }
    }
    json report = {{"command", command},
                   {"inference", to_string(mode)},
                   {"metric_scale", "original"},
                   {"config", config_echo(c)},
                   {"dataset", dataset_json(p.train, p.test)},
                   {"runs", runs},
                   {"nll", summary_json(nll)},
                   {"rmse", summary_json(rmse)}};
    out.json_file("report.json", report);
    out.timing("train_seconds", seconds);
    out.timing("train_seconds_summary", summary_json(seconds));
    report["files"] = out.finish(command);
    report["train_seconds"] = summary_json(seconds);
    return report;
}

}  // namespace

// ---------------------------------------------------------------------------
// Commands

json cmd_train(const RunConfig& c) { return train_like(c, parse_inference_mode(c.mode), "train"); }

json cmd_cv(const RunConfig& c) { return train_like(c, InferenceMode::Cv, "cv"); }

json cmd_predict(const RunConfig& c) {
    if (c.model.empty()) fail(ErrorKind::Validation, "predict needs --model");
    require_data(c);
    const TTModel model = load_model(c.model);
    const Table table = read_table(c.data, delimiter_of(c));
    Matrix inputs(table.values.rows(), static_cast<Index>(model.input_names.size()));
    for (std::size_t d = 0; d < model.input_names.size(); ++d) {
        inputs.col(static_cast<Index>(d)) = table.values.col(static_cast<Index>(table.column(model.input_names[d])));
    }
    const PredictiveDistribution p = predict(model, inputs);
    const bool has_truth = table.has_column(model.target_name);

    std::ostringstream csv;
    csv << "row_id," << (has_truth ? "y," : "") << "mean,variance,std\n";
    for (Index m = 0; m < inputs.rows(); ++m) {
        csv << m << ',';
        if (has_truth) csv << format_double(table.values(m, static_cast<Index>(table.column(model.target_name)))) << ',';
        csv << format_double(p.mean[m]) << ',' << format_double(p.variance[m]) << ','
            << format_double(std::sqrt(p.variance[m])) << '\n';
    }
    ArtifactWriter out(c.out_dir);
    out.text("predictions.csv", csv.str());
    json report = {{"command", "predict"}, {"rows", inputs.rows()}, {"bayesian_core", model.fit.posterior.core + 1}};
    if (has_truth) {
        const Vector truth = table.values.col(static_cast<Index>(table.column(model.target_name)));
        report["nll"] = negative_log_likelihood(p.mean, p.variance, truth);
        report["rmse"] = root_mean_squared_error(p.mean, truth);
        report["metric_scale"] = "original";
    }
    out.json_file("report.json", report);
    report["files"] = out.finish("predict");
    return report;
}

json cmd_metrics(const RunConfig& c) {
    if (c.predictions.empty()) fail(ErrorKind::Validation, "metrics needs --predictions");
    const char delim = delimiter_of(c);
    const Table preds = read_table(c.predictions, delim);
    const Vector mean = preds.values.col(static_cast<Index>(preds.column("mean")));
    const Vector variance = preds.values.col(static_cast<Index>(preds.column("variance")));
    Vector truth;
    if (!c.truth.empty()) {
        const Table t = read_table(c.truth, delim);
        truth = t.values.col(static_cast<Index>(t.column(c.target)));
    } else {
        truth = preds.values.col(static_cast<Index>(preds.column(c.target)));
    }
    if (truth.size() != mean.size()) {
        fail(ErrorKind::Validation, "predictions have " + std::to_string(mean.size()) + " rows but truth has " +
                                        std::to_string(truth.size()));
    }
    json report = {{"command", "metrics"},
                   {"rows", mean.size()},
                   {"nll", negative_log_likelihood(mean, variance, truth)},
                   {"rmse", root_mean_squared_error(mean, truth)}};
    ArtifactWriter out(c.out_dir);
    out.json_file("metrics.json", report);
    report["files"] = out.finish("metrics");
    return report;
}

namespace {

/// Trains every Bayesian core for the given ranks and returns the restart-averaged test NLL per core.
std::vector<double> core_sweep(const RunConfig& c, const Dataset& train, const Dataset& test,
                               const std::vector<Index>& ranks, const std::string& label, std::ostringstream& preds,
                               std::vector<double>& seconds) {
    const auto dims = static_cast<std::size_t>(train.dims());
    const InferenceMode mode = parse_inference_mode(c.mode);
    if (mode == InferenceMode::Cv) fail(ErrorKind::Validation, "ablations support vi or fixed mode");
    std::vector<double> nll_by_core;
    for (std::size_t core = 1; core <= dims; ++core) {
        RunConfig rc = c;
        rc.bayesian_core = core;
        double total = 0.0;
        for (int r = 0; r < c.restarts; ++r) {
            const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(r);
            const auto start = Clock::now();
            const TTModel model = train_model(train, model_settings(rc, dims, ranks, seed), mode);
            seconds.push_back(seconds_since(start));
            const Evaluation e = evaluate(model, test);
            total += e.nll;
            for (Index m = 0; m < test.rows(); ++m) {
                preds << label << ',' << core << ',' << r << ',' << test.row_ids[static_cast<std::size_t>(m)] << ','
                      << format_double(test.targets[m]) << ',' << format_double(e.prediction.mean[m]) << ','
                      << format_double(e.prediction.variance[m]) << '\n';
            }
        }
        nll_by_core.push_back(total / static_cast<double>(c.restarts));
    }
    return nll_by_core;
}

json write_ablation(ArtifactWriter& out, const std::string& prefix, const std::vector<std::string>& labels,
                    const std::vector<std::vector<double>>& columns, const std::string& preds) {
    const std::size_t dims = columns.front().size();
    std::ostringstream matrix;
    matrix << "core";
    for (const auto& l : labels) matrix << ',' << l;
    matrix << '\n';
    for (std::size_t d = 0; d < dims; ++d) {
        matrix << d + 1;
        for (const auto& col : columns) matrix << ',' << format_double(col[d]);
        matrix << '\n';
    }
    std::ostringstream best;
    best << "column,best\n";
    json best_json = json::object();
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const std::string entry = best_core_entry(columns[k]);
        best << labels[k] << ',' << entry << '\n';
        best_json[labels[k]] = entry;
    }
    out.text(prefix + "_nll.csv", matrix.str());
    out.text(prefix + "_best.csv", best.str());
    out.text(prefix + "_predictions.csv", preds);
    json nll = json::object();
    for (std::size_t k = 0; k < labels.size(); ++k) nll[labels[k]] = columns[k];
    return {{"best", best_json}, {"nll", nll}};
}

}  // namespace

json cmd_ablate_core(const RunConfig& c) {
    const Prepared p = prepare(c);
    const auto dims = static_cast<std::size_t>(p.train.dims());
    ArtifactWriter out(c.out_dir);
    std::ostringstream preds;
    preds << "column,core,restart,row_id,y,mean,variance\n";
    std::vector<std::string> labels;
    std::vector<std::vector<double>> columns;
    std::vector<double> seconds;
    for (int pattern : c.patterns) {
        std::vector<Index> ranks;
        switch (pattern) {
            case 1: ranks = resolve_ranks(c, dims); break;
            case 2: ranks = rank_pattern(RankPattern::PeakHigh, dims, c.rank, c.rank_high > 0 ? c.rank_high : c.rank + 1); break;
            case 3: ranks = rank_pattern(RankPattern::PeakLow, dims, c.rank, c.rank_low > 0 ? c.rank_low : c.rank - 1); break;
            default: fail(ErrorKind::Validation, "rank patterns are 1, 2 or 3");
        }
        const std::string label = "pattern_" + std::to_string(pattern);
        labels.push_back(label);
        columns.push_back(core_sweep(c, p.train, p.test, ranks, label, preds, seconds));
    }
    if (columns.empty()) fail(ErrorKind::Validation, "no rank patterns requested");
    json report = write_ablation(out, "ablate_core", labels, columns, preds.str());
    report["command"] = "ablate-core";
    report["config"] = config_echo(c);
    report["dataset"] = dataset_json(p.train, p.test);
    out.json_file("report.json", report);
    out.timing("train_seconds_summary", summary_json(seconds));
    report["files"] = out.finish("ablate-core");
    return report;
}

json cmd_ablate_shift(const RunConfig& c) {
    validate_common(c);
    require_data(c);
    const Dataset data = load_csv(c.data, c.target, delimiter_of(c));
    const auto dims = static_cast<std::size_t>(data.dims());
    std::vector<std::size_t> shifts = c.shifts;
    if (shifts.empty()) {
        for (std::size_t k = 0; k < std::min<std::size_t>(dims, 4); ++k) shifts.push_back(k);
    }
    for (std::size_t k : shifts) {
        if (k >= dims) fail(ErrorKind::Validation, "shift " + std::to_string(k) + " must be below " + std::to_string(dims));
    }
    const auto ranks = resolve_ranks(c, dims);
    ArtifactWriter out(c.out_dir);
    std::ostringstream preds;
    preds << "column,core,restart,row_id,y,mean,variance\n";
    std::vector<std::string> labels;
    std::vector<std::vector<double>> columns;
    std::vector<double> seconds;
    json digests = json::object();
    for (std::size_t k : shifts) {
        auto [train, test] = split(cyclic_shift(data, k), c.test_fraction, c.split_seed);
        if (test.rows() < 1) fail(ErrorKind::Validation, "test split is empty; increase test_fraction");
        const std::string label = "shift_" + std::to_string(k);
        labels.push_back(label);
        digests[label] = row_ids_digest(test.row_ids);
        columns.push_back(core_sweep(c, train, test, ranks, label, preds, seconds));
    }
    if (columns.empty()) fail(ErrorKind::Validation, "no shifts requested");
    json report = write_ablation(out, "ablate_shift", labels, columns, preds.str());
    report["command"] = "ablate-shift";
    report["config"] = config_echo(c);
    report["test_digests"] = digests;
    out.json_file("report.json", report);
    out.timing("train_seconds_summary", summary_json(seconds));
    report["files"] = out.finish("ablate-shift");
    return report;
}

json cmd_compare_gp(const RunConfig& c) {
    const Prepared p = prepare(c);
    if (p.train.rows() > c.gp_max_rows) {
        fail(ErrorKind::Validation, "training split has " + std::to_string(p.train.rows()) +
                                        " rows, above the full-GP cap of " + std::to_string(c.gp_max_rows) +
                                        "; subsample the data or raise --gp-max-rows");
    }
    ArtifactWriter out(c.out_dir);

    const TrainedRun vi = train_once(c, p, c.seed, InferenceMode::Vi);
    const TrainedRun cv = train_once(c, p, c.seed, InferenceMode::Cv);

    const auto gp_start = Clock::now();
    const Standardizer scaler = Standardizer::fit(p.train);
    const Matrix gp_x = scaler.apply_inputs(p.train.inputs);
    const Vector gp_y = scaler.apply_targets(p.train.targets);
    const GPConfig gp_config = gp_select_hypers(gp_x, gp_y, default_gp_grid(), c.seed);
    const GaussianProcess gp = GaussianProcess::fit(gp_x, gp_y, gp_config);
    const double gp_seconds = seconds_since(gp_start);
    const GPPrediction gp_pred = gp.predict(scaler.apply_inputs(p.test.inputs));
    PredictiveDistribution gp_dist{gp_pred.mean, gp_pred.variance, std::nullopt};
    scaler.invert_predictions(gp_dist.mean, gp_dist.variance);

    struct Row {
        const char* name;
        const PredictiveDistribution* dist;
        double seconds;
    };
    const Row rows[] = {{"LA-TTKM (VI)", &vi.eval.prediction, vi.seconds},
                        {"LA-TTKM (CV)", &cv.eval.prediction, cv.seconds},
                        {"Full GP", &gp_dist, gp_seconds}};

    std::ostringstream table;
    table << "model,nll,rmse\n";
    std::ostringstream preds;
    preds << "model,row_id,y,mean,variance,std,lower,upper\n";
    json models = json::array();
    const std::string digest = row_ids_digest(p.test.row_ids);
    for (const Row& row : rows) {
        const double nll = negative_log_likelihood(row.dist->mean, row.dist->variance, p.test.targets);
        const double rmse = root_mean_squared_error(row.dist->mean, p.test.targets);
        table << '"' << row.name << "\"," << format_double(nll) << ',' << format_double(rmse) << '\n';
        for (Index m = 0; m < p.test.rows(); ++m) {
            const double sd = std::sqrt(row.dist->variance[m]);
            preds << '"' << row.name << "\"," << p.test.row_ids[static_cast<std::size_t>(m)] << ','
                  << format_double(p.test.targets[m]) << ',' << format_double(row.dist->mean[m]) << ','
                  << format_double(row.dist->variance[m]) << ',' << format_double(sd) << ','
                  << format_double(row.dist->mean[m] - sd) << ',' << format_double(row.dist->mean[m] + sd) << '\n';
        }
        models.push_back({{"model", row.name}, {"nll", nll}, {"rmse", rmse}, {"test_digest", digest}});
        out.timing(row.name, row.seconds);
    }
    out.text("compare_gp.csv", table.str());
    out.text("compare_gp_predictions.csv", preds.str());

    json report = {{"command", "compare-gp"},
                   {"metric_scale", "original"},
                   {"config", config_echo(c)},
                   {"dataset", dataset_json(p.train, p.test)},
                   {"models", models},
                   {"vi", run_json(vi, c.seed)},
                   {"cv", run_json(cv, c.seed)},
                   {"gp",
                    {{"signal_variance", gp_config.signal_variance},
                     {"lengthscale", gp_config.lengthscale},
                     {"noise_precision", gp_config.noise_precision},
                     {"jitter", gp.jitter()},
                     {"clamped_variances", gp_pred.clamped}}}};
    out.json_file("report.json", report);
    report["files"] = out.finish("compare-gp");
    json seconds = json::object();
    for (const Row& row : rows) seconds[row.name] = row.seconds;
    report["train_seconds"] = seconds;
    return report;
}

json cmd_synth(const RunConfig& c) {
    if (c.synth_dims < 1) fail(ErrorKind::Validation, "synth_dims must be positive");
    const Dataset data = generate_synthetic(c.synth_rows, c.synth_dims, c.basis, c.rank, c.synth_noise, c.seed);
    ArtifactWriter out(c.out_dir);
    write_csv(data, out.path("data.csv"));
    out.adopt("data.csv");
    const double noise_precision = c.synth_noise > 0.0 ? 1.0 / (c.synth_noise * c.synth_noise) : 0.0;
    json report = {{"command", "synth"},
                   {"rows", c.synth_rows},
                   {"dims", c.synth_dims},
                   {"basis", c.basis},
                   {"rank", c.rank},
                   {"noise_std", c.synth_noise},
                   {"noise_precision", noise_precision},
                   {"seed", c.seed},
                   {"signal", "unit-RMS zero-mean tensor train over Legendre features of x ~ U[-1,1]"}};
    out.json_file("synth.json", report);
    report["files"] = out.finish("synth");
    return report;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"train", "cv", "predict", "metrics", "ablate-core",
                                                "ablate-shift", "compare-gp", "synth"};
    return names;
}

json run_command(const std::string& command, const RunConfig& config) {
    if (command == "train") return cmd_train(config);
    if (command == "cv") return cmd_cv(config);
    if (command == "predict") return cmd_predict(config);
    if (command == "metrics") return cmd_metrics(config);
    if (command == "ablate-core") return cmd_ablate_core(config);
    if (command == "ablate-shift") return cmd_ablate_shift(config);
    if (command == "compare-gp") return cmd_compare_gp(config);
    if (command == "synth") return cmd_synth(config);
    fail(ErrorKind::Validation, "unknown command '" + command + "'");
}

}  // namespace ttkm::experiments
