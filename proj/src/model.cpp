#include "ttkm/model.hpp"

#include <fstream>

#include "ttkm/error.hpp"

namespace ttkm {

using nlohmann::json;

const char* to_string(InferenceMode mode) noexcept {
    switch (mode) {
        case InferenceMode::Vi: return "vi";
        case InferenceMode::Cv: return "cv";
        case InferenceMode::Fixed: return "fixed";
    }
    return "vi";
}

InferenceMode parse_inference_mode(const std::string& name) {
    if (name == "vi") return InferenceMode::Vi;
    if (name == "cv") return InferenceMode::Cv;
    if (name == "fixed") return InferenceMode::Fixed;
    fail(ErrorKind::Validation, "unknown inference mode '" + name + "' (expected vi|cv|fixed)");
}

TTModel train_model(const Dataset& train, const ModelSettings& settings, InferenceMode mode) {
    TTModel model;
    model.standardizer = Standardizer::fit(train);
    model.input_names = train.input_names;
    model.target_name = train.target_name;
    model.inference = mode;
    model.train = settings.train;

    const Matrix inputs = model.standardizer.apply_inputs(train.inputs);
    const Vector targets = model.standardizer.apply_targets(train.targets);
    model.feature_map = fit_feature_map(inputs, settings.family, settings.basis_count);
    std::vector<Matrix> features = eval_all_features(model.feature_map, inputs);

    if (mode == InferenceMode::Vi) {
        model.fit = fit_vi(std::move(features), targets, settings.train, settings.basis_count, settings.vi);
    } else {
        model.fit = fit_fixed(std::move(features), targets, settings.train, settings.basis_count, settings.beta,
                              settings.gamma);
    }
    return model;
}

PredictiveDistribution predict(const TTModel& model, const Matrix& inputs, CovarianceMode mode) {
    const Matrix scaled = model.standardizer.apply_inputs(inputs);
    const std::vector<Matrix> features = eval_all_features(model.feature_map, scaled);
    const Matrix design = design_matrix(model.fit.weights, features, model.fit.posterior.core);
    PredictiveDistribution out = predict_from_design(design, model.fit.posterior, model.fit.noise_precision, mode);
    model.standardizer.invert_predictions(out.mean, out.variance);
    if (out.covariance) {
        const double s = model.standardizer.target_std();
        *out.covariance *= s * s;
    }
    return out;
}

namespace {

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

json matrix_json(const Matrix& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    return {{"shape", {m.rows(), m.cols()}}, {"order", "row-major"}, {"data", data}};
}

Matrix matrix_from(const json& j) {
    const auto shape = j.at("shape").get<std::vector<Index>>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (shape.size() != 2 || static_cast<Index>(data.size()) != shape[0] * shape[1]) {
        fail(ErrorKind::Parse, "matrix shape does not match its data");
    }
    Matrix m(shape[0], shape[1]);
    std::size_t k = 0;
    for (Index r = 0; r < shape[0]; ++r)
        for (Index c = 0; c < shape[1]; ++c) m(r, c) = data[k++];
    return m;
}

json core_json(const TTCore& core) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(core.size()));
    for (Index a = 0; a < core.left_rank(); ++a)
        for (Index i = 0; i < core.mode_size(); ++i)
            for (Index b = 0; b < core.right_rank(); ++b) data.push_back(core(a, i, b));
    return {{"shape", {core.left_rank(), core.mode_size(), core.right_rank()}}, {"order", "row-major"}, {"data", data}};
}

TTCore core_from(const json& j) {
    const auto shape = j.at("shape").get<std::vector<Index>>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (shape.size() != 3 || static_cast<Index>(data.size()) != shape[0] * shape[1] * shape[2]) {
        fail(ErrorKind::Parse, "core shape does not match its data");
    }
    TTCore core(shape[0], shape[1], shape[2]);
    std::size_t k = 0;
    for (Index a = 0; a < shape[0]; ++a)
        for (Index i = 0; i < shape[1]; ++i)
            for (Index b = 0; b < shape[2]; ++b) core(a, i, b) = data[k++];
    return core;
}

json gamma_json(const GammaParams& g) { return {{"shape", g.shape}, {"rate", g.rate}}; }
GammaParams gamma_from(const json& j) { return {j.at("shape").get<double>(), j.at("rate").get<double>()}; }

}  // namespace

json to_json(const TTModel& model) {
    json cores = json::array();
    for (const auto& c : model.fit.weights.cores()) cores.push_back(core_json(c));
    json trace = json::array();
    for (const auto& t : model.fit.trace) {
        trace.push_back({{"objective", t.objective}, {"mean_beta", t.mean_beta}, {"mean_gamma", t.mean_gamma}});
    }
    json feature_map = {
        {"family", to_string(model.feature_map.family)},
        {"basis_count", model.feature_map.basis_count},
        {"lower", model.feature_map.lower},
        {"upper", model.feature_map.upper},
    };
    if (model.feature_map.family == FeatureFamily::UnitNormPolynomial) {
        feature_map["norms"] = matrix_json(model.feature_map.norms);
    }
    return {
        {"format", "ttkm-model"},
        {"version", 1},
        {"inference", to_string(model.inference)},
        {"input_names", model.input_names},
        {"target_name", model.target_name},
        {"config",
         {{"ranks", model.train.ranks},
          {"epochs", model.train.epochs},
          {"bayesian_core", model.train.bayesian_core},
          {"init_seed", model.train.init_seed},
          {"convergence_tol", model.train.convergence_tol}}},
        {"feature_map", feature_map},
        {"standardizer",
         {{"input_mean", vector_json(model.standardizer.input_mean())},
          {"input_std", vector_json(model.standardizer.input_std())},
          {"target_mean", model.standardizer.target_mean()},
          {"target_std", model.standardizer.target_std()}}},
        {"cores", cores},
        {"posterior",
         {{"core", model.fit.posterior.core + 1},
          {"mean", vector_json(model.fit.posterior.mean)},
          {"covariance", matrix_json(model.fit.posterior.covariance)}}},
        {"precisions",
         {{"beta", gamma_json(model.fit.precisions.beta)},
          {"gamma", gamma_json(model.fit.precisions.gamma)},
          {"beta_prior", gamma_json(model.fit.precisions.beta_prior)},
          {"gamma_prior", gamma_json(model.fit.precisions.gamma_prior)},
          {"posterior_beta", model.fit.beta},
          {"posterior_gamma", model.fit.gamma},
          {"noise_precision", model.fit.noise_precision},
          {"scale", "standardized"}}},
        {"trace", trace},
        {"outer_iterations", model.fit.outer_iterations},
        {"als_updates", model.fit.als_updates},
    };
}

TTModel model_from_json(const json& doc) {
    try {
        if (doc.at("format").get<std::string>() != "ttkm-model") fail(ErrorKind::Parse, "not a ttkm model document");
        TTModel model;
        model.inference = parse_inference_mode(doc.at("inference").get<std::string>());
        model.input_names = doc.at("input_names").get<std::vector<std::string>>();
        model.target_name = doc.at("target_name").get<std::string>();

        const json& cfg = doc.at("config");
        model.train.ranks = cfg.at("ranks").get<std::vector<Index>>();
        model.train.epochs = cfg.at("epochs").get<int>();
        model.train.bayesian_core = cfg.at("bayesian_core").get<std::size_t>();
        model.train.init_seed = cfg.at("init_seed").get<std::uint64_t>();
        model.train.convergence_tol = cfg.at("convergence_tol").get<double>();

        const json& fm = doc.at("feature_map");
        model.feature_map.family = parse_feature_family(fm.at("family").get<std::string>());
        model.feature_map.basis_count = fm.at("basis_count").get<Index>();
        model.feature_map.lower = fm.at("lower").get<std::vector<double>>();
        model.feature_map.upper = fm.at("upper").get<std::vector<double>>();
        if (model.feature_map.family == FeatureFamily::UnitNormPolynomial) {
            model.feature_map.norms = matrix_from(fm.at("norms"));
        }

        const json& st = doc.at("standardizer");
        model.standardizer = Standardizer(vector_from(st.at("input_mean")), vector_from(st.at("input_std")),
                                          st.at("target_mean").get<double>(), st.at("target_std").get<double>());

        std::vector<TTCore> cores;
        for (const auto& c : doc.at("cores")) cores.push_back(core_from(c));
        model.fit.weights = TTWeights(std::move(cores));

        const json& post = doc.at("posterior");
        model.fit.posterior.core = post.at("core").get<std::size_t>() - 1;
        model.fit.posterior.mean = vector_from(post.at("mean"));
        model.fit.posterior.covariance = matrix_from(post.at("covariance"));

        const json& pr = doc.at("precisions");
        model.fit.precisions.beta = gamma_from(pr.at("beta"));
        model.fit.precisions.gamma = gamma_from(pr.at("gamma"));
        model.fit.precisions.beta_prior = gamma_from(pr.at("beta_prior"));
        model.fit.precisions.gamma_prior = gamma_from(pr.at("gamma_prior"));
        model.fit.beta = pr.at("posterior_beta").get<double>();
        model.fit.gamma = pr.at("posterior_gamma").get<double>();
        model.fit.noise_precision = pr.at("noise_precision").get<double>();

        for (const auto& t : doc.at("trace")) {
            model.fit.trace.push_back({t.at("objective").get<double>(), t.at("mean_beta").get<double>(),
                                       t.at("mean_gamma").get<double>()});
        }
        model.fit.outer_iterations = doc.at("outer_iterations").get<int>();
        model.fit.als_updates = doc.at("als_updates").get<int>();

        if (model.fit.posterior.core >= model.fit.weights.order() ||
            model.fit.posterior.mean.size() != model.fit.weights.core(model.fit.posterior.core).size()) {
            fail(ErrorKind::Parse, "posterior does not match the stored cores");
        }
        return model;
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("malformed model document: ") + e.what());
    }
}

void save_model(const TTModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write model '" + path + "'");
    out << to_json(model).dump(2) << '\n';
}

TTModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open model '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, "model '" + path + "' is not valid JSON: " + e.what());
    }
    return model_from_json(doc);
}

}  // namespace ttkm
