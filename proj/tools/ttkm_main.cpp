// ttkm command-line driver. Builds a JSON run config from --config and flags,
// then hands it to the C API.
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttkm/ttkm.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string flag_name(const std::string& key) {
    std::string out = key;
    for (char& c : out) {
        if (c == '_') c = '-';
    }
    return out;
}

json parse_scalar(const std::string& key, const std::string& text, const json& like) {
    if (like.is_string()) return text;
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        throw UsageError("--" + flag_name(key) + ": '" + text + "' is not a number");
    }
    if (like.is_number_integer() || like.is_number_unsigned()) {
        if (!value.is_number_integer() && !value.is_number_unsigned()) {
            throw UsageError("--" + flag_name(key) + ": '" + text + "' is not an integer");
        }
        if (like.is_number_unsigned() && value.is_number_integer() && value.get<long long>() < 0) {
            throw UsageError("--" + flag_name(key) + " must be non-negative");
        }
    } else if (!value.is_number()) {
        throw UsageError("--" + flag_name(key) + ": '" + text + "' is not a number");
    }
    return value;
}

// Element template for list-valued fields whose default may be empty.
json list_element_like(const std::string& key) {
    static const std::map<std::string, json> like{{"ranks", 1}, {"patterns", 1}, {"shifts", 0u}, {"cv_grid", 0.5}};
    const auto it = like.find(key);
    return it == like.end() ? json(0.5) : it->second;
}

json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("config file '" + path + "' is not valid JSON: " + std::string(e.what()));
    }
}

void print_error(const char* status, const std::string& message) {
    const json err = {{"error", {{"status", status}, {"message", message}}}};
    std::cerr << err.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    const json defaults = json::parse(ttkm_config_defaults());

    CLI::App app{"Bayesian tensor-train kernel machine experiments"};
    app.set_version_flag("--version", std::string(ttkm_version()));
    app.require_subcommand(1);

    struct Flag {
        std::string key;
        std::vector<std::string> values;
        bool set = false;
    };
    std::map<std::string, std::vector<Flag>> per_command;
    std::map<std::string, std::string> config_paths;
    std::map<std::string, CLI::App*> commands;

    const std::vector<std::pair<std::string, std::string>> names{
        {"train", "train over seeded restarts and report test NLL/RMSE"},
        {"cv", "grid-search (gamma, beta) by K-fold validation NLL, then train"},
        {"predict", "predict with a saved model"},
        {"metrics", "NLL and RMSE of a predictions file"},
        {"ablate-core", "test NLL for every Bayesian core and rank pattern"},
        {"ablate-shift", "core ablation under cyclic input shifts"},
        {"compare-gp", "VI, CV and a full GP on one split"},
        {"synth", "write a seeded synthetic TT dataset"}};

    for (const auto& [name, help] : names) {
        CLI::App* sub = app.add_subcommand(name, help);
        commands[name] = sub;
        sub->add_option("--config", config_paths[name], "JSON run config; flags override it");
        auto& flags = per_command[name];
        flags.reserve(defaults.size());
        for (const auto& [key, value] : defaults.items()) {
            flags.push_back({key, {}, false});
            Flag& f = flags.back();
            const std::string opt = "--" + flag_name(key);
            if (value.is_boolean()) {
                sub->add_flag(opt, f.set, "enable " + key);
            } else if (value.is_array()) {
                sub->add_option(opt, f.values, key + " (comma separated)")->delimiter(',');
            } else {
                sub->add_option(opt, f.values, key)->expected(1);
            }
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    std::string command;
    for (const auto& [name, sub] : commands) {
        if (sub->parsed()) command = name;
    }

    json config;
    try {
        config = config_paths[command].empty() ? json::object() : read_config_file(config_paths[command]);
        if (!config.is_object()) throw UsageError("config file must hold a JSON object");
        for (const Flag& f : per_command[command]) {
            const json& like = defaults.at(f.key);
            if (like.is_boolean()) {
                if (f.set) config[f.key] = true;
            } else if (like.is_array()) {
                if (f.values.empty()) continue;
                json list = json::array();
                for (const auto& v : f.values) list.push_back(parse_scalar(f.key, v, list_element_like(f.key)));
                config[f.key] = list;
            } else if (!f.values.empty()) {
                config[f.key] = parse_scalar(f.key, f.values.back(), like);
            }
        }
    } catch (const UsageError& e) {
        print_error("validation", e.what());
        return kExitValidation;
    }

    ttkm_result* result = nullptr;
    const ttkm_status status = ttkm_run_command(command.c_str(), config.dump().c_str(), &result);
    if (status != TTKM_OK) {
        print_error(ttkm_status_name(status), ttkm_last_error());
        return ttkm_status_is_usage(status) ? kExitValidation : kExitRuntime;
    }
    std::cout << ttkm_result_json(result) << '\n';
    ttkm_result_free(result);
    return kExitOk;
}
