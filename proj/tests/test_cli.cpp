#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome run(const std::string& args) {
    const fs::path dir = fs::temp_directory_path() / "ttkm_test_cli";
    fs::create_directories(dir);
    const std::string command = std::string(TTKM_CLI_PATH) + " " + args + " >" + (dir / "stdout").string() + " 2>" +
                                (dir / "stderr").string();
    const int status = std::system(command.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = slurp(dir / "stdout");
    o.err = slurp(dir / "stderr");
    return o;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ttkm_test_cli" / name;
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("successful commands exit 0 and print JSON") {
    const auto dir = scratch("synth");
    const auto o = run("synth --synth-rows 60 --synth-dims 2 --basis 3 --seed 4 --out-dir " + dir.string());
    REQUIRE(o.code == 0);
    const auto j = nlohmann::json::parse(o.out);
    CHECK(j["command"] == "synth");
    CHECK(fs::exists(dir / "data.csv"));

    const auto out = scratch("train");
    const auto t = run("train --data " + (dir / "data.csv").string() +
                       " --basis 3 --rank 2 --epochs 2 --vi-max-outer 2 --restarts 1 --out-dir " + out.string());
    REQUIRE(t.code == 0);
    CHECK(fs::exists(out / "model.json"));
    CHECK(nlohmann::json::parse(t.out).contains("train_seconds"));
}

TEST_CASE("flags override the config file") {
    const auto dir = scratch("override");
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << R"({"synth_rows": 40, "synth_dims": 3, "synth_noise": 0.2})";
    const auto o = run("synth --config " + (dir / "config.json").string() + " --synth-rows 25 --out-dir " +
                       (dir / "out").string());
    REQUIRE(o.code == 0);
    const auto j = nlohmann::json::parse(o.out);
    CHECK(j["rows"] == 25);
    CHECK(j["dims"] == 3);
}

TEST_CASE("usage and validation errors exit 2") {
    CHECK(run("").code == 2);
    CHECK(run("teleport").code == 2);
    CHECK(run("train --no-such-flag 1").code == 2);
    CHECK(run("synth --synth-rows abc").code == 2);
    CHECK(run("synth --synth-rows 2.5").code == 2);
    CHECK(run("train --basis -1").code == 2);
    const auto missing = run("train --rank 2");
    CHECK(missing.code == 2);
    const auto err = nlohmann::json::parse(missing.err);
    CHECK(err["error"]["status"] == "validation");

    const auto dir = scratch("badconfig");
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << R"({"rank": 2, "typo_key": 1})";
    CHECK(run("train --config " + (dir / "config.json").string()).code == 2);
    std::ofstream(dir / "broken.json") << "{";
    CHECK(run("train --config " + (dir / "broken.json").string()).code == 2);
}

TEST_CASE("runtime failures exit 1") {
    const auto o = run("train --data /nonexistent/data.csv --out-dir " + scratch("io").string());
    CHECK(o.code == 1);
    const auto err = nlohmann::json::parse(o.err);
    CHECK(err["error"]["status"] == "io");
}
