#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "monofk/commands.hpp"

using namespace monofk;
using ordered = nlohmann::ordered_json;

namespace {

std::string strip_duration(const std::string& report) {
    ordered j = ordered::parse(report);
    j.erase("duration_seconds");
    return j.dump();
}

void check_report_shape(const std::string& text, const char* command) {
    ordered j = ordered::parse(text);
    CHECK(j.at("command").get<std::string>() == command);
    CHECK(j.at("version").get<std::string>() == kVersion);
    CHECK(j.contains("seed"));
    CHECK(j.at("inputs").is_object());
    CHECK(j.at("results").is_object());
    REQUIRE(j.at("checks").is_array());
    bool all = true;
    for (const auto& c : j.at("checks")) {
        CHECK(c.contains("name"));
        CHECK(c.contains("value"));
        CHECK((c.contains("tolerance") || c.contains("window")));
        CHECK(c.contains("criterion"));
        all = all && c.at("pass").get<bool>();
    }
    CHECK(j.at("all_passed").get<bool>() == all);
    // the timing field comes last so reports stay comparable without it
    std::string last;
    for (const auto& [key, value] : j.items()) last = key;
    CHECK(last == "duration_seconds");
}

} // namespace

TEST_CASE("config json covers every field") {
    const char* text = R"({
        "charge": 2, "delta": 0.3, "switch_margin": 0.8, "seed": 99,
        "n_paths": 500, "n_steps": 100, "t": 0.25, "x": [1.0, 2.0, 3.0],
        "c_budget": 0.7, "holonomy_segments": 500, "csv_path": "table.csv",
        "section": {"n": 2, "terms": [
            {"re": 1.0, "im": 0.5, "ell": 2, "m": 1, "k_lo": 0.5, "k_hi": 2.5, "amplitude": 0.9}]}
    })";
    RunConfig cfg = run_config_from_json(text);
    CHECK(cfg.charge == 2);
    CHECK(cfg.delta == 0.3);
    CHECK(cfg.switch_margin == 0.8);
    CHECK(cfg.seed == 99);
    CHECK(cfg.n_paths == 500);
    CHECK(cfg.n_steps == 100);
    CHECK(cfg.t == 0.25);
    CHECK(cfg.x.x1 == 1.0);
    CHECK(cfg.x.x2 == 2.0);
    CHECK(cfg.x.x3 == 3.0);
    CHECK(cfg.c_budget == 0.7);
    CHECK(cfg.holonomy_segments == 500);
    CHECK(cfg.csv_path == "table.csv");
    REQUIRE(cfg.section.has_value());
    CHECK(cfg.section->charge() == 2);
    CHECK(cfg.section->terms.size() == 1);

    RunConfig defaults = run_config_from_json("{}");
    CHECK(defaults.charge == 1);
    CHECK(defaults.delta == 0.5);
    CHECK(defaults.n_paths == 20000);
    CHECK(!defaults.section.has_value());
}

TEST_CASE("config json rejects malformed input") {
    CHECK_THROWS_AS((void)run_config_from_json(R"({"chrage": 1})"), std::invalid_argument);
    CHECK_THROWS_AS((void)run_config_from_json(R"({"x": [1.0, 2.0]})"), std::invalid_argument);
    CHECK_THROWS_AS((void)run_config_from_json(R"({"delta": 0.0})"), std::invalid_argument);
    CHECK_THROWS_AS((void)run_config_from_json(R"({"delta": 1.0})"), std::invalid_argument);
    CHECK_THROWS_AS((void)run_config_from_json(R"({"switch_margin": 0.0})"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)run_config_from_json(R"({"n_paths": 0})"), std::invalid_argument);
    CHECK_THROWS_AS((void)run_config_from_json(R"({"t": -0.5})"), std::invalid_argument);
    CHECK_THROWS_AS((void)run_config_from_json(R"([1, 2])"), std::invalid_argument);
    // declared charge and section charge must agree
    CHECK_THROWS_AS((void)run_config_from_json(
                        R"({"charge": 2, "section": {"n": 1, "terms": [
                            {"re": 1, "im": 0, "ell": 1, "m": 0, "k_lo": 1, "k_hi": 3, "amplitude": 1}]}})"),
                    std::invalid_argument);
}

TEST_CASE("geometry command passes its checks") {
    RunConfig cfg;
    cfg.holonomy_segments = 10000;
    auto res = cmd_geometry(cfg);
    CHECK(res.all_passed);
    check_report_shape(res.report_json, "geometry");
}

TEST_CASE("spectral command passes its checks") {
    RunConfig cfg;
    auto res = cmd_spectral(cfg);
    CHECK(res.all_passed);
    check_report_shape(res.report_json, "spectral");
}

TEST_CASE("fk command agrees on the axis point and writes the csv table") {
    RunConfig cfg;
    cfg.n_paths = 800;
    cfg.n_steps = 200;
    cfg.t = 0.3;
    auto csv = std::filesystem::temp_directory_path() / "monofk_test_table.csv";
    std::filesystem::remove(csv);
    cfg.csv_path = csv.string();

    auto res = cmd_fk(cfg);
    CHECK(res.all_passed);
    check_report_shape(res.report_json, "fk");
    ordered j = ordered::parse(res.report_json);
    CHECK(j["results"].contains("mc_mean"));
    CHECK(j["results"].contains("spectral"));
    CHECK(j["results"]["refinement_table"].size() == 3);

    std::ifstream in(csv);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == "h,n_paths,value_re,value_im,stderr");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
    std::filesystem::remove(csv);
}

TEST_CASE("fk command rejects degenerate horizons") {
    RunConfig cfg;
    cfg.t = 0.0;
    CHECK_THROWS_AS((void)cmd_fk(cfg), std::invalid_argument);
    cfg.t = 0.5;
    cfg.n_steps = 5;
    CHECK_THROWS_AS((void)cmd_fk(cfg), std::invalid_argument);
}

TEST_CASE("reports are deterministic for a fixed config and seed") {
    RunConfig cfg;
    cfg.n_paths = 400;
    cfg.n_steps = 100;
    cfg.t = 0.3;

    setenv("MONOFK_THREADS", "1", 1);
    auto a = cmd_fk(cfg);
    setenv("MONOFK_THREADS", "3", 1);
    auto b = cmd_fk(cfg);
    unsetenv("MONOFK_THREADS");
    auto c = cmd_fk(cfg);

    CHECK(strip_duration(a.report_json) == strip_duration(b.report_json));
    CHECK(strip_duration(a.report_json) == strip_duration(c.report_json));

    cfg.seed = 77;
    auto d = cmd_fk(cfg);
    CHECK(strip_duration(a.report_json) != strip_duration(d.report_json));
}

TEST_CASE("convergence command reports the four rate checks") {
    RunConfig cfg;
    auto res = cmd_convergence(cfg);
    check_report_shape(res.report_json, "convergence");
    ordered j = ordered::parse(res.report_json);

    bool saw_slope = false, saw_chart = false, saw_refine = false, saw_gradient = false;
    for (const auto& c : j["checks"]) {
        std::string name = c["name"].get<std::string>();
        if (name == "stderr_slope") {
            saw_slope = true;
            CHECK(c["pass"].get<bool>());
        } else if (name == "refinement_shrink") {
            saw_refine = true;
            CHECK(c["pass"].get<bool>());
        } else if (name == "chart_choice_shrink") {
            saw_chart = true; // measured rate is reported as-is
        } else if (name == "gradient_residual_shrink") {
            saw_gradient = true;
        }
    }
    CHECK(saw_slope);
    CHECK(saw_chart);
    CHECK(saw_refine);
    CHECK(saw_gradient);
}

TEST_CASE("installed binary round trip") {
    const char* cli = std::getenv("MONOFK_CLI");
    if (cli == nullptr) return; // exercised under ctest where the path is exported

    auto out = std::filesystem::temp_directory_path() / "monofk_cli_report.json";
    std::filesystem::remove(out);
    std::ostringstream cmd;
    cmd << '"' << cli << '"' << " geometry --seed 5 --output " << out;
    int rc = std::system(cmd.str().c_str());
    CHECK(rc == 0);
    std::ifstream in(out);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    ordered j = ordered::parse(buf.str());
    CHECK(j["command"] == "geometry");
    CHECK(j["seed"] == 5);
    CHECK(j["all_passed"].get<bool>());
    std::filesystem::remove(out);

    std::ostringstream bad;
    bad << '"' << cli << '"' << " fk --t 0 >/dev/null 2>&1";
    CHECK(std::system(bad.str().c_str()) != 0);
}
