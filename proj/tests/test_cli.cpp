#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "recf/cli.hpp"
#include "recf/config.hpp"
#include "recf/csv.hpp"
#include "recf/errors.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace recf;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path test_dir() {
    fs::path p = fs::temp_directory_path() / "recf_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(std::vector<std::string> args) {
    std::vector<const char*> argv{"recf"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

const char* kIdentifyConfig = R"({
  "scenario": {
    "source": {"kind": "noncircular_gaussian", "rho": 0.1},
    "plant": "system2",
    "m": 2,
    "noise": {"snr_db": 16}
  },
  "filters": [
    {"kind": "clms", "mu": 0.01},
    {"kind": "lrecf", "mu": 0.01, "n_features": 16, "sigma2": 1.0}
  ],
  "run": {"runs": 2, "samples": 200, "seed": 7, "threads": 1}
})";

}  // namespace

TEST_CASE("config parsing is strict about keys, types and exclusive fields") {
    CHECK_THROWS_AS(parse_config(json::parse(R"({"bogus": 1})")), config_error);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"scenario": {"wat": 1}})")),
                    config_error);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"scenario": {"m": -3}})")),
                    config_error);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"scenario": {"m": 2.5}})")),
                    config_error);
    CHECK_THROWS_AS(
        parse_config(json::parse(R"({"scenario": {"noise": {"snr_db": 10, "variance": 0.1}}})")),
        config_error);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"scenario": {"noise": {}}})")),
                    config_error);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"scenario": {"plant": "sys9"}})")),
                    config_error);
    CHECK_THROWS_AS(
        parse_config(json::parse(R"({"filters": [{"kind": "zlms", "mu": 0.1}]})")),
        config_error);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"filters": [{"kind": "clms"}]})")),
                    config_error);  // mu required
    CHECK_THROWS_AS(parse_config(json::parse(R"({"filters": []})")), config_error);
    CHECK_THROWS_AS(
        parse_config(json::parse(
            R"({"filters": [{"kind": "clms", "mu": 0.1, "label": "a"},
                            {"kind": "clms", "mu": 0.2, "label": "a"}]})")),
        config_error);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"backend": "mmx"})")), config_error);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"theory": {"mu": []}})")),
                    config_error);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"source": 1})")), config_error);
}

TEST_CASE("missing filter labels default to the kind with a suffix on collision") {
    auto cfg = parse_config(json::parse(
        R"({"filters": [{"kind": "clms", "mu": 0.1},
                        {"kind": "clms", "mu": 0.2},
                        {"kind": "clms", "mu": 0.3, "label": "clms-2"}]})"));
    CHECK(cfg.experiment.filters[0].label == "clms");
    CHECK(cfg.experiment.filters[1].label == "clms-3");
    CHECK(cfg.experiment.filters[2].label == "clms-2");
}

TEST_CASE("a resolved config round-trips through JSON byte-for-byte") {
    CliConfig cfg = parse_config(json::parse(kIdentifyConfig));
    finalize_config(cfg);
    std::string a = resolved_json(cfg).dump(2);
    CliConfig reparsed = parse_config(json::parse(a));
    std::string b = resolved_json(reparsed).dump(2);
    CHECK(a == b);
    CHECK(reparsed.experiment.run.threads == cfg.experiment.run.threads);
    CHECK(reparsed.backend == cfg.backend);
    CHECK(reparsed.experiment.filters[1].feat.n_features == 16);
}

TEST_CASE("load_config reports IO and parse problems and unwraps sidecars") {
    CHECK_THROWS_AS(load_config("/nonexistent/nope.json"), config_error);

    fs::path dir = test_dir();
    write_text(dir / "broken.json", "{ not json");
    CHECK_THROWS_AS(load_config((dir / "broken.json").string()), config_error);

    CliConfig cfg = parse_config(json::parse(kIdentifyConfig));
    finalize_config(cfg);
    json sidecar{{"format", "recf-meta-v1"},
                 {"subcommand", "identify"},
                 {"config", resolved_json(cfg)},
                 {"outputs", json::array()}};
    write_text(dir / "meta.json", sidecar.dump(2));
    CliConfig from_sidecar = load_config((dir / "meta.json").string());
    CHECK(resolved_json(from_sidecar).dump(2) == resolved_json(cfg).dump(2));

    json bad_sidecar{{"format", "recf-meta-v9"}};
    write_text(dir / "bad_meta.json", bad_sidecar.dump(2));
    CHECK_THROWS_AS(load_config((dir / "bad_meta.json").string()), config_error);
}

TEST_CASE("format_g17 survives a parse round-trip") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 0.0, -123.456789012345678}) {
        std::string s = format_g17(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("the cli runs, replays byte-identically and reports usage errors") {
    fs::path dir = test_dir();
    write_text(dir / "cfg.json", kIdentifyConfig);
    fs::path out1 = dir / "out1";
    fs::path out2 = dir / "out2";

    CHECK(cli({"identify", "--config", (dir / "cfg.json").string(), "--out",
               out1.string(), "--quiet"}) == 0);
    CHECK(fs::exists(out1 / "identify.csv"));
    CHECK(fs::exists(out1 / "identify.meta.json"));

    CHECK(cli({"identify", "--config", (out1 / "identify.meta.json").string(), "--out",
               out2.string(), "--quiet"}) == 0);
    CHECK(slurp(out1 / "identify.csv") == slurp(out2 / "identify.csv"));
    CHECK(slurp(out1 / "identify.meta.json") == slurp(out2 / "identify.meta.json"));

    // the sidecar pins the run even when flags changed the original invocation
    fs::path out3 = dir / "out3";
    CHECK(cli({"identify", "--config", (dir / "cfg.json").string(), "--out",
               out3.string(), "--seed", "99", "--quiet"}) == 0);
    CHECK(slurp(out3 / "identify.csv") != slurp(out1 / "identify.csv"));
    fs::path out4 = dir / "out4";
    CHECK(cli({"identify", "--config", (out3 / "identify.meta.json").string(), "--out",
               out4.string(), "--quiet"}) == 0);
    CHECK(slurp(out4 / "identify.csv") == slurp(out3 / "identify.csv"));

    CHECK(cli({"identify"}) == 2);                     // --config required
    CHECK(cli({"frobnicate"}) == 2);                   // unknown subcommand
    CHECK(cli({}) == 2);                               // subcommand required
    CHECK(cli({"identify", "--config", (dir / "missing.json").string()}) == 3);

    write_text(dir / "bad.json", R"({"filters": "nope"})");
    CHECK(cli({"identify", "--config", (dir / "bad.json").string()}) == 3);
}

TEST_CASE("the curves csv lists filters in order with blanks for absent metrics") {
    LearningCurves lc;
    lc.runs = 1;
    lc.samples = 2;
    FilterCurves a;
    a.label = "one";
    a.mse = {1.0, 0.5};
    a.mse_db = {0.0, -3.0103};
    a.emse = {0.5, 0.25};
    a.emse_db = {-3.0103, -6.0206};
    a.has_emse = true;
    lc.filters.push_back(a);
    FilterCurves b;
    b.label = "two";
    b.mse = {2.0};
    b.mse_db = {3.0103};
    lc.filters.push_back(b);

    std::ostringstream os;
    write_curves_csv(os, lc);
    std::string text = os.str();
    CHECK(text.substr(0, 42) == "iteration,filter,mse_db,emse_db,msd_db\n0,o");
    CHECK(text.find("0,one,0,-3.0103,\n") != std::string::npos);
    CHECK(text.find("0,two,3.0103,,\n") != std::string::npos);
}
