#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "qplas/errors.hpp"
#include "qplas/runner/config.hpp"

using namespace qplas;
using namespace qplas::runner;

namespace {

std::string config_error(const std::string& text) {
    try {
        parse_config(text, "run.cfg");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("defaults need only a seed") {
    RunConfig c;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.seed = 1;
    CHECK_NOTHROW(c.validate());
    CHECK(c.recipes.size() == 4);
    CHECK(c.sampling.nu == 150);
    CHECK(c.steady_center_s == 94.0);
}

TEST_CASE("text format with comments and whitespace") {
    const auto c = parse_config(
        "# run\n"
        "seed = 42\n"
        "\n"
        "  sampling.nu=600   # four times the probes\n"
        "probe.kind = coherent\n"
        "injection.labels = a, b, c\n"
        "injection.dry_mass_g = 0.3, 0.2, 0.1\n"
        "estimate.target_baseline = 0.06\n"
        "affinity.raw_steady_state = true\n",
        "run.cfg");
    CHECK(*c.seed == 42);
    CHECK(c.sampling.nu == 600);
    CHECK(c.probe == photon::ProbeKind::CoherentUnitMean);
    REQUIRE(c.recipes.size() == 3);
    CHECK(c.recipes[1].label == "b");
    CHECK(c.recipes[2].dry_mass_g == 0.1);
    CHECK(c.recipes[2].cavity_volume_l == kinetics::reference_recipes()[0].cavity_volume_l);
    CHECK(*c.target_baseline == 0.06);
    CHECK(c.raw_steady_state);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("echo round trips exactly") {
    RunConfig c;
    c.seed = 99;
    c.direct_T0 = 0.1 + 0.2;
    c.KA = 1.0 / 3.0;
    c.source = TransmissionSource::Stack;
    c.timetag.L0 = 1e-5;
    const auto text = format_config(c);
    const auto back = parse_config(text, "echo");
    CHECK(format_config(back) == text);
    CHECK(back.direct_T0 == c.direct_T0);
    CHECK(back.KA == c.KA);
    CHECK(back.source == TransmissionSource::Stack);

    c.threads = 8;
    c.output_dir = "elsewhere";
    CHECK(format_config(c) == text);
}

TEST_CASE("errors name the line and key") {
    CHECK(config_error("seed = 1\nsampling.nu = many\n").find("run.cfg:2: sampling.nu") != std::string::npos);
    CHECK(config_error("seed = 1\n\nbogus.key = 3\n").find("run.cfg:3: unknown key 'bogus.key'") != std::string::npos);
    CHECK(config_error("seed = 1\nseed = 2\n").find("duplicate") != std::string::npos);
    CHECK(config_error("seed 1\n").find("run.cfg:1") != std::string::npos);
    CHECK(config_error("seed = -4\n").find("seed") != std::string::npos);
    CHECK(config_error("injection.labels = a,b\ninjection.dry_mass_g = 1\n").find("expected 2 values") != std::string::npos);
    CHECK(config_error("probe.kind = laser\n").find("probe.kind") != std::string::npos);
    CHECK(config_error("timetag.enabled = maybe\n").find("timetag.enabled") != std::string::npos);
    CHECK(config_error("direct.T0 = inf\n").find("finite") != std::string::npos);
}

TEST_CASE("semantic validation") {
    auto c = parse_config("seed = 1\nsampling.nu = 0\n", "x");
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = parse_config("seed = 1\ndirect.T0 = 0.9\ndirect.Tinf = 0.2\n", "x");
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = parse_config("seed = 1\ninjection.labels = a,a\ninjection.dry_mass_g = 1,2\n", "x");
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = parse_config("seed = 1\ntransmission.source = stack\nstack.buffer_index = 1.6\n", "x");
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = parse_config("seed = 1\ntransmission.source = stack\nstack.operating_drop = 1\n", "x");
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("manifests load as configs") {
    const auto dir = std::filesystem::temp_directory_path() / "qplas_test_config";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "manifest.json").string();
    {
        std::ofstream f(path);
        f << R"({"tool": "qplas", "seed": 5, "config": {"seed": "5", "sampling.mu": "10", "injection.labels": "x,y,z",
               "injection.dry_mass_g": "0.1,0.2,0.3"}})";
    }
    const auto c = load_config(path);
    CHECK(*c.seed == 5);
    CHECK(c.sampling.mu == 10);
    CHECK(c.recipes.size() == 3);
    {
        std::ofstream f(path);
        f << R"({"config": {"sampling.mu": 10}})";
    }
    CHECK_THROWS_AS(load_config(path), ConfigError);
    {
        std::ofstream f(path);
        f << "{ not json";
    }
    CHECK_THROWS_AS(load_config(path), ConfigError);
    CHECK_THROWS_AS(load_config((dir / "missing.cfg").string()), ConfigError);
    std::filesystem::remove_all(dir);
}
