#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "toy_grid.hpp"

using namespace mgsse;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

ScenarioConfig parse(const std::string& text, const std::string& base = "") {
    std::istringstream in(text);
    return parse_config(in, "cfg", base);
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("empty config yields the feeder defaults") {
    const auto c = parse("");
    CHECK(c.grid == "ieee33");
    CHECK(c.sim.delta == Approx(1.0 / 60.0));
    CHECK(c.sim.omega0 == Approx(2.0 * std::numbers::pi * 60.0));
    CHECK(c.duration == 20.0);
    CHECK(c.steps() == 1200);
    CHECK(c.case_params.sg_tau == 5.0);
    CHECK(c.case_params.sg_D == 2.0);
    CHECK(c.case_params.sg_M == 10.0);
    CHECK(c.case_params.sg_R == 9.5);
    CHECK(c.case_params.inv_D == 0.7);
    CHECK(c.case_params.load_D == 0.1);
    CHECK(c.case_params.load_min == 0.0);
    CHECK(c.case_params.load_max == 0.5);
    CHECK(c.estimator.K == 3);
    CHECK(c.attack.q == 5);
    CHECK(c.attack.start_time == Approx(1.1));
}

TEST_CASE("config values, ratios and comments") {
    const auto c = parse("# comment\ndelta = 1/120   # finer step\nduration = 2\nattack.type = B\nseed = 42\nestimator.decoder = linked\n");
    CHECK(c.sim.delta == Approx(1.0 / 120.0));
    CHECK(c.steps() == 240);
    CHECK(c.attack.type == AttackType::TypeB);
    CHECK(c.attack.seed == 42);
    CHECK(c.estimator.decode.mode == DecoderMode::Linked);
}

TEST_CASE("config errors name the field") {
    CHECK_THROWS_WITH(parse("delta = 0\n"), ContainsSubstring("delta"));
    CHECK_THROWS_WITH(parse("speed = 3\n"), ContainsSubstring("unknown key 'speed'"));
    CHECK_THROWS_WITH(parse("seed = 1\nseed = 2\n"), ContainsSubstring("repeated"));
    CHECK_THROWS_WITH(parse("sg.M = abc\n"), ContainsSubstring("sg.M"));
    CHECK_THROWS_WITH(parse("estimator.window = 1\n"), ContainsSubstring("estimator.window"));
    CHECK_THROWS_WITH(parse("attack.type = C\n"), ContainsSubstring("attack.type"));
    CHECK_THROWS_WITH(parse("duration = 1.005\n"), ContainsSubstring("integer step count"));
    CHECK_THROWS_WITH(parse("grid = missing.grid\n"), ContainsSubstring("does not exist"));
    CHECK_THROWS_WITH(parse("delta\n"), ContainsSubstring("cfg:1"));
    CHECK_THROWS_AS(load_config("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("grid file path is resolved next to the config") {
    const auto dir = std::filesystem::temp_directory_path() / "mgsse_cfg_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "toy.grid") << toy_grid_text;
    std::ofstream(dir / "run.cfg") << "grid = toy.grid\nduration = 1\n";
    const auto c = load_config((dir / "run.cfg").string());
    const auto g = make_grid(c);
    CHECK(g.n_bus() == 7);
}

TEST_CASE("short runs of every scenario write the expected files") {
    ScenarioConfig c;
    c.duration = 1.5;
    c.attack.start_time = 0.5;
    c.attack.type = AttackType::TypeB;
    const auto g = make_grid(c);
    for (int sc : {1, 2, 3}) {
        const auto res = run_scenario(c, sc);
        CHECK(res.trace.x.size() == 90);
        const auto dir = std::filesystem::path("scenario_out") / std::to_string(sc);
        write_outputs(res, g, dir.string());
        for (const char* f : {"states.csv", "measurements.csv", "attacks_true.csv", "report.txt"}) CHECK(std::filesystem::exists(dir / f));
        const bool est = sc == 3;
        CHECK(std::filesystem::exists(dir / "attacks_est.csv") == est);
        CHECK(std::filesystem::exists(dir / "errors.csv") == est);
        const auto states = read_file(dir / "states.csv");
        CHECK(states.rfind(std::string(csv_schema) + " states\nk,t,", 0) == 0);
        const auto report = read_file(dir / "report.txt");
        CHECK_THAT(report, ContainsSubstring("scenario: " + std::to_string(sc)));
        if (sc == 1) CHECK(res.trace.e.back().isZero());
        if (sc == 3) {
            CHECK(res.report.estimated_steps == 88);
            CHECK(res.report.attacked_steps == 60);
            CHECK(res.trace.source[0] == EstimateSource::Warmup);
        }
    }
    CHECK_THROWS_AS(run_scenario(c, 4), ConfigError);
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 377.0, -1e-17, 6.02e23}) CHECK(std::stod(fmt(v)) == v);
    CHECK(fmt(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("scenario one stays near nominal frequency after the transient") {
    ScenarioConfig c;
    const auto res = run_scenario(c, 1);
    CHECK(res.report.max_dev_hz_settled < 0.01);
    for (double f : res.report.final_speed_hz) CHECK(f == Approx(60.0).margin(0.01));
}
