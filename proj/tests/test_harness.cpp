#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rfdelyap/report.hpp"
#include "rfdelyap/scenario.hpp"

using namespace rfdelyap;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const char* kSmall = R"({
  "name": "small", "seed": 4,
  "system": {"name": "example212", "params": {"a": 1.0, "b": 1.1, "r": 0.4}},
  "functional": {"name": "V212", "params": {"c": 1.5, "unchecked": true}},
  "integrator": {"grid_step": 0.04},
  "checks": [
    {"type": "hypotheses", "samples": 50},
    {"type": "theorem", "form": "uniform_restricted", "histories": 10, "s_count": 10, "times": [0.4]},
    {"type": "dplus", "trajectories": 4, "horizon": 2.0}
  ]
})";

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("parse errors carry line and column") {
  try {
    parse_scenario("{\n  \"seed\": 1,\n  \"system\": {\"name\": \"x\" \"params\": 1}\n}", "bad.json");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("bad.json:3:", 0) == 0);
  }
  CHECK_THROWS_AS(parse_scenario(R"({"system": {"name": "example212"}, "checks": []})", "s"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"seed": 1, "system": {"name": "example212"}})", "s"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"seed": 1, "system": {"name": "example212"}, "checks": [{}]})", "s"),
                  ConfigError);
}

TEST_CASE("grid step must divide the delay span") {
  const Scenario sc = parse_scenario(
      R"({"seed": 1, "system": {"name": "example212"}, "integrator": {"grid_step": 0.03}, "checks": []})", "s");
  RunOptions o;
  o.write = false;
  CHECK_THROWS_AS(run_scenario(sc, o), ConfigError);
  o.grid_step = 0.05;
  CHECK(run_scenario(sc, o).exit_code == 0);
}

TEST_CASE("unknown names are configuration errors") {
  RunOptions o;
  o.write = false;
  CHECK_THROWS_AS(run_scenario(parse_scenario(R"({"seed": 1, "system": {"name": "nope"}, "checks": []})", "s"), o),
                  ConfigError);
  CHECK_THROWS_AS(
      run_scenario(parse_scenario(R"({"seed": 1, "system": {"name": "example212"}, "checks": [{"type": "zap"}]})", "s"),
                   o),
      ConfigError);
  CHECK_THROWS_AS(run_scenario(parse_scenario(
                                   R"({"seed": 1, "system": {"name": "example212"}, "checks": [{"type": "dplus"}]})", "s"),
                               o),
                  ConfigError);
}

TEST_CASE("empty check list gives a valid passing report") {
  RunOptions o;
  o.write = false;
  const RunResult r = run_scenario(parse_scenario(R"({"seed": 1, "system": {"name": "example213"}, "checks": []})", "s"), o);
  CHECK(r.exit_code == 0);
  CHECK(r.report_json.at("checks").empty());
  CHECK(r.report_json.at("schema_version") == 1);
}

TEST_CASE("json output is canonical") {
  const json j = {{"b", 0.1}, {"a", {1, 2, 3}}, {"c", std::numeric_limits<double>::infinity()}, {"d", NAN}};
  const std::string s = dump_json(j);
  CHECK(s == dump_json(json::parse(dump_json(j))) );
  CHECK(s.find("\"a\"") < s.find("\"b\""));
  CHECK(s.find("0.10000000000000001") != std::string::npos);
  CHECK(s.find("\"inf\"") != std::string::npos);
  CHECK(s.find("\"nan\"") != std::string::npos);
  CHECK(dump_json(j) == s);
}

TEST_CASE("failing run writes witnesses that replay exactly") {
  const auto dir = std::filesystem::temp_directory_path() / "rfdelyap_harness_test";
  std::filesystem::remove_all(dir);
  const Scenario sc = parse_scenario(kSmall, "small.json");
  RunOptions o;
  o.out = (dir / "a").string();
  const RunResult r = run_scenario(sc, o);
  CHECK(r.exit_code == 1);
  const std::string summary = slurp(dir / "a" / "summary.txt");
  CHECK(summary.find("replay: rfde-lyap replay small.json") != std::string::npos);
  std::size_t witnesses = 0;
  for (std::size_t i = 0; i < r.report.checks.size(); ++i) {
    const auto& c = r.report.checks[i];
    if (c.passed) continue;
    const auto path = dir / "a" / ("witness_" + std::to_string(i) + ".json");
    REQUIRE(std::filesystem::exists(path));
    const ReplayResult rr = replay_scenario_witness(sc, json::parse(slurp(path)), o);
    CHECK(rr.reproduced);
    CHECK(rr.failing);
    ++witnesses;
  }
  CHECK(witnesses >= 1);

  o.out = (dir / "b").string();
  run_scenario(sc, o);
  CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("seed override changes the sample") {
  const Scenario sc = parse_scenario(kSmall, "small.json");
  RunOptions o;
  o.write = false;
  const std::string a = dump_json(run_scenario(sc, o).report_json);
  o.seed = 99;
  CHECK(dump_json(run_scenario(sc, o).report_json) != a);
}

TEST_CASE("bundled scenarios parse") {
  for (const char* n : {"example212", "example213", "sampled_feedback", "converse"})
    CHECK_NOTHROW(load_scenario(std::string(RFDELYAP_SCENARIO_DIR) + "/" + n + ".json"));
}

}
