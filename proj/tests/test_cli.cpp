#include <amp_sheet/cli.hpp>

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace amp_sheet;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("amp_sheet_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}
std::string write_config(const fs::path& dir, const std::string& body) {
  auto p = dir / "config.json";
  std::ofstream(p) << body;
  return p.string();
}
std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}
int run(std::vector<std::string> args) {
  std::ostringstream out, err;
  return cli::run(std::move(args), out, err);
}
nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }
}  // namespace

TEST_CASE("csv round trip", "[io]") {
  TorusGrid g(16);
  FieldSeries s;
  s.push_back(0.0, cos_mode(g, 1, 1.0 / 3.0));
  s.push_back(0.5, from_modes(g, {TrigMode{2, 0.1, -0.7}, TrigMode{5, 1e-9, 2.0}}));
  std::stringstream ss;
  io::write_series_csv(ss, s, {{"k", 1}});
  std::string text = ss.str();
  CHECK(text.rfind("# amp_sheet 0.1.0\n", 0) == 0);
  CHECK(text.find("# config {\"k\":1}") != std::string::npos);
  CHECK(text.find('\r') == std::string::npos);
  auto back = io::read_series_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back.time(1) == 0.5);
  for (size_t i = 0; i < 2; ++i) CHECK(max_coeff_diff(back[i], s[i]) < 1e-14);

  std::stringstream sp;
  io::write_spectrum_csv(sp, s[1], {});
  auto f = io::read_spectrum_csv(sp, g);
  CHECK(max_coeff_diff(f, s[1]) == 0.0);
  CHECK(io::fmt(0.1) == "0.10000000000000001");

  std::stringstream bad("t,x0,x1,x2,x3\n0,1,2\n");
  CHECK_THROWS_AS(io::read_series_csv(bad), InputShapeError);
}

TEST_CASE("config parsing is fail-closed", "[config]") {
  using nlohmann::json;
  CHECK_THROWS_AS(cli::parse_config(json{{"simm", 1}}), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json{{"sim", {{"grid_n", 32.5}}}}), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json{{"sim", {{"dealias", 1}}}}), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json{{"data", {{"phi0", {{{"k", 1}, {"c", 2}}}}}}}), ConfigError);
  auto c = cli::parse_config(json{{"sim", {{"grid_n", 32}}}});
  CHECK(c.sim.galerkin_N == 15);
  json full = cli::to_json(c);
  CHECK(cli::to_json(cli::parse_config(full)) == full);
  c.commutators.lemma = "nope";
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("command line errors", "[cli]") {
  auto d = scratch("errors");
  CHECK(run({"--help"}) == 0);
  CHECK(run({}) == 2);
  CHECK(run({"simulate", "--bogus"}) == 2);
  CHECK(run({"verify-estimates", "nonsense", "--output", d.string()}) == 2);
  CHECK(run({"simulate", "--config", write_config(d, "{\"sim\": {\"mu\": 1, \"extra\": 2}}")}) == 2);
  CHECK(run({"simulate", "--config", write_config(d, "{not json")}) == 2);
  CHECK(run({"simulate", "--config", (d / "missing.json").string()}) == 2);
  std::ofstream(d / "file") << "x";
  CHECK(run({"simulate", "--output", (d / "file" / "sub").string()}) == 2);
  CHECK(run({"simulate", "--jobs", "0"}) == 2);
}

TEST_CASE("simulate: zero data", "[cli]") {
  auto d = scratch("sim0");
  auto cfg = write_config(d, R"({"sim": {"grid_n": 16, "dt": 0.01, "t_final": 0.1}})");
  REQUIRE(run({"simulate", "--config", cfg, "--output", (d / "out").string(), "--quiet"}) == 0);
  auto s = io::read_series_csv((d / "out" / "trajectory.csv").string());
  CHECK(s.size() == 11);
  for (size_t i = 0; i < s.size(); ++i) CHECK(s[i].is_zero());
  auto m = read_json(d / "out" / "monitor.json");
  CHECK(m["version"] == version);
  CHECK(m["config"]["command"] == "simulate");
  CHECK(m["config"]["sim"]["grid_n"] == 16);
  CHECK(m["monitor"]["flags"].empty());
}

TEST_CASE("simulate: monitor crossing gives exit 3", "[cli]") {
  auto d = scratch("simflag");
  auto cfg = write_config(d, R"({"sim": {"grid_n": 32, "dt": 0.001, "t_final": 1.0},
                                 "data": {"phi1": [{"k": 1, "a": 0, "b": 5}]}})");
  CHECK(run({"simulate", "--config", cfg, "--output", d.string()}) == 3);
  auto m = read_json(d / "monitor.json");
  CHECK(m["aborted"] == true);
  CHECK(m["monitor"]["flags"][0]["type"] == flags::stability);
}

TEST_CASE("growth rates file", "[cli]") {
  auto d = scratch("growth");
  auto cfg = write_config(d, R"({"sim": {"mu": -1, "t_final": 2.0}, "growth": {"modes": [4, 8, 16]}})");
  REQUIRE(run({"growth", "--config", cfg, "--output", d.string()}) == 0);
  auto j = read_json(d / "growth.json");
  REQUIRE(j["rates"].size() == 3);
  for (const auto& r : j["rates"]) CHECK(r["rel_error"].get<double>() < 0.05);
  auto csv = slurp(d / "rates.csv");
  CHECK(csv.find("k,rate,expected,rel_error,defined\n4,") != std::string::npos);
}

TEST_CASE("verify-identities and determinism", "[cli]") {
  auto d = scratch("ident");
  auto cfg = write_config(d, R"({"identities": {"samples": 10, "n": 64}})");
  REQUIRE(run({"verify-identities", "--config", cfg, "--output", (d / "a").string(), "--seed", "17"}) == 0);
  REQUIRE(run({"verify-identities", "--config", cfg, "--output", (d / "b").string(), "--seed", "17", "--jobs", "3"}) ==
          0);
  auto a = slurp(d / "a" / "identities.json");
  CHECK(a == slurp(d / "b" / "identities.json"));
  auto j = nlohmann::json::parse(a);
  CHECK(j["identities"]["pass"] == true);
  CHECK(j["config"]["sim"]["seed"] == 17);
}

TEST_CASE("campaign commands", "[cli]") {
  auto d = scratch("camp");
  auto cfg = write_config(d, R"({"sim": {"grid_n": 32, "dt": 0.005, "delta": 0.5, "gamma": 2},
                                 "estimates": {"samples": 3, "steps": 400, "resolutions": [32, 64]},
                                 "commutators": {"samples": 10, "resolutions": [128, 256]},
                                 "data": {"phi0": [{"k": 1, "a": 0.1}]}})");
  for (std::string sel : {"energy", "tame", "phitt", "der2", "forcing"}) {
    INFO(sel);
    CHECK(run({"verify-estimates", sel, "--config", cfg, "--output", d.string()}) == 0);
    auto lines = slurp(d / ("estimates_" + sel + ".jsonl"));
    auto first = nlohmann::json::parse(lines.substr(0, lines.find('\n')));
    CHECK(first["type"] == "header");
    CHECK(first["config"]["selector"] == sel);
    CHECK(slurp(d / ("estimates_" + sel + "_summary.csv")).find("estimate_id,params,sup_ratio,resolution_drift,pass") !=
          std::string::npos);
  }
  CHECK(run({"commutator-constants", "--lemma", "A5", "--config", cfg, "--output", d.string()}) == 0);
  auto summary = slurp(d / "commutators_summary.csv");
  CHECK(summary.find("lemmaA5,") != std::string::npos);
  CHECK(summary.find("lemmaA2,") == std::string::npos);
  CHECK(run({"commutator-constants", "--lemma", "B1", "--config", cfg, "--output", d.string()}) == 2);
}

TEST_CASE("nash-moser command", "[cli]") {
  auto d = scratch("nm");
  auto cfg = write_config(d, R"({"sim": {"grid_n": 32, "dt": 0.01, "t_final": 0.5, "delta": 0.9},
                                 "data": {"phi0": [{"k": 1, "a": 0.01}]}})");
  REQUIRE(run({"nash-moser", "--config", cfg, "--output", d.string()}) == 0);
  auto j = read_json(d / "iteration.json");
  CHECK(j["status"] == "converged");
  CHECK(j["report"]["residual_Y2"].back().get<double>() < 1e-8);
  auto sol = io::read_series_csv((d / "solution.csv").string());
  CHECK(std::abs(sol[0][1].real() - 0.01 * std::numbers::pi) < 1e-15);

  auto bad = write_config(d, R"({"sim": {"grid_n": 32, "dt": 0.01, "t_final": 1.0, "delta": 0.9},
                                 "data": {"phi1": [{"k": 1, "a": 0, "b": 0.5}]}})");
  CHECK(run({"nash-moser", "--config", bad, "--output", d.string()}) == 3);
  CHECK(read_json(d / "iteration.json")["status"] == "aborted");
}

TEST_CASE("output directory from the environment", "[cli]") {
  auto d = scratch("env");
  auto cfg = write_config(d, R"({"sim": {"grid_n": 16, "dt": 0.01, "t_final": 0.05}})");
  ::setenv("AMP_SHEET_OUTPUT", (d / "fromenv").string().c_str(), 1);
  CHECK(run({"simulate", "--config", cfg}) == 0);
  ::unsetenv("AMP_SHEET_OUTPUT");
  CHECK(fs::exists(d / "fromenv" / "trajectory.csv"));
}
