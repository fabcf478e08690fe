#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gw/cli.hpp"
#include "gw/config.hpp"
#include "gw/errors.hpp"

using namespace gw;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("gw_cli_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kBinaryConfig = R"({
  "source": {"symbols": ["0", "1"], "pmf": [0.75, 0.25]},
  "distortion": {"matrix": [[0, 1], [1, 0]], "delta": 0},
  "rho": [1],
  "strategy": {"kind": "tilted"}
})";

}  // namespace

TEST_CASE("config parsing reports field-level errors") {
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"distortion": {}})"),
                       doctest::Contains("source"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"source": {"pmf": [0.6, 0.6]}, "distortion": {"matrix": [[0,1],[1,0]], "delta": 0}})"),
      doctest::Contains("source.pmf"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"source": {"pmf": [0.5, 0.5]}, "distortion": {"matrix": [[0,1]], "delta": 0}})"),
      doctest::Contains("distortion.matrix"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"source": {"pmf": [0.5, 0.5]}, "distortion": {"matrix": [[0,"1/0"],[1,0]], "delta": 0}})"),
      doctest::Contains("denominator"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"source": {"pmf": [0.5, 0.5]}, "distortion": {"matrix": [[0,1],[1,0]], "delta": 0}, "rho": [-1]})"),
      doctest::Contains("rho"), ConfigError);
  // empty ball: delta below every entry of a row
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"source": {"pmf": [0.5, 0.5]}, "distortion": {"matrix": [[5,5],[0,1]], "delta": 1}})"),
      doctest::Contains("empty distortion ball"), ConfigError);
}

TEST_CASE("rational entries produce an exact table") {
  const ProblemConfig cfg = parse_config(R"({
    "source": {"pmf": [0.5, 0.5]},
    "distortion": {"matrix": [[0, "1/3"], ["1/3", 0]], "delta": "1/9"},
    "rho": [1]
  })");
  REQUIRE(cfg.model.exact.has_value());
  CHECK(cfg.model.exact->den == 3);
  CHECK(cfg.model.exact->delta_num == 1);
  CHECK(cfg.model.exact->delta_den == 9);
  CHECK(cfg.model.d(0, 1) == doctest::Approx(1.0 / 3.0));

  const ProblemConfig mixed = parse_config(R"({
    "source": {"pmf": [0.5, 0.5]},
    "distortion": {"matrix": [[0, 0.333], [0.333, 0]], "delta": "1/9"},
    "rho": [1]
  })");
  CHECK_FALSE(mixed.model.exact.has_value());
}

TEST_CASE("strategy resolution") {
  ProblemConfig cfg = parse_config(kBinaryConfig);
  const Strategy tilted = resolve_strategy(cfg, 1.0);
  CHECK(tilted.pmf[0] == doctest::Approx(0.63397).epsilon(1e-4));
  cfg.strategy_kind = ProblemConfig::StrategyKind::Uniform;
  CHECK(resolve_strategy(cfg, 1.0).pmf[0] == doctest::Approx(0.5));
  cfg.strategy_kind = ProblemConfig::StrategyKind::Optimize;
  const Strategy opt = resolve_strategy(cfg, 1.0);
  CHECK(opt.pmf[0] == doctest::Approx(tilted.pmf[0]).epsilon(1e-3));
}

TEST_CASE("oneshot command writes parseable reports with the documented columns") {
  const fs::path dir = fresh_dir("oneshot");
  const ProblemConfig cfg = parse_config(kBinaryConfig);
  CHECK(cli::cmd_oneshot(cfg, dir.string()) == cli::kOk);

  const std::string csv = slurp(dir / "oneshot_report.csv");
  std::stringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "rho,symbol,q,v_rho,g_rho,g_lower,g_upper");
  int rows = 0;
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ++rows;
    std::stringstream cells(line);
    std::string cell;
    int ncells = 0;
    while (std::getline(cells, cell, ',')) ++ncells;
    CHECK(ncells == 7);
  }
  CHECK(rows == 2);

  const nlohmann::json summary = nlohmann::json::parse(slurp(dir / "oneshot_summary.json"));
  CHECK(summary.at("per_rho").size() == 1);
  CHECK(summary.at("per_rho")[0].at("expected_v").get<double>() ==
        doctest::Approx(1.86603).epsilon(1e-5));
  CHECK(summary.at("per_rho")[0].at("bound_holds").get<bool>());
}

TEST_CASE("oneshot surfaces an unreachable ball as exit 2 naming the symbol") {
  const fs::path dir = fresh_dir("oneshot_zero");
  const ProblemConfig cfg = parse_config(R"({
    "source": {"symbols": ["a", "b"], "pmf": [0.5, 0.5]},
    "distortion": {"matrix": [[0, 1], [1, 0]], "delta": 0},
    "rho": [1],
    "strategy": {"kind": "explicit", "pmf": [1.0, 0.0]}
  })");
  CHECK(cli::cmd_oneshot(cfg, dir.string()) == cli::kInfiniteMoment);
  const nlohmann::json summary = nlohmann::json::parse(slurp(dir / "oneshot_summary.json"));
  CHECK(summary.at("error_symbol").get<std::string>() == "b");
}

TEST_CASE("oracle command enforces the instance cap with exit 4") {
  const fs::path dir = fresh_dir("oracle_cap");
  ProblemConfig cfg = parse_config(kBinaryConfig);
  cfg.strategy_kind = ProblemConfig::StrategyKind::Uniform;
  cfg.model.delta = 0.25;
  cfg.model.exact.reset();
  CHECK(cli::cmd_oracle(cfg, dir.string(), {200}) == cli::kInstanceTooLarge);
}

TEST_CASE("exponent command golden file") {
  const fs::path dir = fresh_dir("exponent_golden");
  const ProblemConfig cfg = load_config(std::string(GW_TEST_DATA_DIR) + "/exponent_3sym.json");
  CHECK(cli::cmd_exponent(cfg, dir.string()) == cli::kOk);
  const nlohmann::json got = nlohmann::json::parse(slurp(dir / "exponent_summary.json"));
  const nlohmann::json want =
      nlohmann::json::parse(slurp(std::string(GW_TEST_DATA_DIR) + "/exponent_3sym_expected.json"));
  for (std::size_t i = 0; i < want.at("per_rho").size(); ++i) {
    for (const char* key : {"rho", "e_iid", "e_sync", "penalty"}) {
      CHECK(got.at("per_rho")[i].at(key).get<double>() ==
            doctest::Approx(want.at("per_rho")[i].at(key).get<double>()).epsilon(1e-9));
    }
  }
}

TEST_CASE("simulate command is deterministic for a fixed seed") {
  const fs::path a = fresh_dir("sim_a"), b = fresh_dir("sim_b");
  ProblemConfig cfg = parse_config(kBinaryConfig);
  cfg.strategy_kind = ProblemConfig::StrategyKind::Uniform;
  cfg.model.delta = 0.5;
  cfg.sim.trials = 20000;
  cfg.sim.n = 2;
  cfg.sim.master_seed = 424242;
  cfg.sim.rho_list = cfg.rho_list;
  CHECK(cli::cmd_simulate(cfg, a.string()) == cli::kOk);
  cfg.sim.workers = 4;
  CHECK(cli::cmd_simulate(cfg, b.string()) == cli::kOk);
  CHECK(slurp(a / "simulate_report.csv") == slurp(b / "simulate_report.csv"));
}

TEST_CASE("binary end-to-end smoke with exit codes") {
  const fs::path dir = fresh_dir("binary_smoke");
  const fs::path cfg_path = dir / "cfg.json";
  std::ofstream(cfg_path) << kBinaryConfig;

  const std::string base = std::string(GW_CLI_PATH);
  const auto run = [&](const std::string& args) {
    const int status = std::system((base + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run("oneshot --config " + cfg_path.string() + " --out " + dir.string()) == 0);
  CHECK(run("rd --config " + cfg_path.string() + " --out " + dir.string()) == 0);
  CHECK(run("oneshot --config " + (dir / "missing.json").string()) == 1);
  CHECK(fs::exists(dir / "oneshot_report.csv"));
  CHECK(fs::exists(dir / "rd_summary.json"));
}
