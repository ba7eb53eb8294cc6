#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "martsim/config.hpp"
#include "martsim/parallel.hpp"
#include "martsim/runner.hpp"

using namespace martsim;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const std::filesystem::path& out) {
  std::stringstream ss(
      "experiment = determinism\n"
      "model = linear-iid\n"
      "coefficients = geometric\n"
      "rho = 0.5\n"
      "q = 2\n"
      "max_lag = 3\n"
      "lengths = 4,16\n"
      "replicates = 400\n"
      "inner = 16\n"
      "paths = 64\n"
      "dyadic_levels = 3\n"
      "clt_length = 1024\n"
      "clt_paths = 1000\n"
      "seed = 9\n"
      "checks = measures,bounds,maximal,rates,clt,conditions\n");
  auto cfg = ExperimentConfig::parse(ss, "inline");
  cfg.output = out.string();
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MARTSIM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

}  // namespace

TEST_CASE("identical configs produce byte-identical reports at any worker count") {
  const auto base = std::filesystem::temp_directory_path() / "martsim_cli_test";
  std::filesystem::remove_all(base);

  auto cfg1 = small_config(base / "run1");
  auto cfg2 = small_config(base / "run2");
  const auto r1 = run_experiment(cfg1);
  set_worker_count(1);
  const auto r2 = run_experiment(cfg2);
  set_worker_count(0);

  REQUIRE(r1.files == r2.files);
  REQUIRE(!r1.files.empty());
  for (const auto& f : r1.files) {
    CAPTURE(f);
    CHECK(slurp(base / "run1" / f) == slurp(base / "run2" / f));
  }
  std::filesystem::remove_all(base);
}

TEST_CASE("every requested check produces at least one row") {
  const auto base = std::filesystem::temp_directory_path() / "martsim_rows_test";
  std::filesystem::remove_all(base);
  auto cfg = small_config(base);
  const auto r = run_experiment(cfg);
  for (const auto& check : cfg.checks) {
    const auto rows = read_report(base / (check + ".csv"));
    CAPTURE(check);
    CHECK(!rows.empty());
  }
  std::filesystem::remove_all(base);
}

TEST_CASE("condition rows carry the expected verdicts") {
  const auto base = std::filesystem::temp_directory_path() / "martsim_cond_test";
  std::filesystem::remove_all(base);

  // long-range coefficients: summability fails
  std::stringstream ss(
      "model = linear-iid\n"
      "coefficients = polynomial\n"
      "beta = 0.8\n"
      "lag = 64\n"
      "q = 2\n"
      "checks = conditions\n");
  auto cfg = ExperimentConfig::parse(ss, "inline");
  cfg.output = (base / "lr").string();
  run_experiment(cfg);
  const auto rows = read_report(base / "lr" / "conditions.csv");
  bool saw_fail = false;
  for (const auto& r : rows) {
    if (r.check == "condition:theta-summable") {
      CHECK(r.verdict == "fail");
      saw_fail = true;
    }
  }
  CHECK(saw_fail);
  std::filesystem::remove_all(base);
}

TEST_CASE("cli runs a config and the report command aggregates verdicts") {
  const auto base = std::filesystem::temp_directory_path() / "martsim_cli_exec";
  std::filesystem::remove_all(base);
  std::filesystem::create_directories(base);
  const auto cfg_path = base / "demo.cfg";
  {
    std::ofstream os(cfg_path);
    os << "experiment = cli-demo\n"
          "model = linear-iid\n"
          "coefficients = geometric\n"
          "rho = 0.5\n"
          "q = 2\n"
          "max_lag = 2\n"
          "lengths = 4,16\n"
          "replicates = 300\n"
          "inner = 8\n"
          "paths = 32\n"
          "seed = 5\n"
          "output = " << (base / "out").string() << "\n"
          "checks = conditions\n";
  }
  CHECK(run_cli("run " + cfg_path.string()) == 0);
  CHECK(std::filesystem::exists(base / "out" / "conditions.csv"));
  // all-pass conditions for the geometric model: report exits 0
  CHECK(run_cli("report " + (base / "out").string()) == 0);

  // --jobs must not change bytes
  const std::string first = slurp(base / "out" / "conditions.csv");
  CHECK(run_cli("run " + cfg_path.string() + " --jobs 1") == 0);
  CHECK(slurp(base / "out" / "conditions.csv") == first);
  CHECK(run_cli("run " + cfg_path.string() + " --jobs 3") == 0);
  CHECK(slurp(base / "out" / "conditions.csv") == first);

  // seed override changes the seed column
  CHECK(run_cli("run " + cfg_path.string() + " --seed 77") == 0);
  CHECK(slurp(base / "out" / "conditions.csv") != first);

  // failing conditions drive a nonzero report exit
  const auto cfg_fail = base / "fail.cfg";
  {
    std::ofstream os(cfg_fail);
    os << "model = linear-iid\n"
          "coefficients = polynomial\n"
          "beta = 0.8\n"
          "lag = 64\n"
          "q = 2\n"
          "output = " << (base / "out_fail").string() << "\n"
          "checks = conditions\n";
  }
  CHECK(run_cli("run " + cfg_fail.string()) == 0);
  CHECK(run_cli("report " + (base / "out_fail").string()) != 0);

  // invalid config: diagnostic exit
  const auto cfg_bad = base / "bad.cfg";
  {
    std::ofstream os(cfg_bad);
    os << "model = nonsense\n";
  }
  CHECK(run_cli("run " + cfg_bad.string()) != 0);
  std::filesystem::remove_all(base);
}
