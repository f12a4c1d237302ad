// Integration tests that drive the installed command-line binary, located
// via ECONSIM_BIN. Fixture configs are found via ECONSIM_FIXTURES.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

std::string bin_path() {
  const char* bin = std::getenv("ECONSIM_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "ECONSIM_BIN must point at the CLI binary");
  return bin;
}

std::string fixtures_path() {
  const char* dir = std::getenv("ECONSIM_FIXTURES");
  REQUIRE_MESSAGE(dir != nullptr, "ECONSIM_FIXTURES must point at tests/fixtures");
  return dir;
}

std::string configs_path() { return fixtures_path() + "/../../configs"; }

int run_cli(const std::string& args) {
  const std::string cmd = bin_path() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: " << path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::json read_json(const fs::path& path) {
  return nlohmann::json::parse(slurp(path));
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("econsim_cli_" + tag);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("identical config and seed give byte-identical outputs") {
  const std::string config = configs_path() + "/e1_small.toml";
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  REQUIRE(run_cli("simulate --config " + config + " --seed 7 --out " + a.string()) == 0);
  REQUIRE(run_cli("simulate --config " + config + " --seed 7 --out " + b.string()) == 0);

  for (const char* name : {"macro.csv", "households_0.csv", "households_25.csv",
                           "households_50.csv", "firms_0.csv"}) {
    CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name);
  }
  // manifests agree on digest and recorded outputs (wall time may differ)
  const nlohmann::json ma = read_json(a / "manifest.json");
  const nlohmann::json mb = read_json(b / "manifest.json");
  CHECK(ma["config_digest"] == mb["config_digest"]);
  CHECK(ma["outputs"] == mb["outputs"]);
  CHECK(ma["status"] == "ok");

  // a different seed changes the data
  const fs::path c = fresh_dir("det_c");
  REQUIRE(run_cli("simulate --config " + config + " --seed 8 --out " + c.string()) == 0);
  CHECK(slurp(a / "macro.csv") != slurp(c / "macro.csv"));
}

TEST_CASE("the symmetric equilibrium reports a zero gap through the CLI") {
  const fs::path out = fresh_dir("ge_sym");
  REQUIRE(run_cli("ge-example --config " + configs_path() + "/ge_symmetric.toml --out " +
                  out.string()) == 0);
  const nlohmann::json sol = read_json(out / "solution.json");
  CHECK(std::abs(sol["arbitrage_gap"].get<double>()) < 1e-10);
  CHECK(sol["residual_norm"].get<double>() < 1e-10);
  CHECK(fs::exists(out / "solution.txt"));
}

TEST_CASE("the synthetic fixture regresses to slope one through the CLI") {
  const fs::path out = fresh_dir("emp_fix");
  REQUIRE(run_cli("empirical --config " + fixtures_path() + "/empirical_files.toml --out " +
                  out.string()) == 0);
  const nlohmann::json rep = read_json(out / "report.json");
  CHECK(std::abs(rep["correlation"].get<double>() - 1.0) <= 1e-9);
  CHECK(std::abs(rep["slope"].get<double>() - 1.0) <= 1e-9);
  CHECK(std::abs(rep["intercept"].get<double>()) <= 1e-9);
  CHECK(fs::exists(out / "plot_data.csv"));

  // empirical runs are deterministic end to end
  const fs::path again = fresh_dir("emp_fix2");
  REQUIRE(run_cli("empirical --config " + fixtures_path() + "/empirical_files.toml --out " +
                  again.string()) == 0);
  CHECK(slurp(out / "panel.csv") == slurp(again / "panel.csv"));
  CHECK(slurp(out / "report.json") == slurp(again / "report.json"));
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("simulate") == 1);                             // missing --config
  CHECK(run_cli("simulate --config /nonexistent.toml") == 1);  // unreadable config
  CHECK(run_cli("nonsense") == 1);
}

TEST_CASE("solver failures exit with code 2 and leave no partial data") {
  // An unreachable epsilon makes the partition fail after the search budget.
  const std::string config = fixtures_path() + "/partition_unreachable.toml";
  const fs::path out = fresh_dir("part_fail");
  CHECK(run_cli("partition --config " + config + " --out " + out.string()) == 2);
  const nlohmann::json manifest = read_json(out / "manifest.json");
  CHECK(manifest["status"] == "failed");
  // only the manifest may exist
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(out)) {
    ++files;
    CHECK(entry.path().filename() == "manifest.json");
  }
  CHECK(files == 1);
}

TEST_CASE("validation failures exit with code 3") {
  const std::string config = fixtures_path() + "/invalid_state.toml";
  const fs::path out = fresh_dir("invalid");
  CHECK(run_cli("simulate --config " + config + " --out " + out.string()) == 3);
  CHECK(read_json(out / "manifest.json")["status"] == "failed");
}

TEST_CASE("json format emits the same tables as json records") {
  const fs::path out = fresh_dir("json_fmt");
  REQUIRE(run_cli("simulate --config " + configs_path() + "/e1_small.toml --format json " +
                  "--out " + out.string()) == 0);
  const nlohmann::json macro = read_json(out / "macro.json");
  REQUIRE(macro.is_array());
  CHECK(macro.size() == 50);
  CHECK(macro[0].contains("R"));
  CHECK(macro[0].contains("p_x"));
}

TEST_CASE("selftest passes") { CHECK(run_cli("selftest") == 0); }
