#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>

#include "econsim/config.hpp"
#include "econsim/csv.hpp"
#include "econsim/exogenous.hpp"
#include "econsim/manifest.hpp"
#include "econsim/rng.hpp"

using namespace econsim;

TEST_CASE("config parser reads sections, arrays and inline tables") {
  const char* text = R"(
# a comment
title = "run one"
[solver]
tolerance = 1e-10
max_iterations = 200
lagged = false
[exogenous]
loan_rate = 0.04
rates = [0.1, 0.2, 0.3]
saving = {dist = "uniform", low = 0.1, high = 0.4, seed = 7}
[exogenous.nested]
value = -3
)";
  ConfigValue root = parse_config_text(text, "test");
  CHECK(root.get_string("title", "") == "run one");
  CHECK(root.at_required("solver.tolerance").as_double() == doctest::Approx(1e-10));
  CHECK(root.get_int("solver.max_iterations", 0) == 200);
  CHECK(root.get_bool("solver.lagged", true) == false);
  CHECK(root.at("exogenous.rates").as_double_array() ==
        std::vector<double>{0.1, 0.2, 0.3});
  CHECK(root.get_string("exogenous.saving.dist", "") == "uniform");
  CHECK(root.get_double("exogenous.saving.low", 0.0) == doctest::Approx(0.1));
  CHECK(root.get_int("exogenous.nested.value", 0) == -3);
  CHECK(!root.has("missing.key"));
}

TEST_CASE("config errors carry the line and path") {
  try {
    parse_config_text("a = 1\na = 2\n", "dup");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("dup:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("x = [1, 2", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("x 3", "t"), ConfigError);
  try {
    parse_config_text("[a]\nb = 2\n", "t").at_required("a.c");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("a.c") != std::string::npos);
  }
}

TEST_CASE("type mismatches name the offending key") {
  ConfigValue root = parse_config_text("x = \"text\"\n", "t");
  try {
    root.at("x").as_double();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("'x'") != std::string::npos);
  }
}

TEST_CASE("doubles format to the shortest exact representation") {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.normal(0.0, 1e3) * std::pow(10.0, int(rng.uniform(-12, 12)));
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("csv matrices round-trip through files") {
  auto dir = std::filesystem::temp_directory_path() / "econsim_test_csv";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "m.csv").string();
  {
    std::ofstream out(path);
    out << "1.5,2.25\r\n-3,4e-3\n\n";
  }
  Matrix m = read_csv_matrix(path);
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 2);
  CHECK(m.at(0, 0) == 1.5);
  CHECK(m.at(0, 1) == 2.25);
  CHECK(m.at(1, 0) == -3.0);
  CHECK(m.at(1, 1) == 4e-3);

  CHECK_THROWS_AS(read_csv("/nonexistent/file.csv"), IoError);
}

TEST_CASE("field sources cover constants, tables and seeded rules") {
  auto dir = std::filesystem::temp_directory_path() / "econsim_test_fields";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "saving_table.csv");
    out << "0.1,0.2,0.3\n0.15,0.25,0.35\n";  // two periods, three households
  }
  const std::string text = "per_period_csv = {csv = \"saving_table.csv\", per_period = true}\n"
                           "rule = {dist = \"uniform\", low = 0.2, high = 0.4, seed = 5}\n"
                           "redrawn = {dist = \"uniform\", low = 0.2, high = 0.4, seed = 5, per_period = true}\n"
                           "loan_table = [0.01, 0.02, 0.03]\n";
  const ConfigValue root = parse_config_text(text, "fields");
  const Rng rng(99);

  FieldSource table = FieldSource::from_config(root.at("per_period_csv"),
                                               FieldSource::Target::SavingRate, dir.string());
  CHECK(table.table_periods() == 2);
  CHECK((*table.vector_at(0, 3, rng, "s"))[1] == doctest::Approx(0.2));
  CHECK((*table.vector_at(1, 3, rng, "s"))[2] == doctest::Approx(0.35));
  CHECK_THROWS_AS(table.vector_at(2, 3, rng, "s"), ValidationError);

  FieldSource rule = FieldSource::from_config(root.at("rule"),
                                              FieldSource::Target::SavingRate, "");
  auto fixed_a = rule.vector_at(0, 4, rng, "s");
  auto fixed_b = rule.vector_at(7, 4, rng, "s");
  CHECK(fixed_a.get() == fixed_b.get());  // drawn once, shared thereafter

  FieldSource redrawn = FieldSource::from_config(root.at("redrawn"),
                                                 FieldSource::Target::SavingRate, "");
  auto t0 = redrawn.vector_at(0, 4, rng, "s");
  auto t1 = redrawn.vector_at(1, 4, rng, "s");
  auto t0_again = redrawn.vector_at(0, 4, rng, "s");
  CHECK((*t0)[0] != (*t1)[0]);
  CHECK((*t0)[0] == (*t0_again)[0]);  // per-period streams are reproducible
  for (double x : *t0) {
    CHECK(x >= 0.2);
    CHECK(x < 0.4);
  }

  FieldSource loan = FieldSource::from_config(root.at("loan_table"),
                                              FieldSource::Target::Scalar, "");
  CHECK(loan.table_periods() == 3);
  CHECK(loan.scalar_at(2, rng, "loan") == doctest::Approx(0.03));
}

TEST_CASE("digests are stable and sensitive") {
  const std::string a = "abc";
  const std::string b = "abd";
  CHECK(fnv1a64(a.data(), a.size()) == fnv1a64(a.data(), a.size()));
  CHECK(fnv1a64(a.data(), a.size()) != fnv1a64(b.data(), b.size()));
  CHECK(digest_hex(fnv1a64(a.data(), a.size())).size() == 16);
}
