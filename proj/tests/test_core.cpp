#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "econsim/rng.hpp"
#include "econsim/solver.hpp"
#include "econsim/state.hpp"
#include "econsim/summation.hpp"
#include "testutil.hpp"

using namespace econsim;

namespace {

// One household, one firm, one good; wage 10 at price level 1.
EconomyState single_agent_state(double mu = 0.2) {
  auto in = testutil::make_inputs(0.05, {0.5}, {mu}, {10.0}, {1.0},
                                  testutil::repeated_rows(1, {1.0}), {1.0},
                                  testutil::column_matrix({10.0}));
  return make_state(0, {100.0}, {100.0}, in, 1.0);
}

}  // namespace

TEST_CASE("aggregate sums the single-agent state") {
  EconomyState st = single_agent_state();
  Aggregates agg = aggregate(st);
  CHECK(agg.net_assets == doctest::Approx(100.0));
  CHECK(agg.labor_income == doctest::Approx(10.0));
  CHECK(agg.debt == doctest::Approx(20.0));
  // consumption from supplied incomes: (1 - 0.5) * 30
  Aggregates with_c = aggregate(st, std::vector<double>{30.0});
  CHECK(with_c.consumption == doctest::Approx(15.0));
}

TEST_CASE("aggregate agrees across the two wealth totals") {
  auto in = testutil::make_inputs(0.04, {0.3, 0.3}, {0.0, 0.0}, {1.0, 1.0}, {1.0, 1.0},
                                  testutil::repeated_rows(2, {0.7, 0.3}), {1.0},
                                  testutil::column_matrix({1.0, 1.0}));
  EconomyState st = make_state(0, {60.0, 40.0}, {70.0, 30.0}, in, 1.0);
  Aggregates agg = aggregate(st);
  CHECK(agg.net_assets == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("inconsistent wealth splits are rejected and flagged") {
  auto in = testutil::make_inputs(0.04, {0.3}, {0.0}, {1.0}, {1.0},
                                  testutil::repeated_rows(1, {1.0}), {1.0},
                                  testutil::column_matrix({1.0}));
  CHECK_THROWS_AS(make_state(0, {90.0}, {100.0}, in, 1.0), ValidationError);

  EconomyState st = single_agent_state();
  st.households.net_assets[0] = 90.0;
  st.households.debts[0] = 0.2 * 90.0;
  CHECK_THROWS_AS(aggregate(st), AggregationMismatchError);
  auto violations = validate(st);
  REQUIRE(!violations.empty());
  const bool found = std::any_of(violations.begin(), violations.end(), [](const auto& v) {
    return v.invariant == "dual_aggregation";
  });
  CHECK(found);
}

TEST_CASE("household assets built as firm-share claims aggregate both ways") {
  // Distribute each firm's equity across households, then check that the
  // two totals coincide to near machine precision.
  const std::size_t n = 1000, f = 37;
  Rng rng(20240811);
  std::vector<double> equity(f);
  for (double& a : equity) a = rng.lognormal(1.0, 0.8);

  Matrix ownership(n, f, 0.0);
  for (std::size_t j = 0; j < f; ++j) {
    std::vector<double> raw(n);
    double total = 0.0;
    for (double& x : raw) {
      x = rng.uniform(0.0, 1.0);
      total += x;
    }
    for (std::size_t i = 0; i < n; ++i) ownership.at(i, j) = equity[j] * raw[i] / total;
  }
  std::vector<double> assets(n);
  Matrix weights(n, f);
  for (std::size_t i = 0; i < n; ++i) {
    assets[i] = pairwise_sum(ownership.row(i));
    for (std::size_t j = 0; j < f; ++j) weights.at(i, j) = ownership.at(i, j) / assets[i];
  }

  auto in = testutil::make_inputs(0.04, std::vector<double>(n, 0.3),
                                  std::vector<double>(n, 0.0), std::vector<double>(n, 1.0),
                                  std::vector<double>(f, 1.0), std::move(weights), {1.0},
                                  testutil::column_matrix(std::vector<double>(n, 1.0)));
  EconomyState st = make_state(0, std::move(assets), std::move(equity), in, 1.0);
  Aggregates agg = aggregate(st);
  const double household_side = pairwise_sum(st.households.net_assets);
  CHECK(std::abs(household_side - agg.net_assets) <= 1e-12 * agg.net_assets);
  CHECK(validate(st).empty());
}

TEST_CASE("validate passes a consistent state and reports nothing") {
  CHECK(validate(single_agent_state()).empty());
}

TEST_CASE("validate names a bad portfolio row") {
  EconomyState st = single_agent_state();
  Matrix bad = *st.households.portfolio_weights;
  bad.at(0, 0) = 0.9;
  st.households.portfolio_weights = std::make_shared<const Matrix>(std::move(bad));
  auto violations = validate(st);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].invariant == "portfolio_row_sum");
  CHECK(violations[0].index == 0);
  CHECK(violations[0].residual == doctest::Approx(-0.1));
}

TEST_CASE("validate reports a beta-normalization violation with its residual") {
  EconomyState st = single_agent_state();
  st.firms.betas[0] = 1.05;
  auto violations = validate(st);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].invariant == "beta_normalization");
  CHECK(violations[0].residual == doctest::Approx(0.05));
}

TEST_CASE("validate reports a broken debt identity") {
  EconomyState st = single_agent_state();
  st.households.debts[0] = 25.0;  // should be 20
  auto violations = validate(st);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].invariant == "debt_identity");
}

TEST_CASE("validate pins the numeraire price to one") {
  EconomyState st = single_agent_state();
  st.goods.relative_prices = std::make_shared<const std::vector<double>>(
      std::vector<double>{1.0000001});
  auto violations = validate(st);
  REQUIRE(!violations.empty());
  CHECK(violations[0].invariant == "numeraire_price");
}

TEST_CASE("make_state derives debts from leverage exactly") {
  Rng rng(7);
  const std::size_t n = 200;
  std::vector<double> assets(n), mu(n), s(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    assets[i] = rng.lognormal(0.0, 1.0);
    mu[i] = rng.uniform(0.0, 0.95);
    s[i] = rng.uniform(0.0, 0.9);
    w[i] = rng.uniform(0.0, 2.0);
  }
  const double total = pairwise_sum(assets);
  auto in = testutil::make_inputs(0.04, s, mu, w, {1.0},
                                  testutil::repeated_rows(n, {1.0}), {1.0},
                                  testutil::column_matrix(std::vector<double>(n, 1.0)));
  EconomyState st = make_state(0, assets, {total}, in, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(st.households.debts[i] == mu[i] * st.households.net_assets[i]);
  }
  CHECK(validate(st).empty());
}

TEST_CASE("normalize_betas makes the value-weighted mean one") {
  std::vector<double> equity = {70.0, 30.0};
  std::vector<double> betas = {1.4, 0.7};
  const double factor = normalize_betas(equity, betas);
  CHECK(factor == doctest::Approx(0.7 * 1.4 + 0.3 * 0.7));
  CHECK(weighted_beta_mean(equity, betas) == doctest::Approx(1.0).epsilon(1e-14));
}
