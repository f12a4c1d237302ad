#include <doctest.h>

#include <cmath>

#include "econsim/ge_example.hpp"
#include "testutil.hpp"

using namespace econsim;

namespace {

GEParams symmetric_params() {
  GEParams p;
  p.alpha = p.beta = 0.25;
  p.c2 = p.c3 = 1.2;
  p.theta2 = p.theta3 = 0.55;
  p.delta = 0.95;
  p.m1 = p.m2 = 1.0;
  p.e1 = p.e2 = 0.2;
  return p;
}

}  // namespace

TEST_CASE("parameter validation rejects malformed inputs") {
  GEParams p;
  p.alpha = 0.6;
  p.beta = 0.5;  // alpha + beta >= 1
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = GEParams{};
  p.theta2 = 1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = GEParams{};
  p.m2 = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("symmetric technologies price both capital goods alike") {
  GESolution sol = solve_ge(symmetric_params());
  CHECK(sol.residual_norm <= 1e-10);
  CHECK(std::abs(arbitrage_gap(sol)) <= 1e-10);
  CHECK(sol.period1.capital_price_1 ==
        doctest::Approx(sol.period1.capital_price_2).epsilon(1e-10));
  CHECK(sol.period1.capital_saved_1 ==
        doctest::Approx(sol.period1.capital_saved_2).epsilon(1e-9));
  CHECK(!sol.boundary_flag);
}

TEST_CASE("the asymmetric benchmark leaves a relative-price drift") {
  GESolution sol = solve_ge(GEParams{});
  CHECK(sol.residual_norm <= 1e-10);
  CHECK(!sol.boundary_flag);
  CHECK(std::abs(arbitrage_gap(sol)) > 1e-3);
  // values frozen from the grid-search oracle run
  CHECK(sol.period1.capital_saved_1 == doctest::Approx(0.059046).epsilon(5e-4));
  CHECK(sol.period1.capital_saved_2 == doctest::Approx(0.058434).epsilon(5e-4));
  CHECK(arbitrage_gap(sol) == doctest::Approx(-2.1987e-3).epsilon(5e-3));
  // the displayed system is rank-deficient by exactly one at the solution
  CHECK(sol.numerical_rank == 27);
}

TEST_CASE("every returned solution satisfies the displayed equations") {
  for (const GEParams& p : {GEParams{}, symmetric_params()}) {
    GESolution sol = solve_ge(p);
    auto res = ge_residuals(p, sol);
    for (double r : res) CHECK(std::abs(r) <= 1e-10);
    // labor clears and the stock-flow identities hold
    CHECK(sol.period1.labor_consumption + sol.period1.labor_capital_1 +
              sol.period1.labor_capital_2 ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.period2.capital_used_1 ==
          doctest::Approx(sol.period2.capital_output_1 + sol.period1.capital_saved_1)
              .epsilon(1e-10));
  }
}

TEST_CASE("household budgets close as an accounting identity") {
  GESolution sol = solve_ge(GEParams{});
  CHECK(std::abs(ge_budget_residual(GEParams{}, sol, 1)) <= 1e-9);
  CHECK(std::abs(ge_budget_residual(GEParams{}, sol, 2)) <= 1e-9);
}

TEST_CASE("scaling both money supplies moves prices, not quantities") {
  GEParams base;
  GEParams scaled = base;
  const double lambda = 2.0;
  scaled.m1 *= lambda;
  scaled.m2 *= lambda;
  GESolution a = solve_ge(base);
  GESolution b = solve_ge(scaled);

  CHECK(b.period1.consumption == doctest::Approx(a.period1.consumption).epsilon(1e-9));
  CHECK(b.period2.consumption == doctest::Approx(a.period2.consumption).epsilon(1e-9));
  CHECK(b.period1.capital_saved_1 ==
        doctest::Approx(a.period1.capital_saved_1).epsilon(1e-9));
  CHECK(b.period1.wage == doctest::Approx(lambda * a.period1.wage).epsilon(1e-9));
  CHECK(b.period2.capital_price_2 ==
        doctest::Approx(lambda * a.period2.capital_price_2).epsilon(1e-9));
  // the two holding-return ratios are invariant individually
  CHECK(b.period2.capital_price_1 / b.period1.capital_price_1 ==
        doctest::Approx(a.period2.capital_price_1 / a.period1.capital_price_1)
            .epsilon(1e-9));
  CHECK(arbitrage_gap(b) == doctest::Approx(arbitrage_gap(a)).epsilon(1e-7));
}

TEST_CASE("swapping the two capital goods mirrors the solution") {
  GEParams p;  // asymmetric benchmark
  GEParams swapped = p;
  std::swap(swapped.alpha, swapped.beta);
  std::swap(swapped.c2, swapped.c3);
  std::swap(swapped.theta2, swapped.theta3);
  std::swap(swapped.e1, swapped.e2);
  GESolution a = solve_ge(p);
  GESolution b = solve_ge(swapped);

  CHECK(b.period1.capital_price_1 ==
        doctest::Approx(a.period1.capital_price_2).epsilon(1e-9));
  CHECK(b.period1.capital_price_2 ==
        doctest::Approx(a.period1.capital_price_1).epsilon(1e-9));
  CHECK(b.period1.capital_saved_1 ==
        doctest::Approx(a.period1.capital_saved_2).epsilon(1e-9));
  CHECK(b.period2.labor_capital_1 ==
        doctest::Approx(a.period2.labor_capital_2).epsilon(1e-9));
  CHECK(b.period1.consumption == doctest::Approx(a.period1.consumption).epsilon(1e-9));
  CHECK(arbitrage_gap(b) == doctest::Approx(-arbitrage_gap(a)).epsilon(1e-7));
}

TEST_CASE("newton agrees with the nested grid-search oracle") {
  GEParams p;
  GESolution sol = solve_ge(p);
  // Coarse-then-fine grid at 1e-3 resolution (the full-resolution scan runs
  // in the acceptance suite).
  auto oracle = testutil::oracle_grid_solve(p, 0.4, 0.02, 1e-3);
  CHECK(std::abs(sol.period1.capital_saved_1 - oracle.saving1) <= 1.5e-3);
  CHECK(std::abs(sol.period1.capital_saved_2 - oracle.saving2) <= 1.5e-3);
  CHECK(std::abs(sol.period1.wage - oracle.period1.w) <= 1e-2 * oracle.period1.w);
  CHECK(std::abs(sol.period2.consumption - oracle.period2.x) <=
        1e-2 * oracle.period2.x);
}
