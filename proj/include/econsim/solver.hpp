#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "econsim/exogenous.hpp"
#include "econsim/matrix.hpp"
#include "econsim/state.hpp"

namespace econsim {

enum class PriceMode {
  Simultaneous,  // wages paid at the price level solved this period
  Lagged,        // wages paid at last period's price level (1-D solve in R)
};

struct SolverConfig {
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
  double damping = 0.5;  // in (0, 1]
  PriceMode price_mode = PriceMode::Simultaneous;

  void validate() const;
};

struct SolveDiagnostics {
  int iterations = 0;
  double return_residual = 0.0;  // |saving total - A*R| / A at the solution
  double price_residual = 0.0;   // price equation residual / nominal consumption
  bool used_bisection = false;
  double beta_rescale = 1.0;  // factor divided out of the raw betas this period
};

// The solved endogenous scalars and vectors for one period.
struct PeriodSolution {
  double market_return = 0.0;          // value-weighted return on all equity
  double price_level = 0.0;            // numeraire price this period
  double aggregate_saving_rate = 0.0;  // income-weighted mean of household rates
  std::vector<double> firm_returns;
  std::vector<double> household_returns;
  std::vector<double> household_incomes;  // nominal, per household

  // Aggregates at the solution.
  double consumption = 0.0;
  double net_assets = 0.0;
  double labor_income = 0.0;
  double debt = 0.0;
  double leverage = 0.0;  // debt / net_assets

  SolveDiagnostics diagnostics;
};

// Affine factor pricing: each firm's return is the loan rate plus beta times
// the market excess return.
std::vector<double> firm_returns(double market_return, double loan_rate,
                                 std::span<const double> betas);

// Portfolio returns: r_i = sum_j w_ij z_j. Throws DimensionError on shape
// mismatch.
std::vector<double> household_returns(const Matrix& portfolio_weights,
                                      std::span<const double> firm_returns_vec);

// Unique market return satisfying the aggregate saving identity and the
// market growth identity simultaneously:
//   R = s (W - D rbar) / (A (1 - s (1 + D/A)))
// Throws DegenerateDenominatorError when 1 - s(1 + D/A) vanishes.
double macro_return_closed_form(double aggregate_saving_rate, double labor_income,
                                double debt, double net_assets, double loan_rate);

// Price level clearing nominal consumption against real purchases:
//   p * realC = sum_i (1-s_i) * property_income_i + p * sum_i (1-s_i) * wrel_i
// property_income_i = a_i r_i + d_i (r_i - rbar). Throws
// DegenerateDenominatorError / NegativePriceError per the contract.
double price_level(std::span<const double> property_incomes,
                   std::span<const double> saving_rates,
                   std::span<const double> relative_wages, double real_consumption);

// Total real purchases sum_i sum_g q_ig * prel_g.
double real_consumption(const Matrix& purchase_quantities,
                        std::span<const double> relative_prices);

// Solves the per-period joint fixed point in (market return, price level)
// for the state's heterogeneous population: damped fixed-point iteration
// with a bisection fallback on the return, then a secant polish. The inputs
// supply the loan rate for the period; all other fields are read from the
// state (which was built from the same inputs).
PeriodSolution solve_period(const EconomyState& state, const PeriodInputs& inputs,
                            const SolverConfig& config);

// Advances one period: household assets accumulate saved income, firm equity
// grows at its return, and the next period's exogenous fields (from
// `inputs_next`) are installed, with debts and normalized betas rebuilt.
// The returned state passes the dynamic validators; a failure there is a
// hard error.
std::pair<EconomyState, PeriodSolution> step(const EconomyState& state,
                                             const PeriodInputs& inputs,
                                             const PeriodInputs& inputs_next,
                                             const SolverConfig& config);

// Single-record convenience: reuses the same inputs for the next period.
std::pair<EconomyState, PeriodSolution> step(const EconomyState& state,
                                             const PeriodInputs& inputs,
                                             const SolverConfig& config);

// Per-period scalar record kept for every period of a run.
struct MacroRecord {
  long period = 0;
  double market_return = 0.0;
  double price_level = 0.0;
  double aggregate_saving_rate = 0.0;
  double consumption = 0.0, net_assets = 0.0, labor_income = 0.0, debt = 0.0;
  double leverage = 0.0;
  int iterations = 0;
  double return_residual = 0.0;
  double price_residual = 0.0;
  double beta_rescale = 1.0;
  // Conservation diagnostics, measured after the step.
  double dual_aggregation_residual = 0.0;  // |sum a - sum A| / A
  double saving_identity_residual = 0.0;   // |dA - s_t(AR + W + D(R-rbar))| / A
  double growth_identity_residual = 0.0;   // |A' - A(1+R)| / A
};

struct RunOptions {
  long snapshot_every = 0;             // 0 = no periodic snapshots
  std::vector<long> snapshot_periods;  // explicit snapshot points
  bool keep_solutions = false;         // retain full per-period solutions
};

struct RunResult {
  std::vector<MacroRecord> records;
  EconomyState final_state;
  std::vector<std::pair<long, EconomyState>> snapshots;
  std::vector<PeriodSolution> solutions;  // only when keep_solutions
};

// Runs T chained steps from the initial state. Deterministic given the
// path's seeds; errors are rethrown with the failing period attached.
RunResult run(const EconomyState& initial, const ExogenousPath& path, long periods,
              const SolverConfig& config, const RunOptions& options = {});

// Builds a consistent state at period `period` from materialized inputs plus
// initial asset/equity vectors. Betas are normalized against the supplied
// equities (factor reported through *beta_rescale when non-null); debts are
// derived from leverage. Throws ValidationError when the result is
// inconsistent.
EconomyState make_state(long period, std::vector<double> net_assets,
                        std::vector<double> equity_values, const PeriodInputs& inputs,
                        double price_level, double* beta_rescale = nullptr);

}  // namespace econsim
