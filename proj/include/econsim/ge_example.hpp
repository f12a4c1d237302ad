#pragma once

#include <array>
#include <cstddef>

#include "econsim/errors.hpp"

namespace econsim {

// Two-period, three-firm, two-capital-goods monetary general equilibrium.
// Firm 1 makes the consumption good from both capital goods and labor
// (Cobb-Douglas, constant returns); firms 2 and 3 each make one capital good
// from labor with diminishing returns (c l^theta, theta in (0,1)); the
// representative household has log utility over the two consumption levels
// and can carry capital goods from period 1 into period 2. Each period's
// purchases are bounded by that period's money supply (cash in advance).
struct GEParams {
  double alpha = 0.3;   // consumption-good exponent on capital good 1
  double beta = 0.15;   // consumption-good exponent on capital good 2
  double c2 = 1.0;      // productivity of the good-1 producer
  double c3 = 1.5;      // productivity of the good-2 producer
  double theta2 = 0.6;  // labor exponent of the good-1 producer
  double theta3 = 0.6;  // labor exponent of the good-2 producer
  double delta = 0.95;  // utility discount on period-2 consumption
  double m1 = 1.0;      // money supply, period 1
  double m2 = 1.0;      // money supply, period 2
  double e1 = 0.2;      // period-1 endowment of capital good 1
  double e2 = 0.2;      // period-1 endowment of capital good 2

  void validate() const;
};

struct GEPeriod {
  double capital_price_1 = 0.0;  // p_k1
  double capital_price_2 = 0.0;  // p_k2
  double wage = 0.0;
  double consumption_price = 0.0;  // p_x
  double consumption = 0.0;        // x
  double labor_consumption = 0.0;  // l1
  double labor_capital_1 = 0.0;    // l2
  double labor_capital_2 = 0.0;    // l3
  double capital_used_1 = 0.0;     // k1x
  double capital_used_2 = 0.0;     // k2x
  double capital_saved_1 = 0.0;    // k1s (zero in period 2)
  double capital_saved_2 = 0.0;    // k2s (zero in period 2)
  double capital_output_1 = 0.0;   // k1
  double capital_output_2 = 0.0;   // k2
};

inline constexpr std::size_t kGEEquationCount = 28;

struct GESolution {
  GEPeriod period1;
  GEPeriod period2;
  std::array<double, kGEEquationCount> residuals{};  // the displayed system
  double residual_norm = 0.0;                        // max |residual|
  double closure_residual = 0.0;  // saving-mix closure, reported separately
  int numerical_rank = 0;         // rank of the displayed system's Jacobian
  bool boundary_flag = false;     // some quantity is at (near) zero
  int newton_start = -1;          // which deterministic start won
  int iterations = 0;
};

struct GESolverOptions {
  int max_iterations = 200;
  double tolerance = 1e-13;  // on the scaled residual norm
  double damping = 0.5;      // smallest line-search step factor per halving
};

// Damped Newton on the full system in log-transformed positive variables,
// with 8 deterministic starting points merged by lowest residual (ties to
// the lower start index). Throws NonConvergenceError with the best residual
// when no start converges.
GESolution solve_ge(const GEParams& params, const GESolverOptions& options = {});

// Relative-price drift of the two capital goods between the periods,
//   p_k1(2)/p_k1(1) - p_k2(2)/p_k2(1);
// zero exactly when holding either capital good earns the same return.
double arbitrage_gap(const GESolution& solution);

// Residuals of the displayed 28-equation system at the given point.
std::array<double, kGEEquationCount> ge_residuals(const GEParams& params,
                                                  const GESolution& solution);

// Household budget residual for one period: wage + profits + sales of
// carried/endowed capital minus consumption and capital purchases. Should
// vanish as a consequence of the cash-in-advance and clearing conditions.
double ge_budget_residual(const GEParams& params, const GESolution& solution, int period);

}  // namespace econsim
