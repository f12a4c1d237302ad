#include "econsim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "econsim/summation.hpp"

namespace econsim {

void SolverConfig::validate() const {
  if (max_iterations < 1) throw ValidationError("solver: max_iterations must be >= 1");
  if (!(relative_tolerance > 0.0)) throw ValidationError("solver: tolerance must be > 0");
  if (!(damping > 0.0) || damping > 1.0) {
    throw ValidationError("solver: damping must lie in (0, 1]");
  }
}

std::vector<double> firm_returns(double market_return, double loan_rate,
                                 std::span<const double> betas) {
  std::vector<double> z(betas.size());
  const double excess = market_return - loan_rate;
  for (std::size_t j = 0; j < betas.size(); ++j) {
    if (!std::isfinite(betas[j])) throw ValidationError("firm_returns: beta not finite");
    z[j] = loan_rate + betas[j] * excess;
  }
  return z;
}

std::vector<double> household_returns(const Matrix& portfolio_weights,
                                      std::span<const double> firm_returns_vec) {
  if (portfolio_weights.cols() != firm_returns_vec.size()) {
    throw DimensionError("household_returns: weights have " +
                         std::to_string(portfolio_weights.cols()) + " columns but " +
                         std::to_string(firm_returns_vec.size()) + " firm returns given");
  }
  std::vector<double> r(portfolio_weights.rows());
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = pairwise_dot(portfolio_weights.row(i), firm_returns_vec);
  }
  return r;
}

double macro_return_closed_form(double aggregate_saving_rate, double labor_income,
                                double debt, double net_assets, double loan_rate) {
  if (!(net_assets > 0.0)) {
    throw DegenerateDenominatorError("macro_return_closed_form: non-positive net assets");
  }
  const double mu = debt / net_assets;
  const double denom = 1.0 - aggregate_saving_rate * (1.0 + mu);
  if (std::abs(denom) < 1e-12) {
    throw DegenerateDenominatorError(
        "macro_return_closed_form: 1 - s(1+mu) vanishes; the identity system has no "
        "finite solution");
  }
  return aggregate_saving_rate * (labor_income - debt * loan_rate) / (net_assets * denom);
}

double real_consumption(const Matrix& purchase_quantities,
                        std::span<const double> relative_prices) {
  if (purchase_quantities.cols() != relative_prices.size()) {
    throw DimensionError("real_consumption: quantity/price shape mismatch");
  }
  std::vector<double> per_household(purchase_quantities.rows());
  for (std::size_t i = 0; i < purchase_quantities.rows(); ++i) {
    per_household[i] = pairwise_dot(purchase_quantities.row(i), relative_prices);
  }
  return pairwise_sum(per_household);
}

double price_level(std::span<const double> property_incomes,
                   std::span<const double> saving_rates,
                   std::span<const double> relative_wages, double real_consumption) {
  if (property_incomes.size() != saving_rates.size() ||
      saving_rates.size() != relative_wages.size()) {
    throw DimensionError("price_level: input sizes disagree");
  }
  std::vector<double> consumed_property(property_incomes.size());
  std::vector<double> consumed_wage(property_incomes.size());
  for (std::size_t i = 0; i < property_incomes.size(); ++i) {
    const double keep = 1.0 - saving_rates[i];
    consumed_property[i] = keep * property_incomes[i];
    consumed_wage[i] = keep * relative_wages[i];
  }
  const double numerator = pairwise_sum(consumed_property);
  const double denom = real_consumption - pairwise_sum(consumed_wage);
  const double scale = std::max(std::abs(real_consumption), 1.0);
  if (std::abs(denom) < 1e-12 * scale) {
    throw DegenerateDenominatorError(
        "price_level: real purchases net of consumed relative wages vanish; the price "
        "level is indeterminate");
  }
  const double p = numerator / denom;
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw NegativePriceError("price_level: solution is not positive; exogenous real data "
                             "are infeasible", p);
  }
  return p;
}

namespace {

// Reusable per-run scratch: caches keyed by pointer identity of shared
// exogenous objects, so constant fields cost O(1) per period after the
// first.
struct SolverScratch {
  const void* weights_key = nullptr;
  const void* betas_key = nullptr;
  std::vector<double> weights_dot_raw_betas;

  const void* quantities_key = nullptr;
  const void* prices_key = nullptr;
  double real_c = 0.0;
};

struct PeriodSums {
  // Scalar decomposition of household income against the market return:
  //   y_i(R, p) = rbar*a_i + (R-rbar)*(a_i+d_i)*b_i + p*wrel_i
  // where b_i is the household's portfolio beta.
  double saved_assets = 0.0;      // sum s_i a_i
  double saved_gross_beta = 0.0;  // sum s_i (a_i+d_i) b_i
  double saved_wages = 0.0;       // sum s_i wrel_i
  double total_assets = 0.0;      // sum a_i
  double total_gross_beta = 0.0;  // sum (a_i+d_i) b_i
  double total_wages = 0.0;       // sum wrel_i
  double consumed_assets = 0.0;   // sum (1-s_i) a_i
  double consumed_gross_beta = 0.0;
  double consumed_wages = 0.0;
};

struct PeriodContext {
  double loan_rate = 0.0;
  double firm_assets = 0.0;  // A_t from the firm side
  double debt_total = 0.0;
  double real_c = 0.0;
  double wage_price_lagged = 0.0;  // used in lagged mode
  bool lagged = false;
  PeriodSums sums;
};

// Price level implied by the consumption-clearing equation at a given R.
double price_at(const PeriodContext& c, double R) {
  const double property = c.loan_rate * c.sums.consumed_assets +
                          (R - c.loan_rate) * c.sums.consumed_gross_beta;
  double denom, numerator;
  if (c.lagged) {
    numerator = property + c.wage_price_lagged * c.sums.consumed_wages;
    denom = c.real_c;
  } else {
    numerator = property;
    denom = c.real_c - c.sums.consumed_wages;
  }
  // The denominator does not depend on R, so degeneracy here is a property
  // of the exogenous real data, not of the trial return.
  const double scale = std::max(std::abs(c.real_c), 1.0);
  if (std::abs(denom) < 1e-12 * scale) {
    throw DegenerateDenominatorError(
        "solve_period: price equation denominator vanishes; the price level is "
        "indeterminate");
  }
  return numerator / denom;
}

struct Identity {
  double saving_rate;    // income-weighted aggregate saving rate at (R, p)
  double wage_total;     // nominal W at (R, p)
  double residual;       // s_t (A R + W + D(R-rbar)) - A R
};

Identity identity_at(const PeriodContext& c, double R) {
  const double p = price_at(c, R);
  const double wage_price = c.lagged ? c.wage_price_lagged : p;
  const double excess = R - c.loan_rate;
  const double saved = c.loan_rate * c.sums.saved_assets + excess * c.sums.saved_gross_beta +
                       wage_price * c.sums.saved_wages;
  const double total = c.loan_rate * c.sums.total_assets + excess * c.sums.total_gross_beta +
                       wage_price * c.sums.total_wages;
  if (total == 0.0) {
    throw DegenerateDenominatorError("solve_period: aggregate household income is zero");
  }
  const double s_t = saved / total;
  const double wage_total = wage_price * c.sums.total_wages;
  const double income_macro =
      c.firm_assets * R + wage_total + c.debt_total * excess;
  return {s_t, wage_total, s_t * income_macro - c.firm_assets * R};
}

}  // namespace

static PeriodSolution solve_period_impl(const EconomyState& state,
                                        const PeriodInputs& inputs,
                                        const SolverConfig& config,
                                        SolverScratch& scratch) {
  config.validate();
  const std::size_t n = state.household_count();
  const std::size_t f = state.firm_count();
  if (n == 0 || f == 0) throw ValidationError("solve_period: empty economy");
  const auto& hh = state.households;
  if (!hh.saving_rates || !hh.leverage_ratios || !hh.relative_wages ||
      !hh.portfolio_weights || !inputs.betas || !state.goods.relative_prices ||
      !state.goods.purchase_quantities) {
    throw ValidationError("solve_period: state is missing exogenous blocks");
  }

  PeriodContext ctx;
  ctx.loan_rate = inputs.loan_rate;
  ctx.lagged = config.price_mode == PriceMode::Lagged;
  ctx.wage_price_lagged = state.price_level;
  ctx.firm_assets = pairwise_sum(state.firms.equity_values);
  ctx.debt_total = pairwise_sum(hh.debts);
  if (!(ctx.firm_assets > 0.0)) {
    throw ValidationError("solve_period: total firm equity must be positive");
  }

  // Raw-beta normalization factor for this period (the state's stored betas
  // are the normalized ones).
  const double rescale = weighted_beta_mean(state.firms.equity_values, *inputs.betas);
  if (rescale == 0.0 || !std::isfinite(rescale)) {
    throw DegenerateDenominatorError("solve_period: value-weighted mean beta is zero");
  }

  // Household portfolio betas b_i = (V beta_raw)_i / rescale. The dot
  // products are cached while the weight matrix and raw betas are unchanged.
  if (scratch.weights_key != hh.portfolio_weights.get() ||
      scratch.betas_key != inputs.betas.get() ||
      scratch.weights_dot_raw_betas.size() != n) {
    const Matrix& w = *hh.portfolio_weights;
    if (w.rows() != n || w.cols() != f) {
      throw DimensionError("solve_period: portfolio weight shape mismatch");
    }
    scratch.weights_dot_raw_betas.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      scratch.weights_dot_raw_betas[i] = pairwise_dot(w.row(i), *inputs.betas);
    }
    scratch.weights_key = hh.portfolio_weights.get();
    scratch.betas_key = inputs.betas.get();
  }

  if (scratch.quantities_key != state.goods.purchase_quantities.get() ||
      scratch.prices_key != state.goods.relative_prices.get()) {
    ctx.real_c = real_consumption(*state.goods.purchase_quantities,
                                  *state.goods.relative_prices);
    scratch.real_c = ctx.real_c;
    scratch.quantities_key = state.goods.purchase_quantities.get();
    scratch.prices_key = state.goods.relative_prices.get();
  } else {
    ctx.real_c = scratch.real_c;
  }

  // One pass over households to build the scalar income decomposition.
  {
    const auto& s = *hh.saving_rates;
    const auto& wrel = *hh.relative_wages;
    std::vector<double> b1(n), b2(n), b3(n), b4(n), b5(n), b6(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double beta_i = scratch.weights_dot_raw_betas[i] / rescale;
      const double gross_beta = (hh.net_assets[i] + hh.debts[i]) * beta_i;
      b1[i] = s[i] * hh.net_assets[i];
      b2[i] = s[i] * gross_beta;
      b3[i] = s[i] * wrel[i];
      b4[i] = hh.net_assets[i];
      b5[i] = gross_beta;
      b6[i] = wrel[i];
    }
    ctx.sums.saved_assets = pairwise_sum(b1);
    ctx.sums.saved_gross_beta = pairwise_sum(b2);
    ctx.sums.saved_wages = pairwise_sum(b3);
    ctx.sums.total_assets = pairwise_sum(b4);
    ctx.sums.total_gross_beta = pairwise_sum(b5);
    ctx.sums.total_wages = pairwise_sum(b6);
    ctx.sums.consumed_assets = ctx.sums.total_assets - ctx.sums.saved_assets;
    ctx.sums.consumed_gross_beta = ctx.sums.total_gross_beta - ctx.sums.saved_gross_beta;
    ctx.sums.consumed_wages = ctx.sums.total_wages - ctx.sums.saved_wages;
  }

  const double A = ctx.firm_assets;
  const double D = ctx.debt_total;
  const double mu_t = D / A;
  const double tol = config.relative_tolerance;

  // Damped fixed point on R: map R to the closed-form return implied by the
  // aggregate saving rate at R. Falls back to bisection on the identity
  // residual when the map stalls or diverges.
  double R = ctx.loan_rate;
  int iterations = 0;
  bool used_bisection = false;
  bool converged = false;
  double prev_gap = std::numeric_limits<double>::infinity();
  int worse_count = 0;

  auto map_once = [&](double r_cur, bool& ok) -> double {
    const Identity id = identity_at(ctx, r_cur);
    const double denom = 1.0 - id.saving_rate * (1.0 + mu_t);
    if (std::abs(denom) < 1e-12) {
      ok = false;
      return r_cur;
    }
    ok = true;
    return id.saving_rate * (id.wage_total - D * ctx.loan_rate) / (A * denom);
  };

  for (; iterations < config.max_iterations; ++iterations) {
    bool ok = true;
    const double mapped = map_once(R, ok);
    if (!ok) {
      used_bisection = true;
      break;
    }
    const double gap = std::abs(mapped - R);
    if (gap <= tol * std::max(1.0, std::abs(mapped))) {
      R = mapped;
      converged = true;
      ++iterations;
      break;
    }
    if (gap > prev_gap * 1.0001) {
      if (++worse_count >= 3) {
        used_bisection = true;
        break;
      }
    } else {
      worse_count = 0;
    }
    if (iterations >= config.max_iterations / 2) {
      used_bisection = true;
      break;
    }
    prev_gap = gap;
    R = R + config.damping * (mapped - R);
  }

  auto residual_at = [&](double r_cur) { return identity_at(ctx, r_cur).residual; };

  if (!converged && used_bisection) {
    // Expand a bracket around the default interval until the residual
    // changes sign.
    double lo = -0.9, hi = 10.0;
    double flo = residual_at(lo), fhi = residual_at(hi);
    int expand = 0;
    while (flo * fhi > 0.0 && expand < 60) {
      const double width = hi - lo;
      lo -= width;
      hi += width;
      if (std::abs(lo) > 1e6 || std::abs(hi) > 1e6) break;
      flo = residual_at(lo);
      fhi = residual_at(hi);
      ++expand;
    }
    if (flo * fhi > 0.0) {
      throw NonConvergenceError(
          "solve_period: no sign change of the identity residual on the expanded "
          "bracket",
          std::abs(residual_at(R)) / A);
    }
    for (int k = 0; k < 200 && iterations < config.max_iterations * 4; ++k, ++iterations) {
      const double mid = 0.5 * (lo + hi);
      const double fmid = residual_at(mid);
      if (fmid == 0.0 || (hi - lo) < tol * std::max(1.0, std::abs(mid))) {
        R = mid;
        converged = true;
        break;
      }
      if ((fmid > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fmid;
      } else {
        hi = mid;
      }
      R = mid;
    }
    if (!converged) {
      throw NonConvergenceError("solve_period: bisection failed to reach tolerance",
                                std::abs(residual_at(R)) / A);
    }
  } else if (!converged) {
    throw NonConvergenceError(
        "solve_period: fixed point did not converge after " +
            std::to_string(iterations) + " iterations",
        std::abs(residual_at(R)) / A);
  }

  // Exact elementwise evaluation used both for the final polish and for the
  // recorded solution, so the values written into the step are the values
  // the residuals were measured on.
  const auto& s_rates = *hh.saving_rates;
  const auto& wrel = *hh.relative_wages;
  std::vector<double> returns(n), incomes(n), saved(n), totals(n);
  auto exact_residual = [&](double r_cur, double& price_out, double& s_t_out,
                            double& wage_total_out) {
    const double p = price_at(ctx, r_cur);
    const double wage_price = ctx.lagged ? ctx.wage_price_lagged : p;
    for (std::size_t i = 0; i < n; ++i) {
      const double b_i = scratch.weights_dot_raw_betas[i] / rescale;
      const double r_i = ctx.loan_rate + b_i * (r_cur - ctx.loan_rate);
      returns[i] = r_i;
      const double y = hh.net_assets[i] * r_i + wage_price * wrel[i] +
                       hh.debts[i] * (r_i - ctx.loan_rate);
      incomes[i] = y;
      saved[i] = s_rates[i] * y;
      totals[i] = y;
    }
    const double saved_total = pairwise_sum(saved);
    const double income_total = pairwise_sum(totals);
    if (income_total == 0.0) {
      throw DegenerateDenominatorError("solve_period: aggregate household income is zero");
    }
    const double s_t = saved_total / income_total;
    const double wage_total = wage_price * ctx.sums.total_wages;
    price_out = p;
    s_t_out = s_t;
    wage_total_out = wage_total;
    return s_t * (A * r_cur + wage_total + D * (r_cur - ctx.loan_rate)) - A * r_cur;
  };

  double p_final = 0.0, s_t_final = 0.0, wage_total_final = 0.0;
  double g0 = exact_residual(R, p_final, s_t_final, wage_total_final);
  for (int round = 0; round < 3 && g0 != 0.0; ++round) {
    const double h = std::max(1e-7, 1e-7 * std::abs(R));
    double p1, st1, wt1;
    const double g1 = exact_residual(R + h, p1, st1, wt1);
    const double slope = (g1 - g0) / h;
    if (slope == 0.0 || !std::isfinite(slope)) break;
    const double r_next = R - g0 / slope;
    if (!std::isfinite(r_next)) break;
    double p2, st2, wt2;
    const double g2 = exact_residual(r_next, p2, st2, wt2);
    if (std::abs(g2) >= std::abs(g0)) break;
    R = r_next;
    g0 = g2;
  }
  // Re-evaluate at the accepted R so the recorded vectors and aggregates all
  // belong to the same point.
  g0 = exact_residual(R, p_final, s_t_final, wage_total_final);

  // Accept only a genuine root: a bracketing search that closed on a pole of
  // the identity residual (zero aggregate income) would land here with a
  // large residual.
  if (!(std::abs(g0) <= 10.0 * tol * std::max(A, 1.0))) {
    throw NonConvergenceError(
        "solve_period: converged point does not satisfy the identity", std::abs(g0) / A);
  }
  if (!(p_final > 0.0) || !std::isfinite(p_final)) {
    throw NegativePriceError(
        "solve_period: solved price level is not positive; exogenous real data are "
        "infeasible",
        p_final);
  }

  PeriodSolution sol;
  sol.market_return = R;
  sol.price_level = p_final;
  sol.aggregate_saving_rate = s_t_final;
  sol.firm_returns = firm_returns(R, ctx.loan_rate, state.firms.betas);
  sol.household_returns = std::move(returns);
  sol.household_incomes = std::move(incomes);
  for (std::size_t i = 0; i < n; ++i) totals[i] = (1.0 - s_rates[i]) * sol.household_incomes[i];
  sol.consumption = pairwise_sum(totals);
  sol.net_assets = A;
  sol.labor_income = wage_total_final;
  sol.debt = D;
  sol.leverage = mu_t;
  sol.diagnostics.iterations = iterations;
  sol.diagnostics.used_bisection = used_bisection;
  sol.diagnostics.beta_rescale = rescale;
  sol.diagnostics.return_residual = std::abs(g0) / A;
  // Nominal consumption must buy exactly the real purchases at the solved
  // price in either price mode.
  sol.diagnostics.price_residual = std::abs(p_final * ctx.real_c - sol.consumption) /
                                   std::max(1.0, std::abs(sol.consumption));
  return sol;
}

PeriodSolution solve_period(const EconomyState& state, const PeriodInputs& inputs,
                            const SolverConfig& config) {
  SolverScratch scratch;
  return solve_period_impl(state, inputs, config, scratch);
}

EconomyState make_state(long period, std::vector<double> net_assets,
                        std::vector<double> equity_values, const PeriodInputs& inputs,
                        double price_level, double* beta_rescale) {
  EconomyState st;
  st.period = period;
  st.price_level = price_level;
  st.households.net_assets = std::move(net_assets);
  st.households.saving_rates = inputs.saving_rates;
  st.households.leverage_ratios = inputs.leverage_ratios;
  st.households.relative_wages = inputs.relative_wages;
  st.households.portfolio_weights = inputs.portfolio_weights;
  st.firms.equity_values = std::move(equity_values);
  st.goods.relative_prices = inputs.relative_prices;
  st.goods.purchase_quantities = inputs.purchase_quantities;

  const std::size_t n = st.households.net_assets.size();
  if (!inputs.leverage_ratios || inputs.leverage_ratios->size() != n) {
    throw DimensionError("make_state: leverage ratios mis-sized");
  }
  st.households.debts.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    st.households.debts[i] = (*inputs.leverage_ratios)[i] * st.households.net_assets[i];
  }

  if (!inputs.betas || inputs.betas->size() != st.firms.equity_values.size()) {
    throw DimensionError("make_state: betas mis-sized");
  }
  st.firms.betas = *inputs.betas;
  const double factor = normalize_betas(st.firms.equity_values, st.firms.betas);
  if (beta_rescale) *beta_rescale = factor;
  require_valid(validate_dynamic(st), "make_state");
  return st;
}

static std::pair<EconomyState, PeriodSolution> step_impl(const EconomyState& state,
                                                         const PeriodInputs& inputs,
                                                         const PeriodInputs& inputs_next,
                                                         const SolverConfig& config,
                                                         SolverScratch& scratch) {
  PeriodSolution sol = solve_period_impl(state, inputs, config, scratch);

  const std::size_t n = state.household_count();
  const auto& s = *state.households.saving_rates;
  std::vector<double> assets_next(n);
  for (std::size_t i = 0; i < n; ++i) {
    assets_next[i] = state.households.net_assets[i] + s[i] * sol.household_incomes[i];
  }
  std::vector<double> equity_next(state.firm_count());
  for (std::size_t j = 0; j < equity_next.size(); ++j) {
    equity_next[j] = state.firms.equity_values[j] * (1.0 + sol.firm_returns[j]);
  }

  EconomyState next = make_state(state.period + 1, std::move(assets_next),
                                 std::move(equity_next), inputs_next, sol.price_level);

  // make_state ran the dynamic validators; exogenous matrices are re-checked
  // only when they are new objects.
  if (inputs_next.portfolio_weights.get() != state.households.portfolio_weights.get()) {
    require_valid(validate_portfolio_weights(*inputs_next.portfolio_weights),
                  "step: next-period portfolio weights");
  }
  return {std::move(next), std::move(sol)};
}

std::pair<EconomyState, PeriodSolution> step(const EconomyState& state,
                                             const PeriodInputs& inputs,
                                             const PeriodInputs& inputs_next,
                                             const SolverConfig& config) {
  SolverScratch scratch;
  return step_impl(state, inputs, inputs_next, config, scratch);
}

std::pair<EconomyState, PeriodSolution> step(const EconomyState& state,
                                             const PeriodInputs& inputs,
                                             const SolverConfig& config) {
  return step(state, inputs, inputs, config);
}

RunResult run(const EconomyState& initial, const ExogenousPath& path, long periods,
              const SolverConfig& config, const RunOptions& options) {
  if (periods < 0) throw ValidationError("run: negative period count");
  const long cov = path.coverage();
  if (cov >= 0 && periods + 1 > cov) {
    throw ValidationError("run: exogenous path covers " + std::to_string(cov) +
                          " periods but " + std::to_string(periods + 1) + " are needed");
  }

  RunResult result;
  result.records.reserve(static_cast<std::size_t>(periods));
  EconomyState state = initial;
  SolverScratch scratch;

  auto want_snapshot = [&](long t) {
    if (options.snapshot_every > 0 && t % options.snapshot_every == 0) return true;
    return std::find(options.snapshot_periods.begin(), options.snapshot_periods.end(), t) !=
           options.snapshot_periods.end();
  };
  if (want_snapshot(0)) result.snapshots.emplace_back(0, state);

  PeriodInputs inputs = path.at(0);
  for (long t = 0; t < periods; ++t) {
    const double assets_before = pairwise_sum(state.firms.equity_values);
    std::pair<EconomyState, PeriodSolution> stepped;
    PeriodInputs inputs_next;
    const std::string where = "period " + std::to_string(t) + ": ";
    try {
      inputs_next = path.at(t + 1);
      stepped = step_impl(state, inputs, inputs_next, config, scratch);
    } catch (const AggregationMismatchError& e) {
      throw AggregationMismatchError(where + e.what(), e.residual);
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    } catch (const NonConvergenceError& e) {
      throw NonConvergenceError(where + e.what(), e.last_residual);
    } catch (const DegenerateDenominatorError& e) {
      throw DegenerateDenominatorError(where + e.what());
    } catch (const NegativePriceError& e) {
      throw NegativePriceError(where + e.what(), e.price);
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
    EconomyState& next = stepped.first;
    PeriodSolution& sol = stepped.second;

    MacroRecord rec;
    rec.period = t;
    rec.market_return = sol.market_return;
    rec.price_level = sol.price_level;
    rec.aggregate_saving_rate = sol.aggregate_saving_rate;
    rec.consumption = sol.consumption;
    rec.net_assets = sol.net_assets;
    rec.labor_income = sol.labor_income;
    rec.debt = sol.debt;
    rec.leverage = sol.leverage;
    rec.iterations = sol.diagnostics.iterations;
    rec.return_residual = sol.diagnostics.return_residual;
    rec.price_residual = sol.diagnostics.price_residual;
    rec.beta_rescale = sol.diagnostics.beta_rescale;

    const double assets_after_firms = pairwise_sum(next.firms.equity_values);
    const double assets_after_households = pairwise_sum(next.households.net_assets);
    rec.dual_aggregation_residual =
        std::abs(assets_after_households - assets_after_firms) / assets_after_firms;
    rec.growth_identity_residual =
        std::abs(assets_after_firms - assets_before * (1.0 + sol.market_return)) /
        assets_before;
    const double macro_income =
        sol.net_assets * sol.market_return + sol.labor_income +
        sol.debt * (sol.market_return - inputs.loan_rate);
    rec.saving_identity_residual =
        std::abs((assets_after_firms - assets_before) -
                 sol.aggregate_saving_rate * macro_income) /
        assets_before;
    result.records.push_back(rec);

    state = std::move(next);
    inputs = std::move(inputs_next);
    if (want_snapshot(t + 1)) result.snapshots.emplace_back(t + 1, state);
    if (options.keep_solutions) result.solutions.push_back(std::move(sol));
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace econsim
