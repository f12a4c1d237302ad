#include "econsim/state.hpp"

#include <cmath>
#include <sstream>

#include "econsim/summation.hpp"

namespace econsim {

namespace {

void check_range(const std::vector<double>& v, double lo, double hi, bool hi_open,
                 const char* name, std::vector<Violation>& out) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = v[i];
    const bool bad = !(x >= lo) || (hi_open ? !(x < hi) : !(x <= hi)) || !std::isfinite(x);
    if (bad) {
      out.push_back({name, static_cast<std::ptrdiff_t>(i),
                     std::isfinite(x) ? x : 0.0, "value out of range"});
    }
  }
}

}  // namespace

std::vector<Violation> validate_portfolio_weights(const Matrix& weights) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    double negative = 0.0;
    for (double w : weights.row(i)) {
      if (w < 0.0) negative = std::min(negative, w);
    }
    if (negative < 0.0) {
      out.push_back({"portfolio_nonnegative", static_cast<std::ptrdiff_t>(i), negative,
                     "negative portfolio weight"});
    }
    const double sum = pairwise_sum(weights.row(i));
    if (std::abs(sum - 1.0) > kPortfolioRowTol) {
      out.push_back({"portfolio_row_sum", static_cast<std::ptrdiff_t>(i), sum - 1.0,
                     "portfolio row does not sum to 1"});
    }
  }
  return out;
}

std::vector<Violation> validate_dynamic(const EconomyState& state) {
  std::vector<Violation> out;
  const auto& hh = state.households;
  const std::size_t n = state.household_count();

  if (state.period < 0) out.push_back({"period_nonnegative", -1, double(state.period), ""});
  if (!(state.price_level > 0.0) || !std::isfinite(state.price_level)) {
    out.push_back({"price_level_positive", -1, state.price_level, ""});
  }

  if (hh.saving_rates) check_range(*hh.saving_rates, 0.0, 1.0, true, "saving_rate_range", out);
  if (hh.leverage_ratios) {
    check_range(*hh.leverage_ratios, 0.0, 1.0, true, "leverage_range", out);
  }

  // Debt identity d_i = mu_i * a_i. States are built this way, so anything
  // beyond rounding of the product is a real inconsistency.
  if (hh.leverage_ratios && hh.debts.size() == n && hh.leverage_ratios->size() == n) {
    for (std::size_t i = 0; i < n; ++i) {
      const double expect = (*hh.leverage_ratios)[i] * hh.net_assets[i];
      const double resid = hh.debts[i] - expect;
      if (std::abs(resid) > 1e-12 * std::max(1.0, std::abs(expect))) {
        out.push_back({"debt_identity", static_cast<std::ptrdiff_t>(i), resid, ""});
      }
    }
  }

  for (std::size_t j = 0; j < state.firm_count(); ++j) {
    if (!(state.firms.equity_values[j] > 0.0)) {
      out.push_back({"equity_positive", static_cast<std::ptrdiff_t>(j),
                     state.firms.equity_values[j], ""});
    }
  }

  if (state.firm_count() > 0 && state.firms.betas.size() == state.firm_count()) {
    const double mean = weighted_beta_mean(state.firms.equity_values, state.firms.betas);
    if (std::abs(mean - 1.0) > kBetaMeanTol) {
      out.push_back({"beta_normalization", -1, mean - 1.0,
                     "value-weighted mean beta differs from 1"});
    }
  }

  // Dual aggregation: household net assets and firm equity describe the same
  // stock of wealth.
  const double a_households = pairwise_sum(hh.net_assets);
  const double a_firms = pairwise_sum(state.firms.equity_values);
  const double scale = std::max(std::abs(a_firms), 1e-300);
  if (std::abs(a_households - a_firms) > kDualAggregationTol * scale) {
    out.push_back({"dual_aggregation", -1, (a_households - a_firms) / scale,
                   "household and firm wealth totals disagree"});
  }
  return out;
}

std::vector<Violation> validate(const EconomyState& state) {
  std::vector<Violation> out = validate_dynamic(state);
  const std::size_t n = state.household_count();
  const std::size_t f = state.firm_count();

  const auto& hh = state.households;
  if (!hh.saving_rates || hh.saving_rates->size() != n) {
    out.push_back({"saving_rates_shape", -1, 0.0, "missing or mis-sized saving rates"});
  }
  if (!hh.leverage_ratios || hh.leverage_ratios->size() != n) {
    out.push_back({"leverage_shape", -1, 0.0, "missing or mis-sized leverage ratios"});
  }
  if (!hh.relative_wages || hh.relative_wages->size() != n) {
    out.push_back({"relative_wages_shape", -1, 0.0, "missing or mis-sized relative wages"});
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (!((*hh.relative_wages)[i] >= 0.0)) {
        out.push_back({"relative_wage_nonnegative", static_cast<std::ptrdiff_t>(i),
                       (*hh.relative_wages)[i], ""});
      }
    }
  }

  if (!hh.portfolio_weights || hh.portfolio_weights->rows() != n ||
      hh.portfolio_weights->cols() != f) {
    out.push_back({"portfolio_shape", -1, 0.0, "missing or mis-sized portfolio weights"});
  } else {
    auto w = validate_portfolio_weights(*hh.portfolio_weights);
    out.insert(out.end(), w.begin(), w.end());
  }

  if (state.goods.relative_prices) {
    const auto& prices = *state.goods.relative_prices;
    if (!prices.empty() && prices[0] != 1.0) {
      out.push_back({"numeraire_price", 0, prices[0] - 1.0,
                     "numeraire relative price must be exactly 1"});
    }
    for (std::size_t g = 0; g < prices.size(); ++g) {
      if (!(prices[g] > 0.0)) {
        out.push_back({"relative_price_positive", static_cast<std::ptrdiff_t>(g),
                       prices[g], ""});
      }
    }
  }
  if (state.goods.purchase_quantities) {
    const Matrix& q = *state.goods.purchase_quantities;
    if (q.rows() != n || (state.goods.relative_prices &&
                          q.cols() != state.goods.relative_prices->size())) {
      out.push_back({"quantities_shape", -1, 0.0, "purchase quantities mis-sized"});
    }
    for (std::size_t i = 0; i < q.rows(); ++i) {
      for (double x : q.row(i)) {
        if (!(x >= 0.0)) {
          out.push_back({"quantity_nonnegative", static_cast<std::ptrdiff_t>(i), x, ""});
          break;
        }
      }
    }
  }
  return out;
}

Aggregates aggregate(const EconomyState& state, std::span<const double> household_incomes) {
  Aggregates agg;
  const double a_households = pairwise_sum(state.households.net_assets);
  const double a_firms = pairwise_sum(state.firms.equity_values);
  const double scale = std::max(std::abs(a_firms), 1e-300);
  if (std::abs(a_households - a_firms) > kDualAggregationTol * scale) {
    std::ostringstream os;
    os << "aggregate: household total " << a_households << " and firm total " << a_firms
       << " disagree beyond tolerance";
    throw AggregationMismatchError(os.str(), (a_households - a_firms) / scale);
  }
  agg.net_assets = a_firms;
  agg.debt = pairwise_sum(state.households.debts);
  if (state.households.relative_wages) {
    agg.labor_income = state.price_level * pairwise_sum(*state.households.relative_wages);
  }
  if (!household_incomes.empty()) {
    if (household_incomes.size() != state.household_count() ||
        !state.households.saving_rates) {
      throw DimensionError("aggregate: incomes size does not match household count");
    }
    std::vector<double> consumed(household_incomes.size());
    const auto& s = *state.households.saving_rates;
    for (std::size_t i = 0; i < consumed.size(); ++i) {
      consumed[i] = (1.0 - s[i]) * household_incomes[i];
    }
    agg.consumption = pairwise_sum(consumed);
  }
  return agg;
}

double weighted_beta_mean(std::span<const double> equity_values,
                          std::span<const double> betas) {
  const double total = pairwise_sum(equity_values);
  if (total == 0.0) throw DegenerateDenominatorError("weighted_beta_mean: zero total equity");
  return pairwise_dot(equity_values, betas) / total;
}

double normalize_betas(std::span<const double> equity_values, std::span<double> betas) {
  const double mean = weighted_beta_mean(equity_values, betas);
  if (mean == 0.0 || !std::isfinite(mean)) {
    throw DegenerateDenominatorError("normalize_betas: weighted mean beta is zero");
  }
  for (double& b : betas) b /= mean;
  return mean;
}

void require_valid(const std::vector<Violation>& violations, const std::string& context) {
  if (violations.empty()) return;
  std::ostringstream os;
  os << context << ": " << violations.size() << " invariant violation(s):";
  const std::size_t shown = std::min<std::size_t>(violations.size(), 5);
  for (std::size_t i = 0; i < shown; ++i) {
    os << " [" << violations[i].invariant << " idx=" << violations[i].index
       << " residual=" << violations[i].residual << "]";
  }
  throw ValidationError(os.str());
}

}  // namespace econsim
