#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "econsim/errors.hpp"
#include "econsim/matrix.hpp"

namespace econsim {

// Agent data is stored as parallel flat vectors keyed by integer index
// (structure-of-arrays): the model is vectorized algebra and populations up
// to 1e6 must stay cheap. Exogenous fields that are shared across many
// states (portfolio weights, relative prices, purchase quantities, saving
// rates, ...) sit behind shared_ptr<const ...>; a state never mutates them.

// Per-household data. debts must equal leverage_ratios * net_assets at all
// times; saving rates live in [0,1) and leverage ratios in [0,1).
struct HouseholdBlock {
  std::vector<double> net_assets;  // nominal, one entry per household
  std::vector<double> debts;       // nominal; always leverage * net_assets
  std::shared_ptr<const std::vector<double>> saving_rates;
  std::shared_ptr<const std::vector<double>> leverage_ratios;
  std::shared_ptr<const std::vector<double>> relative_wages;  // wage / price level
  std::shared_ptr<const Matrix> portfolio_weights;  // households x firms, rows sum to 1
};

// Per-firm data. Betas are stored normalized: the equity-value-weighted mean
// beta is 1, which keeps the value-weighted mean of firm returns equal to
// the market return.
struct FirmBlock {
  std::vector<double> equity_values;  // strictly positive
  std::vector<double> betas;
};

struct GoodsBlock {
  // Prices relative to the numeraire good (index 0, pinned to exactly 1).
  std::shared_ptr<const std::vector<double>> relative_prices;
  std::shared_ptr<const Matrix> purchase_quantities;  // households x goods, real units
};

struct EconomyState {
  long period = 0;
  HouseholdBlock households;
  FirmBlock firms;
  GoodsBlock goods;
  double price_level = 1.0;  // nominal price of the numeraire good

  std::size_t household_count() const { return households.net_assets.size(); }
  std::size_t firm_count() const { return firms.equity_values.size(); }
  std::size_t good_count() const {
    return goods.relative_prices ? goods.relative_prices->size() : 0;
  }
};

struct Violation {
  std::string invariant;   // short name of the violated invariant
  std::ptrdiff_t index;    // offending agent/row index, -1 for state-wide
  double residual;         // magnitude of the violation
  std::string detail;
};

// Tolerances used by the validators.
inline constexpr double kPortfolioRowTol = 1e-12;
inline constexpr double kBetaMeanTol = 1e-9;
inline constexpr double kDualAggregationTol = 1e-9;

// Full invariant scan; empty result iff the state is consistent. Purely
// diagnostic: never throws.
std::vector<Violation> validate(const EconomyState& state);

// The O(households + firms) subset that can change from one period to the
// next (debt identity, equity positivity, beta normalization, dual
// aggregation, price level). Matrix-shaped exogenous data is validated when
// loaded or replaced, not on every step.
std::vector<Violation> validate_dynamic(const EconomyState& state);

// Validates one matrix of portfolio weights / quantities outside a state.
std::vector<Violation> validate_portfolio_weights(const Matrix& weights);

struct Aggregates {
  double consumption = 0.0;   // total nominal consumption
  double net_assets = 0.0;    // total household net assets == total firm equity
  double labor_income = 0.0;  // total nominal wages at the state's price level
  double debt = 0.0;          // total household debt
};

// Column sums over the state. Total net assets are computed from both the
// household side and the firm side and must agree to kDualAggregationTol
// (relative); disagreement throws AggregationMismatchError since it means
// the state itself is inconsistent. `household_incomes` (nominal, per
// household) feeds the consumption total as (1 - s_i) * income_i; pass an
// empty span when consumption is not needed.
Aggregates aggregate(const EconomyState& state,
                     std::span<const double> household_incomes = {});

// Equity-value-weighted mean beta.
double weighted_beta_mean(std::span<const double> equity_values,
                          std::span<const double> betas);

// Divides betas by their value-weighted mean so the normalized mean is 1.
// Returns the factor that was divided out. Throws DegenerateDenominatorError
// when the mean is zero.
double normalize_betas(std::span<const double> equity_values, std::span<double> betas);

// Throws ValidationError listing the first few violations when any exist.
void require_valid(const std::vector<Violation>& violations, const std::string& context);

}  // namespace econsim
