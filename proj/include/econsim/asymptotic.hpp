#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "econsim/errors.hpp"
#include "econsim/stats.hpp"

namespace econsim {

// Stationary market return implied by a group that saves at rate s with
// leverage mu against loan rate rbar: the unique R with
// s [R + mu (R - rbar)] = R.
struct SteadyStateReturn {
  double value = 0.0;
  bool negative_region = false;  // set when the stationary return is <= 0
};

SteadyStateReturn steady_state_return(double saving_rate, double leverage,
                                      double loan_rate);

// Group saving rates linear in the group index: s_i = slope * i + intercept
// for i = 1..groups, strictly decreasing from s_1 < 1 down to s_M > 0.
struct SavingSchedule {
  double slope = 0.0;      // < 0
  double intercept = 0.0;  // > 0
  int groups = 0;

  double rate(int group_1based) const { return slope * group_1based + intercept; }
  void validate() const;
};

// Time series for one household group evolved under the group-level
// dynamics. All vectors have length periods + 1 except market_return, which
// has one entry per transition.
struct GroupTrajectory {
  int group = 0;  // 1-based index
  std::vector<double> wealth;
  std::vector<double> debt;
  std::vector<double> share;        // fraction of total wealth, in (0, 1]
  std::vector<double> wage_income;  // per-period labor income of the group
};

struct GroupEvolution {
  std::vector<GroupTrajectory> groups;
  std::vector<double> market_return;  // realized R per transition
};

// Where the market return comes from: an externally supplied path, or the
// self-consistent closure where each period's R solves the aggregate saving
// identity over all groups (whose long-run limit is the stationary return of
// the highest-saving group).
struct ReturnSource {
  enum class Kind { External, SelfConsistent };
  Kind kind = Kind::SelfConsistent;
  std::vector<double> path;  // used when Kind::External

  static ReturnSource external(std::vector<double> r_path) {
    return {Kind::External, std::move(r_path)};
  }
  static ReturnSource self_consistent() { return {Kind::SelfConsistent, {}}; }
};

// Evolves group wealths:
//   A_k' = A_k (1 + s_k [R + mu (R - rbar)]) + s_k W_k        (wages kept)
// with D_k = mu A_k each period. `mu_path` and `rbar_path` broadcast when
// they hold a single value. With include_wages=false the wage term is
// dropped from accumulation (the strict asymptotic form).
GroupEvolution evolve_groups(std::span<const double> initial_wealth,
                             std::span<const double> wages, const SavingSchedule& schedule,
                             std::span<const double> mu_path,
                             std::span<const double> rbar_path, const ReturnSource& source,
                             long periods, bool include_wages = true);

// Elementwise labor-income-to-wealth ratio of one trajectory.
std::vector<double> wage_wealth_ratio(const GroupTrajectory& trajectory);

// First period at which the series drops (and stays) below the threshold.
std::optional<long> first_below(std::span<const double> series, double threshold);

// Predicted slope of log group wealth against log group index after the
// given horizon: sum over periods of a X / (1 + (a + b) X) with
// X = R + mu (R - rbar).
double predicted_loglog_slope(const SavingSchedule& schedule,
                              std::span<const double> r_path,
                              std::span<const double> mu_path,
                              std::span<const double> rbar_path, long periods);

struct TailFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_used = 0;
  double range_low = 0.0;
  double range_high = 0.0;
};

// OLS of log empirical CCDF rank fraction on log wealth over observations
// inside [range_low, range_high]. Requires at least 10 positive points in
// range.
TailFit fit_power_law_ccdf(std::span<const double> wealths,
                           double range_low = 0.0,
                           double range_high = std::numeric_limits<double>::infinity());

// OLS of log group wealth on log group index (1-based), for group-level
// series.
TailFit fit_power_law_rank(std::span<const double> group_wealths);

}  // namespace econsim
