#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "econsim/errors.hpp"
#include "econsim/stats.hpp"

namespace econsim {

struct Quarter {
  int year = 0;
  int q = 1;  // 1..4

  int index() const { return year * 4 + (q - 1); }
  static Quarter from_index(int idx) { return {idx / 4, idx % 4 + 1}; }
  std::string str() const { return std::to_string(year) + "Q" + std::to_string(q); }
  bool operator==(const Quarter&) const = default;
};

// Parses "1964Q4", "1964-10-01" (any day within the quarter) or
// "1964-10" style dates into the containing quarter.
Quarter parse_quarter(const std::string& text);

// Aligned quarterly panel. Base columns come from the input files; derived
// columns are NaN wherever a required lag is missing. Column units follow
// the source data: levels in billions, the loan rate as an annual fraction
// after loading, index levels as published.
struct QuarterlySeries {
  std::vector<Quarter> quarters;  // consecutive

  // base columns
  std::vector<double> net_worth;     // A_t
  std::vector<double> debt_to_gdp;   // DY_t
  std::vector<double> gdp;           // Y_t
  std::vector<double> sp_index;      // SP_t
  std::vector<double> loan_rate;     // annual fraction
  std::vector<double> consumption;   // pc_t
  std::vector<double> government;    // G_t

  // derived columns
  std::vector<double> debt;              // D = DY * Y
  std::vector<double> saving_rate;       // s = 1 - pc/Y
  std::vector<double> gdp_growth;        // g_t = Y_t/Y_{t-4} - 1
  std::vector<double> quarterly_return;  // (SP_t - SP_{t-1}) / SP_{t-1}
  std::vector<double> annual_return;     // sum of the last four quarterly returns
  std::vector<double> theoretical_premium;  // NEW_SERIES
  std::vector<double> realized_premium;     // annual_return - loan_rate

  std::vector<std::string> gaps;  // human-readable notes about missing data

  std::size_t size() const { return quarters.size(); }
};

struct ColumnSource {
  std::string path;
  std::string date_column = "date";
  std::string value_column = "value";
};

struct LoadSpec {
  ColumnSource net_worth, debt_to_gdp, gdp, sp_index, loan_rate, consumption, government;
  bool loan_rate_is_percent = true;  // divide by 100 on load
};

// Loads and aligns the seven series on the intersection of their quarterly
// coverage. Sub-quarterly series are collapsed by taking the last
// observation at or before each quarter end. Throws IoError for unreadable
// files or an empty intersection.
QuarterlySeries load_series(const LoadSpec& spec);

// Fills every derived column except the theoretical premium.
void derive_columns(QuarterlySeries& panel);

// Theoretical ex-post premium from macro aggregates with 4-quarter lags:
//   [ -s + s G/Y (both lagged) + (A/Y)(1+g) - lag(A/Y) ] / [ lag(D/Y) * s ]
// Rows without the needed lags or with a zero denominator stay NaN.
void compute_theoretical_premium(QuarterlySeries& panel);

struct SyntheticParams {
  long quarters = 60;
  Quarter start = {1990, 1};
  double gdp0 = 5000.0;
  double net_worth0 = 20000.0;
  double gdp_growth_quarterly = 0.012;
  double saving_mean = 0.20, saving_amp = 0.04;
  double debt_ratio_mean = 1.2, debt_ratio_amp = 0.2;
  double gov_share_mean = 0.20, gov_share_amp = 0.04;
  double loan_rate_mean = 0.05, loan_rate_amp = 0.02;
  double loan_rate_noise = 0.002;
  double quarterly_return_mean = 0.02, quarterly_return_sd = 0.04;
};

// Forward-constructs a panel on which the macro identity holds exactly, so
// the theoretical premium reproduces the realized premium row by row. The
// self-consistency oracle for the premium algebra.
QuarterlySeries generate_synthetic(std::uint64_t seed,
                                   const SyntheticParams& params = {});

struct RegressionReport {
  OlsFit fit;            // realized premium on theoretical premium
  std::size_t used = 0;  // rows entering the regression
  Quarter first{}, last{};
};

// OLS of the realized premium on the theoretical premium over all rows where
// both are defined. Throws InsufficientDataError below 3 paired rows.
RegressionReport regress(const QuarterlySeries& panel);

// Writes the panel's seven base columns as per-series CSV files named like
// the FRED mnemonics, for fixtures and round-trip tests.
void write_base_csvs(const QuarterlySeries& panel, const std::string& directory);

}  // namespace econsim
