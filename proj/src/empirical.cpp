#include "econsim/empirical.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include "econsim/csv.hpp"
#include "econsim/rng.hpp"

namespace econsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool defined(double x) { return std::isfinite(x); }

}  // namespace

Quarter parse_quarter(const std::string& text) {
  // 1964Q4 / 1964q4
  if (auto pos = text.find_first_of("Qq"); pos != std::string::npos && pos >= 4) {
    const int year = std::atoi(text.substr(0, pos).c_str());
    const int q = std::atoi(text.substr(pos + 1).c_str());
    if (year > 0 && q >= 1 && q <= 4) return {year, q};
    throw IoError("cannot parse quarter '" + text + "'");
  }
  // 1964-10-01 or 1964-10 or 1964/10/01
  int year = 0, month = 0;
  if (std::sscanf(text.c_str(), "%d-%d", &year, &month) == 2 ||
      std::sscanf(text.c_str(), "%d/%d", &year, &month) == 2) {
    if (year > 0 && month >= 1 && month <= 12) return {year, (month - 1) / 3 + 1};
  }
  throw IoError("cannot parse quarter '" + text + "'");
}

namespace {

// date-sortable key within a quarter so "last observation at or before the
// quarter end" is well defined for sub-quarterly data.
struct Observation {
  std::string date;
  double value;
};

std::map<int, double> load_one(const ColumnSource& src) {
  CsvTable table = read_csv(src.path, true);
  if (table.rows.empty()) throw IoError("series '" + src.path + "' has no rows");
  const std::size_t dcol = table.column(src.date_column);
  const std::size_t vcol = table.column(src.value_column);
  std::map<int, Observation> last;
  for (const auto& row : table.rows) {
    if (row.size() <= std::max(dcol, vcol)) continue;
    const std::string& date = row[dcol];
    const std::string& cell = row[vcol];
    if (cell.empty() || cell == "." || cell == "NA") continue;
    char* end = nullptr;
    const double value = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str()) continue;
    const Quarter q = parse_quarter(date);
    auto it = last.find(q.index());
    if (it == last.end() || date >= it->second.date) {
      last[q.index()] = {date, value};
    }
  }
  if (last.empty()) throw IoError("series '" + src.path + "' has no usable observations");
  std::map<int, double> out;
  for (const auto& [idx, obs] : last) out[idx] = obs.value;
  return out;
}

}  // namespace

QuarterlySeries load_series(const LoadSpec& spec) {
  struct Named {
    const char* name;
    const ColumnSource* src;
    std::vector<double> QuarterlySeries::* column;
  };
  QuarterlySeries panel;
  const Named series[] = {
      {"net_worth", &spec.net_worth, &QuarterlySeries::net_worth},
      {"debt_to_gdp", &spec.debt_to_gdp, &QuarterlySeries::debt_to_gdp},
      {"gdp", &spec.gdp, &QuarterlySeries::gdp},
      {"sp_index", &spec.sp_index, &QuarterlySeries::sp_index},
      {"loan_rate", &spec.loan_rate, &QuarterlySeries::loan_rate},
      {"consumption", &spec.consumption, &QuarterlySeries::consumption},
      {"government", &spec.government, &QuarterlySeries::government},
  };

  std::vector<std::map<int, double>> loaded;
  int first = std::numeric_limits<int>::min();
  int last = std::numeric_limits<int>::max();
  for (const Named& s : series) {
    loaded.push_back(load_one(*s.src));
    first = std::max(first, loaded.back().begin()->first);
    last = std::min(last, loaded.back().rbegin()->first);
  }
  if (first > last) throw IoError("load_series: the series have no common quarters");

  const std::size_t n = static_cast<std::size_t>(last - first + 1);
  panel.quarters.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    panel.quarters[i] = Quarter::from_index(first + static_cast<int>(i));
  }
  for (std::size_t si = 0; si < loaded.size(); ++si) {
    auto& col = panel.*(series[si].column);
    col.assign(n, kNaN);
    for (std::size_t i = 0; i < n; ++i) {
      auto it = loaded[si].find(first + static_cast<int>(i));
      if (it != loaded[si].end()) {
        col[i] = it->second;
      } else {
        panel.gaps.push_back(std::string(series[si].name) + " missing at " +
                             panel.quarters[i].str());
      }
    }
  }
  if (spec.loan_rate_is_percent) {
    for (double& r : panel.loan_rate) r /= 100.0;
  }
  return panel;
}

void derive_columns(QuarterlySeries& p) {
  const std::size_t n = p.size();
  p.debt.assign(n, kNaN);
  p.saving_rate.assign(n, kNaN);
  p.gdp_growth.assign(n, kNaN);
  p.quarterly_return.assign(n, kNaN);
  p.annual_return.assign(n, kNaN);
  p.realized_premium.assign(n, kNaN);
  for (std::size_t t = 0; t < n; ++t) {
    if (defined(p.debt_to_gdp[t]) && defined(p.gdp[t])) {
      p.debt[t] = p.debt_to_gdp[t] * p.gdp[t];
    }
    if (defined(p.consumption[t]) && defined(p.gdp[t]) && p.gdp[t] > 0.0) {
      p.saving_rate[t] = 1.0 - p.consumption[t] / p.gdp[t];
      if (!(p.saving_rate[t] > 0.0) || !(p.saving_rate[t] < 1.0)) {
        p.gaps.push_back("saving rate outside (0,1) at " + p.quarters[t].str());
        p.saving_rate[t] = kNaN;
      }
    }
    if (t >= 4 && defined(p.gdp[t]) && defined(p.gdp[t - 4]) && p.gdp[t - 4] != 0.0) {
      p.gdp_growth[t] = (p.gdp[t] - p.gdp[t - 4]) / p.gdp[t - 4];
    }
    if (t >= 1 && defined(p.sp_index[t]) && defined(p.sp_index[t - 1]) &&
        p.sp_index[t - 1] != 0.0) {
      p.quarterly_return[t] = (p.sp_index[t] - p.sp_index[t - 1]) / p.sp_index[t - 1];
    }
  }
  for (std::size_t t = 3; t < n; ++t) {
    // Additive annualization over the four most recent quarterly returns.
    if (defined(p.quarterly_return[t]) && defined(p.quarterly_return[t - 1]) &&
        defined(p.quarterly_return[t - 2]) && defined(p.quarterly_return[t - 3])) {
      p.annual_return[t] = p.quarterly_return[t] + p.quarterly_return[t - 1] +
                           p.quarterly_return[t - 2] + p.quarterly_return[t - 3];
    }
    if (defined(p.annual_return[t]) && defined(p.loan_rate[t])) {
      p.realized_premium[t] = p.annual_return[t] - p.loan_rate[t];
    }
  }
}

void compute_theoretical_premium(QuarterlySeries& p) {
  const std::size_t n = p.size();
  p.theoretical_premium.assign(n, kNaN);
  for (std::size_t t = 4; t < n; ++t) {
    const double s = p.saving_rate[t - 4];
    const double y_lag = p.gdp[t - 4];
    const double y = p.gdp[t];
    if (!defined(s) || !defined(y_lag) || !defined(y) || !defined(p.government[t - 4]) ||
        !defined(p.net_worth[t]) || !defined(p.net_worth[t - 4]) ||
        !defined(p.debt[t - 4]) || !defined(p.gdp_growth[t]) || y_lag == 0.0 || y == 0.0) {
      continue;
    }
    const double denom = (p.debt[t - 4] / y_lag) * s;
    if (denom == 0.0) continue;
    const double numerator = -s + s * (p.government[t - 4] / y_lag) +
                             (p.net_worth[t] / y) * (1.0 + p.gdp_growth[t]) -
                             p.net_worth[t - 4] / y_lag;
    p.theoretical_premium[t] = numerator / denom;
  }
}

QuarterlySeries generate_synthetic(std::uint64_t seed, const SyntheticParams& prm) {
  if (prm.quarters < 12) throw ValidationError("generate_synthetic: need >= 12 quarters");
  if (!(prm.saving_mean - prm.saving_amp > 0.0) ||
      !(prm.saving_mean + prm.saving_amp < 1.0)) {
    throw ValidationError("generate_synthetic: saving rate must stay inside (0,1)");
  }
  Rng rng(seed);
  Rng ret_rng = rng.fork("returns");
  Rng rate_rng = rng.fork("loan-rate");

  const std::size_t n = static_cast<std::size_t>(prm.quarters);
  QuarterlySeries p;
  p.quarters.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.quarters[i] = Quarter::from_index(prm.start.index() + static_cast<int>(i));
  }
  p.gdp.resize(n);
  p.consumption.resize(n);
  p.government.resize(n);
  p.debt_to_gdp.resize(n);
  p.loan_rate.resize(n);
  p.sp_index.resize(n);
  p.net_worth.assign(n, kNaN);

  std::vector<double> saving(n), gov_share(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double cycle = std::sin(2.0 * 3.14159265358979323846 * double(t) / 19.0);
    p.gdp[t] = prm.gdp0 * std::pow(1.0 + prm.gdp_growth_quarterly, double(t));
    saving[t] = prm.saving_mean + prm.saving_amp * cycle;
    gov_share[t] = prm.gov_share_mean + prm.gov_share_amp * std::cos(0.37 * double(t));
    p.consumption[t] = (1.0 - saving[t]) * p.gdp[t];
    p.government[t] = gov_share[t] * p.gdp[t];
    p.debt_to_gdp[t] = prm.debt_ratio_mean + prm.debt_ratio_amp * std::sin(0.23 * double(t));
    p.loan_rate[t] = std::max(
        1e-4, prm.loan_rate_mean + prm.loan_rate_amp * std::sin(0.11 * double(t)) +
                  prm.loan_rate_noise * rate_rng.normal());
  }
  p.sp_index[0] = 100.0;
  for (std::size_t t = 1; t < n; ++t) {
    const double rq = ret_rng.normal(prm.quarterly_return_mean, prm.quarterly_return_sd);
    p.sp_index[t] = p.sp_index[t - 1] * (1.0 + rq);
    if (!(p.sp_index[t] > 0.0)) {
      throw ValidationError("generate_synthetic: index path left the positive domain");
    }
  }

  // Net worth follows the macro identity with annual (4-quarter) steps:
  //   A_t = A_{t-4} + Y_{t-4} [ premium * (D/Y) s + s (1 - G/Y) ]  (lagged terms)
  for (std::size_t t = 0; t < 4 && t < n; ++t) {
    p.net_worth[t] = prm.net_worth0 * (1.0 + 0.01 * double(t));
  }
  for (std::size_t t = 4; t < n; ++t) {
    double annual_ret = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      annual_ret += (p.sp_index[t - k] - p.sp_index[t - k - 1]) / p.sp_index[t - k - 1];
    }
    const double premium = annual_ret - p.loan_rate[t];
    const double s = saving[t - 4];
    p.net_worth[t] =
        p.net_worth[t - 4] +
        p.gdp[t - 4] * (premium * p.debt_to_gdp[t - 4] * s + s * (1.0 - gov_share[t - 4]));
    if (!(p.net_worth[t] > 0.0)) {
      throw ValidationError("generate_synthetic: infeasible parameters, net worth "
                            "became non-positive");
    }
  }
  derive_columns(p);
  compute_theoretical_premium(p);
  return p;
}

RegressionReport regress(const QuarterlySeries& p) {
  std::vector<double> x, y;
  RegressionReport report;
  bool have_first = false;
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (defined(p.theoretical_premium[t]) && defined(p.realized_premium[t])) {
      x.push_back(p.theoretical_premium[t]);
      y.push_back(p.realized_premium[t]);
      if (!have_first) {
        report.first = p.quarters[t];
        have_first = true;
      }
      report.last = p.quarters[t];
    }
  }
  if (x.size() < 3) {
    throw InsufficientDataError("regress: fewer than 3 paired observations");
  }
  report.fit = ols(x, y);
  report.used = x.size();
  return report;
}

void write_base_csvs(const QuarterlySeries& p, const std::string& directory) {
  std::filesystem::create_directories(directory);
  struct Item {
    const char* file;
    const std::vector<double>* col;
    bool as_percent;
  };
  const Item items[] = {
      {"net_worth.csv", &p.net_worth, false}, {"debt_to_gdp.csv", &p.debt_to_gdp, false},
      {"gdp.csv", &p.gdp, false},             {"sp_index.csv", &p.sp_index, false},
      {"loan_rate.csv", &p.loan_rate, true},  {"consumption.csv", &p.consumption, false},
      {"government.csv", &p.government, false},
  };
  for (const Item& item : items) {
    std::ofstream out(directory + "/" + item.file, std::ios::binary);
    if (!out) throw IoError("cannot write '" + std::string(item.file) + "'");
    out << "date,value\n";
    for (std::size_t t = 0; t < p.size(); ++t) {
      const double v = (*item.col)[t];
      if (!defined(v)) continue;
      out << p.quarters[t].str() << ","
          << format_double(item.as_percent ? v * 100.0 : v) << "\n";
    }
  }
}

}  // namespace econsim
