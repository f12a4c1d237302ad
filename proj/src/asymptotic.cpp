#include "econsim/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "econsim/summation.hpp"

namespace econsim {

OlsFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("ols: size mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw InsufficientDataError("ols: need at least 3 observations");
  const double xbar = pairwise_sum(x) / static_cast<double>(n);
  const double ybar = pairwise_sum(y) / static_cast<double>(n);
  std::vector<double> sxx(n), sxy(n), syy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - xbar;
    const double dy = y[i] - ybar;
    sxx[i] = dx * dx;
    sxy[i] = dx * dy;
    syy[i] = dy * dy;
  }
  const double Sxx = pairwise_sum(sxx);
  const double Sxy = pairwise_sum(sxy);
  const double Syy = pairwise_sum(syy);
  if (!(Sxx > 0.0)) throw ValidationError("ols: regressor has zero variance");

  OlsFit fit;
  fit.n = n;
  fit.slope = Sxy / Sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - fit.intercept - fit.slope * x[i];
    ssr += e * e;
  }
  fit.r_squared = Syy > 0.0 ? 1.0 - ssr / Syy : 1.0;
  const double dof = static_cast<double>(n - 2);
  const double sigma2 = ssr / dof;
  fit.slope_se = std::sqrt(sigma2 / Sxx);
  fit.intercept_se =
      std::sqrt(sigma2 * (1.0 / static_cast<double>(n) + xbar * xbar / Sxx));
  fit.slope_t = fit.slope_se > 0.0 ? fit.slope / fit.slope_se
                                   : std::numeric_limits<double>::infinity();
  fit.intercept_t = fit.intercept_se > 0.0
                        ? fit.intercept / fit.intercept_se
                        : std::numeric_limits<double>::infinity();
  fit.f_stat = fit.slope_t * fit.slope_t;
  fit.correlation = Syy > 0.0 ? Sxy / std::sqrt(Sxx * Syy) : 0.0;
  return fit;
}

SteadyStateReturn steady_state_return(double saving_rate, double leverage,
                                      double loan_rate) {
  const double denom = saving_rate * (1.0 + leverage) - 1.0;
  if (std::abs(denom) < 1e-14) {
    throw DegenerateDenominatorError(
        "steady_state_return: s(1+mu) = 1; the stationary-share condition has no "
        "finite solution");
  }
  SteadyStateReturn out;
  out.value = saving_rate * leverage * loan_rate / denom;
  out.negative_region = !(out.value > 0.0);
  return out;
}

void SavingSchedule::validate() const {
  if (groups < 1) throw ValidationError("schedule: needs at least one group");
  if (!(slope < 0.0)) throw ValidationError("schedule: slope must be negative");
  if (!(intercept > 0.0)) throw ValidationError("schedule: intercept must be positive");
  const double s1 = rate(1);
  const double sm = rate(groups);
  if (!(s1 < 1.0) || !(sm > 0.0)) {
    throw ValidationError("schedule: rates must satisfy 1 > s_1 > ... > s_M > 0");
  }
}

namespace {

double broadcast(std::span<const double> path, long t, const char* name) {
  if (path.empty()) throw ValidationError(std::string(name) + ": empty path");
  if (path.size() == 1) return path[0];
  if (static_cast<std::size_t>(t) >= path.size()) {
    throw ValidationError(std::string(name) + ": path shorter than the horizon");
  }
  return path[static_cast<std::size_t>(t)];
}

}  // namespace

GroupEvolution evolve_groups(std::span<const double> initial_wealth,
                             std::span<const double> wages, const SavingSchedule& schedule,
                             std::span<const double> mu_path,
                             std::span<const double> rbar_path, const ReturnSource& source,
                             long periods, bool include_wages) {
  schedule.validate();
  const std::size_t m = initial_wealth.size();
  if (m != static_cast<std::size_t>(schedule.groups)) {
    throw DimensionError("evolve_groups: wealth entries do not match group count");
  }
  if (wages.size() != m) throw DimensionError("evolve_groups: wage entries mismatch");
  if (source.kind == ReturnSource::Kind::External &&
      source.path.size() < static_cast<std::size_t>(periods)) {
    throw ValidationError("evolve_groups: external return path shorter than horizon");
  }
  for (double a : initial_wealth) {
    if (!(a > 0.0)) throw ValidationError("evolve_groups: initial wealth must be positive");
  }

  GroupEvolution evo;
  evo.groups.resize(m);
  std::vector<double> wealth(initial_wealth.begin(), initial_wealth.end());
  for (std::size_t k = 0; k < m; ++k) {
    auto& g = evo.groups[k];
    g.group = static_cast<int>(k) + 1;
    g.wealth.reserve(periods + 1);
    g.debt.reserve(periods + 1);
    g.share.reserve(periods + 1);
    g.wage_income.assign(periods + 1, 0.0);
  }
  evo.market_return.reserve(periods);

  auto record = [&](long t, double mu) {
    const double total = pairwise_sum(wealth);
    for (std::size_t k = 0; k < m; ++k) {
      auto& g = evo.groups[k];
      g.wealth.push_back(wealth[k]);
      g.debt.push_back(mu * wealth[k]);
      g.share.push_back(wealth[k] / total);
      g.wage_income[static_cast<std::size_t>(t)] = wages[k];
    }
  };

  record(0, broadcast(mu_path, 0, "mu_path"));

  for (long t = 0; t < periods; ++t) {
    const double mu = broadcast(mu_path, t, "mu_path");
    const double rbar = broadcast(rbar_path, t, "rbar_path");

    double market_return;
    if (source.kind == ReturnSource::Kind::External) {
      market_return = source.path[static_cast<std::size_t>(t)];
    } else {
      // Aggregate closure: R such that total saved income equals total
      // wealth growth,
      //   sum_k s_k [A_k (R + mu (R - rbar)) + W_k] = R sum_k A_k.
      double saved_wealth = 0.0, saved_wages = 0.0, total = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double s_k = schedule.rate(static_cast<int>(k) + 1);
        saved_wealth += s_k * wealth[k];
        if (include_wages) saved_wages += s_k * wages[k];
        total += wealth[k];
      }
      const double denom = (1.0 + mu) * saved_wealth - total;
      if (std::abs(denom) < 1e-14 * std::max(total, 1.0)) {
        throw DegenerateDenominatorError(
            "evolve_groups: the aggregate closure has no finite return at period " +
            std::to_string(t));
      }
      market_return = (mu * rbar * saved_wealth - saved_wages) / denom;
    }
    evo.market_return.push_back(market_return);

    const double levered = market_return + mu * (market_return - rbar);
    for (std::size_t k = 0; k < m; ++k) {
      const double s_k = schedule.rate(static_cast<int>(k) + 1);
      double next = wealth[k] * (1.0 + s_k * levered);
      if (include_wages) next += s_k * wages[k];
      if (!(next > 0.0) || !std::isfinite(next)) {
        throw NonConvergenceError(
            "evolve_groups: group wealth left the positive domain at period " +
                std::to_string(t),
            next);
      }
      wealth[k] = next;
    }
    record(t + 1, broadcast(mu_path, std::min<long>(t + 1, periods - 1), "mu_path"));
  }
  return evo;
}

std::vector<double> wage_wealth_ratio(const GroupTrajectory& trajectory) {
  std::vector<double> ratio(trajectory.wealth.size());
  for (std::size_t t = 0; t < ratio.size(); ++t) {
    ratio[t] = trajectory.wage_income[t] / trajectory.wealth[t];
  }
  return ratio;
}

std::optional<long> first_below(std::span<const double> series, double threshold) {
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (series[t] < threshold) {
      bool stays = true;
      for (std::size_t u = t; u < series.size(); ++u) {
        if (series[u] >= threshold) {
          stays = false;
          break;
        }
      }
      if (stays) return static_cast<long>(t);
    }
  }
  return std::nullopt;
}

double predicted_loglog_slope(const SavingSchedule& schedule,
                              std::span<const double> r_path,
                              std::span<const double> mu_path,
                              std::span<const double> rbar_path, long periods) {
  double total = 0.0;
  for (long k = 0; k < periods; ++k) {
    const double r = broadcast(r_path, k, "r_path");
    const double mu = broadcast(mu_path, k, "mu_path");
    const double rbar = broadcast(rbar_path, k, "rbar_path");
    const double levered = r + mu * (r - rbar);
    total += schedule.slope * levered /
             (1.0 + (schedule.slope + schedule.intercept) * levered);
  }
  return total;
}

TailFit fit_power_law_ccdf(std::span<const double> wealths, double range_low,
                           double range_high) {
  std::vector<double> sorted;
  sorted.reserve(wealths.size());
  for (double w : wealths) {
    if (w > 0.0 && std::isfinite(w)) sorted.push_back(w);
  }
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double n_total = static_cast<double>(sorted.size());

  std::vector<double> log_w, log_ccdf;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double w = sorted[k];
    if (w < range_low || w > range_high) continue;
    log_w.push_back(std::log(w));
    // rank fraction: share of observations at or above w
    log_ccdf.push_back(std::log(static_cast<double>(k + 1) / n_total));
  }
  if (log_w.size() < 10) {
    throw InsufficientDataError("fit_power_law_ccdf: fewer than 10 positive points in range");
  }
  const OlsFit fit = ols(log_w, log_ccdf);
  TailFit out;
  out.exponent = fit.slope;
  out.intercept = fit.intercept;
  out.r_squared = fit.r_squared;
  out.n_used = log_w.size();
  out.range_low = range_low;
  out.range_high = range_high;
  return out;
}

TailFit fit_power_law_rank(std::span<const double> group_wealths) {
  std::vector<double> log_i, log_w;
  for (std::size_t k = 0; k < group_wealths.size(); ++k) {
    if (!(group_wealths[k] > 0.0)) {
      throw ValidationError("fit_power_law_rank: group wealth must be positive");
    }
    log_i.push_back(std::log(static_cast<double>(k + 1)));
    log_w.push_back(std::log(group_wealths[k]));
  }
  const OlsFit fit = ols(log_i, log_w);
  TailFit out;
  out.exponent = fit.slope;
  out.intercept = fit.intercept;
  out.r_squared = fit.r_squared;
  out.n_used = log_i.size();
  out.range_low = 1.0;
  out.range_high = static_cast<double>(group_wealths.size());
  return out;
}

}  // namespace econsim
