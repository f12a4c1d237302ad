#include "econsim/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "econsim/rng.hpp"
#include "econsim/summation.hpp"

namespace econsim {

std::vector<double> market_portfolio(const FirmBlock& firms) {
  const double total = pairwise_sum(firms.equity_values);
  if (!(total > 0.0)) {
    throw ValidationError("market_portfolio: total equity must be positive");
  }
  std::vector<double> w(firms.equity_values.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = firms.equity_values[j] / total;
  return w;
}

double Partition::max_distance() const {
  double m = 0.0;
  for (double d : distances) m = std::max(m, d);
  return m;
}

std::vector<std::vector<std::size_t>> Partition::members() const {
  std::vector<std::vector<std::size_t>> out(groups());
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    out[static_cast<std::size_t>(assignment[i])].push_back(i);
  }
  return out;
}

namespace {

double distance_to_market(std::span<const double> sum, double weight,
                          std::span<const double> market) {
  // sum holds the unnormalized wealth-weighted portfolio of a group.
  double d2 = 0.0;
  for (std::size_t j = 0; j < market.size(); ++j) {
    const double diff = sum[j] / weight - market[j];
    d2 += diff * diff;
  }
  return std::sqrt(d2);
}

}  // namespace

Partition partition_households(const EconomyState& state, int groups, double epsilon,
                               std::uint64_t seed) {
  const std::size_t n = state.household_count();
  const std::size_t f = state.firm_count();
  if (groups < 2) throw ValidationError("partition: at least 2 groups are required");
  if (n < static_cast<std::size_t>(groups)) {
    throw ValidationError("partition: fewer households than groups");
  }
  if (!(epsilon > 0.0)) throw ValidationError("partition: epsilon must be positive");
  const Matrix& weights = *state.households.portfolio_weights;

  std::vector<double> gross(n);
  for (std::size_t i = 0; i < n; ++i) {
    gross[i] = state.households.net_assets[i] + state.households.debts[i];
    if (!(gross[i] > 0.0)) {
      throw ValidationError("partition: household " + std::to_string(i) +
                            " has non-positive gross wealth");
    }
  }
  const std::vector<double> market = market_portfolio(state.firms);

  // Deal households into groups by descending gross wealth.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gross[a] > gross[b];
  });
  std::vector<int> assignment(n);
  for (std::size_t k = 0; k < n; ++k) {
    assignment[order[k]] = static_cast<int>(k % static_cast<std::size_t>(groups));
  }

  const std::size_t g = static_cast<std::size_t>(groups);
  Matrix sums(g, f, 0.0);
  std::vector<double> wealth(g, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = sums.row(static_cast<std::size_t>(assignment[i]));
    auto w = weights.row(i);
    for (std::size_t j = 0; j < f; ++j) row[j] += gross[i] * w[j];
    wealth[static_cast<std::size_t>(assignment[i])] += gross[i];
  }
  std::vector<double> dist(g);
  for (std::size_t k = 0; k < g; ++k) dist[k] = distance_to_market(sums.row(k), wealth[k], market);

  auto argmax = [&]() {
    std::size_t best = 0;
    for (std::size_t k = 1; k < g; ++k) {
      if (dist[k] > dist[best]) best = k;
    }
    return best;
  };

  // Local improvement: sample candidate cross-group swaps involving the
  // worst group and keep any that lowers the maximum distance. The budget
  // and the stop-on-stall rule keep this near-linear.
  Rng rng = Rng(seed).fork("partition-swaps");
  const long max_attempts = 10L * static_cast<long>(n);
  const int stall_limit = 500;
  int stalled = 0;
  std::vector<std::vector<std::size_t>> member_list(g);
  for (std::size_t i = 0; i < n; ++i) {
    member_list[static_cast<std::size_t>(assignment[i])].push_back(i);
  }
  std::vector<double> trial_a(f), trial_b(f);

  for (long attempt = 0; attempt < max_attempts; ++attempt) {
    const std::size_t worst = argmax();
    if (dist[worst] < epsilon) break;
    if (stalled >= stall_limit) break;

    const auto& from = member_list[worst];
    const std::size_t i = from[static_cast<std::size_t>(rng.next_u64() % from.size())];
    std::size_t j = static_cast<std::size_t>(rng.next_u64() % n);
    if (static_cast<std::size_t>(assignment[j]) == worst) {
      ++stalled;
      continue;
    }
    const std::size_t other = static_cast<std::size_t>(assignment[j]);

    for (std::size_t c = 0; c < f; ++c) {
      const double move = gross[i] * weights.at(i, c) - gross[j] * weights.at(j, c);
      trial_a[c] = sums.at(worst, c) - move;
      trial_b[c] = sums.at(other, c) + move;
    }
    const double wealth_a = wealth[worst] - gross[i] + gross[j];
    const double wealth_b = wealth[other] + gross[i] - gross[j];
    if (!(wealth_a > 0.0) || !(wealth_b > 0.0)) {
      ++stalled;
      continue;
    }
    const double da = distance_to_market(trial_a, wealth_a, market);
    const double db = distance_to_market(trial_b, wealth_b, market);
    const double current_max = dist[worst];
    if (std::max(da, db) < current_max * (1.0 - 1e-12)) {
      std::copy(trial_a.begin(), trial_a.end(), sums.row(worst).begin());
      std::copy(trial_b.begin(), trial_b.end(), sums.row(other).begin());
      wealth[worst] = wealth_a;
      wealth[other] = wealth_b;
      dist[worst] = da;
      dist[other] = db;
      auto& fa = member_list[worst];
      fa.erase(std::find(fa.begin(), fa.end(), i));
      fa.push_back(j);
      auto& fb = member_list[other];
      fb.erase(std::find(fb.begin(), fb.end(), j));
      fb.push_back(i);
      std::swap(assignment[i], assignment[j]);
      stalled = 0;
    } else {
      ++stalled;
    }
  }

  // Rebuild the group portfolios from scratch so the result is free of
  // incremental-update drift.
  Partition part;
  part.assignment = std::move(assignment);
  part.group_portfolios = Matrix(g, f, 0.0);
  part.group_wealth.assign(g, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = part.group_portfolios.row(static_cast<std::size_t>(part.assignment[i]));
    auto w = weights.row(i);
    for (std::size_t j = 0; j < f; ++j) row[j] += gross[i] * w[j];
    part.group_wealth[static_cast<std::size_t>(part.assignment[i])] += gross[i];
  }
  part.distances.assign(g, 0.0);
  for (std::size_t k = 0; k < g; ++k) {
    part.distances[k] =
        distance_to_market(part.group_portfolios.row(k), part.group_wealth[k], market);
    for (double& x : part.group_portfolios.row(k)) x /= part.group_wealth[k];
  }

  if (part.max_distance() >= epsilon) {
    const double achieved = part.max_distance();
    throw PartitionEpsilonError(
        "partition: could not reach epsilon=" + std::to_string(epsilon) +
            "; best max distance " + std::to_string(achieved),
        std::move(part), achieved);
  }
  return part;
}

double group_saving_rate(const EconomyState& state, const PeriodSolution& solution,
                         std::span<const std::size_t> members) {
  if (members.empty()) throw ValidationError("group_saving_rate: empty group");
  const auto& s = *state.households.saving_rates;
  std::vector<double> saved(members.size()), total(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    const double y = solution.household_incomes[members[k]];
    saved[k] = s[members[k]] * y;
    total[k] = y;
  }
  const double denom = pairwise_sum(total);
  if (denom == 0.0) {
    throw ZeroIncomeError("group_saving_rate: aggregate group income is zero");
  }
  return pairwise_sum(saved) / denom;
}

std::vector<double> group_saving_rates(const EconomyState& state,
                                       const PeriodSolution& solution,
                                       const Partition& partition) {
  auto members = partition.members();
  std::vector<double> rates(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    rates[k] = group_saving_rate(state, solution, members[k]);
  }
  return rates;
}

Partition relabel_by_saving(const EconomyState& state, const PeriodSolution& solution,
                            const Partition& partition) {
  const std::vector<double> rates = group_saving_rates(state, solution, partition);
  std::vector<std::size_t> order(rates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rates[a] != rates[b]) return rates[a] > rates[b];
    return a < b;  // ties keep the lower original index first
  });
  std::vector<int> new_label(rates.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    new_label[order[rank]] = static_cast<int>(rank);
  }

  Partition out;
  out.assignment.resize(partition.assignment.size());
  for (std::size_t i = 0; i < partition.assignment.size(); ++i) {
    out.assignment[i] = new_label[static_cast<std::size_t>(partition.assignment[i])];
  }
  const std::size_t g = rates.size();
  const std::size_t f = partition.group_portfolios.cols();
  out.group_portfolios = Matrix(g, f);
  out.distances.resize(g);
  out.group_wealth.resize(g);
  for (std::size_t k = 0; k < g; ++k) {
    const std::size_t src = order[k];
    std::copy(partition.group_portfolios.row(src).begin(),
              partition.group_portfolios.row(src).end(),
              out.group_portfolios.row(k).begin());
    out.distances[k] = partition.distances[src];
    out.group_wealth[k] = partition.group_wealth[src];
  }
  return out;
}

}  // namespace econsim
