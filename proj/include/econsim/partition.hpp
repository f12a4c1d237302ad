#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "econsim/matrix.hpp"
#include "econsim/solver.hpp"
#include "econsim/state.hpp"

namespace econsim {

// Value-weighted portfolio over all firm equity.
std::vector<double> market_portfolio(const FirmBlock& firms);

// A cover of the households by disjoint groups whose gross-wealth-weighted
// portfolios approximate the market portfolio.
struct Partition {
  std::vector<int> assignment;       // household index -> group in [0, groups)
  Matrix group_portfolios;           // groups x firms
  std::vector<double> distances;     // Euclidean distance to the market portfolio
  std::vector<double> group_wealth;  // gross (a_i + d_i) totals per group

  int groups() const { return static_cast<int>(distances.size()); }
  double max_distance() const;
  std::vector<std::vector<std::size_t>> members() const;
};

class PartitionEpsilonError : public Error {
 public:
  PartitionEpsilonError(const std::string& what, Partition best, double max_distance)
      : Error(what), best(std::move(best)), max_distance(max_distance) {}
  Partition best;
  double max_distance;
};

// Greedy construction: households sorted by gross wealth descending are dealt
// round-robin into the groups, then seeded local-improvement passes swap
// pairs across groups while the largest group distance keeps falling. Succeeds
// when every distance is below epsilon; otherwise throws
// PartitionEpsilonError carrying the best partition found (existence is only
// guaranteed for large populations).
Partition partition_households(const EconomyState& state, int groups, double epsilon,
                               std::uint64_t seed);

// Income-weighted saving rate of one group of households,
// sum s_i y_i / sum y_i over the members.
double group_saving_rate(const EconomyState& state, const PeriodSolution& solution,
                         std::span<const std::size_t> members);

// Relabels groups so group 0 has the highest saving rate, ties broken by the
// lower original index. Deterministic.
Partition relabel_by_saving(const EconomyState& state, const PeriodSolution& solution,
                            const Partition& partition);

std::vector<double> group_saving_rates(const EconomyState& state,
                                       const PeriodSolution& solution,
                                       const Partition& partition);

}  // namespace econsim
