#pragma once

#include <cstddef>
#include <span>

namespace econsim {

// Pairwise (cascade) summation with a fixed recursion shape. The result is a
// pure function of the input values and length, so reductions stay identical
// no matter how callers partition surrounding work across threads.
inline double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kBlock = 64;
  if (v.size() <= kBlock) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_dot(std::span<const double> a, std::span<const double> b) {
  constexpr std::size_t kBlock = 64;
  if (a.size() <= kBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }
  const std::size_t half = a.size() / 2;
  return pairwise_dot(a.first(half), b.first(half)) +
         pairwise_dot(a.subspan(half), b.subspan(half));
}

}  // namespace econsim
