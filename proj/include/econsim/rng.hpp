#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace econsim {

// Seeded random source with hand-rolled distribution transforms. The engine
// (mt19937_64) has standardized output and every transform below is written
// out explicitly, so a given (seed, call sequence) produces identical values
// on any conforming compiler. All randomness in the project flows through
// this class.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : root_(seed), engine_(mix(seed)) {}

  // Derives an independent deterministic stream, e.g. one per field and
  // period. Forking does not disturb this generator's state.
  Rng fork(std::uint64_t stream) const { return Rng(mix(root_ ^ mix(stream))); }
  Rng fork(std::string_view tag, std::uint64_t stream = 0) const {
    std::uint64_t h = 1469598103934665603ull;  // FNV offset basis
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return fork(h ^ mix(stream + 0x9e3779b97f4a7c15ull));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller without caching so the call sequence stays easy to reason about.
  double normal(double mean = 0.0, double sd = 1.0) {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * radius * std::cos(6.283185307179586476925287 * u2);
  }

  double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

  // Marsaglia-Tsang for shape >= 1, with the usual power boost below 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform01();
      return gamma(shape + 1.0) * std::pow(u > 0.0 ? u : 0x1.0p-53, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double pareto(double alpha, double xmin) {
    double u = uniform01();
    while (u <= 0.0) u = uniform01();
    return xmin * std::pow(u, -1.0 / alpha);
  }

  // Symmetric Dirichlet draw, normalized in place.
  void dirichlet(std::span<double> out, double alpha) {
    double total = 0.0;
    for (double& x : out) {
      x = gamma(alpha);
      total += x;
    }
    if (total <= 0.0) {
      const double w = 1.0 / static_cast<double>(out.size());
      for (double& x : out) x = w;
      return;
    }
    for (double& x : out) x /= total;
  }

 private:
  // splitmix64 finalizer; decorrelates nearby seeds.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t root_;
  std::mt19937_64 engine_;
};

}  // namespace econsim
