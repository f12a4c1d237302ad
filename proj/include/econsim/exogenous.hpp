#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "econsim/config.hpp"
#include "econsim/matrix.hpp"
#include "econsim/rng.hpp"
#include "econsim/state.hpp"

namespace econsim {

struct Dims {
  std::size_t households = 0;
  std::size_t firms = 0;
  std::size_t goods = 1;
};

// Everything the stepper needs from outside for one period. Constant fields
// hand out the same shared object every period, which downstream caches key
// on (pointer identity == "unchanged").
struct PeriodInputs {
  double loan_rate = 0.0;
  std::shared_ptr<const std::vector<double>> saving_rates;
  std::shared_ptr<const std::vector<double>> leverage_ratios;
  std::shared_ptr<const std::vector<double>> relative_wages;
  std::shared_ptr<const std::vector<double>> betas;  // raw, normalized by the solver
  std::shared_ptr<const std::vector<double>> relative_prices;
  std::shared_ptr<const Matrix> portfolio_weights;
  std::shared_ptr<const Matrix> purchase_quantities;
};

// How one exogenous field is produced: a constant, an explicit per-period
// table, or a seeded random rule (drawn once, or re-drawn every period when
// per_period is set).
class FieldSource {
 public:
  enum class Target { SavingRate, Leverage, Wage, Beta, RelativePrice, Quantity, Weights, Scalar };

  static FieldSource constant_scalar(double v);
  static FieldSource constant_vector(std::vector<double> v);
  static FieldSource constant_matrix(Matrix m);
  static FieldSource scalar_table(std::vector<double> per_period);

  // Parses a config node: number, array, or inline table with
  // {value=...} | {csv=...} | {dist=..., ..., seed=..., per_period=...}.
  static FieldSource from_config(const ConfigValue& node, Target target,
                                 const std::string& base_dir);

  bool per_period() const { return per_period_; }
  long table_periods() const;  // -1 when not an explicit per-period table

  double scalar_at(long t, const Rng& root, const std::string& field) const;
  std::shared_ptr<const std::vector<double>> vector_at(long t, std::size_t n,
                                                       const Rng& root,
                                                       const std::string& field) const;
  std::shared_ptr<const Matrix> matrix_at(long t, std::size_t rows, std::size_t cols,
                                          const Rng& root,
                                          const std::string& field) const;

 private:
  enum class Mode { Scalar, Vector, MatrixConst, ScalarTable, VectorTable, Generator };

  Mode mode_ = Mode::Scalar;
  Target target_ = Target::Scalar;
  double scalar_ = 0.0;
  std::shared_ptr<const std::vector<double>> vector_;
  std::shared_ptr<const Matrix> matrix_;
  std::vector<double> scalar_table_;

  // generator parameters
  std::string dist_;
  double p1_ = 0.0, p2_ = 0.0, scale_ = 1.0;
  std::uint64_t seed_ = 0;
  bool per_period_ = false;

  mutable std::shared_ptr<const std::vector<double>> cached_vector_;
  mutable std::shared_ptr<const Matrix> cached_matrix_;

  std::vector<double> generate_vector(std::size_t n, Rng rng) const;
  Matrix generate_matrix(std::size_t rows, std::size_t cols, Rng rng) const;
  void check_vector(const std::vector<double>& v, const std::string& field) const;
};

// Time-indexed exogenous inputs for the heterogeneous-economy stepper.
class ExogenousPath {
 public:
  ExogenousPath() = default;
  ExogenousPath(Dims dims, std::uint64_t seed);

  static ExogenousPath from_config(const ConfigValue& table, Dims dims,
                                   std::uint64_t seed, const std::string& base_dir);

  // Convenience for tests and small scenarios: every field constant.
  static ExogenousPath constant(Dims dims, double loan_rate,
                                std::vector<double> saving_rates,
                                std::vector<double> leverage_ratios,
                                std::vector<double> relative_wages,
                                std::vector<double> betas, Matrix portfolio_weights,
                                std::vector<double> relative_prices,
                                Matrix purchase_quantities);

  PeriodInputs at(long t) const;

  // Number of periods every field can supply; -1 when unbounded.
  long coverage() const;

  const Dims& dims() const { return dims_; }

  FieldSource loan_rate = FieldSource::constant_scalar(0.0);
  FieldSource saving_rates = FieldSource::constant_scalar(0.0);
  FieldSource leverage_ratios = FieldSource::constant_scalar(0.0);
  FieldSource relative_wages = FieldSource::constant_scalar(0.0);
  FieldSource betas = FieldSource::constant_scalar(1.0);
  FieldSource relative_prices = FieldSource::constant_scalar(1.0);
  FieldSource portfolio_weights = FieldSource::constant_scalar(0.0);
  FieldSource purchase_quantities = FieldSource::constant_scalar(0.0);

 private:
  Dims dims_;
  Rng root_ = Rng(0);
};

}  // namespace econsim
