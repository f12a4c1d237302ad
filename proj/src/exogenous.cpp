#include "econsim/exogenous.hpp"

#include <algorithm>
#include <cmath>

#include "econsim/csv.hpp"

namespace econsim {

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || path.front() == '/' || base_dir.empty()) return path;
  return base_dir + "/" + path;
}

}  // namespace

FieldSource FieldSource::constant_scalar(double v) {
  FieldSource s;
  s.mode_ = Mode::Scalar;
  s.scalar_ = v;
  return s;
}

FieldSource FieldSource::constant_vector(std::vector<double> v) {
  FieldSource s;
  s.mode_ = Mode::Vector;
  s.vector_ = std::make_shared<const std::vector<double>>(std::move(v));
  return s;
}

FieldSource FieldSource::constant_matrix(Matrix m) {
  FieldSource s;
  s.mode_ = Mode::MatrixConst;
  s.matrix_ = std::make_shared<const Matrix>(std::move(m));
  return s;
}

FieldSource FieldSource::scalar_table(std::vector<double> per_period) {
  FieldSource s;
  s.mode_ = Mode::ScalarTable;
  s.scalar_table_ = std::move(per_period);
  return s;
}

FieldSource FieldSource::from_config(const ConfigValue& node, Target target,
                                     const std::string& base_dir) {
  FieldSource s;
  s.target_ = target;
  if (!node.defined()) {
    throw ConfigError("exogenous field is missing");
  }
  if (node.kind() == ConfigValue::Kind::Int || node.kind() == ConfigValue::Kind::Float) {
    s.mode_ = Mode::Scalar;
    s.scalar_ = node.as_double();
    return s;
  }
  if (node.is_array()) {
    // Array of numbers: a per-period table for scalars, a constant vector
    // otherwise.
    std::vector<double> values = node.as_double_array();
    if (target == Target::Scalar) return scalar_table(std::move(values));
    FieldSource v = constant_vector(std::move(values));
    v.target_ = target;
    return v;
  }
  if (!node.is_table()) {
    throw ConfigError("config: '" + node.path() + "' must be a number, array or table");
  }

  if (node.has("value")) {
    const ConfigValue& val = node.at("value");
    if (val.is_array()) {
      FieldSource v = constant_vector(val.as_double_array());
      v.target_ = target;
      return v;
    }
    s.mode_ = Mode::Scalar;
    s.scalar_ = val.as_double();
    return s;
  }
  if (node.has("csv")) {
    Matrix m = read_csv_matrix(resolve(base_dir, node.at("csv").as_string()));
    const bool table = node.get_bool("per_period", false);
    if (target == Target::Weights || target == Target::Quantity) {
      if (table) throw ConfigError("config: '" + node.path() + "': per-period csv matrices are not supported");
      FieldSource v = constant_matrix(std::move(m));
      v.target_ = target;
      return v;
    }
    if (table && target == Target::Scalar) {
      std::vector<double> col(m.rows());
      for (std::size_t i = 0; i < m.rows(); ++i) col[i] = m.at(i, 0);
      return scalar_table(std::move(col));
    }
    if (table) {
      // one row per period, one column per agent
      FieldSource v;
      v.mode_ = Mode::VectorTable;
      v.target_ = target;
      v.matrix_ = std::make_shared<const Matrix>(std::move(m));
      v.per_period_ = true;
      return v;
    }
    if (m.rows() == 1 || m.cols() == 1) {
      std::vector<double> flat(m.flat().begin(), m.flat().end());
      if (target == Target::Scalar && flat.size() == 1) return constant_scalar(flat[0]);
      FieldSource v = constant_vector(std::move(flat));
      v.target_ = target;
      return v;
    }
    throw ConfigError("config: '" + node.path() + "': expected a single csv column");
  }
  if (node.has("dist")) {
    s.mode_ = Mode::Generator;
    s.dist_ = node.at("dist").as_string();
    s.seed_ = static_cast<std::uint64_t>(node.get_int("seed", 0));
    s.per_period_ = node.get_bool("per_period", false);
    s.scale_ = node.get_double("scale", 1.0);
    if (s.dist_ == "uniform") {
      s.p1_ = node.at_required("low").as_double();
      s.p2_ = node.at_required("high").as_double();
    } else if (s.dist_ == "normal" || s.dist_ == "lognormal") {
      s.p1_ = node.get_double("mu", node.get_double("mean", 0.0));
      s.p2_ = node.get_double("sigma", node.get_double("sd", 1.0));
    } else if (s.dist_ == "pareto") {
      s.p1_ = node.at_required("alpha").as_double();
      s.p2_ = node.get_double("xmin", 1.0);
    } else if (s.dist_ == "dirichlet") {
      s.p1_ = node.get_double("alpha", 1.0);
    } else if (s.dist_ == "equal") {
      // equal portfolio rows / equal vector entries
    } else {
      throw ConfigError("config: '" + node.path() + "': unknown dist '" + s.dist_ + "'");
    }
    return s;
  }
  throw ConfigError("config: '" + node.path() +
                    "': expected value=, csv= or dist= in field spec");
}

long FieldSource::table_periods() const {
  if (mode_ == Mode::ScalarTable) return static_cast<long>(scalar_table_.size());
  if (mode_ == Mode::VectorTable) return static_cast<long>(matrix_->rows());
  return -1;
}

double FieldSource::scalar_at(long t, const Rng& root, const std::string& field) const {
  switch (mode_) {
    case Mode::Scalar:
      return scalar_;
    case Mode::ScalarTable:
      if (t < 0 || static_cast<std::size_t>(t) >= scalar_table_.size()) {
        throw ValidationError("exogenous '" + field + "': period " + std::to_string(t) +
                              " outside table of length " +
                              std::to_string(scalar_table_.size()));
      }
      return scalar_table_[static_cast<std::size_t>(t)];
    case Mode::Generator: {
      Rng rng = root.fork(field, per_period_ ? static_cast<std::uint64_t>(t) : 0).fork(seed_);
      std::vector<double> one = generate_vector(1, rng);
      return one[0];
    }
    default:
      throw ConfigError("exogenous '" + field + "': not a scalar source");
  }
}

std::vector<double> FieldSource::generate_vector(std::size_t n, Rng rng) const {
  std::vector<double> v(n);
  for (double& x : v) {
    if (dist_ == "uniform") {
      x = rng.uniform(p1_, p2_);
    } else if (dist_ == "normal") {
      x = rng.normal(p1_, p2_);
    } else if (dist_ == "lognormal") {
      x = rng.lognormal(p1_, p2_);
    } else if (dist_ == "pareto") {
      x = rng.pareto(p1_, p2_);
    } else if (dist_ == "equal") {
      x = 1.0;
    } else {
      throw ConfigError("dist '" + dist_ + "' cannot generate a vector");
    }
    x *= scale_;
  }
  return v;
}

Matrix FieldSource::generate_matrix(std::size_t rows, std::size_t cols, Rng rng) const {
  Matrix m(rows, cols);
  if (dist_ == "dirichlet") {
    for (std::size_t i = 0; i < rows; ++i) rng.dirichlet(m.row(i), p1_);
  } else if (dist_ == "equal") {
    const double w = 1.0 / static_cast<double>(cols);
    for (double& x : m.flat()) x = w;
  } else if (dist_ == "uniform" || dist_ == "lognormal" || dist_ == "normal" ||
             dist_ == "pareto") {
    for (std::size_t i = 0; i < rows; ++i) {
      std::vector<double> row = generate_vector(cols, rng.fork("row", i));
      std::copy(row.begin(), row.end(), m.row(i).begin());
    }
  } else {
    throw ConfigError("dist '" + dist_ + "' cannot generate a matrix");
  }
  return m;
}

void FieldSource::check_vector(const std::vector<double>& v, const std::string& field) const {
  auto bad = [&](std::size_t i, double x) {
    throw ValidationError("exogenous '" + field + "': entry " + std::to_string(i) +
                          " = " + std::to_string(x) + " out of range");
  };
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = v[i];
    if (!std::isfinite(x)) bad(i, x);
    switch (target_) {
      case Target::SavingRate:
        if (x < 0.0 || x >= 1.0) bad(i, x);
        break;
      case Target::Leverage:
        if (x < 0.0 || x >= 1.0) bad(i, x);
        break;
      case Target::Wage:
      case Target::Quantity:
        if (x < 0.0) bad(i, x);
        break;
      case Target::RelativePrice:
        if (x <= 0.0) bad(i, x);
        break;
      default:
        break;
    }
  }
}

std::shared_ptr<const std::vector<double>> FieldSource::vector_at(
    long t, std::size_t n, const Rng& root, const std::string& field) const {
  switch (mode_) {
    case Mode::Scalar: {
      if (!cached_vector_ || cached_vector_->size() != n) {
        std::vector<double> v(n, scalar_);
        check_vector(v, field);
        cached_vector_ = std::make_shared<const std::vector<double>>(std::move(v));
      }
      return cached_vector_;
    }
    case Mode::Vector: {
      if (vector_->size() != n) {
        throw DimensionError("exogenous '" + field + "': expected " + std::to_string(n) +
                             " entries, got " + std::to_string(vector_->size()));
      }
      check_vector(*vector_, field);
      return vector_;
    }
    case Mode::VectorTable: {
      if (t < 0 || static_cast<std::size_t>(t) >= matrix_->rows()) {
        throw ValidationError("exogenous '" + field + "': period " + std::to_string(t) +
                              " outside table of length " + std::to_string(matrix_->rows()));
      }
      if (matrix_->cols() != n) {
        throw DimensionError("exogenous '" + field + "': table has " +
                             std::to_string(matrix_->cols()) + " columns, expected " +
                             std::to_string(n));
      }
      auto row = matrix_->row(static_cast<std::size_t>(t));
      std::vector<double> v(row.begin(), row.end());
      check_vector(v, field);
      return std::make_shared<const std::vector<double>>(std::move(v));
    }
    case Mode::Generator: {
      if (!per_period_ && cached_vector_) return cached_vector_;
      Rng rng = root.fork(field, per_period_ ? static_cast<std::uint64_t>(t) : 0).fork(seed_);
      std::vector<double> v = generate_vector(n, rng);
      if (target_ == Target::RelativePrice && !v.empty()) v[0] = 1.0;
      check_vector(v, field);
      auto out = std::make_shared<const std::vector<double>>(std::move(v));
      if (!per_period_) cached_vector_ = out;
      return out;
    }
    default:
      throw ConfigError("exogenous '" + field + "': not a vector source");
  }
}

std::shared_ptr<const Matrix> FieldSource::matrix_at(long t, std::size_t rows,
                                                     std::size_t cols, const Rng& root,
                                                     const std::string& field) const {
  switch (mode_) {
    case Mode::MatrixConst: {
      if (matrix_->rows() != rows || matrix_->cols() != cols) {
        throw DimensionError("exogenous '" + field + "': expected " +
                             std::to_string(rows) + "x" + std::to_string(cols) +
                             " matrix");
      }
      return matrix_;
    }
    case Mode::Scalar: {
      if (!cached_matrix_ || cached_matrix_->rows() != rows ||
          cached_matrix_->cols() != cols) {
        cached_matrix_ = std::make_shared<const Matrix>(Matrix(rows, cols, scalar_));
      }
      return cached_matrix_;
    }
    case Mode::Generator: {
      if (!per_period_ && cached_matrix_) return cached_matrix_;
      Rng rng = root.fork(field, per_period_ ? static_cast<std::uint64_t>(t) : 0).fork(seed_);
      auto out = std::make_shared<const Matrix>(generate_matrix(rows, cols, rng));
      if (!per_period_) cached_matrix_ = out;
      return out;
    }
    default:
      throw ConfigError("exogenous '" + field + "': not a matrix source");
  }
}

// ---------------------------------------------------------------------------

ExogenousPath::ExogenousPath(Dims dims, std::uint64_t seed) : dims_(dims), root_(seed) {}

ExogenousPath ExogenousPath::from_config(const ConfigValue& table, Dims dims,
                                         std::uint64_t seed, const std::string& base_dir) {
  ExogenousPath p(dims, seed);
  p.loan_rate = FieldSource::from_config(table.at_required("loan_rate"),
                                         FieldSource::Target::Scalar, base_dir);
  p.saving_rates = FieldSource::from_config(table.at_required("saving_rates"),
                                            FieldSource::Target::SavingRate, base_dir);
  p.leverage_ratios = FieldSource::from_config(table.at_required("leverage_ratios"),
                                               FieldSource::Target::Leverage, base_dir);
  p.relative_wages = FieldSource::from_config(table.at_required("relative_wages"),
                                              FieldSource::Target::Wage, base_dir);
  p.betas = FieldSource::from_config(table.at_required("betas"),
                                     FieldSource::Target::Beta, base_dir);
  p.relative_prices = FieldSource::from_config(table.at_required("relative_prices"),
                                               FieldSource::Target::RelativePrice, base_dir);
  p.portfolio_weights = FieldSource::from_config(table.at_required("portfolio_weights"),
                                                 FieldSource::Target::Weights, base_dir);
  p.purchase_quantities = FieldSource::from_config(table.at_required("purchase_quantities"),
                                                   FieldSource::Target::Quantity, base_dir);
  return p;
}

ExogenousPath ExogenousPath::constant(Dims dims, double loan_rate,
                                      std::vector<double> saving_rates,
                                      std::vector<double> leverage_ratios,
                                      std::vector<double> relative_wages,
                                      std::vector<double> betas, Matrix portfolio_weights,
                                      std::vector<double> relative_prices,
                                      Matrix purchase_quantities) {
  ExogenousPath p(dims, 0);
  p.loan_rate = FieldSource::constant_scalar(loan_rate);
  p.saving_rates = FieldSource::constant_vector(std::move(saving_rates));
  p.leverage_ratios = FieldSource::constant_vector(std::move(leverage_ratios));
  p.relative_wages = FieldSource::constant_vector(std::move(relative_wages));
  p.betas = FieldSource::constant_vector(std::move(betas));
  p.relative_prices = FieldSource::constant_vector(std::move(relative_prices));
  p.portfolio_weights = FieldSource::constant_matrix(std::move(portfolio_weights));
  p.purchase_quantities = FieldSource::constant_matrix(std::move(purchase_quantities));
  return p;
}

PeriodInputs ExogenousPath::at(long t) const {
  PeriodInputs in;
  in.loan_rate = loan_rate.scalar_at(t, root_, "loan_rate");
  if (!(in.loan_rate > -1.0)) {
    throw ValidationError("exogenous loan_rate must exceed -1 (period " +
                          std::to_string(t) + ")");
  }
  in.saving_rates = saving_rates.vector_at(t, dims_.households, root_, "saving_rates");
  in.leverage_ratios =
      leverage_ratios.vector_at(t, dims_.households, root_, "leverage_ratios");
  in.relative_wages =
      relative_wages.vector_at(t, dims_.households, root_, "relative_wages");
  in.betas = betas.vector_at(t, dims_.firms, root_, "betas");
  in.relative_prices = relative_prices.vector_at(t, dims_.goods, root_, "relative_prices");
  in.portfolio_weights =
      portfolio_weights.matrix_at(t, dims_.households, dims_.firms, root_, "portfolio_weights");
  in.purchase_quantities =
      purchase_quantities.matrix_at(t, dims_.households, dims_.goods, root_, "purchase_quantities");
  return in;
}

long ExogenousPath::coverage() const {
  long cov = -1;
  for (const FieldSource* f :
       {&loan_rate, &saving_rates, &leverage_ratios, &relative_wages, &betas,
        &relative_prices, &portfolio_weights, &purchase_quantities}) {
    const long n = f->table_periods();
    if (n >= 0) cov = cov < 0 ? n : std::min(cov, n);
  }
  return cov;
}

}  // namespace econsim
