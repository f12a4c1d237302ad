#include "econsim/ge_example.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace econsim {

void GEParams::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(alpha + beta < 1.0)) {
    throw ValidationError("ge: need alpha > 0, beta > 0, alpha + beta < 1");
  }
  if (!(c2 > 0.0) || !(c3 > 0.0)) throw ValidationError("ge: productivities must be positive");
  if (!(theta2 > 0.0) || theta2 >= 1.0 || !(theta3 > 0.0) || theta3 >= 1.0) {
    throw ValidationError("ge: intermediate labor exponents must lie in (0,1)");
  }
  if (!(delta > 0.0)) throw ValidationError("ge: utility weight must be positive");
  if (!(m1 > 0.0) || !(m2 > 0.0)) throw ValidationError("ge: money supplies must be positive");
  if (e1 < 0.0 || e2 < 0.0) throw ValidationError("ge: endowments cannot be negative");
}

namespace {

constexpr int kFree = 26;  // unknowns in the Newton solve (log space)

// Per-period slice layout inside the free-variable vector.
enum : int {
  vPK1 = 0, vPK2, vW, vPX, vX, vL1, vL2, vL3, vK1X, vK2X, vK1, vK2, kPerPeriod
};
constexpr int vS1 = 24;
constexpr int vS2 = 25;

struct Linear {
  // Dense LU solve with partial pivoting; A is row-major n x n and is
  // destroyed.
  static bool solve(std::vector<double>& A, std::vector<double>& b, int n) {
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
      int best = col;
      double best_abs = std::abs(A[col * n + col]);
      for (int r = col + 1; r < n; ++r) {
        const double a = std::abs(A[r * n + col]);
        if (a > best_abs) {
          best = r;
          best_abs = a;
        }
      }
      if (best_abs < 1e-300) return false;
      if (best != col) {
        for (int c = 0; c < n; ++c) std::swap(A[col * n + c], A[best * n + c]);
        std::swap(b[col], b[best]);
      }
      const double pivot = A[col * n + col];
      for (int r = col + 1; r < n; ++r) {
        const double factor = A[r * n + col] / pivot;
        if (factor == 0.0) continue;
        A[r * n + col] = 0.0;
        for (int c = col + 1; c < n; ++c) A[r * n + c] -= factor * A[col * n + c];
        b[r] -= factor * b[col];
      }
    }
    for (int r = n - 1; r >= 0; --r) {
      double s = b[r];
      for (int c = r + 1; c < n; ++c) s -= A[r * n + c] * b[c];
      b[r] = s / A[r * n + r];
    }
    return true;
  }
};

struct System {
  GEParams p;

  // Residuals of one period's 12 equations. `v` points at the period slice,
  // a1/a2 are the additions to this period's capital-good availability
  // (endowment net of saving in period 1, carried saving in period 2).
  void period_residuals(const double* v, double a1, double a2, double money,
                        double* out) const {
    const double labor_share = 1.0 - p.alpha - p.beta;
    const double money_scale = 1.0 / std::max({p.m1, p.m2, 1e-12});
    out[0] = v[vX] - std::pow(v[vK1X], p.alpha) * std::pow(v[vK2X], p.beta) *
                         std::pow(v[vL1], labor_share);
    out[1] = v[vK1] - p.c2 * std::pow(v[vL2], p.theta2);
    out[2] = v[vK2] - p.c3 * std::pow(v[vL3], p.theta3);
    out[3] = v[vL1] + v[vL2] + v[vL3] - 1.0;
    out[4] = (p.alpha * v[vPX] * v[vX] - v[vPK1] * v[vK1X]) * money_scale;
    out[5] = (p.beta * v[vPX] * v[vX] - v[vPK2] * v[vK2X]) * money_scale;
    out[6] = (labor_share * v[vPX] * v[vX] - v[vW] * v[vL1]) * money_scale;
    out[7] = (p.theta2 * p.c2 * std::pow(v[vL2], p.theta2 - 1.0) * v[vPK1] - v[vW]) *
             money_scale;
    out[8] = (p.theta3 * p.c3 * std::pow(v[vL3], p.theta3 - 1.0) * v[vPK2] - v[vW]) *
             money_scale;
    out[9] = (v[vPX] * v[vX] + v[vPK1] * v[vK1] + v[vPK2] * v[vK2] - money) * money_scale;
    out[10] = v[vK1X] - v[vK1] - a1;
    out[11] = v[vK2X] - v[vK2] - a2;
  }

  // The 26 equations solved by Newton: both periods, the intertemporal
  // consumption-expenditure condition, and the saving-mix closure.
  void residuals(const double* v, double* out) const {
    const double s1 = v[vS1], s2 = v[vS2];
    period_residuals(v, p.e1 - s1, p.e2 - s2, p.m1, out);
    period_residuals(v + kPerPeriod, s1, s2, p.m2, out + kPerPeriod);
    const double money_scale = 1.0 / std::max({p.m1, p.m2, 1e-12});
    const double e1_spend = v[vPX] * v[vX];
    const double e2_spend = v[kPerPeriod + vPX] * v[kPerPeriod + vX];
    out[24] = (e2_spend - p.delta * e1_spend) * money_scale;
    out[25] = s1 * v[kPerPeriod + vK2X] - s2 * v[kPerPeriod + vK1X];
  }

  double norm(const double* r) const {
    double m = 0.0;
    for (int i = 0; i < kFree; ++i) m = std::max(m, std::abs(r[i]));
    return m;
  }
};

// One-sided Jacobi SVD returning singular values only (for the rank report).
std::vector<double> singular_values(std::vector<double> a, int rows, int cols) {
  auto col_dot = [&](int i, int j) {
    double s = 0.0;
    for (int r = 0; r < rows; ++r) s += a[r * cols + i] * a[r * cols + j];
    return s;
  };
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < cols - 1; ++i) {
      for (int j = i + 1; j < cols; ++j) {
        const double aii = col_dot(i, i), ajj = col_dot(j, j), aij = col_dot(i, j);
        off = std::max(off, std::abs(aij) / std::max(std::sqrt(aii * ajj), 1e-300));
        if (std::abs(aij) < 1e-30) continue;
        const double tau = (ajj - aii) / (2.0 * aij);
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int r = 0; r < rows; ++r) {
          const double vi = a[r * cols + i], vj = a[r * cols + j];
          a[r * cols + i] = c * vi - s * vj;
          a[r * cols + j] = s * vi + c * vj;
        }
      }
    }
    if (off < 1e-14) break;
  }
  std::vector<double> sv(cols);
  for (int j = 0; j < cols; ++j) sv[j] = std::sqrt(std::max(col_dot(j, j), 0.0));
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

// Rough interior starting point built from the closed forms of the
// constant-returns (theta = 1) variant of the intermediate technologies.
std::vector<double> initial_guess(const GEParams& p, double s1, double s2) {
  std::vector<double> v(kFree, 0.1);
  auto fill_period = [&](double* slot, double a1, double a2, double money) {
    const double h = std::max(a1 / p.c2 + a2 / p.c3, -0.8);
    const double denom = (1.0 + p.alpha + p.beta) * (1.0 + h) - h;
    const double spend = money * (1.0 + h) / denom;
    const double wage = spend / (1.0 + h);
    const double labor_share = 1.0 - p.alpha - p.beta;
    double l1 = labor_share * (1.0 + h);
    double l2 = std::max(p.alpha * (1.0 + h) - a1 / p.c2, 0.02);
    double l3 = std::max(p.beta * (1.0 + h) - a2 / p.c3, 0.02);
    const double lsum = l1 + l2 + l3;
    l1 /= lsum;
    l2 /= lsum;
    l3 /= lsum;
    const double k1 = p.c2 * std::pow(l2, p.theta2);
    const double k2 = p.c3 * std::pow(l3, p.theta3);
    const double k1x = std::max(k1 + a1, 0.05 * k1);
    const double k2x = std::max(k2 + a2, 0.05 * k2);
    const double x = std::pow(k1x, p.alpha) * std::pow(k2x, p.beta) *
                     std::pow(l1, labor_share);
    slot[vPK1] = wage * std::pow(l2, 1.0 - p.theta2) / (p.c2 * p.theta2);
    slot[vPK2] = wage * std::pow(l3, 1.0 - p.theta3) / (p.c3 * p.theta3);
    slot[vW] = wage;
    slot[vPX] = spend / x;
    slot[vX] = x;
    slot[vL1] = l1;
    slot[vL2] = l2;
    slot[vL3] = l3;
    slot[vK1X] = k1x;
    slot[vK2X] = k2x;
    slot[vK1] = k1;
    slot[vK2] = k2;
  };
  fill_period(v.data(), p.e1 - s1, p.e2 - s2, p.m1);
  fill_period(v.data() + kPerPeriod, s1, s2, p.m2);
  v[vS1] = s1;
  v[vS2] = s2;
  return v;
}

GEPeriod to_period(const double* v, double s1, double s2, bool first) {
  GEPeriod q;
  q.capital_price_1 = v[vPK1];
  q.capital_price_2 = v[vPK2];
  q.wage = v[vW];
  q.consumption_price = v[vPX];
  q.consumption = v[vX];
  q.labor_consumption = v[vL1];
  q.labor_capital_1 = v[vL2];
  q.labor_capital_2 = v[vL3];
  q.capital_used_1 = v[vK1X];
  q.capital_used_2 = v[vK2X];
  q.capital_saved_1 = first ? s1 : 0.0;
  q.capital_saved_2 = first ? s2 : 0.0;
  q.capital_output_1 = v[vK1];
  q.capital_output_2 = v[vK2];
  return q;
}

}  // namespace

GESolution solve_ge(const GEParams& params, const GESolverOptions& options) {
  params.validate();
  if (options.max_iterations < 1 || !(options.tolerance > 0.0) ||
      !(options.damping > 0.0) || options.damping >= 1.0) {
    throw ValidationError("ge: invalid solver options");
  }
  System sys{params};

  const double h_total = params.e1 / params.c2 + params.e2 / params.c3 + 0.3;
  struct Start {
    double frac, split;
  };
  const std::array<Start, 8> starts = {{{0.20, 0.5},
                                        {0.50, 0.5},
                                        {0.20, 0.3},
                                        {0.20, 0.7},
                                        {0.50, 0.3},
                                        {0.50, 0.7},
                                        {0.10, 0.5},
                                        {0.70, 0.5}}};

  std::vector<double> best_u;
  double best_norm = std::numeric_limits<double>::infinity();
  int best_start = -1;
  int best_iterations = 0;

  std::vector<double> r(kFree), r_trial(kFree), jac(kFree * kFree), step(kFree);
  for (int si = 0; si < static_cast<int>(starts.size()); ++si) {
    const double h2 = starts[si].frac * h_total;
    const double s1 = std::max(starts[si].split * params.c2 * h2, 1e-4);
    const double s2 = std::max((1.0 - starts[si].split) * params.c3 * h2, 1e-4);
    std::vector<double> v = initial_guess(params, s1, s2);
    std::vector<double> u(kFree);
    for (int i = 0; i < kFree; ++i) u[i] = std::log(std::max(v[i], 1e-8));

    auto eval = [&](const std::vector<double>& logs, std::vector<double>& out) {
      std::vector<double> lin(kFree);
      for (int i = 0; i < kFree; ++i) lin[i] = std::exp(logs[i]);
      sys.residuals(lin.data(), out.data());
    };

    eval(u, r);
    double norm = sys.norm(r.data());
    int iter = 0;
    bool stuck = false;
    for (; iter < options.max_iterations && norm > options.tolerance && !stuck; ++iter) {
      // Central-difference Jacobian in log space.
      for (int col = 0; col < kFree; ++col) {
        const double h = 1e-6;
        std::vector<double> up = u, dn = u;
        up[col] += h;
        dn[col] -= h;
        std::vector<double> rp(kFree), rm(kFree);
        eval(up, rp);
        eval(dn, rm);
        for (int row = 0; row < kFree; ++row) {
          jac[row * kFree + col] = (rp[row] - rm[row]) / (2.0 * h);
        }
      }
      std::vector<double> lhs = jac;
      step = r;
      for (double& x : step) x = -x;
      if (!Linear::solve(lhs, step, kFree)) {
        stuck = true;
        break;
      }
      // Backtracking line search on the residual norm.
      double factor = 1.0;
      bool accepted = false;
      for (int half = 0; half < 40; ++half) {
        std::vector<double> trial = u;
        for (int i = 0; i < kFree; ++i) {
          trial[i] += factor * std::clamp(step[i], -5.0, 5.0);
        }
        eval(trial, r_trial);
        const double trial_norm = sys.norm(r_trial.data());
        if (trial_norm < norm) {
          u = std::move(trial);
          r = r_trial;
          norm = trial_norm;
          accepted = true;
          break;
        }
        factor *= options.damping;
      }
      if (!accepted) stuck = true;
    }
    if (norm < best_norm) {
      best_norm = norm;
      best_u = u;
      best_start = si;
      best_iterations = iter;
    }
  }

  if (!(best_norm <= options.tolerance * 10.0)) {
    throw NonConvergenceError("solve_ge: no start converged; best scaled residual " +
                                  std::to_string(best_norm) + " from start " +
                                  std::to_string(best_start),
                              best_norm);
  }

  std::vector<double> v(kFree);
  for (int i = 0; i < kFree; ++i) v[i] = std::exp(best_u[i]);

  GESolution sol;
  sol.newton_start = best_start;
  sol.iterations = best_iterations;
  sol.period1 = to_period(v.data(), v[vS1], v[vS2], true);
  sol.period2 = to_period(v.data() + kPerPeriod, v[vS1], v[vS2], false);
  sol.closure_residual = v[vS1] * v[kPerPeriod + vK2X] - v[vS2] * v[kPerPeriod + vK1X];
  sol.residuals = ge_residuals(params, sol);
  sol.residual_norm = 0.0;
  for (double x : sol.residuals) sol.residual_norm = std::max(sol.residual_norm, std::abs(x));

  for (double x : v) {
    if (x < 1e-12) sol.boundary_flag = true;
  }

  // Numerical rank of the displayed system at the solution: perturb each of
  // the 28 quantities (the 26 solved ones plus the two period-2 savings,
  // which sit at zero) and difference the 28 displayed residuals.
  {
    constexpr int m = static_cast<int>(kGEEquationCount);
    std::vector<double> jac28(m * m, 0.0);
    auto eval_display = [&](const std::vector<double>& vars) {
      GESolution tmp;
      tmp.period1 = to_period(vars.data(), vars[vS1], vars[vS2], true);
      tmp.period2 = to_period(vars.data() + kPerPeriod, vars[vS1], vars[vS2], false);
      tmp.period2.capital_saved_1 = vars[26];
      tmp.period2.capital_saved_2 = vars[27];
      return ge_residuals(params, tmp);
    };
    std::vector<double> base = v;
    base.push_back(0.0);  // period-2 savings
    base.push_back(0.0);
    for (int col = 0; col < m; ++col) {
      const double h = 1e-6 * std::max(std::abs(base[col]), 1e-3);
      std::vector<double> up = base, dn = base;
      up[col] += h;
      dn[col] -= h;
      const auto rp = eval_display(up);
      const auto rm = eval_display(dn);
      for (int row = 0; row < m; ++row) {
        jac28[row * m + col] = (rp[row] - rm[row]) / (2.0 * h);
      }
    }
    const std::vector<double> sv = singular_values(jac28, m, m);
    const double cutoff = 1e-8 * sv.front();
    sol.numerical_rank = 0;
    for (double s : sv) {
      if (s > cutoff) ++sol.numerical_rank;
    }
  }
  return sol;
}

std::array<double, kGEEquationCount> ge_residuals(const GEParams& p,
                                                  const GESolution& sol) {
  std::array<double, kGEEquationCount> out{};
  System sys{p};
  auto pack = [](const GEPeriod& q, double* v) {
    v[vPK1] = q.capital_price_1;
    v[vPK2] = q.capital_price_2;
    v[vW] = q.wage;
    v[vPX] = q.consumption_price;
    v[vX] = q.consumption;
    v[vL1] = q.labor_consumption;
    v[vL2] = q.labor_capital_1;
    v[vL3] = q.labor_capital_2;
    v[vK1X] = q.capital_used_1;
    v[vK2X] = q.capital_used_2;
    v[vK1] = q.capital_output_1;
    v[vK2] = q.capital_output_2;
  };
  double v1[kPerPeriod], v2[kPerPeriod];
  pack(sol.period1, v1);
  pack(sol.period2, v2);
  const double s1 = sol.period1.capital_saved_1;
  const double s2 = sol.period1.capital_saved_2;

  sys.period_residuals(v1, p.e1 - s1, p.e2 - s2, p.m1, out.data());
  sys.period_residuals(v2, s1, s2, p.m2, out.data() + 12);

  out[24] = sol.period2.capital_saved_1;  // must be zero
  out[25] = sol.period2.capital_saved_2;
  // The two displayed intertemporal conditions: marginal utility of a unit
  // of money spent on consumption now versus the discounted marginal product
  // value of each capital good next period.
  const double mu1 = 1.0 / (sol.period1.consumption_price * sol.period1.consumption);
  const double mp1 = p.alpha * sol.period2.consumption / sol.period2.capital_used_1;
  const double mp2 = p.beta * sol.period2.consumption / sol.period2.capital_used_2;
  out[26] = mu1 - p.delta / sol.period2.consumption * mp1 / sol.period2.capital_price_1;
  out[27] = mu1 - p.delta / sol.period2.consumption * mp2 / sol.period2.capital_price_2;
  return out;
}

double arbitrage_gap(const GESolution& sol) {
  const double p11 = sol.period1.capital_price_1, p12 = sol.period2.capital_price_1;
  const double p21 = sol.period1.capital_price_2, p22 = sol.period2.capital_price_2;
  if (!(p11 > 0.0) || !(p12 > 0.0) || !(p21 > 0.0) || !(p22 > 0.0)) {
    throw ValidationError("arbitrage_gap: capital-goods prices must be positive");
  }
  return p12 / p11 - p22 / p21;
}

double ge_budget_residual(const GEParams& p, const GESolution& sol, int period) {
  const GEPeriod& q = period == 1 ? sol.period1 : sol.period2;
  const double profit_1 = q.capital_price_1 * q.capital_output_1 - q.wage * q.labor_capital_1;
  const double profit_2 = q.capital_price_2 * q.capital_output_2 - q.wage * q.labor_capital_2;
  double income = q.wage + profit_1 + profit_2;
  double spending = q.consumption_price * q.consumption;
  if (period == 1) {
    income += q.capital_price_1 * p.e1 + q.capital_price_2 * p.e2;
    spending += q.capital_price_1 * q.capital_saved_1 + q.capital_price_2 * q.capital_saved_2;
  } else {
    income += q.capital_price_1 * sol.period1.capital_saved_1 +
              q.capital_price_2 * sol.period1.capital_saved_2;
  }
  return income - spending;
}

}  // namespace econsim
