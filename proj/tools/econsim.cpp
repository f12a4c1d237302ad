// Command-line front end: every subsystem behind one executable with
// reproducible, seeded, atomically staged outputs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "econsim/asymptotic.hpp"
#include "econsim/csv.hpp"
#include "econsim/empirical.hpp"
#include "econsim/ge_example.hpp"
#include "econsim/manifest.hpp"
#include "econsim/partition.hpp"
#include "econsim/scenario.hpp"
#include "econsim/solver.hpp"

using namespace econsim;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode {
  kOk = 0,
  kUsageError = 1,
  kSolverError = 2,
  kValidationFailure = 3,
};

struct CommonArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::string format = "csv";
  int threads = 1;
};

std::string dirname_of(const std::string& path) {
  const auto pos = path.find_last_of('/');
  return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

// Column-oriented table emitted as CSV or as a JSON array of records, per
// --format.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  static std::string num(double v) { return format_double(v); }
  static std::string num(long v) { return std::to_string(v); }

  void write(std::ostream& out, const std::string& format) const {
    if (format == "json") {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& row : rows_) {
        nlohmann::json rec;
        for (std::size_t c = 0; c < header_.size(); ++c) rec[header_[c]] = row[c];
        arr.push_back(std::move(rec));
      }
      out << arr.dump(2) << "\n";
      return;
    }
    for (std::size_t c = 0; c < header_.size(); ++c) {
      out << header_[c] << (c + 1 < header_.size() ? "," : "");
    }
    out << "\n";
    for (const auto& row : rows_) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        out << row[c] << (c + 1 < row.size() ? "," : "");
      }
      out << "\n";
    }
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string table_name(const std::string& stem, const std::string& format) {
  return stem + (format == "json" ? ".json" : ".csv");
}

// Runs `body`, which stages outputs and fills solver stats; the manifest is
// always written last, with failures recorded and mapped to exit codes.
int with_manifest(const CommonArgs& args, const std::string& subcommand,
                  const std::function<void(OutputStager&, RunManifest&)>& body) {
  RunManifest manifest;
  manifest.subcommand = subcommand;
  manifest.tool_version = kVersion;
  manifest.config_path = args.config;
  manifest.seed = args.seed;
  if (!args.config.empty()) {
    try {
      manifest.config_digest = digest_hex(fnv1a64_file(args.config));
    } catch (const IoError& e) {
      std::fprintf(stderr, "%s: %s\n", subcommand.c_str(), e.what());
      return kUsageError;
    }
  }
  std::string out_dir = args.out;
  if (out_dir.empty()) {
    const char* root = std::getenv("ECONSIM_OUT_ROOT");
    out_dir = (root ? std::string(root) + "/" : std::string()) + "out-" + subcommand;
  }
  OutputStager stager(out_dir);

  const auto t0 = std::chrono::steady_clock::now();
  int code = kOk;
  try {
    body(stager, manifest);
    manifest.outputs = stager.commit();
  } catch (const std::exception& e) {
    stager.abort();
    manifest.status = "failed";
    manifest.error = e.what();
    std::fprintf(stderr, "%s: %s\n", subcommand.c_str(), e.what());
    if (dynamic_cast<const ValidationError*>(&e)) {
      code = kValidationFailure;
    } else if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const IoError*>(&e)) {
      code = kUsageError;
    } else {
      code = kSolverError;
    }
  }
  manifest.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  write_manifest(manifest, stager.directory());
  return code;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const CommonArgs& args) {
  return with_manifest(args, "simulate", [&](OutputStager& stager, RunManifest& manifest) {
    const ConfigValue root = parse_config_file(args.config);
    Scenario sc = load_scenario(root, dirname_of(args.config), args.seed);
    manifest.seed = sc.seed;

    RunResult res = run(sc.initial, sc.path, sc.periods, sc.solver, sc.run_options);

    Table macro({"t", "R", "p_x", "A_t", "W_t", "D_t", "C_t", "s_t"});
    double max_dual = 0.0, max_saving = 0.0, max_growth = 0.0;
    long iterations = 0;
    for (const MacroRecord& r : res.records) {
      macro.add_row({Table::num(r.period), Table::num(r.market_return),
                     Table::num(r.price_level), Table::num(r.net_assets),
                     Table::num(r.labor_income), Table::num(r.debt),
                     Table::num(r.consumption), Table::num(r.aggregate_saving_rate)});
      max_dual = std::max(max_dual, r.dual_aggregation_residual);
      max_saving = std::max(max_saving, r.saving_identity_residual);
      max_growth = std::max(max_growth, r.growth_identity_residual);
      iterations += r.iterations;
    }
    {
      std::ofstream out(stager.stage(table_name("macro", args.format)), std::ios::binary);
      macro.write(out, args.format);
    }

    for (const auto& [t, state] : res.snapshots) {
      Table households({"household_id", "net_assets", "debts", "saving_rate",
                        "leverage_ratio", "relative_wage"});
      for (std::size_t i = 0; i < state.household_count(); ++i) {
        households.add_row({Table::num(static_cast<long>(i)),
                            Table::num(state.households.net_assets[i]),
                            Table::num(state.households.debts[i]),
                            Table::num((*state.households.saving_rates)[i]),
                            Table::num((*state.households.leverage_ratios)[i]),
                            Table::num((*state.households.relative_wages)[i])});
      }
      Table firms({"firm_id", "equity_value", "beta"});
      for (std::size_t j = 0; j < state.firm_count(); ++j) {
        firms.add_row({Table::num(static_cast<long>(j)),
                       Table::num(state.firms.equity_values[j]),
                       Table::num(state.firms.betas[j])});
      }
      const std::string suffix = "_" + std::to_string(t);
      std::ofstream h(stager.stage(table_name("households" + suffix, args.format)),
                      std::ios::binary);
      households.write(h, args.format);
      std::ofstream f(stager.stage(table_name("firms" + suffix, args.format)),
                      std::ios::binary);
      firms.write(f, args.format);
    }

    manifest.solver_stats["periods"] = static_cast<double>(res.records.size());
    manifest.solver_stats["total_iterations"] = static_cast<double>(iterations);
    manifest.solver_stats["tolerance"] = sc.solver.relative_tolerance;
    manifest.solver_stats["max_dual_residual"] = max_dual;
    manifest.solver_stats["max_saving_identity_residual"] = max_saving;
    manifest.solver_stats["max_growth_identity_residual"] = max_growth;
  });
}

// ---------------------------------------------------------------------------
// asympt

struct AsymptCase {
  SavingSchedule schedule;
  double mu = 0.5;
  double rbar = 0.04;
  long periods = 0;
  bool include_wages = true;
  std::vector<double> wealth, wages;
  ReturnSource source = ReturnSource::self_consistent();
};

GroupEvolution run_asympt_case(const AsymptCase& c) {
  std::vector<double> mu = {c.mu}, rbar = {c.rbar};
  return evolve_groups(c.wealth, c.wages, c.schedule, mu, rbar, c.source, c.periods,
                       c.include_wages);
}

int cmd_asympt(const CommonArgs& args) {
  return with_manifest(args, "asympt", [&](OutputStager& stager, RunManifest& manifest) {
    const ConfigValue root = parse_config_file(args.config);
    AsymptCase base;
    base.schedule.slope = root.at_required("schedule.slope").as_double();
    base.schedule.intercept = root.at_required("schedule.intercept").as_double();
    base.schedule.groups = static_cast<int>(root.at_required("schedule.groups").as_int());
    base.mu = root.get_double("exogenous.mu", 0.5);
    base.rbar = root.get_double("exogenous.loan_rate", 0.04);
    base.periods = root.get_int("run.periods", 500);
    if (base.periods < 1) throw ConfigError("run.periods must be >= 1");
    base.include_wages = root.get_bool("run.include_wages", true);

    auto per_group = [&](const char* key, double fallback, int m) {
      std::vector<double> v(m, fallback);
      if (root.has(key)) {
        const ConfigValue& node = root.at(key);
        if (node.is_array()) {
          v = node.as_double_array();
          if (static_cast<int>(v.size()) != m) {
            throw ConfigError(std::string(key) + ": expected one entry per group");
          }
        } else {
          v.assign(m, node.as_double());
        }
      }
      return v;
    };
    base.wealth = per_group("initial.wealth", 1.0, base.schedule.groups);
    base.wages = per_group("initial.wages", 0.0, base.schedule.groups);
    const std::string source = root.get_string("run.return_source", "closure");
    if (source == "external") {
      base.source =
          ReturnSource::external(root.at_required("run.return_path").as_double_array());
    } else if (source != "closure") {
      throw ConfigError("run.return_source must be 'closure' or 'external'");
    }

    GroupEvolution evo = run_asympt_case(base);

    Table traj({"t", "group", "wealth", "debt", "share", "wage_wealth_ratio", "R"});
    for (std::size_t t = 0; t < evo.groups[0].wealth.size(); ++t) {
      for (const GroupTrajectory& g : evo.groups) {
        traj.add_row({Table::num(static_cast<long>(t)), Table::num(long(g.group)),
                      Table::num(g.wealth[t]), Table::num(g.debt[t]),
                      Table::num(g.share[t]), Table::num(g.wage_income[t] / g.wealth[t]),
                      t < evo.market_return.size() ? Table::num(evo.market_return[t])
                                                   : std::string("")});
      }
    }
    {
      std::ofstream out(stager.stage(table_name("trajectories", args.format)),
                        std::ios::binary);
      traj.write(out, args.format);
    }

    nlohmann::json fits;
    const SteadyStateReturn rstar =
        steady_state_return(base.schedule.rate(1), base.mu, base.rbar);
    fits["steady_state_return"] = rstar.value;
    fits["steady_state_negative_region"] = rstar.negative_region;
    fits["final_market_return"] = evo.market_return.back();
    fits["final_top_share"] = evo.groups[0].share.back();
    std::vector<double> final_wealth(base.schedule.groups);
    for (int k = 0; k < base.schedule.groups; ++k) {
      final_wealth[k] = evo.groups[k].wealth.back();
    }
    if (base.schedule.groups >= 3) {
      const TailFit fit = fit_power_law_rank(final_wealth);
      fits["rank_loglog_slope"] = fit.exponent;
      fits["rank_loglog_r2"] = fit.r_squared;
    }
    {
      std::vector<double> mu = {base.mu}, rb = {base.rbar};
      fits["predicted_loglog_slope"] =
          predicted_loglog_slope(base.schedule, evo.market_return, mu, rb, base.periods);
    }
    auto ratio = wage_wealth_ratio(evo.groups[0]);
    if (auto cross = first_below(ratio, 1e-3)) fits["wage_ratio_below_1e3_at"] = *cross;
    {
      std::ofstream out(stager.stage("fits.json"), std::ios::binary);
      out << fits.dump(2) << "\n";
    }

    // optional grid sweep over the schedule and environment
    if (root.has("sweep")) {
      auto axis = [&](const char* key, double fallback) {
        if (root.has(std::string("sweep.") + key)) {
          return root.at(std::string("sweep.") + key).as_double_array();
        }
        return std::vector<double>{fallback};
      };
      const auto slopes = axis("slope", base.schedule.slope);
      const auto intercepts = axis("intercept", base.schedule.intercept);
      const auto mus = axis("mu", base.mu);
      const auto rbars = axis("loan_rate", base.rbar);
      std::vector<long> group_counts{base.schedule.groups};
      if (root.has("sweep.groups")) {
        group_counts.clear();
        for (const ConfigValue& v : root.at("sweep.groups").as_array()) {
          group_counts.push_back(v.as_int());
        }
      }
      std::vector<long> horizons{base.periods};
      if (root.has("sweep.periods")) {
        horizons.clear();
        for (const ConfigValue& v : root.at("sweep.periods").as_array()) {
          horizons.push_back(v.as_int());
        }
      }

      std::vector<AsymptCase> cases;
      for (double a : slopes)
        for (double b : intercepts)
          for (double m : mus)
            for (double rb : rbars)
              for (long g : group_counts)
                for (long T : horizons) {
                  AsymptCase c = base;
                  c.schedule = {a, b, static_cast<int>(g)};
                  c.mu = m;
                  c.rbar = rb;
                  c.periods = T;
                  c.wealth.assign(g, base.wealth[0]);
                  c.wages.assign(g, base.wages[0]);
                  cases.push_back(std::move(c));
                }

      struct SweepRow {
        double final_share = 0.0, final_r = 0.0, rstar = 0.0;
        std::string error;
      };
      std::vector<SweepRow> rows(cases.size());
      auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          try {
            GroupEvolution e = run_asympt_case(cases[i]);
            rows[i].final_share = e.groups[0].share.back();
            rows[i].final_r = e.market_return.back();
            rows[i].rstar = steady_state_return(cases[i].schedule.rate(1), cases[i].mu,
                                                cases[i].rbar)
                                .value;
          } catch (const std::exception& e) {
            rows[i].error = e.what();
          }
        }
      };
      const int workers = std::max(1, args.threads);
      if (workers <= 1 || cases.size() < 2) {
        work(0, cases.size());
      } else {
        // disjoint index ranges; the merge order is fixed by index
        std::vector<std::thread> pool;
        const std::size_t chunk = (cases.size() + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
          const std::size_t begin = std::min(cases.size(), w * chunk);
          const std::size_t end = std::min(cases.size(), begin + chunk);
          if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
      }

      Table sweep({"slope", "intercept", "mu", "loan_rate", "groups", "periods",
                   "final_top_share", "final_R", "steady_state_R", "status"});
      for (std::size_t i = 0; i < cases.size(); ++i) {
        const AsymptCase& c = cases[i];
        const SweepRow& r = rows[i];
        sweep.add_row({Table::num(c.schedule.slope), Table::num(c.schedule.intercept),
                       Table::num(c.mu), Table::num(c.rbar),
                       Table::num(long(c.schedule.groups)), Table::num(c.periods),
                       Table::num(r.final_share), Table::num(r.final_r),
                       Table::num(r.rstar), r.error.empty() ? "ok" : r.error});
      }
      std::ofstream out(stager.stage(table_name("sweep", args.format)), std::ios::binary);
      sweep.write(out, args.format);
      manifest.solver_stats["sweep_cases"] = static_cast<double>(cases.size());
    }

    manifest.solver_stats["periods"] = static_cast<double>(base.periods);
    manifest.solver_stats["groups"] = static_cast<double>(base.schedule.groups);
  });
}

// ---------------------------------------------------------------------------
// partition

int cmd_partition(const CommonArgs& args) {
  return with_manifest(args, "partition", [&](OutputStager& stager, RunManifest& manifest) {
    const ConfigValue root = parse_config_file(args.config);
    Scenario sc = load_scenario(root, dirname_of(args.config), args.seed);
    manifest.seed = sc.seed;
    const int groups = static_cast<int>(root.at_required("partition.groups").as_int());
    const double epsilon = root.get_double("partition.epsilon", 0.05);
    const bool relabel = root.get_bool("partition.relabel", true);

    PeriodSolution sol = solve_period(sc.initial, sc.path.at(0), sc.solver);
    Partition part = partition_households(sc.initial, groups, epsilon, sc.seed);
    if (relabel) part = relabel_by_saving(sc.initial, sol, part);
    const std::vector<double> rates = group_saving_rates(sc.initial, sol, part);

    Table assignment({"household_id", "group_id"});
    for (std::size_t i = 0; i < part.assignment.size(); ++i) {
      assignment.add_row(
          {Table::num(static_cast<long>(i)), Table::num(long(part.assignment[i] + 1))});
    }
    {
      std::ofstream out(stager.stage(table_name("assignment", args.format)),
                        std::ios::binary);
      assignment.write(out, args.format);
    }

    nlohmann::json summary;
    summary["groups"] = part.groups();
    summary["epsilon"] = epsilon;
    summary["max_distance"] = part.max_distance();
    auto members = part.members();
    for (int k = 0; k < part.groups(); ++k) {
      summary["group_sizes"].push_back(members[k].size());
      summary["distances"].push_back(part.distances[k]);
      summary["saving_rates"].push_back(rates[k]);
      summary["group_wealth"].push_back(part.group_wealth[k]);
    }
    {
      std::ofstream out(stager.stage("summary.json"), std::ios::binary);
      out << summary.dump(2) << "\n";
    }
    manifest.solver_stats["max_distance"] = part.max_distance();
  });
}

// ---------------------------------------------------------------------------
// ge-example

int cmd_ge(const CommonArgs& args) {
  return with_manifest(args, "ge-example", [&](OutputStager& stager, RunManifest& manifest) {
    const ConfigValue root = parse_config_file(args.config);
    GEParams prm;
    prm.alpha = root.get_double("params.alpha", prm.alpha);
    prm.beta = root.get_double("params.beta", prm.beta);
    prm.c2 = root.get_double("params.c2", prm.c2);
    prm.c3 = root.get_double("params.c3", prm.c3);
    prm.theta2 = root.get_double("params.theta2", prm.theta2);
    prm.theta3 = root.get_double("params.theta3", prm.theta3);
    prm.delta = root.get_double("params.delta", prm.delta);
    prm.m1 = root.get_double("params.m1", prm.m1);
    prm.m2 = root.get_double("params.m2", prm.m2);
    prm.e1 = root.get_double("params.e1", prm.e1);
    prm.e2 = root.get_double("params.e2", prm.e2);
    GESolverOptions opt;
    opt.max_iterations = static_cast<int>(root.get_int("solver.max_iterations", 200));
    opt.tolerance = root.get_double("solver.tolerance", 1e-13);

    GESolution sol = solve_ge(prm, opt);

    auto period_json = [](const GEPeriod& q) {
      nlohmann::json j;
      j["capital_price_1"] = q.capital_price_1;
      j["capital_price_2"] = q.capital_price_2;
      j["wage"] = q.wage;
      j["consumption_price"] = q.consumption_price;
      j["consumption"] = q.consumption;
      j["labor_consumption"] = q.labor_consumption;
      j["labor_capital_1"] = q.labor_capital_1;
      j["labor_capital_2"] = q.labor_capital_2;
      j["capital_used_1"] = q.capital_used_1;
      j["capital_used_2"] = q.capital_used_2;
      j["capital_saved_1"] = q.capital_saved_1;
      j["capital_saved_2"] = q.capital_saved_2;
      j["capital_output_1"] = q.capital_output_1;
      j["capital_output_2"] = q.capital_output_2;
      return j;
    };
    nlohmann::json j;
    j["period1"] = period_json(sol.period1);
    j["period2"] = period_json(sol.period2);
    j["arbitrage_gap"] = arbitrage_gap(sol);
    j["residual_norm"] = sol.residual_norm;
    j["residuals"] = sol.residuals;
    j["closure_residual"] = sol.closure_residual;
    j["numerical_rank"] = sol.numerical_rank;
    j["boundary_flag"] = sol.boundary_flag;
    j["newton_start"] = sol.newton_start;
    j["iterations"] = sol.iterations;
    {
      std::ofstream out(stager.stage("solution.json"), std::ios::binary);
      out << j.dump(2) << "\n";
    }

    {
      std::ofstream out(stager.stage("solution.txt"), std::ios::binary);
      auto line = [&](const char* label, double v1, double v2) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-24s %14.8f %14.8f\n", label, v1, v2);
        out << buf;
      };
      out << "quantity                       period 1       period 2\n";
      out << "------------------------------------------------------\n";
      line("capital price 1", sol.period1.capital_price_1, sol.period2.capital_price_1);
      line("capital price 2", sol.period1.capital_price_2, sol.period2.capital_price_2);
      line("wage", sol.period1.wage, sol.period2.wage);
      line("consumption price", sol.period1.consumption_price,
           sol.period2.consumption_price);
      line("consumption", sol.period1.consumption, sol.period2.consumption);
      line("labor: consumption", sol.period1.labor_consumption,
           sol.period2.labor_consumption);
      line("labor: capital good 1", sol.period1.labor_capital_1,
           sol.period2.labor_capital_1);
      line("labor: capital good 2", sol.period1.labor_capital_2,
           sol.period2.labor_capital_2);
      line("capital used 1", sol.period1.capital_used_1, sol.period2.capital_used_1);
      line("capital used 2", sol.period1.capital_used_2, sol.period2.capital_used_2);
      line("capital saved 1", sol.period1.capital_saved_1, sol.period2.capital_saved_1);
      line("capital saved 2", sol.period1.capital_saved_2, sol.period2.capital_saved_2);
      line("capital output 1", sol.period1.capital_output_1, sol.period2.capital_output_1);
      line("capital output 2", sol.period1.capital_output_2, sol.period2.capital_output_2);
      out << "------------------------------------------------------\n";
      char buf[128];
      std::snprintf(buf, sizeof buf, "arbitrage gap: %.10e\n", arbitrage_gap(sol));
      out << buf;
      std::snprintf(buf, sizeof buf, "max residual:  %.3e   numerical rank: %d/28\n",
                    sol.residual_norm, sol.numerical_rank);
      out << buf;
    }
    manifest.solver_stats["residual_norm"] = sol.residual_norm;
    manifest.solver_stats["iterations"] = sol.iterations;
    manifest.solver_stats["numerical_rank"] = sol.numerical_rank;
  });
}

// ---------------------------------------------------------------------------
// empirical

int cmd_empirical(const CommonArgs& args) {
  return with_manifest(args, "empirical", [&](OutputStager& stager, RunManifest& manifest) {
    const ConfigValue root = parse_config_file(args.config);
    const std::string base_dir = dirname_of(args.config);
    const std::string mode = root.get_string("data.mode", "files");

    QuarterlySeries panel;
    if (mode == "synthetic") {
      SyntheticParams prm;
      prm.quarters = root.get_int("synthetic.quarters", prm.quarters);
      prm.gdp_growth_quarterly =
          root.get_double("synthetic.gdp_growth_quarterly", prm.gdp_growth_quarterly);
      prm.saving_mean = root.get_double("synthetic.saving_mean", prm.saving_mean);
      prm.saving_amp = root.get_double("synthetic.saving_amp", prm.saving_amp);
      prm.debt_ratio_mean =
          root.get_double("synthetic.debt_ratio_mean", prm.debt_ratio_mean);
      prm.loan_rate_mean = root.get_double("synthetic.loan_rate_mean", prm.loan_rate_mean);
      const std::uint64_t seed =
          args.seed ? args.seed
                    : static_cast<std::uint64_t>(root.get_int("synthetic.seed", 1));
      manifest.seed = seed;
      panel = generate_synthetic(seed, prm);
    } else if (mode == "files") {
      LoadSpec spec;
      auto column = [&](const char* key) {
        ColumnSource src;
        const ConfigValue& node = root.at_required(std::string("data.files.") + key);
        src.path = node.at_required("path").as_string();
        if (!src.path.empty() && src.path.front() != '/') {
          src.path = base_dir + "/" + src.path;
        }
        src.date_column = node.get_string("date_column", "date");
        src.value_column = node.get_string("value_column", "value");
        return src;
      };
      spec.net_worth = column("net_worth");
      spec.debt_to_gdp = column("debt_to_gdp");
      spec.gdp = column("gdp");
      spec.sp_index = column("sp_index");
      spec.loan_rate = column("loan_rate");
      spec.consumption = column("consumption");
      spec.government = column("government");
      spec.loan_rate_is_percent = root.get_bool("data.loan_rate_percent", true);
      panel = load_series(spec);
      derive_columns(panel);
      compute_theoretical_premium(panel);
    } else {
      throw ConfigError("data.mode must be 'files' or 'synthetic'");
    }

    RegressionReport report = regress(panel);

    Table table({"date", "net_worth", "debt_to_gdp", "gdp", "sp_index", "loan_rate",
                 "consumption", "government", "debt", "saving_rate", "gdp_growth",
                 "quarterly_return", "annual_return", "theoretical_premium",
                 "realized_premium"});
    auto cell = [](double v) { return std::isnan(v) ? std::string("") : format_double(v); };
    for (std::size_t t = 0; t < panel.size(); ++t) {
      table.add_row({panel.quarters[t].str(), cell(panel.net_worth[t]),
                     cell(panel.debt_to_gdp[t]), cell(panel.gdp[t]),
                     cell(panel.sp_index[t]), cell(panel.loan_rate[t]),
                     cell(panel.consumption[t]), cell(panel.government[t]),
                     cell(panel.debt[t]), cell(panel.saving_rate[t]),
                     cell(panel.gdp_growth[t]), cell(panel.quarterly_return[t]),
                     cell(panel.annual_return[t]), cell(panel.theoretical_premium[t]),
                     cell(panel.realized_premium[t])});
    }
    {
      std::ofstream out(stager.stage(table_name("panel", args.format)), std::ios::binary);
      table.write(out, args.format);
    }

    // the two overlaid premium series, one row per usable quarter
    Table plot({"date", "actual", "theoretical"});
    for (std::size_t t = 0; t < panel.size(); ++t) {
      if (std::isnan(panel.theoretical_premium[t]) ||
          std::isnan(panel.realized_premium[t])) {
        continue;
      }
      plot.add_row({panel.quarters[t].str(), cell(panel.realized_premium[t]),
                    cell(panel.theoretical_premium[t])});
    }
    {
      std::ofstream out(stager.stage(table_name("plot_data", args.format)),
                        std::ios::binary);
      plot.write(out, args.format);
    }

    nlohmann::json j;
    j["correlation"] = report.fit.correlation;
    j["slope"] = report.fit.slope;
    j["slope_se"] = report.fit.slope_se;
    j["slope_t"] = report.fit.slope_t;
    j["intercept"] = report.fit.intercept;
    j["intercept_se"] = report.fit.intercept_se;
    j["intercept_t"] = report.fit.intercept_t;
    j["r_squared"] = report.fit.r_squared;
    j["f_stat"] = report.fit.f_stat;
    j["observations"] = report.used;
    j["first_quarter"] = report.first.str();
    j["last_quarter"] = report.last.str();
    j["gaps"] = panel.gaps;
    {
      std::ofstream out(stager.stage("report.json"), std::ios::binary);
      out << j.dump(2) << "\n";
    }
    manifest.solver_stats["observations"] = static_cast<double>(report.used);
    manifest.solver_stats["correlation"] = report.fit.correlation;
  });
}

// ---------------------------------------------------------------------------
// selftest

int cmd_selftest() {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
    if (!ok) ++failures;
  };

  try {
    // closed-form agreement under uniform saving
    Rng rng(2024);
    bool closed_ok = true;
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t n = 40, f = 6;
      std::vector<double> assets(n), s(n, 0.3), mu(n), wages(n);
      for (std::size_t i = 0; i < n; ++i) {
        assets[i] = rng.lognormal(1.0, 0.5);
        mu[i] = rng.uniform(0.05, 0.3);
        wages[i] = rng.lognormal(-1.5, 0.4);
      }
      std::vector<double> equity(f), betas(f);
      for (std::size_t j = 0; j < f; ++j) {
        equity[j] = rng.lognormal(1.5, 0.5);
        betas[j] = rng.uniform(0.7, 1.3);
      }
      double scale = 0.0, etotal = 0.0;
      for (double a : assets) scale += a;
      for (double a : equity) etotal += a;
      for (double& a : equity) a *= scale / etotal;
      Matrix weights(n, f);
      for (std::size_t i = 0; i < n; ++i) rng.dirichlet(weights.row(i), 1.0);
      const double loan = 0.03;

      PeriodInputs in;
      in.loan_rate = loan;
      in.saving_rates = std::make_shared<const std::vector<double>>(s);
      in.leverage_ratios = std::make_shared<const std::vector<double>>(mu);
      in.relative_wages = std::make_shared<const std::vector<double>>(wages);
      in.betas = std::make_shared<const std::vector<double>>(betas);
      in.portfolio_weights = std::make_shared<const Matrix>(weights);
      in.relative_prices =
          std::make_shared<const std::vector<double>>(std::vector<double>{1.0});
      Matrix qm(n, 1);
      for (std::size_t i = 0; i < n; ++i) qm.at(i, 0) = 0.7 * (wages[i] + assets[i] * loan);
      in.purchase_quantities = std::make_shared<const Matrix>(qm);

      EconomyState st = make_state(0, assets, equity, in, 1.0);
      PeriodSolution sol = solve_period(st, in, SolverConfig{});
      const double closed = macro_return_closed_form(
          sol.aggregate_saving_rate, sol.labor_income, sol.debt, sol.net_assets, loan);
      closed_ok = closed_ok && std::abs(sol.market_return - closed) <= 1e-12;
    }
    check("closed-form market return agreement", closed_ok);

    const double rstar = steady_state_return(0.8, 0.5, 0.04).value;
    check("stationary return fixed point",
          std::abs(0.8 * (rstar + 0.5 * (rstar - 0.04)) - rstar) <= 1e-12);

    GEParams sym;
    sym.alpha = sym.beta = 0.25;
    sym.c2 = sym.c3 = 1.2;
    sym.theta2 = sym.theta3 = 0.55;
    GESolution sol = solve_ge(sym);
    check("symmetric equilibrium has no relative-price drift",
          std::abs(arbitrage_gap(sol)) <= 1e-10 && sol.residual_norm <= 1e-10);

    QuarterlySeries panel = generate_synthetic(99);
    RegressionReport rep = regress(panel);
    check("synthetic premium identity inverts",
          std::abs(rep.fit.correlation - 1.0) <= 1e-9 &&
              std::abs(rep.fit.slope - 1.0) <= 1e-9);

    // short conservative run: wealth totals agree on both sides each period
    {
      const std::size_t n = 200, f = 10;
      Rng rng2(7);
      std::vector<double> assets(n), s(n), mu(n), wages(n), q(n);
      for (std::size_t i = 0; i < n; ++i) {
        assets[i] = rng2.lognormal(1.0, 0.6);
        s[i] = rng2.uniform(0.15, 0.45);
        mu[i] = rng2.uniform(0.05, 0.15);
        wages[i] = rng2.lognormal(-2.3, 0.5) * 7.5;
        q[i] = (1.0 - s[i]) * wages[i] + 0.04 * assets[i];
      }
      std::vector<double> equity(f);
      double at = 0.0, et = 0.0;
      for (double a : assets) at += a;
      for (double& a : equity) {
        a = rng2.lognormal(2.0, 0.4);
        et += a;
      }
      for (double& a : equity) a *= at / et;
      Matrix weights(n, f);
      for (std::size_t i = 0; i < n; ++i) rng2.dirichlet(weights.row(i), 1.0);
      Matrix qm(n, 1);
      for (std::size_t i = 0; i < n; ++i) qm.at(i, 0) = q[i];
      ExogenousPath path =
          ExogenousPath::constant({n, f, 1}, 0.02, s, mu, wages,
                                  std::vector<double>(f, 1.0), std::move(weights), {1.0},
                                  std::move(qm));
      EconomyState st = make_state(0, assets, equity, path.at(0), 1.0);
      RunResult res = run(st, path, 50, SolverConfig{});
      double max_dual = 0.0;
      for (const MacroRecord& r : res.records) {
        max_dual = std::max(max_dual, r.dual_aggregation_residual);
      }
      check("fifty-period run conserves aggregate wealth", max_dual <= 1e-9);

      Partition part = partition_households(st, 4, 1.0, 3);
      std::vector<int> counts(4, 0);
      for (int g : part.assignment) ++counts[g];
      int covered = 0;
      for (int c : counts) covered += c;
      check("partition covers every household exactly once",
            covered == static_cast<int>(n));
    }
  } catch (const std::exception& e) {
    std::printf("FAIL selftest threw: %s\n", e.what());
    ++failures;
  }
  return failures == 0 ? kOk : kValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heterogeneous-economy simulator and validation toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config, "configuration file")->required();
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--seed", args.seed, "seed override (nonzero wins over the config)");
    cmd->add_option("--format", args.format, "table output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--threads", args.threads, "worker thread cap for sweeps");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run the period stepper");
  add_common(simulate);
  CLI::App* asympt = app.add_subcommand("asympt", "group-dynamics runs and sweeps");
  add_common(asympt);
  CLI::App* partition = app.add_subcommand("partition", "build market-tracking groups");
  add_common(partition);
  CLI::App* ge = app.add_subcommand("ge-example", "two-period equilibrium example");
  add_common(ge);
  CLI::App* empirical = app.add_subcommand("empirical", "quarterly premium replication");
  add_common(empirical);
  app.add_subcommand("selftest", "quick invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(args);
    if (asympt->parsed()) return cmd_asympt(args);
    if (partition->parsed()) return cmd_partition(args);
    if (ge->parsed()) return cmd_ge(args);
    if (empirical->parsed()) return cmd_empirical(args);
    return cmd_selftest();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsageError;
  }
}
