#include "econsim/scenario.hpp"

#include <cmath>

#include "econsim/summation.hpp"

namespace econsim {

SolverConfig load_solver_config(const ConfigValue& root) {
  SolverConfig cfg;
  cfg.max_iterations = static_cast<int>(root.get_int("solver.max_iterations", 200));
  cfg.relative_tolerance = root.get_double("solver.tolerance", 1e-10);
  cfg.damping = root.get_double("solver.damping", 0.5);
  const std::string mode = root.get_string("solver.price_mode", "simultaneous");
  if (mode == "simultaneous") {
    cfg.price_mode = PriceMode::Simultaneous;
  } else if (mode == "lagged") {
    cfg.price_mode = PriceMode::Lagged;
  } else {
    throw ConfigError("solver.price_mode must be 'simultaneous' or 'lagged'");
  }
  cfg.validate();
  return cfg;
}

Scenario load_scenario(const ConfigValue& root, const std::string& base_dir,
                       std::uint64_t seed_override) {
  Scenario sc;
  sc.dims.households = static_cast<std::size_t>(root.at_required("economy.households").as_int());
  sc.dims.firms = static_cast<std::size_t>(root.at_required("economy.firms").as_int());
  sc.dims.goods = static_cast<std::size_t>(root.get_int("economy.goods", 1));
  if (sc.dims.households == 0 || sc.dims.firms == 0 || sc.dims.goods == 0) {
    throw ConfigError("economy: households, firms and goods must be positive");
  }

  sc.seed = seed_override != 0
                ? seed_override
                : static_cast<std::uint64_t>(root.get_int("run.seed", 1));
  sc.periods = root.get_int("run.periods", 0);
  sc.run_options.snapshot_every = root.get_int("run.snapshot_every", 0);
  if (root.has("run.snapshots")) {
    for (const ConfigValue& v : root.at("run.snapshots").as_array()) {
      sc.run_options.snapshot_periods.push_back(v.as_int());
    }
  }

  sc.solver = load_solver_config(root);
  sc.path = ExogenousPath::from_config(root.at_required("exogenous"), sc.dims, sc.seed,
                                       base_dir);

  // Initial wealth on both sides, balanced per the configured rule.
  Rng init_rng = Rng(sc.seed).fork("initial");
  FieldSource assets_src = FieldSource::from_config(root.at_required("initial.assets"),
                                                    FieldSource::Target::Scalar, base_dir);
  FieldSource equity_src = FieldSource::from_config(root.at_required("initial.equities"),
                                                    FieldSource::Target::Scalar, base_dir);
  auto assets_ptr = assets_src.vector_at(0, sc.dims.households, init_rng, "initial.assets");
  auto equity_ptr = equity_src.vector_at(0, sc.dims.firms, init_rng, "initial.equities");
  std::vector<double> assets = *assets_ptr;
  std::vector<double> equity = *equity_ptr;

  const std::string balance = root.get_string("initial.balance", "scale-equity");
  const double assets_total = pairwise_sum(assets);
  const double equity_total = pairwise_sum(equity);
  if (!(assets_total > 0.0) || !(equity_total > 0.0)) {
    throw ConfigError("initial: wealth totals must be positive");
  }
  if (balance == "scale-equity") {
    const double f = assets_total / equity_total;
    for (double& a : equity) a *= f;
  } else if (balance == "scale-assets") {
    const double f = equity_total / assets_total;
    for (double& a : assets) a *= f;
  } else if (balance == "require") {
    // make_state will reject a mismatch
  } else {
    throw ConfigError("initial.balance must be scale-equity, scale-assets or require");
  }

  const double price0 = root.get_double("initial.price_level", 1.0);
  sc.initial = make_state(0, std::move(assets), std::move(equity), sc.path.at(0), price0,
                          &sc.initial_beta_rescale);
  require_valid(validate(sc.initial), "initial state");
  return sc;
}

}  // namespace econsim
