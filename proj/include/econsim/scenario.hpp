#pragma once

#include <cstdint>
#include <string>

#include "econsim/config.hpp"
#include "econsim/exogenous.hpp"
#include "econsim/solver.hpp"

namespace econsim {

// A fully parsed simulation setup: initial state, exogenous path, solver
// settings and run horizon, built from one config file. The accepted keys
// are documented in the README.
struct Scenario {
  Dims dims;
  EconomyState initial;
  ExogenousPath path;
  SolverConfig solver;
  long periods = 0;
  std::uint64_t seed = 0;
  RunOptions run_options;
  double initial_beta_rescale = 1.0;
};

// `seed_override` (when nonzero) takes precedence over [run].seed.
Scenario load_scenario(const ConfigValue& root, const std::string& base_dir,
                       std::uint64_t seed_override = 0);

SolverConfig load_solver_config(const ConfigValue& root);

}  // namespace econsim
