// Copyright 2026 The evrmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// rmpc: command-line front end for the closed-loop experiments.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evrmpc/commands.hpp"
#include "evrmpc/errors.hpp"
#include "evrmpc/run_config.hpp"

namespace
{

struct Flags
{
  std::string config_path;
  std::string controller;
  int horizon = 0;
  std::vector<int> horizons;
  std::uint64_t seed = 0;
  std::string cycle;
  std::string effmap;
  std::string out;
  int steps = 0;
  bool strict = false;
  std::string dist_mode;
  std::string energy_mode;
  std::string replay;
  std::string log_path;
};

void add_run_flags(CLI::App & sub, Flags & f)
{
  sub.add_option("--config", f.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  sub.add_option("--controller", f.controller, "nominal or robust")
    ->check(CLI::IsMember({"nominal", "robust"}));
  sub.add_option("--horizon", f.horizon, "prediction horizon N");
  sub.add_option("--seed", f.seed, "disturbance seed");
  sub.add_option("--cycle", f.cycle, "drive-cycle CSV (t_s,v_mps)");
  sub.add_option("--effmap", f.effmap, "efficiency-map CSV, or 'none' for eta = 1");
  sub.add_option("--out", f.out, "output directory");
  sub.add_option("--steps", f.steps, "number of steps (-1 for the whole cycle)");
  sub.add_flag("--strict", f.strict, "stop at the first constraint violation");
  sub.add_option("--dist-mode", f.dist_mode, "iid, walk, worst or replay")
    ->check(CLI::IsMember({"iid", "walk", "worst", "replay"}));
  sub.add_option("--energy-mode", f.energy_mode, "physical or paper")
    ->check(CLI::IsMember({"physical", "paper"}));
  sub.add_option("--replay", f.replay, "disturbance file for replay mode");
}

evrmpc::RunConfig resolve(const CLI::App & sub, const Flags & f)
{
  evrmpc::RunConfig c = f.config_path.empty() ? evrmpc::RunConfig{}
                                              : evrmpc::load_config(f.config_path);
  const auto given = [&sub](const char * name) {
    const CLI::Option * opt = sub.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--controller")) {
    c.controller = evrmpc::parse_controller(f.controller);
  }
  if (given("--horizon")) {
    c.horizon = f.horizon;
  }
  if (given("--horizons")) {
    c.horizons = f.horizons;
  }
  if (given("--seed")) {
    c.seed = f.seed;
  }
  if (given("--cycle")) {
    c.cycle_path = f.cycle;
  }
  if (given("--effmap")) {
    c.effmap_path = f.effmap == "none" ? std::string() : f.effmap;
  }
  if (given("--out")) {
    c.out_dir = f.out;
  }
  if (given("--steps")) {
    c.steps = f.steps;
  }
  if (given("--strict")) {
    c.strict = f.strict;
  }
  if (given("--dist-mode")) {
    c.dist_mode = evrmpc::parse_disturbance_mode(f.dist_mode);
  }
  if (given("--energy-mode")) {
    c.energy_mode = evrmpc::parse_energy_mode(f.energy_mode);
  }
  if (given("--replay")) {
    c.replay_path = f.replay;
  }
  if (const char * tol = std::getenv("RMPC_SOLVER_TOL")) {
    try {
      std::size_t used = 0;
      c.solver_tol = std::stod(tol, &used);
      if (used != std::string(tol).size()) {
        throw std::invalid_argument(tol);
      }
    } catch (const std::exception &) {
      throw evrmpc::ConfigError(std::string("RMPC_SOLVER_TOL is not a number: ") + tol);
    }
  }
  return c;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Robust and nominal MPC car-following experiments"};
  app.require_subcommand(1);
  Flags f;

  CLI::App * bounds = app.add_subcommand("bounds", "print the disturbance box");
  add_run_flags(*bounds, f);
  CLI::App * simulate = app.add_subcommand("simulate", "run one closed-loop simulation");
  add_run_flags(*simulate, f);
  CLI::App * sweep = app.add_subcommand("sweep", "simulate several horizons with one seed");
  add_run_flags(*sweep, f);
  sweep->add_option("--horizons", f.horizons, "horizon list, e.g. 15,20,25")->delimiter(',');
  CLI::App * evaluate = app.add_subcommand("evaluate", "re-score an existing log");
  add_run_flags(*evaluate, f);
  evaluate->add_option("log", f.log_path, "log CSV written by simulate")
    ->required()
    ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : evrmpc::kExitConfig;
  }

  try {
    if (bounds->parsed()) {
      return evrmpc::cmd_bounds(resolve(*bounds, f), std::cout);
    }
    if (simulate->parsed()) {
      return evrmpc::cmd_simulate(resolve(*simulate, f), std::cout);
    }
    if (sweep->parsed()) {
      return evrmpc::cmd_sweep(resolve(*sweep, f), std::cout);
    }
    const evrmpc::RunConfig c = resolve(*evaluate, f);
    const std::string report = evaluate->get_option("--out")->count() > 0
                                 ? c.out_dir + "/report.json"
                                 : std::string();
    if (!report.empty()) {
      std::filesystem::create_directories(c.out_dir);
    }
    return evrmpc::cmd_evaluate(c, f.log_path, std::cout, report);
  } catch (const evrmpc::ConfigError & e) {
    std::cerr << "rmpc: configuration error: " << e.what() << '\n';
    return evrmpc::kExitConfig;
  } catch (const evrmpc::DataError & e) {
    std::cerr << "rmpc: input error: " << e.what() << '\n';
    return evrmpc::kExitConfig;
  } catch (const evrmpc::SolverError & e) {
    std::cerr << "rmpc: solver failure: " << e.what() << '\n';
    return evrmpc::kExitSolver;
  } catch (const std::exception & e) {
    std::cerr << "rmpc: " << e.what() << '\n';
    return 1;
  }
}
