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


#ifndef EVRMPC__COMMANDS_HPP_
#define EVRMPC__COMMANDS_HPP_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "evrmpc/evaluation.hpp"
#include "evrmpc/run_config.hpp"
#include "evrmpc/simulator.hpp"

namespace evrmpc
{

/// Process exit codes of the rmpc tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitViolation = 4,
};

/// Outcome of one closed-loop run, before anything is written.
struct RunResult
{
  RunConfig config;  // resolved, with v_cruise filled in
  SimLog log;
  EnergyReport report;
};

/// Loads the cycle, map and replay file, then simulates and scores one run.
RunResult execute_run(const RunConfig & config);

/// Writes log.csv, report.json, config.json and headway.csv into `dir`.
void write_run(const RunResult & run, const std::string & dir);

/// One-line human summary of a run.
std::string summary_line(const RunResult & run);

int cmd_bounds(const RunConfig & config, std::ostream & out);
int cmd_simulate(const RunConfig & config, std::ostream & out);

struct SweepRow
{
  int N = 0;
  EnergyReport report;
  int violation_steps = 0;
  std::optional<double> first_violation_time;
  int fallback_steps = 0;
  int steps = 0;
  double mean_solve_ms = 0.0;
};

/// Runs every horizon in config.horizons with the same seed. Per-run outputs
/// go to <out>/N<h>/, the table to <out>/sweep.csv.
std::vector<SweepRow> run_sweep(const RunConfig & config);
void write_sweep_csv(const std::vector<SweepRow> & rows, const std::string & path);
int cmd_sweep(const RunConfig & config, std::ostream & out);

/// Re-scores an existing log against the configured map. The report is
/// printed and, when `report_path` is set, written there as well.
int cmd_evaluate(
  const RunConfig & config, const std::string & log_path, std::ostream & out,
  const std::string & report_path = {});

}  // namespace evrmpc

#endif  // EVRMPC__COMMANDS_HPP_
