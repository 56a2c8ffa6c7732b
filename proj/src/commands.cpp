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


#include "evrmpc/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>

#include <fmt/format.h>

#include "evrmpc/errors.hpp"

namespace evrmpc
{

namespace fs = std::filesystem;

namespace
{

void make_dir(const std::string & dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw DataError("cannot create directory '" + dir + "': " + ec.message());
  }
}

std::string fmt_optional(const std::optional<double> & x)
{
  return x ? fmt::format("{:.17g}", *x) : std::string("none");
}

double rad_to_deg(double r)
{
  return r * 180.0 / std::numbers::pi;
}

double mean_solve_ms(const SimLog & log)
{
  if (log.steps.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const SimStep & s : log.steps) {
    sum += s.solve_ms;
  }
  return sum / static_cast<double>(log.steps.size());
}

}  // namespace

RunResult execute_run(const RunConfig & config)
{
  config.validate();
  RunResult r;
  r.config = config;
  const DriveCycle cycle = load_cycle(config.cycle_path, config.vehicle);
  if (!r.config.v_cruise) {
    r.config.v_cruise = cycle.mean_speed;
  }
  VehicleParams params = config.vehicle;
  params.v_cruise = *r.config.v_cruise;
  const EfficiencyMap map = config.effmap_path.empty() ? EfficiencyMap::constant(1.0)
                                                       : load_efficiency_map(config.effmap_path);

  const DisturbanceEnvelope env = make_envelope(params, config.envelope);
  DisturbanceProcess process;
  process.mode = config.dist_mode;
  process.seed = config.seed;
  process.step_fraction = config.step_fraction;
  process.envelope = env;
  if (config.dist_mode == DisturbanceMode::replay) {
    process.replay = load_replay(config.replay_path);
  }

  SimOptions opt;
  opt.steps = config.steps;
  opt.strict = config.strict;
  opt.v0 = config.v0;
  opt.ds0 = config.ds0;
  opt.weights = config.weights;
  opt.mpc.solver.tol = config.solver_tol;
  opt.mpc.solver.accept_tol = std::max(opt.mpc.solver.accept_tol, config.solver_tol);
  opt.mpc.solver.max_iterations = config.max_iterations;
  opt.shrink_on_failure = config.shrink_on_failure;
  opt.retry_budget = config.retry_budget;

  r.log = run_closed_loop(config.controller, params, env, cycle, process, config.horizon, opt);
  r.report = evaluate_log(r.log, map, config.energy_mode);
  return r;
}

void write_run(const RunResult & run, const std::string & dir)
{
  make_dir(dir);
  const fs::path d(dir);
  write_log_csv(run.log, (d / "log.csv").string());

  nlohmann::json rep = to_json(run.report);
  rep["controller"] = to_string(run.config.controller);
  rep["horizon"] = run.config.horizon;
  rep["seed"] = run.config.seed;
  rep["steps"] = run.log.steps.size();
  rep["violation_steps"] = run.log.violation_steps;
  rep["first_violation_s"] = run.log.first_violation_time
                               ? nlohmann::json(*run.log.first_violation_time)
                               : nlohmann::json(nullptr);
  rep["fallback_steps"] = run.log.fallback_steps;
  rep["aborted"] = run.log.aborted;
  {
    std::ofstream out(d / "report.json");
    if (!out) {
      throw DataError("cannot write report in '" + dir + "'");
    }
    out << rep.dump(2) << '\n';
  }

  save_config(run.config, (d / "config.json").string());

  std::ofstream hw(d / "headway.csv");
  if (!hw) {
    throw DataError("cannot write headway data in '" + dir + "'");
  }
  hw << "t_s,ds_m,ds_lo_m,ds_hi_m,v_mps,vl_mps\n";
  const VehicleParams & p = run.config.vehicle;
  for (const SimStep & s : run.log.steps) {
    const double v = std::max(s.v, 0.0);
    hw << fmt::format(
      "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.t, s.ds, p.s_0 + v * p.dt_min,
      p.s_0 + v * p.dt_max, s.v, s.v_l);
  }
}

std::string summary_line(const RunResult & run)
{
  return fmt::format(
    "{} N={} seed={} steps={} violations={} first_violation_s={} fallbacks={} E_bat={:.4f} {} "
    "j_rms={:.4f}{}",
    to_string(run.config.controller), run.config.horizon, run.config.seed, run.log.steps.size(),
    run.log.violation_steps, fmt_optional(run.log.first_violation_time), run.log.fallback_steps,
    run.report.E_bat_Wh, run.report.units(), run.report.j_rms, run.log.aborted ? " (aborted)" : "");
}

int cmd_bounds(const RunConfig & config, std::ostream & out)
{
  config.vehicle.validate();
  const DisturbanceEnvelope e = make_envelope(config.vehicle, config.envelope);
  out << fmt::format("w_lo={:.6f} w_hi={:.6f} m/s^2\n", e.w_lo, e.w_hi);
  out << fmt::format(
    "envelope: f_d=[{:g}, {:g}] f_r=[{:g}, {:g}] theta=[{:.4f}, {:.4f}] deg v=[{:g}, {:g}] m/s{}\n",
    e.f_d_lo, e.f_d_hi, e.f_r_lo, e.f_r_hi, rad_to_deg(e.theta_lo), rad_to_deg(e.theta_hi),
    config.vehicle.v_min, config.vehicle.v_max, e.widened ? " (widened by speed scan)" : "");
  return kExitOk;
}

int cmd_simulate(const RunConfig & config, std::ostream & out)
{
  const RunResult run = execute_run(config);
  write_run(run, config.out_dir);
  out << summary_line(run) << '\n';
  if (config.strict && run.log.violation_steps > 0) {
    return kExitViolation;
  }
  return kExitOk;
}

std::vector<SweepRow> run_sweep(const RunConfig & config)
{
  config.validate();
  const std::size_t n = config.horizons.size();
  std::vector<SweepRow> rows(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        RunConfig c = config;
        c.horizon = config.horizons[i];
        c.out_dir = (fs::path(config.out_dir) / fmt::format("N{}", c.horizon)).string();
        const RunResult run = execute_run(c);
        write_run(run, c.out_dir);
        SweepRow & row = rows[i];
        row.N = c.horizon;
        row.report = run.report;
        row.violation_steps = run.log.violation_steps;
        row.first_violation_time = run.log.first_violation_time;
        row.fallback_steps = run.log.fallback_steps;
        row.steps = static_cast<int>(run.log.steps.size());
        row.mean_solve_ms = mean_solve_ms(run.log);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads =
    std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, n);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto & th : pool) {
    th.join();
  }
  for (const auto & e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow> & rows, const std::string & path)
{
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write sweep table '" + path + "'");
  }
  out << "N,E_bat_Wh,E_mech_Wh,E_regen_Wh,j_rms,violation_steps,first_violation_s,"
         "fallback_steps,steps,mean_solve_ms\n";
  for (const SweepRow & r : rows) {
    out << fmt::format(
      "{},{:.17g},{:.17g},{:.17g},{},{},{},{},{},{:.3f}\n", r.N, r.report.E_bat_Wh,
      r.report.E_mech_Wh, r.report.E_regen_Wh,
      std::isfinite(r.report.j_rms) ? fmt::format("{:.17g}", r.report.j_rms) : "nan",
      r.violation_steps, fmt_optional(r.first_violation_time), r.fallback_steps, r.steps,
      r.mean_solve_ms);
  }
}

int cmd_sweep(const RunConfig & config, std::ostream & out)
{
  const std::vector<SweepRow> rows = run_sweep(config);
  make_dir(config.out_dir);
  write_sweep_csv(rows, (fs::path(config.out_dir) / "sweep.csv").string());
  bool violated = false;
  for (const SweepRow & r : rows) {
    out << fmt::format(
      "N={} violations={} fallbacks={} E_bat={:.4f} {} j_rms={:.4f} mean_solve_ms={:.1f}\n", r.N,
      r.violation_steps, r.fallback_steps, r.report.E_bat_Wh, r.report.units(), r.report.j_rms,
      r.mean_solve_ms);
    violated = violated || r.violation_steps > 0;
  }
  return config.strict && violated ? kExitViolation : kExitOk;
}

int cmd_evaluate(
  const RunConfig & config, const std::string & log_path, std::ostream & out,
  const std::string & report_path)
{
  config.vehicle.validate();
  const SimLog log = read_log_csv(log_path, config.vehicle.delta_t);
  const EfficiencyMap map = config.effmap_path.empty() ? EfficiencyMap::constant(1.0)
                                                       : load_efficiency_map(config.effmap_path);
  const EnergyReport report = evaluate_log(log, map, config.energy_mode);
  out << to_json(report).dump(2) << '\n';
  if (!report_path.empty()) {
    write_report_json(report, report_path);
  }
  return kExitOk;
}

}  // namespace evrmpc
