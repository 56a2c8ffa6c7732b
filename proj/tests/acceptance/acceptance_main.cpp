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


// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset; the exit status is non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "evrmpc/commands.hpp"
#include "evrmpc/evaluation.hpp"
#include "evrmpc/horizon_assembly.hpp"
#include "evrmpc/nominal_mpc.hpp"
#include "evrmpc/robust_mpc.hpp"
#include "evrmpc/run_config.hpp"
#include "evrmpc/simulator.hpp"
#include "evrmpc/vehicle_model.hpp"
#include "../oracles.hpp"

namespace
{

using namespace evrmpc;
using Clock = std::chrono::steady_clock;

struct Verdict
{
  bool pass = false;
  std::string detail;
};

struct Criterion
{
  int id;
  const char * name;
  double budget_s;
  std::function<Verdict()> run;
};

const DisturbanceBox kTableBox{-0.134253, 0.135929};

struct Instance
{
  VehicleParams p;
  CostWeights cw;
  Eigen::Vector2d x0;
  std::vector<double> lead;
  DisturbanceBox box = kTableBox;

  StackedProblem problem() const
  {
    return condense(build_stage(p, cw), x0, lead, static_cast<int>(lead.size()), box);
  }
};

// Car-following situations with room inside the headway corridor.
Instance random_instance(std::mt19937_64 & rng, int N)
{
  std::uniform_real_distribution<double> V(3.0, 18.0);
  std::uniform_real_distribution<double> T(2.0, 5.0);
  std::uniform_real_distribution<double> dV(-0.3, 0.3);
  Instance in;
  in.p.v_cruise = std::uniform_real_distribution<double>(5.0, 15.0)(rng);
  const double v0 = V(rng);
  in.x0 << v0, in.p.s_0 + T(rng) * v0;
  double vl = v0 + 3.0 * dV(rng);
  for (int k = 0; k < N; ++k) {
    in.lead.push_back(vl);
    vl = std::clamp(vl + dV(rng), 0.0, 22.0);
  }
  return in;
}

Eigen::VectorXd vertex(long mask, int n, double lo, double hi)
{
  Eigen::VectorXd w(n);
  for (int j = 0; j < n; ++j) {
    w(j) = (mask >> j) & 1 ? hi : lo;
  }
  return w;
}

// ---------------------------------------------------------------- 1

Verdict disturbance_box()
{
  const VehicleParams p;
  const auto t0 = Clock::now();
  const DisturbanceBox b = disturbance_bounds(p, DisturbanceEnvelope{});
  const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  const bool ok = std::abs(b.lo + 0.134) <= 0.002 && std::abs(b.hi - 0.136) <= 0.002 && ms < 1.0;
  return {ok, fmt::format("w = [{:.6f}, {:.6f}] m/s^2, {:.3f} ms", b.lo, b.hi, ms)};
}

// ---------------------------------------------------------------- 2

Verdict linearization()
{
  const VehicleParams p;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> V(0.0, p.v_max);
  std::uniform_real_distribution<double> F(p.F_w_min, p.F_w_max);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    PlantState x{V(rng), 0.0, 10.0, 5.0};
    const double Fw = F(rng);
    const PlantState a = plant_step_true(x, Fw, p.f_d_nom, p.f_r_nom, 0.0, p);
    const PlantState b = plant_step_nominal(x, feedback_linearize(x.v, Fw, p), 0.0, p);
    worst = std::max(worst, std::abs(a.v - b.v) / std::max(1.0, std::abs(a.v)));
    worst = std::max(worst, std::abs(a.ds() - b.ds()) / std::max(1.0, std::abs(a.ds())));
  }
  return {worst <= 1e-12, fmt::format("max relative mismatch {:.2e} over 1e4 samples", worst)};
}

// ---------------------------------------------------------------- 3

Verdict condensing()
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> V(0.0, 22.0);
  std::uniform_real_distribution<double> G(2.0, 60.0);
  std::uniform_real_distribution<double> U(-7800.0, 3212.0);
  std::uniform_real_distribution<double> W(kTableBox.lo, kTableBox.hi);
  VehicleParams p;
  p.v_cruise = 10.98;
  const CostWeights cw;
  const StageData s = build_stage(p, cw);
  double worst = 0.0;
  for (int N = 1; N <= 8; ++N) {
    for (int t = 0; t < 100; ++t) {
      const Eigen::Vector2d x0(V(rng), G(rng));
      std::vector<double> lead(N);
      Eigen::VectorXd u(N);
      Eigen::VectorXd w(N);
      for (int k = 0; k < N; ++k) {
        lead[k] = V(rng);
        u(k) = U(rng);
        w(k) = W(rng);
      }
      const StackedProblem pb = condense(s, x0, lead, N, kTableBox);
      const oracle::Rollout r = oracle::rollout(p, cw, x0, lead, u, w);
      const Eigen::VectorXd xs = pb.states(u, w);
      const Eigen::VectorXd fs = pb.rows(u, w);
      for (int k = 0; k <= N; ++k) {
        worst = std::max({worst, std::abs(xs(2 * k) - r.x[k](0)) / (1.0 + std::abs(r.x[k](0))),
                          std::abs(xs(2 * k + 1) - r.x[k](1)) / (1.0 + std::abs(r.x[k](1)))});
      }
      for (int i = 0; i < fs.size(); ++i) {
        worst = std::max(worst, std::abs(fs(i) - r.rows[i]) / (1.0 + std::abs(r.rows[i])));
      }
      worst = std::max(worst, std::abs(pb.cost(u, w) - r.cost) / (1.0 + r.cost));
    }
  }
  return {worst <= 1e-10, fmt::format("max relative mismatch {:.2e} over 800 instances", worst)};
}

// ---------------------------------------------------------------- 4

Verdict degeneration()
{
  std::mt19937_64 rng(4);
  // The cost valley is shallow along some input directions, so 1e-3 N agreement
  // needs a tighter stopping rule than the closed-loop default.
  MpcSolverConfig cfg;
  cfg.solver.tol = 1e-11;
  cfg.solver.accept_tol = 1e-9;
  cfg.solver.max_iterations = 200;
  int solved = 0;
  int tries = 0;
  double worst_cost = 0.0;
  double worst_u = 0.0;
  while (solved < 20 && tries < 200) {
    ++tries;
    Instance in = random_instance(rng, 10);
    in.box = {0.0, 0.0};
    const StackedProblem pb = in.problem();
    const NominalSolution nom = solve_nominal(pb, cfg);
    if (nom.status != conic::Status::optimal) {
      continue;
    }
    const RobustSolution rob = solve_robust(pb, cfg);
    if (rob.status != conic::Status::optimal) {
      return {false, fmt::format("robust status {} on a nominally feasible instance",
                                 conic::to_string(rob.status))};
    }
    ++solved;
    worst_cost = std::max(worst_cost, std::abs(rob.gamma_bar_opt - nom.cost) / std::max(1.0, nom.cost));
    worst_u = std::max(worst_u, (rob.u_opt - nom.u_opt).cwiseAbs().maxCoeff());
  }
  const bool ok = solved == 20 && worst_cost <= 1e-4 && worst_u <= 1e-3;
  return {ok, fmt::format("{} instances, max |gamma - J|/J = {:.2e}, max |du| = {:.2e} N", solved,
                          worst_cost, worst_u)};
}

// ---------------------------------------------------------------- 5

Verdict soundness()
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int solved = 0;
  int tries = 0;
  double worst_mc_ratio = 0.0;
  double worst_row = -1e300;
  double worst_vertex_ratio = 0.0;
  while (solved < 3 && tries < 50) {
    ++tries;
    const Instance in = random_instance(rng, 10);
    const StackedProblem pb = in.problem();
    const RobustSolution rob = solve_robust(pb);
    if (rob.status != conic::Status::optimal) {
      continue;
    }
    ++solved;
    const double g = rob.gamma_bar_opt;
    for (int s = 0; s < 10000; ++s) {
      Eigen::VectorXd w(pb.N);
      for (int k = 0; k < pb.N; ++k) {
        w(k) = pb.w_lo + (pb.w_hi - pb.w_lo) * unit(rng);
      }
      worst_mc_ratio = std::max(worst_mc_ratio, pb.cost(rob.u_opt, w) / g);
      worst_row = std::max(worst_row, pb.max_row_violation(rob.u_opt, w));
    }
    for (long mask = 0; mask < (1L << pb.N); ++mask) {
      const Eigen::VectorXd w = vertex(mask, pb.N, pb.w_lo, pb.w_hi);
      const oracle::Rollout r = oracle::rollout(in.p, in.cw, in.x0, in.lead, rob.u_opt, w);
      worst_vertex_ratio = std::max(worst_vertex_ratio, r.cost / g);
      worst_row = std::max(worst_row, r.max_violation);
    }
  }
  const bool ok = solved == 3 && worst_mc_ratio <= 1.0 + 1e-6 && worst_vertex_ratio <= 1.0 + 1e-6 &&
                  worst_row <= 1e-6;
  return {ok, fmt::format("{} instances, max J/gamma: MC {:.8f}, vertices {:.8f}; max row excess "
                          "{:.2e}",
                          solved, worst_mc_ratio, worst_vertex_ratio, worst_row)};
}

// ---------------------------------------------------------------- 6

Verdict row_exactness()
{
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> Nd(1, 6);
  conic::SolverOptions opt;
  opt.tol = 1e-12;
  opt.accept_tol = 1e-9;
  double worst = 0.0;
  int rows = 0;
  int sign_mismatch = 0;
  for (int t = 0; t < 50; ++t) {
    const Instance in = random_instance(rng, Nd(rng));
    const StackedProblem pb = in.problem();
    const InputBounds ub = conservative_input_bounds(in.p);
    Eigen::VectorXd u(pb.N);
    for (int k = 0; k < pb.N; ++k) {
      u(k) = std::uniform_real_distribution<double>(ub.lo, ub.hi)(rng);
    }
    const Eigen::VectorXd a0 = pb.row_offset();
    for (const RowLmiData & r : assemble_row_lmis(pb)) {
      const bool upper = r.side == RowSide::upper;
      // Sign-wise worst case of an affine row over the box.
      double extreme = a0(r.row) + pb.D_tilde_fu.row(r.row).dot(u);
      for (int j = 0; j < pb.N; ++j) {
        const double g = pb.D_tilde_fw(r.row, j);
        extreme += upper ? std::max(g * pb.w_lo, g * pb.w_hi) : std::min(g * pb.w_lo, g * pb.w_hi);
      }
      const double slack = upper ? r.bound - extreme : extreme - r.bound;
      const double margin = row_lmi_margin(r, u, opt);
      worst = std::max(worst, std::abs(margin - slack));
      if (std::abs(slack) > 1e-7 && (margin >= 0.0) != (slack >= 0.0)) {
        ++sign_mismatch;
      }
      ++rows;
    }
  }
  const bool ok = worst <= 1e-7 && sign_mismatch == 0;
  return {ok, fmt::format("{} rows, max |LMI margin - exact slack| = {:.2e}, sign mismatches {}",
                          rows, worst, sign_mismatch)};
}

// ---------------------------------------------------------------- 7, 9

RunConfig window_config(Controller c, int N)
{
  RunConfig cfg;
  cfg.controller = c;
  cfg.horizon = N;
  cfg.seed = 7;
  cfg.steps = 300;
  return cfg;
}

const RunResult & nominal_window()
{
  static const RunResult r = execute_run(window_config(Controller::nominal, 20));
  return r;
}

const RunResult & robust_window()
{
  static const RunResult r = execute_run(window_config(Controller::robust, 20));
  return r;
}

std::string first_violation(const SimLog & log)
{
  return log.first_violation_time ? fmt::format("{:.1f} s", *log.first_violation_time) : "none";
}

Verdict closed_loop()
{
  const SimLog & nom = nominal_window().log;
  const SimLog & rob = robust_window().log;
  int headway = 0;
  for (const SimStep & s : nom.steps) {
    headway += (s.viol & (kHeadwayLow | kHeadwayHigh)) != 0;
  }
  const bool ok = headway >= 1 && rob.violation_steps == 0;
  return {ok, fmt::format("nominal: {} headway-violation steps (first at {}); robust N=20: {} "
                          "violation steps (first at {}), {} fallback steps",
                          headway, first_violation(nom), rob.violation_steps,
                          first_violation(rob), rob.fallback_steps)};
}

Verdict energy_property()
{
  double worst_identity = 0.0;
  bool ordered = true;
  const EfficiencyMap unit = EfficiencyMap::constant(1.0);
  const std::vector<EfficiencyMap> maps{
    load_efficiency_map(std::string(EVRMPC_DATA_DIR) + "/effmap_synthetic.csv"),
    EfficiencyMap::constant(0.9), EfficiencyMap::constant(0.7)};
  for (const RunResult * run : {&nominal_window(), &robust_window()}) {
    const SimLog & log = run->log;
    double net = 0.0;
    for (const SimStep & s : log.steps) {
      net += s.F_w * s.v * log.delta_t / 3600.0;
    }
    const EnergyReport ideal = battery_energy(log, unit, EnergyMode::physical_power);
    worst_identity =
      std::max(worst_identity, std::abs(ideal.E_bat_Wh - net) / std::max(1e-12, std::abs(net)));
    for (const EfficiencyMap & m : maps) {
      const EnergyReport r = battery_energy(log, m, EnergyMode::physical_power);
      const double traction_bat = r.E_bat_Wh + r.E_regen_Wh;
      ordered = ordered && traction_bat >= ideal.E_mech_Wh * (1.0 - 1e-12) &&
                r.E_regen_Wh <= ideal.E_regen_Wh * (1.0 + 1e-12);
    }
  }
  return {worst_identity <= 1e-9 && ordered,
          fmt::format("eta=1 identity mismatch {:.2e}; traction/regen ordering {}",
                      worst_identity, ordered ? "holds" : "broken")};
}

// ---------------------------------------------------------------- 8

Verdict jerk_trend()
{
  RunConfig cfg = window_config(Controller::robust, 20);
  cfg.horizons = {15, 20, 25, 30, 35};
  cfg.out_dir = (std::filesystem::temp_directory_path() / "evrmpc_acceptance_sweep").string();
  const std::vector<SweepRow> rows = run_sweep(cfg);
  bool in_range = true;
  bool trend = true;
  std::string values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double j = rows[i].report.j_rms;
    in_range = in_range && j >= 0.2 && j <= 1.2;
    if (i > 0) {
      trend = trend && j <= 1.1 * rows[i - 1].report.j_rms;
    }
    values += fmt::format("{}N={}: {:.3f}", i ? ", " : "", rows[i].N, j);
  }
  return {in_range && trend && rows.size() == 5,
          fmt::format("j_rms [m/s^3] {}; range {}, trend {}", values, in_range ? "ok" : "violated",
                      trend ? "ok" : "violated")};
}

// ---------------------------------------------------------------- 10

Verdict determinism()
{
  RunConfig cfg = window_config(Controller::robust, 10);
  cfg.steps = 100;
  cfg.seed = 11;
  const RunResult a = execute_run(cfg);
  const RunResult b = execute_run(cfg);
  bool same = a.log.steps.size() == b.log.steps.size();
  for (std::size_t i = 0; same && i < a.log.steps.size(); ++i) {
    const SimStep & x = a.log.steps[i];
    const SimStep & y = b.log.steps[i];
    const auto eq = [](double p, double q) { return p == q || (std::isnan(p) && std::isnan(q)); };
    same = x.k == y.k && x.t == y.t && x.v == y.v && x.v_l == y.v_l && x.ds == y.ds &&
           x.u_t == y.u_t && x.F_w == y.F_w && x.saturated == y.saturated && x.w == y.w &&
           eq(x.gamma_bar, y.gamma_bar) && x.status == y.status && x.viol == y.viol;
  }
  const bool reports = to_json(a.report) == to_json(b.report) &&
                       a.log.violation_steps == b.log.violation_steps &&
                       a.log.fallback_steps == b.log.fallback_steps;
  return {same && reports, fmt::format("{} steps compared (wall-clock solve time excluded); logs {}, "
                                       "reports {}",
                                       a.log.steps.size(), same ? "identical" : "differ",
                                       reports ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char ** argv)
{
  const std::vector<Criterion> criteria{
    {1, "disturbance box", 1.0, disturbance_box},
    {2, "linearization equivalence", 1.0, linearization},
    {3, "condensing oracle", 10.0, condensing},
    {4, "robust degeneration", 60.0, degeneration},
    {5, "relaxation soundness", 120.0, soundness},
    {6, "row exactness", 60.0, row_exactness},
    {7, "closed-loop nominal vs robust", 900.0, closed_loop},
    {8, "jerk trend over N", 3600.0, jerk_trend},
    {9, "energy accounting", 900.0, energy_property},
    {10, "determinism", 900.0, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    only.insert(std::atoi(argv[i]));
  }
  int failed = 0;
  for (const Criterion & c : criteria) {
    if (!only.empty() && !only.count(c.id)) {
      continue;
    }
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception & e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::printf("criterion %2d %s: %s | %s | %.2f s%s\n", c.id, c.name, pass ? "PASS" : "FAIL",
                v.detail.c_str(), secs, in_time ? "" : " (over time budget)");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
