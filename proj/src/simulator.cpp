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

#include "evrmpc/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "evrmpc/errors.hpp"
#include "evrmpc/robust_mpc.hpp"

namespace evrmpc
{

namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct StepDecision
{
  double u = 0.0;
  double gamma = kNaN;
  std::string status;
  double solve_s = 0.0;
  bool fallback = false;
};

// Rows of stage 0 depend on x0 alone; a disturbed state outside the corridor
// makes every horizon infeasible unless they are released.
bool stage0_violated(const StackedProblem & pb)
{
  const Eigen::VectorXd f = pb.row_offset();
  for (int i = 0; i < kRowsPerStage; ++i) {
    if (pb.D_tilde_fu.row(i).cwiseAbs().maxCoeff() > 0.0) {
      continue;
    }
    if (f(i) > pb.f_hi(i) || f(i) < pb.f_lo(i)) {
      return true;
    }
  }
  return false;
}

void release_stage0(StackedProblem & pb)
{
  for (int i = 0; i < kRowsPerStage; ++i) {
    if (pb.D_tilde_fu.row(i).cwiseAbs().maxCoeff() == 0.0) {
      pb.f_lo(i) = -kInf;
      pb.f_hi(i) = kInf;
    }
  }
}

}  // namespace

const char * to_string(Controller c)
{
  return c == Controller::nominal ? "nominal" : "robust";
}

Controller parse_controller(const std::string & name)
{
  if (name == "nominal") {
    return Controller::nominal;
  }
  if (name == "robust") {
    return Controller::robust;
  }
  throw ConfigError("unknown controller '" + name + "'");
}

unsigned violation_flags(double v, double ds, const VehicleParams & p, double tol)
{
  unsigned f = 0;
  if (v < p.v_min - tol) {
    f |= kSpeedLow;
  }
  if (v > p.v_max + tol) {
    f |= kSpeedHigh;
  }
  const double vv = std::max(v, 0.0);
  if (ds < p.s_0 + vv * p.dt_min - tol) {
    f |= kHeadwayLow;
  }
  if (ds > p.s_0 + vv * p.dt_max + tol) {
    f |= kHeadwayHigh;
  }
  return f;
}

const char * SimLog::csv_header()
{
  return "k,t_s,v_mps,vl_mps,ds_m,ut_N,Fw_N,sat,w_mps2,gamma_bar,status,solve_ms,viol";
}

void write_log_csv(const SimLog & log, const std::string & path)
{
  std::ofstream os(path);
  if (!os) {
    throw DataError("cannot open '" + path + "' for writing");
  }
  os << SimLog::csv_header() << '\n';
  for (const auto & s : log.steps) {
    os << fmt::format(
      "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g},{},{},{:.3f},{}\n", s.k, s.t,
      s.v, s.v_l, s.ds, s.u_t, s.F_w, s.saturated ? 1 : 0, s.w,
      std::isnan(s.gamma_bar) ? std::string("nan") : fmt::format("{:.17g}", s.gamma_bar),
      s.status, s.solve_ms, s.viol);
  }
  if (!os) {
    throw DataError("failed writing '" + path + "'");
  }
}

SimLog read_log_csv(const std::string & path, double delta_t)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open log '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("log '" + path + "' is empty");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != SimLog::csv_header()) {
    throw DataError("log '" + path + "' has an unexpected header");
  }
  SimLog log;
  log.delta_t = delta_t;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      f.push_back(cell);
    }
    if (f.size() != 13) {
      throw DataError(fmt::format("{}:{}: expected 13 columns", path, lineno));
    }
    try {
      SimStep s;
      s.k = std::stoi(f[0]);
      s.t = std::stod(f[1]);
      s.v = std::stod(f[2]);
      s.v_l = std::stod(f[3]);
      s.ds = std::stod(f[4]);
      s.u_t = std::stod(f[5]);
      s.F_w = std::stod(f[6]);
      s.saturated = f[7] == "1";
      s.w = std::stod(f[8]);
      s.gamma_bar = f[9] == "nan" ? kNaN : std::stod(f[9]);
      s.status = f[10];
      s.solve_ms = std::stod(f[11]);
      s.viol = static_cast<unsigned>(std::stoul(f[12]));
      if (s.viol != 0) {
        ++log.violation_steps;
        if (!log.first_violation_time) {
          log.first_violation_time = s.t;
        }
      }
      if (s.status != "optimal") {
        ++log.fallback_steps;
      }
      log.steps.push_back(std::move(s));
    } catch (const std::logic_error &) {
      throw DataError(fmt::format("{}:{}: malformed field", path, lineno));
    }
  }
  return log;
}

SimLog run_closed_loop(
  Controller controller, const VehicleParams & params, const DisturbanceEnvelope & envelope,
  const DriveCycle & cycle, const DisturbanceProcess & process, int N, const SimOptions & opt)
{
  params.validate();
  if (N < 1) {
    throw ConfigError("horizon must be at least 1");
  }
  if (cycle.steps() < 1) {
    throw ConfigError("drive cycle is empty");
  }
  if (std::abs(cycle.delta_t - params.delta_t) > 1e-12) {
    throw ConfigError("drive cycle was resampled with a different sampling interval");
  }
  const StageData stage = build_stage(params, opt.weights);
  const InputBounds ub = conservative_input_bounds(params);
  const DisturbanceBox box{envelope.w_lo, envelope.w_hi};
  DisturbanceGenerator gen(process, params);

  const int K = opt.steps < 0 ? cycle.steps() : opt.steps;
  SimLog log;
  log.delta_t = params.delta_t;
  log.steps.reserve(static_cast<std::size_t>(std::max(K, 0)));

  PlantState x;
  x.v = opt.v0;
  x.s = 0.0;
  x.s_l = opt.ds0;
  x.v_l = cycle.speed(0);

  std::vector<int> horizons{N};
  if (opt.shrink_on_failure) {
    for (int h = N / 2; h >= 1; h /= 2) {
      if (h != horizons.back()) {
        horizons.push_back(h);
      }
    }
  }

  int consecutive_brakes = 0;
  for (int k = 0; k < K; ++k) {
    x.v_l = cycle.speed(k);
    SimStep row;
    row.k = k;
    row.t = k * params.delta_t;
    row.v = x.v;
    row.v_l = x.v_l;
    row.ds = x.ds();
    row.viol = violation_flags(x.v, x.ds(), params);

    StepDecision d;
    const Eigen::Vector2d x0(x.v, x.ds());
    const std::vector<double> preview = cycle.preview(k, N);
    conic::Status last = conic::Status::optimal;
    bool solved = false;
    bool relaxed = false;
    for (int h : horizons) {
      StackedProblem pb =
        condense(stage, x0, std::span<const double>(preview.data(), h), h, box);
      if (h == N) {
        relaxed = stage0_violated(pb);
      }
      if (relaxed) {
        release_stage0(pb);
      }
      std::string tag = relaxed ? "relaxed" : "optimal";
      if (h != N || relaxed) {
        tag += "_h" + std::to_string(h);
      }
      if (controller == Controller::nominal) {
        const NominalSolution s = solve_nominal(pb, opt.mpc);
        d.solve_s += s.solve_time;
        last = s.status;
        if (s.status == conic::Status::optimal) {
          d.u = s.u_opt(0);
          d.status = tag;
          solved = true;
        }
      } else {
        const RobustSolution s = solve_robust(pb, opt.mpc);
        d.solve_s += s.solve_time;
        last = s.status;
        if (s.status == conic::Status::optimal) {
          d.u = s.u_opt(0);
          d.gamma = s.gamma_bar_opt;
          d.status = tag;
          solved = true;
        }
      }
      if (solved) {
        break;
      }
    }
    if (solved) {
      d.fallback = d.status != "optimal";
      // Solver round-off must not push the applied input past its bounds.
      d.u = std::clamp(d.u, ub.lo, ub.hi);
      consecutive_brakes = 0;
    } else {
      d.u = ub.lo;
      d.status = std::string("brake_") + conic::to_string(last);
      d.fallback = true;
      ++consecutive_brakes;
      if (opt.retry_budget >= 0 && consecutive_brakes > opt.retry_budget) {
        throw SolverError(fmt::format(
          "solver failed on {} consecutive steps (last status {}) at t = {:.1f} s",
          consecutive_brakes, conic::to_string(last), row.t));
      }
    }

    const WheelForce F = recover_wheel_force(x.v, d.u, params);
    const DisturbanceSample w = gen.next(x.v);
    PlantState next = plant_step_true(x, F.value, w.f_d, w.f_r, w.theta, params);
    // The vehicle cannot reverse: resistive forces stop it at standstill.
    next.v = std::max(next.v, 0.0);

    row.u_t = d.u;
    row.F_w = F.value;
    row.saturated = F.saturated;
    row.w = w.w;
    row.gamma_bar = d.gamma;
    row.status = d.status;
    row.solve_ms = d.solve_s * 1e3;
    if (row.viol != 0) {
      ++log.violation_steps;
      if (!log.first_violation_time) {
        log.first_violation_time = row.t;
      }
    }
    if (d.fallback) {
      ++log.fallback_steps;
    }
    log.steps.push_back(std::move(row));
    if (opt.strict && log.steps.back().viol != 0) {
      log.aborted = true;
      break;
    }
    x = next;
  }
  return log;
}

}  // namespace evrmpc
