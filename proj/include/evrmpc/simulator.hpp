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

#ifndef EVRMPC__SIMULATOR_HPP_
#define EVRMPC__SIMULATOR_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "evrmpc/horizon_assembly.hpp"
#include "evrmpc/nominal_mpc.hpp"
#include "evrmpc/vehicle_model.hpp"

namespace evrmpc
{

/// Leader speed profile on the controller's sampling grid.
struct DriveCycle
{
  std::vector<double> t;  // [s], t[k] = t[0] + k * delta_t
  std::vector<double> v;  // [m/s], clamped to [0, v_max]
  double delta_t = 0.0;
  double mean_speed = 0.0;

  int steps() const { return static_cast<int>(v.size()); }
  /// Speed at step k, holding the final sample beyond the end.
  double speed(int k) const;
  /// Leader speeds for steps k .. k+N-1.
  std::vector<double> preview(int k, int N) const;
};

/// Linear interpolation of (t, v) samples onto the delta_t grid.
DriveCycle resample_cycle(
  std::span<const double> t, std::span<const double> v, const VehicleParams & params);

/// Reads a `t_s,v_mps` CSV file and resamples it. Throws DataError.
DriveCycle load_cycle(const std::string & path, const VehicleParams & params);

enum class DisturbanceMode { iid_uniform, bounded_random_walk, constant_worst_case, replay };

const char * to_string(DisturbanceMode mode);
/// Accepts iid, walk, worst, replay and the long names.
DisturbanceMode parse_disturbance_mode(const std::string & name);

struct DisturbanceProcess
{
  DisturbanceMode mode = DisturbanceMode::bounded_random_walk;
  std::uint64_t seed = 0;
  /// Random-walk increment as a fraction of each interval width.
  double step_fraction = 0.05;
  DisturbanceEnvelope envelope;  // with w_lo / w_hi filled in
  std::vector<double> replay;    // w sequence for replay mode
};

/// Realized model mismatch and the physical coefficients that produce it.
struct DisturbanceSample
{
  double w = 0.0;
  double f_d = 0.0;
  double f_r = 0.0;
  double theta = 0.0;
};

/// Stateful, seeded source of disturbance samples.
class DisturbanceGenerator
{
public:
  DisturbanceGenerator(DisturbanceProcess process, const VehicleParams & params);

  /// Sample for the next step at the current ego speed v.
  DisturbanceSample next(double v);

private:
  double reflect(double x, double lo, double hi) const;

  DisturbanceProcess process_;
  VehicleParams params_;
  std::mt19937_64 rng_;
  std::size_t k_ = 0;
  double f_d_;
  double f_r_;
  double theta_;
};

/// Offline realization of k_bar samples; entry k is evaluated at speeds[k]
/// (standstill when `speeds` is shorter).
std::vector<double> realize_disturbance(
  const DisturbanceProcess & process, const VehicleParams & params, int k_bar,
  std::span<const double> speeds = {});

enum class Controller { nominal, robust };

const char * to_string(Controller c);
Controller parse_controller(const std::string & name);

enum ViolationFlag : unsigned {
  kSpeedLow = 1u,
  kSpeedHigh = 2u,
  kHeadwayLow = 4u,
  kHeadwayHigh = 8u,
};

/// Bitmask of violated state and headway bounds, with an absolute tolerance.
unsigned violation_flags(double v, double ds, const VehicleParams & params, double tol = 1e-6);

struct SimStep
{
  int k = 0;
  double t = 0.0;
  double v = 0.0;
  double v_l = 0.0;
  double ds = 0.0;
  double u_t = 0.0;
  double F_w = 0.0;
  bool saturated = false;
  double w = 0.0;
  double gamma_bar = 0.0;  // NaN for nominal runs and fallback steps
  std::string status;
  double solve_ms = 0.0;
  unsigned viol = 0;
};

struct SimLog
{
  double delta_t = 0.0;
  std::vector<SimStep> steps;
  std::optional<double> first_violation_time;
  int violation_steps = 0;
  int fallback_steps = 0;
  bool aborted = false;  // strict mode stopped the run

  static const char * csv_header();
};

void write_log_csv(const SimLog & log, const std::string & path);
/// Reads a log written by write_log_csv. Throws DataError.
SimLog read_log_csv(const std::string & path, double delta_t);

struct SimOptions
{
  int steps = -1;  // -1 runs the whole cycle
  bool strict = false;
  double v0 = 0.2778;  // [m/s]
  double ds0 = 3.0;    // [m]
  CostWeights weights;
  MpcSolverConfig mpc;
  /// Shorter horizons tried before braking when a solve fails.
  bool shrink_on_failure = true;
  /// Consecutive braking steps tolerated before SolverError; -1 = unlimited.
  int retry_budget = -1;
};

/// Receding-horizon loop against the true plant.
SimLog run_closed_loop(
  Controller controller, const VehicleParams & params, const DisturbanceEnvelope & envelope,
  const DriveCycle & cycle, const DisturbanceProcess & process, int N,
  const SimOptions & options = {});

}  // namespace evrmpc

#endif  // EVRMPC__SIMULATOR_HPP_
