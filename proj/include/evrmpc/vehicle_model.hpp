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

#ifndef EVRMPC__VEHICLE_MODEL_HPP_
#define EVRMPC__VEHICLE_MODEL_HPP_

#include <utility>

namespace evrmpc
{

/// Physical constants and operating limits of the ego vehicle.
///
/// Defaults are the reference electric-vehicle parameters; `v_cruise` is
/// normally overwritten with the mean leader speed of the loaded drive cycle.
struct VehicleParams
{
  double m = 1200.0;         // mass [kg]
  double g = 9.8;            // gravity [m/s^2]
  double f_d_nom = 0.34;     // lumped air-drag coefficient [N s^2/m^2]
  double f_r_nom = 0.01;     // rolling coefficient [-]
  double delta_t = 0.2;      // sampling interval [s]
  double F_w_min = -7800.0;  // [N]
  double F_w_max = 3500.0;   // [N]
  double v_min = 0.0;        // [m/s]
  double v_max = 22.352;     // [m/s]
  double s_0 = 2.0;          // standstill distance [m]
  double dt_min = 1.0;       // minimum time gap [s]
  double dt_max = 8.0;       // maximum time gap [s]
  double v_cruise = 10.0;    // cruise reference [m/s]

  /// Throws ConfigError when an ordering or positivity requirement fails.
  void validate() const;
};

/// Parameter intervals of the model mismatch and the scalar box they induce.
struct DisturbanceEnvelope
{
  double f_d_lo = 0.296;
  double f_d_hi = 0.380;
  double f_r_lo = 0.008;
  double f_r_hi = 0.012;
  double theta_lo = -0.573 * 3.14159265358979323846 / 180.0;  // [rad]
  double theta_hi = 0.573 * 3.14159265358979323846 / 180.0;   // [rad]
  double w_lo = 0.0;  // [m/s^2]
  double w_hi = 0.0;  // [m/s^2]
  /// True when the v-grid scan found values outside the worst-case formula.
  bool widened = false;
};

/// Longitudinal state of the ego/leader pair. The gap is always derived from
/// the two positions so it cannot drift from them.
struct PlantState
{
  double v = 0.0;    // ego speed [m/s]
  double s = 0.0;    // ego position [m]
  double s_l = 0.0;  // leader position [m]
  double v_l = 0.0;  // leader speed [m/s]

  double ds() const { return s_l - s; }
};

struct WheelForce
{
  double value = 0.0;      // force after saturation to [F_w_min, F_w_max]
  double requested = 0.0;  // force before saturation
  bool saturated = false;
};

struct InputBounds
{
  double lo = 0.0;
  double hi = 0.0;
};

struct DisturbanceBox
{
  double lo = 0.0;
  double hi = 0.0;
};

struct HeadwayBounds
{
  double lo = 0.0;
  double hi = 0.0;
};

/// sign(v) restricted to forward motion: 0 at rest, 1 when moving.
double forward_sign(double v);

/// One step of the nonlinear longitudinal model with the actual resistance
/// coefficients and road slope. Leader speed is carried over unchanged.
PlantState plant_step_true(
  const PlantState & state, double F_w, double f_d, double f_r, double theta,
  const VehicleParams & params);

/// One step of the feedback-linearized model with additive disturbance `w`.
PlantState plant_step_nominal(
  const PlantState & state, double u_t, double w, const VehicleParams & params);

/// Virtual input that cancels the nominal drag and rolling resistance.
double feedback_linearize(double v, double F_w, const VehicleParams & params);

/// Inverse of feedback_linearize, with saturation to the wheel-force limits.
WheelForce recover_wheel_force(double v, double u_t, const VehicleParams & params);

/// Bounds on the virtual input that keep the wheel force admissible for every
/// speed in [v_min, v_max].
InputBounds conservative_input_bounds(const VehicleParams & params);

/// Model mismatch induced by the actual coefficients at speed v, using the
/// amplitude-phase form of the rolling/slope term.
double disturbance_value(
  double v, double f_d, double f_r, double theta, const VehicleParams & params);

/// Worst-case disturbance box at v_max for the given parameter intervals.
DisturbanceBox disturbance_bounds(const VehicleParams & params, const DisturbanceEnvelope & env);

/// Validates the intervals, computes the worst-case box and verifies it on a
/// speed grid; the box is widened (and `widened` set) if the scan exceeds it.
DisturbanceEnvelope make_envelope(const VehicleParams & params, DisturbanceEnvelope intervals);

/// Zero-width envelope at the nominal coefficients and flat road.
DisturbanceEnvelope nominal_envelope(const VehicleParams & params);

/// Road slope that produces mismatch `w` at speed v when drag and rolling
/// coefficients take the given values.
double slope_for_disturbance(
  double v, double w, double f_d, double f_r, const VehicleParams & params);

HeadwayBounds headway_bounds(double v, const VehicleParams & params);

}  // namespace evrmpc

#endif  // EVRMPC__VEHICLE_MODEL_HPP_
