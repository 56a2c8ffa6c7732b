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

#include "evrmpc/vehicle_model.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <string>

#include "evrmpc/errors.hpp"

namespace evrmpc
{

namespace
{

void require_finite(double x, const char * what)
{
  if (!std::isfinite(x)) {
    throw std::domain_error(std::string("non-finite ") + what);
  }
}

void require(bool cond, const std::string & msg)
{
  if (!cond) {
    throw ConfigError(msg);
  }
}

}  // namespace

void VehicleParams::validate() const
{
  for (double x : {m, g, f_d_nom, f_r_nom, delta_t, F_w_min, F_w_max, v_min, v_max, s_0, dt_min,
                   dt_max, v_cruise}) {
    require(std::isfinite(x), "vehicle parameters must be finite");
  }
  require(m > 0.0, "mass must be positive");
  require(g > 0.0, "gravity must be positive");
  require(delta_t > 0.0, "sampling interval must be positive");
  require(v_min < v_max, "v_min must be below v_max");
  require(v_min >= 0.0, "v_min must be non-negative (forward motion only)");
  require(F_w_min < 0.0 && 0.0 < F_w_max, "wheel-force limits must bracket zero");
  require(0.0 < dt_min && dt_min < dt_max, "time gaps must satisfy 0 < dt_min < dt_max");
  require(s_0 > 0.0, "standstill distance must be positive");
  require(f_d_nom >= 0.0 && f_r_nom >= 0.0, "nominal resistance coefficients must be >= 0");
}

double forward_sign(double v)
{
  return v > 0.0 ? 1.0 : 0.0;
}

PlantState plant_step_true(
  const PlantState & state, double F_w, double f_d, double f_r, double theta,
  const VehicleParams & p)
{
  for (double x : {state.v, state.s, state.s_l, state.v_l, F_w, f_d, f_r, theta}) {
    require_finite(x, "plant input");
  }
  if (std::abs(theta) >= std::numbers::pi / 2.0) {
    throw std::domain_error("road slope outside (-pi/2, pi/2)");
  }
  const double accel = F_w / p.m - f_d * state.v * state.v / p.m - p.g * f_r * std::cos(theta) -
                       p.g * std::sin(theta);
  PlantState next = state;
  next.v = state.v + accel * p.delta_t;
  next.s = state.s + state.v * p.delta_t;
  next.s_l = state.s_l + state.v_l * p.delta_t;
  return next;
}

PlantState plant_step_nominal(
  const PlantState & state, double u_t, double w, const VehicleParams & p)
{
  for (double x : {state.v, state.s, state.s_l, state.v_l, u_t, w}) {
    require_finite(x, "plant input");
  }
  PlantState next = state;
  next.v = state.v + (u_t / p.m + w) * p.delta_t;
  next.s = state.s + state.v * p.delta_t;
  next.s_l = state.s_l + state.v_l * p.delta_t;
  return next;
}

double feedback_linearize(double v, double F_w, const VehicleParams & p)
{
  require_finite(v, "speed");
  require_finite(F_w, "wheel force");
  if (v < 0.0) {
    throw std::domain_error("feedback linearization is defined for forward motion only");
  }
  return F_w - p.f_d_nom * v * v - p.m * p.g * p.f_r_nom * forward_sign(v);
}

WheelForce recover_wheel_force(double v, double u_t, const VehicleParams & p)
{
  require_finite(v, "speed");
  require_finite(u_t, "virtual input");
  if (v < 0.0) {
    throw std::domain_error("feedback linearization is defined for forward motion only");
  }
  WheelForce out;
  out.requested = u_t + p.f_d_nom * v * v + p.m * p.g * p.f_r_nom * forward_sign(v);
  out.value = std::clamp(out.requested, p.F_w_min, p.F_w_max);
  out.saturated = out.value != out.requested;
  return out;
}

InputBounds conservative_input_bounds(const VehicleParams & p)
{
  p.validate();
  // The drag and rolling terms are monotone in v, so the extremes sit at the
  // speed limits. With v_min = 0 this is F_w_min - f_d v_min^2 exactly.
  InputBounds b;
  b.lo = p.F_w_min - p.f_d_nom * p.v_min * p.v_min - p.m * p.g * p.f_r_nom * forward_sign(p.v_min);
  b.hi = p.F_w_max - p.f_d_nom * p.v_max * p.v_max - p.m * p.g * p.f_r_nom * forward_sign(p.v_max);
  if (!(b.lo < b.hi)) {
    throw ConfigError("degenerate virtual-input bounds: u_t_min >= u_t_max");
  }
  return b;
}

double disturbance_value(
  double v, double f_d, double f_r, double theta, const VehicleParams & p)
{
  const double amplitude = p.g * std::sqrt(f_r * f_r + 1.0);
  const double phase = std::atan2(1.0, f_r);
  return (p.f_d_nom - f_d) * v * v / p.m + p.g * p.f_r_nom - amplitude * std::cos(theta - phase);
}

DisturbanceBox disturbance_bounds(const VehicleParams & p, const DisturbanceEnvelope & e)
{
  require(e.f_d_lo <= p.f_d_nom && p.f_d_nom <= e.f_d_hi, "air-drag interval must contain f_d_nom");
  require(e.f_r_lo <= p.f_r_nom && p.f_r_nom <= e.f_r_hi, "rolling interval must contain f_r_nom");
  require(e.theta_lo <= 0.0 && 0.0 <= e.theta_hi, "slope interval must contain 0");
  require(
    e.theta_lo > -std::numbers::pi / 2.0 && e.theta_hi < std::numbers::pi / 2.0,
    "slope interval must lie inside (-pi/2, pi/2)");
  const double v2 = p.v_max * p.v_max;
  DisturbanceBox box;
  box.hi = (p.f_d_nom - e.f_d_lo) * v2 / p.m + p.g * p.f_r_nom -
           p.g * e.f_r_lo * std::cos(e.theta_lo) - p.g * std::sin(e.theta_lo);
  box.lo = (p.f_d_nom - e.f_d_hi) * v2 / p.m + p.g * p.f_r_nom -
           p.g * e.f_r_hi * std::cos(e.theta_hi) - p.g * std::sin(e.theta_hi);
  // A zero-width envelope yields lo == hi up to rounding; only a strictly
  // inverted box is an error.
  const double tol = 1e-12 * (1.0 + std::abs(box.lo) + std::abs(box.hi));
  if (box.lo > box.hi + tol) {
    throw ConfigError("disturbance box is inverted (w_lo > w_hi)");
  }
  if (box.lo > box.hi) {
    box.lo = box.hi = 0.5 * (box.lo + box.hi);
  }
  return box;
}

DisturbanceEnvelope make_envelope(const VehicleParams & p, DisturbanceEnvelope env)
{
  p.validate();
  const DisturbanceBox box = disturbance_bounds(p, env);
  env.w_lo = box.lo;
  env.w_hi = box.hi;
  env.widened = false;

  constexpr int kSpeedPoints = 201;
  constexpr int kSlopePoints = 21;
  double scan_lo = box.lo;
  double scan_hi = box.hi;
  for (int i = 0; i < kSpeedPoints; ++i) {
    const double v = p.v_min + (p.v_max - p.v_min) * i / (kSpeedPoints - 1);
    for (double f_d : {env.f_d_lo, env.f_d_hi}) {
      for (double f_r : {env.f_r_lo, env.f_r_hi}) {
        // The slope term is extremal at theta = atan2(1, f_r) when that lies inside the interval.
        const double critical = std::atan2(1.0, f_r);
        for (int j = 0; j <= kSlopePoints; ++j) {
          const double th = j < kSlopePoints
                              ? env.theta_lo + (env.theta_hi - env.theta_lo) * j / (kSlopePoints - 1)
                              : std::clamp(critical, env.theta_lo, env.theta_hi);
          const double w = disturbance_value(v, f_d, f_r, th, p);
          scan_lo = std::min(scan_lo, w);
          scan_hi = std::max(scan_hi, w);
        }
      }
    }
  }
  const double tol = 1e-12;
  if (scan_lo < box.lo - tol || scan_hi > box.hi + tol) {
    std::clog << "evrmpc: disturbance box widened from [" << box.lo << ", " << box.hi << "] to ["
              << scan_lo << ", " << scan_hi << "] after speed-grid scan\n";
    env.w_lo = scan_lo;
    env.w_hi = scan_hi;
    env.widened = true;
  }
  return env;
}

DisturbanceEnvelope nominal_envelope(const VehicleParams & p)
{
  DisturbanceEnvelope e;
  e.f_d_lo = e.f_d_hi = p.f_d_nom;
  e.f_r_lo = e.f_r_hi = p.f_r_nom;
  e.theta_lo = e.theta_hi = 0.0;
  return make_envelope(p, e);
}

double slope_for_disturbance(
  double v, double w, double f_d, double f_r, const VehicleParams & p)
{
  const double amplitude = p.g * std::sqrt(f_r * f_r + 1.0);
  const double phase = std::atan2(1.0, f_r);
  const double c = ((p.f_d_nom - f_d) * v * v / p.m + p.g * p.f_r_nom - w) / amplitude;
  if (c < -1.0 || c > 1.0) {
    throw std::domain_error("disturbance not reachable through road slope");
  }
  return phase - std::acos(c);
}

HeadwayBounds headway_bounds(double v, const VehicleParams & p)
{
  require_finite(v, "speed");
  if (v < 0.0) {
    throw std::domain_error("headway bounds are defined for forward motion only");
  }
  return {p.s_0 + v * p.dt_min, p.s_0 + v * p.dt_max};
}

}  // namespace evrmpc
