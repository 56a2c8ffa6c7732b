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

#include <algorithm>
#include <cmath>
#include <string>

#include "evrmpc/errors.hpp"
#include "evrmpc/simulator.hpp"

namespace evrmpc
{

const char * to_string(DisturbanceMode mode)
{
  switch (mode) {
    case DisturbanceMode::iid_uniform:
      return "iid";
    case DisturbanceMode::bounded_random_walk:
      return "walk";
    case DisturbanceMode::constant_worst_case:
      return "worst";
    case DisturbanceMode::replay:
      return "replay";
  }
  return "unknown";
}

DisturbanceMode parse_disturbance_mode(const std::string & name)
{
  if (name == "iid" || name == "iid_uniform") {
    return DisturbanceMode::iid_uniform;
  }
  if (name == "walk" || name == "bounded_random_walk") {
    return DisturbanceMode::bounded_random_walk;
  }
  if (name == "worst" || name == "constant_worst_case") {
    return DisturbanceMode::constant_worst_case;
  }
  if (name == "replay") {
    return DisturbanceMode::replay;
  }
  throw ConfigError("unknown disturbance mode '" + name + "'");
}

DisturbanceGenerator::DisturbanceGenerator(DisturbanceProcess process, const VehicleParams & params)
: process_(std::move(process)), params_(params), rng_(process_.seed)
{
  const auto & e = process_.envelope;
  if (e.w_lo > e.w_hi) {
    throw ConfigError("disturbance box is inverted");
  }
  if (!(process_.step_fraction >= 0.0 && process_.step_fraction <= 1.0)) {
    throw ConfigError("random-walk step fraction must lie in [0, 1]");
  }
  f_d_ = params_.f_d_nom;
  f_r_ = params_.f_r_nom;
  theta_ = 0.0;
}

double DisturbanceGenerator::reflect(double x, double lo, double hi) const
{
  if (hi <= lo) {
    return lo;
  }
  const double w = hi - lo;
  double y = std::fmod(x - lo, 2.0 * w);
  if (y < 0.0) {
    y += 2.0 * w;
  }
  return lo + (y <= w ? y : 2.0 * w - y);
}

DisturbanceSample DisturbanceGenerator::next(double v)
{
  const auto & e = process_.envelope;
  const double v_eval = std::clamp(v, params_.v_min, params_.v_max);
  DisturbanceSample s;
  s.f_d = params_.f_d_nom;
  s.f_r = params_.f_r_nom;
  switch (process_.mode) {
    case DisturbanceMode::bounded_random_walk: {
      std::uniform_real_distribution<double> step(-1.0, 1.0);
      const double a = process_.step_fraction;
      f_d_ = reflect(f_d_ + a * (e.f_d_hi - e.f_d_lo) * step(rng_), e.f_d_lo, e.f_d_hi);
      f_r_ = reflect(f_r_ + a * (e.f_r_hi - e.f_r_lo) * step(rng_), e.f_r_lo, e.f_r_hi);
      theta_ = reflect(theta_ + a * (e.theta_hi - e.theta_lo) * step(rng_), e.theta_lo, e.theta_hi);
      s.f_d = f_d_;
      s.f_r = f_r_;
      s.theta = theta_;
      s.w = disturbance_value(v_eval, s.f_d, s.f_r, s.theta, params_);
      ++k_;
      return s;
    }
    case DisturbanceMode::iid_uniform: {
      std::uniform_real_distribution<double> u(e.w_lo, e.w_hi);
      s.w = e.w_hi > e.w_lo ? u(rng_) : e.w_lo;
      break;
    }
    case DisturbanceMode::constant_worst_case:
      s.w = e.w_hi;
      break;
    case DisturbanceMode::replay: {
      if (k_ >= process_.replay.size()) {
        throw DataError("replay sequence exhausted at step " + std::to_string(k_));
      }
      s.w = process_.replay[k_];
      const double tol = 1e-9 * (1.0 + std::abs(e.w_lo) + std::abs(e.w_hi));
      if (!std::isfinite(s.w) || s.w < e.w_lo - tol || s.w > e.w_hi + tol) {
        throw DataError("replayed disturbance outside the box at step " + std::to_string(k_));
      }
      break;
    }
  }
  // The slope absorbs the whole mismatch at the nominal coefficients.
  s.theta = slope_for_disturbance(v_eval, s.w, s.f_d, s.f_r, params_);
  ++k_;
  return s;
}

std::vector<double> realize_disturbance(
  const DisturbanceProcess & process, const VehicleParams & params, int k_bar,
  std::span<const double> speeds)
{
  if (k_bar < 0) {
    throw ConfigError("sequence length must be non-negative");
  }
  DisturbanceGenerator gen(process, params);
  std::vector<double> w(static_cast<std::size_t>(k_bar));
  for (int k = 0; k < k_bar; ++k) {
    const double v = static_cast<std::size_t>(k) < speeds.size() ? speeds[k] : 0.0;
    w[k] = gen.next(v).w;
  }
  return w;
}

}  // namespace evrmpc
