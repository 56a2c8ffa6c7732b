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


// Reference computations shared by the tests. Everything here is written
// from the model equations and deliberately avoids the stacking and solver
// code it is used to check.

#ifndef EVRMPC_TESTS__ORACLES_HPP_
#define EVRMPC_TESTS__ORACLES_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "evrmpc/horizon_assembly.hpp"
#include "evrmpc/vehicle_model.hpp"

namespace evrmpc::oracle
{

struct Rollout
{
  std::vector<Eigen::Vector2d> x;  // stages 0..N
  std::vector<double> rows;        // [v, ds - dt_max v, ds - dt_min v, u] per stage
  double cost = 0.0;
  double max_violation = 0.0;  // largest bound excess over all finite rows
};

inline Rollout rollout(
  const VehicleParams & p, const CostWeights & cw, const Eigen::Vector2d & x0,
  const std::vector<double> & leader, const Eigen::VectorXd & u, const Eigen::VectorXd & w)
{
  const int N = static_cast<int>(leader.size());
  const InputBounds ub = conservative_input_bounds(p);
  Rollout r;
  r.max_violation = -std::numeric_limits<double>::infinity();
  Eigen::Vector2d x = x0;
  for (int k = 0; k <= N; ++k) {
    r.x.push_back(x);
    const double v = x(0);
    const double ds = x(1);
    const double uk = k < N ? u(k) : 0.0;
    const double f[4] = {v, ds - p.dt_max * v, ds - p.dt_min * v, uk};
    r.rows.insert(r.rows.end(), f, f + 4);
    r.max_violation = std::max({r.max_violation, f[0] - p.v_max, p.v_min - f[0], f[1] - p.s_0,
                                p.s_0 - f[2], f[3] - ub.hi, ub.lo - f[3]});
    const double ev = v - p.v_cruise;
    const double eg = ds - x0(1);
    r.cost += cw.W1 * ev * ev + (k == N ? cw.W2_terminal * eg * eg : 0.0) + cw.W3 * uk * uk;
    if (k < N) {
      PlantState s;
      s.v = v;
      s.s = 0.0;
      s.s_l = ds;
      s.v_l = leader[k];
      s = plant_step_nominal(s, uk, w(k), p);
      x << s.v, s.ds();
    }
  }
  return r;
}

/// Extremum of c + a'w over the box [lo, hi]^n by visiting every vertex.
inline double vertex_extremum(double c, const Eigen::VectorXd & a, double lo, double hi, bool max)
{
  const int n = static_cast<int>(a.size());
  double best = max ? -std::numeric_limits<double>::infinity()
                    : std::numeric_limits<double>::infinity();
  for (long mask = 0; mask < (1L << n); ++mask) {
    double val = c;
    for (int j = 0; j < n; ++j) {
      val += a(j) * ((mask >> j) & 1 ? hi : lo);
    }
    best = max ? std::max(best, val) : std::min(best, val);
  }
  return best;
}

}  // namespace evrmpc::oracle

#endif  // EVRMPC_TESTS__ORACLES_HPP_
