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

#include "evrmpc/horizon_assembly.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <algorithm>

#include "evrmpc/errors.hpp"

namespace evrmpc
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd reference_for(const Eigen::Vector2d & x0, double v_cruise, int N)
{
  Eigen::VectorXd z(kOutputsPerStage * (N + 1));
  for (int k = 0; k <= N; ++k) {
    z.segment<3>(kOutputsPerStage * k) << v_cruise, x0(1), 0.0;
  }
  return z;
}

}  // namespace

void CostWeights::validate() const
{
  if (!(std::isfinite(W1) && std::isfinite(W2_terminal) && std::isfinite(W3))) {
    throw ConfigError("cost weights must be finite");
  }
  if (W1 < 0.0 || W2_terminal < 0.0 || W3 < 0.0) {
    throw ConfigError("cost weights must be non-negative");
  }
}

Eigen::Vector3d StageCost::q_diag(int k, int N) const
{
  return {weights.W1, k == N ? weights.W2_terminal : 0.0, weights.W3};
}

StageData build_stage(const VehicleParams & p, const CostWeights & weights)
{
  p.validate();
  weights.validate();
  const InputBounds ub = conservative_input_bounds(p);
  const double dt = p.delta_t;

  StageData s;
  s.model.A << 1.0, 0.0, -dt, 1.0;
  s.model.B_u << dt / p.m, 0.0;
  s.model.B_c << 0.0, dt;
  s.model.B_w << dt, 0.0;

  s.constraint.C_f << 1.0, 0.0, -p.dt_max, 1.0, -p.dt_min, 1.0, 0.0, 0.0;
  s.constraint.D_fu << 0.0, 0.0, 0.0, 1.0;
  s.constraint.D_fw.setZero();
  s.constraint.f_lo << p.v_min, -kInf, p.s_0, ub.lo;
  s.constraint.f_hi << p.v_max, p.s_0, kInf, ub.hi;

  s.cost.C_z << 1.0, 0.0, 0.0, 1.0, 0.0, 0.0;
  s.cost.D_zu << 0.0, 0.0, 1.0;
  s.cost.D_zw.setZero();
  s.cost.weights = weights;
  s.v_cruise = p.v_cruise;
  return s;
}

Eigen::VectorXd reference_stack(const Eigen::Vector2d & x0, const VehicleParams & params, int N)
{
  if (N < 0) {
    throw ConfigError("horizon must be non-negative");
  }
  return reference_for(x0, params.v_cruise, N);
}

StackedProblem condense(
  const StageData & stage, const Eigen::Vector2d & x0, std::span<const double> leader_preview,
  int N, const DisturbanceBox & box)
{
  if (N < 1) {
    throw ConfigError("horizon must be at least 1");
  }
  if (static_cast<int>(leader_preview.size()) != N) {
    throw ConfigError("leader preview must hold exactly N speeds");
  }
  if (!x0.allFinite()) {
    throw std::domain_error("non-finite initial state");
  }
  if (box.lo > box.hi) {
    throw ConfigError("disturbance box is inverted");
  }
  const int nx = kStateDim;
  const int nf = kRowsPerStage;
  const int nz = kOutputsPerStage;
  const auto & A = stage.model.A;

  StackedProblem P;
  P.N = N;
  P.x0 = x0;
  P.leader = Eigen::Map<const Eigen::VectorXd>(leader_preview.data(), N);
  P.w_lo = box.lo;
  P.w_hi = box.hi;

  P.A_tilde.setZero(nx * (N + 1), nx);
  P.B_tilde_u.setZero(nx * (N + 1), N);
  P.B_tilde_c.setZero(nx * (N + 1), N);
  P.B_tilde_w.setZero(nx * (N + 1), N);

  // Block row k holds A^k and A^(k-1-j) B for j < k.
  Eigen::Matrix2d Ak = Eigen::Matrix2d::Identity();
  for (int k = 0; k <= N; ++k) {
    P.A_tilde.block<2, 2>(nx * k, 0) = Ak;
    Ak = A * Ak;
  }
  for (int k = 1; k <= N; ++k) {
    Eigen::Matrix2d Ap = Eigen::Matrix2d::Identity();  // A^(k-1-j), j descending
    for (int j = k - 1; j >= 0; --j) {
      P.B_tilde_u.block<2, 1>(nx * k, j) = Ap * stage.model.B_u;
      P.B_tilde_c.block<2, 1>(nx * k, j) = Ap * stage.model.B_c;
      P.B_tilde_w.block<2, 1>(nx * k, j) = Ap * stage.model.B_w;
      Ap = A * Ap;
    }
  }

  // Output maps compose the per-stage maps with the state stack; the direct
  // input term only exists for k < N since u(N) is not a decision.
  P.C_tilde_f.setZero(nf * (N + 1), nx);
  P.D_tilde_fu.setZero(nf * (N + 1), N);
  P.D_tilde_fc.setZero(nf * (N + 1), N);
  P.D_tilde_fw.setZero(nf * (N + 1), N);
  P.f_lo.resize(nf * (N + 1));
  P.f_hi.resize(nf * (N + 1));
  P.C_tilde_z.setZero(nz * (N + 1), nx);
  P.D_tilde_zu.setZero(nz * (N + 1), N);
  P.D_tilde_zc.setZero(nz * (N + 1), N);
  P.D_tilde_zw.setZero(nz * (N + 1), N);
  P.q_diag.resize(nz * (N + 1));

  const auto & Cf = stage.constraint.C_f;
  const auto & Cz = stage.cost.C_z;
  for (int k = 0; k <= N; ++k) {
    const auto xs = Eigen::seqN(nx * k, nx);
    P.C_tilde_f.middleRows(nf * k, nf) = Cf * P.A_tilde(xs, Eigen::all);
    P.D_tilde_fu.middleRows(nf * k, nf) = Cf * P.B_tilde_u(xs, Eigen::all);
    P.D_tilde_fc.middleRows(nf * k, nf) = Cf * P.B_tilde_c(xs, Eigen::all);
    P.D_tilde_fw.middleRows(nf * k, nf) = Cf * P.B_tilde_w(xs, Eigen::all);
    P.f_lo.segment<4>(nf * k) = stage.constraint.f_lo;
    P.f_hi.segment<4>(nf * k) = stage.constraint.f_hi;

    P.C_tilde_z.middleRows(nz * k, nz) = Cz * P.A_tilde(xs, Eigen::all);
    P.D_tilde_zu.middleRows(nz * k, nz) = Cz * P.B_tilde_u(xs, Eigen::all);
    P.D_tilde_zc.middleRows(nz * k, nz) = Cz * P.B_tilde_c(xs, Eigen::all);
    P.D_tilde_zw.middleRows(nz * k, nz) = Cz * P.B_tilde_w(xs, Eigen::all);
    P.q_diag.segment<3>(nz * k) = stage.cost.q_diag(k, N);
    if (k < N) {
      P.D_tilde_fu.block<4, 1>(nf * k, k) += stage.constraint.D_fu;
      P.D_tilde_fw.block<4, 1>(nf * k, k) += stage.constraint.D_fw;
      P.D_tilde_zu.block<3, 1>(nz * k, k) += stage.cost.D_zu;
      P.D_tilde_zw.block<3, 1>(nz * k, k) += stage.cost.D_zw;
    }
  }
  P.z_ref = reference_for(x0, stage.v_cruise, N);
  return P;
}

Eigen::VectorXd StackedProblem::row_offset() const
{
  return C_tilde_f * x0 + D_tilde_fc * leader;
}

Eigen::VectorXd StackedProblem::output_offset() const
{
  return C_tilde_z * x0 + D_tilde_zc * leader - z_ref;
}

Eigen::VectorXd StackedProblem::states(const Eigen::VectorXd & u, const Eigen::VectorXd & w) const
{
  return A_tilde * x0 + B_tilde_u * u + B_tilde_c * leader + B_tilde_w * w;
}

Eigen::VectorXd StackedProblem::rows(const Eigen::VectorXd & u, const Eigen::VectorXd & w) const
{
  return row_offset() + D_tilde_fu * u + D_tilde_fw * w;
}

Eigen::VectorXd StackedProblem::outputs(const Eigen::VectorXd & u, const Eigen::VectorXd & w) const
{
  return C_tilde_z * x0 + D_tilde_zu * u + D_tilde_zc * leader + D_tilde_zw * w;
}

double StackedProblem::cost(const Eigen::VectorXd & u, const Eigen::VectorXd & w) const
{
  const Eigen::VectorXd e = outputs(u, w) - z_ref;
  return e.dot(q_diag.cwiseProduct(e));
}

double StackedProblem::max_row_violation(
  const Eigen::VectorXd & u, const Eigen::VectorXd & w) const
{
  const Eigen::VectorXd f = rows(u, w);
  double worst = -kInf;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (std::isfinite(f_hi(i))) {
      worst = std::max(worst, f(i) - f_hi(i));
    }
    if (std::isfinite(f_lo(i))) {
      worst = std::max(worst, f_lo(i) - f(i));
    }
  }
  return worst;
}

}  // namespace evrmpc
