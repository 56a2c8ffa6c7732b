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

#ifndef EVRMPC__HORIZON_ASSEMBLY_HPP_
#define EVRMPC__HORIZON_ASSEMBLY_HPP_

#include <Eigen/Dense>

#include <span>

#include "evrmpc/vehicle_model.hpp"

namespace evrmpc
{

/// Diagonal stage weights on (speed error, terminal gap error, virtual input).
struct CostWeights
{
  double W1 = 0.1;
  double W2_terminal = 100.0;
  double W3 = 1e-4;

  void validate() const;
};

/// Per-stage dynamics on the state [v, ds].
struct StageModel
{
  Eigen::Matrix2d A;
  Eigen::Vector2d B_u;
  Eigen::Vector2d B_c;
  Eigen::Vector2d B_w;
};

/// Rows: speed, ds - dt_max v, ds - dt_min v, virtual input.
struct StageConstraint
{
  Eigen::Matrix<double, 4, 2> C_f;
  Eigen::Vector4d D_fu;
  Eigen::Vector4d D_fw;
  Eigen::Vector4d f_lo;
  Eigen::Vector4d f_hi;
};

/// Outputs: speed, gap, virtual input.
struct StageCost
{
  Eigen::Matrix<double, 3, 2> C_z;
  Eigen::Vector3d D_zu;
  Eigen::Vector3d D_zw;
  CostWeights weights;

  /// Diagonal of Q_t(k); the gap weight is active only at the terminal stage.
  Eigen::Vector3d q_diag(int k, int N) const;
};

struct StageData
{
  StageModel model;
  StageConstraint constraint;
  StageCost cost;
  double v_cruise = 0.0;
};

enum ConstraintRow : int { kSpeedRow = 0, kGapMaxRow = 1, kGapMinRow = 2, kInputRow = 3 };

inline constexpr int kStateDim = 2;
inline constexpr int kRowsPerStage = 4;
inline constexpr int kOutputsPerStage = 3;

/// Condensed horizon data for one receding-horizon instance. States, rows and
/// outputs cover stages 0..N; inputs, leader preview and disturbances cover
/// steps 0..N-1.
struct StackedProblem
{
  int N = 0;
  Eigen::Vector2d x0 = Eigen::Vector2d::Zero();
  Eigen::VectorXd leader;  // C stack, N entries

  Eigen::MatrixXd A_tilde;    // 2(N+1) x 2
  Eigen::MatrixXd B_tilde_u;  // 2(N+1) x N
  Eigen::MatrixXd B_tilde_c;  // 2(N+1) x N
  Eigen::MatrixXd B_tilde_w;  // 2(N+1) x N

  Eigen::MatrixXd C_tilde_f;   // 4(N+1) x 2
  Eigen::MatrixXd D_tilde_fu;  // 4(N+1) x N
  Eigen::MatrixXd D_tilde_fc;  // 4(N+1) x N
  Eigen::MatrixXd D_tilde_fw;  // 4(N+1) x N
  Eigen::VectorXd f_lo;        // 4(N+1), may hold -inf
  Eigen::VectorXd f_hi;        // 4(N+1), may hold +inf

  Eigen::MatrixXd C_tilde_z;   // 3(N+1) x 2
  Eigen::MatrixXd D_tilde_zu;  // 3(N+1) x N
  Eigen::MatrixXd D_tilde_zc;  // 3(N+1) x N
  Eigen::MatrixXd D_tilde_zw;  // 3(N+1) x N
  Eigen::VectorXd q_diag;      // diagonal of the block-diagonal Q stack
  Eigen::VectorXd z_ref;       // 3(N+1)

  double w_lo = 0.0;
  double w_hi = 0.0;

  Eigen::MatrixXd Q_stack() const { return q_diag.asDiagonal(); }
  Eigen::VectorXd w_lo_vec() const { return Eigen::VectorXd::Constant(N, w_lo); }
  Eigen::VectorXd w_hi_vec() const { return Eigen::VectorXd::Constant(N, w_hi); }

  /// C~_f x0 + D~_fc C: the part of the rows fixed by the initial state and preview.
  Eigen::VectorXd row_offset() const;
  /// C~_z x0 + D~_zc C - z_ref.
  Eigen::VectorXd output_offset() const;

  Eigen::VectorXd states(const Eigen::VectorXd & u, const Eigen::VectorXd & w) const;
  Eigen::VectorXd rows(const Eigen::VectorXd & u, const Eigen::VectorXd & w) const;
  Eigen::VectorXd outputs(const Eigen::VectorXd & u, const Eigen::VectorXd & w) const;
  /// Stacked quadratic cost (z - z_ref)' Q (z - z_ref).
  double cost(const Eigen::VectorXd & u, const Eigen::VectorXd & w) const;
  /// Largest bound excess over all finite rows (<= 0 when every row holds).
  double max_row_violation(const Eigen::VectorXd & u, const Eigen::VectorXd & w) const;
};

StageData build_stage(const VehicleParams & params, const CostWeights & weights);

/// Stacks the stage data over N steps from x0 = [v(0), ds(0)].
StackedProblem condense(
  const StageData & stage, const Eigen::Vector2d & x0, std::span<const double> leader_preview,
  int N, const DisturbanceBox & box);

/// Stage references [v_cruise, ds(0), 0] for stages 0..N.
Eigen::VectorXd reference_stack(const Eigen::Vector2d & x0, const VehicleParams & params, int N);

}  // namespace evrmpc

#endif  // EVRMPC__HORIZON_ASSEMBLY_HPP_
