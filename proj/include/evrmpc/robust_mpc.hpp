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

#ifndef EVRMPC__ROBUST_MPC_HPP_
#define EVRMPC__ROBUST_MPC_HPP_

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "evrmpc/conic.hpp"
#include "evrmpc/horizon_assembly.hpp"
#include "evrmpc/nominal_mpc.hpp"

namespace evrmpc
{

/// True when the per-step disturbance interval has collapsed to a point, in
/// which case w is a known constant and needs no multiplier.
bool box_is_degenerate(double w_lo, double w_hi);

/// Worst-case cost certificate
///
///   [ D - G'QG          -D m - bd(u)                  ]
///   [ .                 w_lo'D w_hi - cd(u) - |Q^1/2 Dzu u|^2 + gamma ]  >= 0
///
/// with G = D~_zw, m the box midpoint, bd(u) = G'Q r(u), cd(u) the part of
/// r(u)'Q r(u) that is affine in u and r(u) = C~_z x0 + D~_zu u + D~_zc C - z_ref.
/// The quadratic term is moved into a Schur block with an identity corner.
/// Only output rows with a positive weight and input dependence enter it.
struct CostLmiData
{
  int N = 0;
  double w_lo = 0.0;
  double w_hi = 0.0;
  std::vector<int> support;  // disturbance coordinates carrying a multiplier
  Eigen::MatrixXd G;         // D~_zw restricted to the support
  Eigen::VectorXd q;         // diagonal of Q
  Eigen::VectorXd r0;        // r(0), with pinned coordinates folded in
  Eigen::MatrixXd Dzu;
  Eigen::MatrixXd GtQG;
  std::vector<int> schur_rows;

  Eigen::VectorXd bd(const Eigen::VectorXd & u) const;
  double cd(const Eigen::VectorXd & u) const;
  double quadratic_term(const Eigen::VectorXd & u) const;

  int multipliers() const { return static_cast<int>(support.size()); }
  int corner() const { return multipliers(); }
  int dim() const { return multipliers() + 1 + static_cast<int>(schur_rows.size()); }

  /// S-procedure matrix before the Schur step (quadratic in u).
  Eigen::MatrixXd base_matrix(
    const Eigen::VectorXd & u, const Eigen::VectorXd & D, double gamma) const;
  /// Affine Schur form; PSD if and only if base_matrix is PSD.
  Eigen::MatrixXd schur_matrix(
    const Eigen::VectorXd & u, const Eigen::VectorXd & D, double gamma) const;
};

CostLmiData assemble_cost_lmi(const StackedProblem & problem);

enum class RowSide { upper, lower };

/// Robust counterpart of one finite bound of one stacked row
/// f_i(u, w) = offset + alpha'u + g'w. Upper rows require
///
///   [ diag(d)   -d.m - g/2                          ]
///   [ .         sum wl d wh - offset - alpha'u + hi ]  >= 0,
///
/// lower rows the same with g and the affine part negated, i.e. the
/// negative of the nonpositive-multiplier form. Multipliers are kept only for
/// coordinates with g_j != 0.
struct RowLmiData
{
  int row = 0;
  RowSide side = RowSide::upper;
  double bound = 0.0;
  double offset = 0.0;     // C~_f x0 + D~_fc C at the row, pinned terms folded in
  Eigen::VectorXd alpha;   // D~_fu row
  Eigen::VectorXd g;       // D~_fw row
  std::vector<int> support;
  double w_lo = 0.0;
  double w_hi = 0.0;

  int multipliers() const { return static_cast<int>(support.size()); }
  int dim() const { return multipliers() + 1; }
  bool depends_on_input() const { return alpha.cwiseAbs().maxCoeff() > 0.0; }

  /// Row value at (u, w).
  double value(const Eigen::VectorXd & u, const Eigen::VectorXd & w) const;
  /// Signed bound slack, positive when the row holds at (u, w).
  double slack(const Eigen::VectorXd & u, const Eigen::VectorXd & w) const;
  Eigen::MatrixXd matrix(const Eigen::VectorXd & u, const Eigen::VectorXd & mult) const;
};

/// One entry per finite bound, upper bounds first within each row.
std::vector<RowLmiData> assemble_row_lmis(const StackedProblem & problem);

struct RobustSolution
{
  Eigen::VectorXd u_opt;  // [N]
  double gamma_bar_opt = 0.0;
  Eigen::VectorXd D_t;                         // cost multipliers on the support
  std::vector<Eigen::VectorXd> row_multipliers;  // same order as assemble_row_lmis
  conic::Status status = conic::Status::numerical_failure;
  double solve_time = 0.0;  // [s]
  int iterations = 0;
  std::string message;
};

/// Builds the robust program (variables: scaled inputs, gamma, cost
/// multipliers, row multipliers).
conic::ConicProgram robust_program(
  const StackedProblem & problem, const CostLmiData & cost, const std::vector<RowLmiData> & rows,
  double input_scale = 1000.0);

RobustSolution solve_robust(const StackedProblem & problem, const MpcSolverConfig & config = {});

/// Exact extremum of nominal + coef'w over the box, chosen coordinate-wise.
double box_extremum(
  double nominal, const Eigen::VectorXd & coef, double w_lo, double w_hi, bool maximize);

/// Exact worst case of stacked row `row` at input u over the disturbance box.
double robust_row_worstcase(
  const StackedProblem & problem, const Eigen::VectorXd & u, int row, bool maximize);

/// Largest t such that the row LMI minus t in its corner is feasible in the
/// multipliers; the row is certified at u exactly when this is >= 0.
double row_lmi_margin(
  const RowLmiData & row, const Eigen::VectorXd & u, const conic::SolverOptions & options = {});

}  // namespace evrmpc

#endif  // EVRMPC__ROBUST_MPC_HPP_
