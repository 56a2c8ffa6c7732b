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

#ifndef EVRMPC__NOMINAL_MPC_HPP_
#define EVRMPC__NOMINAL_MPC_HPP_

#include <Eigen/Dense>

#include <string>

#include "evrmpc/conic.hpp"
#include "evrmpc/horizon_assembly.hpp"

namespace evrmpc
{

/// Settings shared by both controllers.
struct MpcSolverConfig
{
  conic::SolverOptions solver;
  /// Inputs are passed to the solver in units of this many newtons.
  double input_scale = 1000.0;
  /// Optional path; when set, every program is dumped there before solving.
  std::string dump_path;
};

struct NominalSolution
{
  Eigen::VectorXd u_opt;  // [N], empty unless optimal
  double cost = 0.0;      // stacked cost at u_opt with w = 0
  conic::Status status = conic::Status::numerical_failure;
  double solve_time = 0.0;  // [s]
  int iterations = 0;
  std::string message;
};

/// Builds the disturbance-free condensed QP (quadratic objective plus the
/// finite row bounds evaluated at w = 0) without solving it. Variables are
/// the inputs divided by `input_scale`.
conic::ConicProgram nominal_program(const StackedProblem & problem, double input_scale = 1000.0);

NominalSolution solve_nominal(const StackedProblem & problem, const MpcSolverConfig & config = {});

}  // namespace evrmpc

#endif  // EVRMPC__NOMINAL_MPC_HPP_
