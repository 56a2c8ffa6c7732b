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

#include "evrmpc/nominal_mpc.hpp"

#include <cmath>

#include "evrmpc/errors.hpp"

namespace evrmpc
{

conic::ConicProgram nominal_program(const StackedProblem & pb, double input_scale)
{
  if (!(input_scale > 0.0)) {
    throw ConfigError("input scale must be positive");
  }
  if (pb.N < 1 || pb.D_tilde_zu.cols() != pb.N) {
    throw ConfigError("malformed stacked problem");
  }
  if ((pb.q_diag.array() < 0.0).any()) {
    throw ConfigError("cost weights must be non-negative");
  }
  const int N = pb.N;
  const double s = input_scale;
  conic::ConicProgram prog(N);

  // J = (r0 + D u)' Q (r0 + D u) with u = s * x; the constant r0'Q r0 is
  // left out of the program and restored when the cost is evaluated.
  const Eigen::VectorXd r0 = pb.output_offset();
  const Eigen::MatrixXd QD = pb.q_diag.asDiagonal() * pb.D_tilde_zu;
  prog.P = (s * s) * (pb.D_tilde_zu.transpose() * QD);
  prog.P = 0.5 * (prog.P + prog.P.transpose()).eval();
  prog.c = (2.0 * s) * (QD.transpose() * r0);

  const Eigen::VectorXd a0 = pb.row_offset();
  for (Eigen::Index i = 0; i < a0.size(); ++i) {
    const double lo = pb.f_lo(i);
    const double hi = pb.f_hi(i);
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      continue;
    }
    conic::LinearRow row;
    row.offset = a0(i);
    row.lo = lo;
    row.hi = hi;
    row.label = "row " + std::to_string(i);
    for (int k = 0; k < N; ++k) {
      const double a = pb.D_tilde_fu(i, k);
      if (a != 0.0) {
        row.coeffs.emplace_back(k, s * a);
      }
    }
    prog.rows.push_back(std::move(row));
  }
  return prog;
}

NominalSolution solve_nominal(const StackedProblem & problem, const MpcSolverConfig & config)
{
  const conic::ConicProgram prog = nominal_program(problem, config.input_scale);
  if (!config.dump_path.empty()) {
    conic::write_program(prog, config.dump_path);
  }
  const conic::SolveResult r = conic::solve(prog, config.solver);
  NominalSolution out;
  out.status = r.status;
  out.solve_time = r.solve_time;
  out.iterations = r.iterations;
  out.message = r.message;
  if (r.status == conic::Status::optimal) {
    out.u_opt = config.input_scale * r.x;
    out.cost = problem.cost(out.u_opt, Eigen::VectorXd::Zero(problem.N));
  }
  return out;
}

}  // namespace evrmpc
