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

#ifndef EVRMPC__CONIC_HPP_
#define EVRMPC__CONIC_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace evrmpc::conic
{

enum class Status { optimal, infeasible, numerical_failure };

const char * to_string(Status status);

/// Symmetric coefficient matrix stored with both triangles.
using SymMatrix = Eigen::SparseMatrix<double>;

/// Affine matrix inequality  constant + sum_i x_i * coeffs_i  >= 0 (PSD).
struct PsdConstraint
{
  int dim = 0;
  SymMatrix constant;
  std::vector<std::pair<int, SymMatrix>> coeffs;
  std::string label;

  /// Dense value of the matrix at x.
  Eigen::MatrixXd evaluate(const Eigen::VectorXd & x) const;
};

/// Accumulates entries of a PsdConstraint. Each call places `value` at
/// (r, c) and (c, r), once on the diagonal; repeated entries are summed.
class PsdBuilder
{
public:
  explicit PsdBuilder(int dim, std::string label = {});

  void add_constant(int r, int c, double value);
  void add_coeff(int var, int r, int c, double value);

  PsdConstraint build() const;

private:
  int dim_;
  std::string label_;
  std::vector<Eigen::Triplet<double>> constant_;
  std::vector<std::pair<int, std::vector<Eigen::Triplet<double>>>> coeffs_;
  std::vector<int> slot_;  // variable -> index into coeffs_, grown on demand
};

/// lo <= offset + sum coeffs  <= hi, with infinite ends allowed.
struct LinearRow
{
  std::vector<std::pair<int, double>> coeffs;
  double offset = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  std::string label;

  double evaluate(const Eigen::VectorXd & x) const;
};

/// minimize  c'x + x'Px  subject to
///   A_eq x = b_eq, x_i >= 0 for i in nonneg, lower <= x <= upper,
///   linear rows, and PSD constraints.
class ConicProgram
{
public:
  explicit ConicProgram(int num_vars);

  int num_vars() const { return n_; }

  Eigen::VectorXd c;
  Eigen::MatrixXd P;  // empty or n x n symmetric PSD
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  std::vector<int> nonneg;
  Eigen::VectorXd lower;  // -inf when unbounded
  Eigen::VectorXd upper;  // +inf when unbounded
  std::vector<LinearRow> rows;

  std::vector<PsdConstraint> psd;

  /// Throws std::invalid_argument for inconsistent sizes, asymmetric or
  /// non-finite data, out-of-range variable indices, or a non-PSD P.
  void validate() const;

  double objective(const Eigen::VectorXd & x) const;

  /// Largest violation of any constraint at x (0 when all hold).
  double max_violation(const Eigen::VectorXd & x) const;

private:
  int n_;
};

struct SolverOptions
{
  double tol = 1e-8;          // requested relative gap and infeasibilities
  double accept_tol = 1e-6;   // accepted when progress stalls
  int max_iterations = 100;
  bool verbose = false;
};

struct SolveResult
{
  Status status = Status::numerical_failure;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double solve_time = 0.0;  // seconds
  double rel_gap = std::numeric_limits<double>::quiet_NaN();
  double primal_infeasibility = std::numeric_limits<double>::quiet_NaN();
  double dual_infeasibility = std::numeric_limits<double>::quiet_NaN();
  std::string message;
};

/// Primal-dual interior-point solve. Deterministic for fixed input.
SolveResult solve(const ConicProgram & program, const SolverOptions & options = {});

/// Plain-text normal form, one constraint per record:
///   VARS n
///   OBJ <c_0> ... <c_{n-1}>
///   QUAD i j value            (upper triangle of P, one line each)
///   EQ  <a_0> ... <a_{n-1}> = b
///   NONNEG i
///   BOX i lo hi
///   ROW lo hi offset | i:a i:a ...
///   PSD dim label | C r c v ; x_i r c v ; ...   (upper triangle entries)
void write_program(const ConicProgram & program, std::ostream & os);
void write_program(const ConicProgram & program, const std::string & path);

}  // namespace evrmpc::conic

#endif  // EVRMPC__CONIC_HPP_
