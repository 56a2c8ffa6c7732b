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

#ifndef EVRMPC__CONIC__LMI_FORM_HPP_
#define EVRMPC__CONIC__LMI_FORM_HPP_

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "evrmpc/conic.hpp"

namespace evrmpc::conic::detail
{

/// Upper-triangle entry (r <= c) of a symmetric matrix.
struct Entry
{
  int r;
  int c;
  double v;
};

struct BlockTerm
{
  int var;
  std::vector<Entry> entries;
};

struct Block
{
  int dim = 0;
  std::vector<Entry> constant;
  std::vector<BlockTerm> terms;  // sorted by var, one term per var
  std::string label;
};

/// s = constant + sum coeffs >= 0.
struct LpRow
{
  double constant = 0.0;
  std::vector<std::pair<int, double>> coeffs;  // sorted by var
};

/// Standard inequality form  min c'y  s.t.  F(y) = F0 + sum y_i F_i >= 0,
/// with F block diagonal over dense PSD blocks and a nonnegative orthant.
struct LmiForm
{
  int m = 0;
  Eigen::VectorXd c;
  std::vector<Block> blocks;
  std::vector<LpRow> lp;

  // Original variables are x = x_shift + Z y.head(Z.cols()).
  Eigen::VectorXd x_shift;
  Eigen::MatrixXd Z;

  bool infeasible = false;  // detected during lowering
  std::string message;
};

/// Validates and lowers a program: quadratic objective to an epigraph block,
/// sign and box constraints and 1x1 blocks to LP rows, equalities eliminated
/// through a null-space basis, and constant constraints checked directly.
LmiForm lower(const ConicProgram & program);

Eigen::VectorXd recover(const LmiForm & form, const Eigen::VectorXd & y);

struct IpmResult
{
  Status status = Status::numerical_failure;
  Eigen::VectorXd y;
  int iterations = 0;
  double rel_gap = 0.0;
  double pinf = 0.0;
  double dinf = 0.0;
  std::string message;
};

IpmResult run_ipm(const LmiForm & form, const SolverOptions & options);

}  // namespace evrmpc::conic::detail

#endif  // EVRMPC__CONIC__LMI_FORM_HPP_
