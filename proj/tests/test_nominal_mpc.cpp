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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "evrmpc/conic.hpp"
#include "evrmpc/errors.hpp"
#include "evrmpc/horizon_assembly.hpp"
#include "evrmpc/nominal_mpc.hpp"
#include "evrmpc/vehicle_model.hpp"
#include "oracles.hpp"

namespace evrmpc
{
namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

StackedProblem make_problem(
  const VehicleParams & p, const CostWeights & cw, const Eigen::Vector2d & x0,
  const std::vector<double> & lead)
{
  return condense(build_stage(p, cw), x0, lead, static_cast<int>(lead.size()), {0.0, 0.0});
}

double oracle_cost(
  const VehicleParams & p, const CostWeights & cw, const Eigen::Vector2d & x0,
  const std::vector<double> & lead, const Eigen::VectorXd & u, double * violation = nullptr)
{
  const Eigen::VectorXd w = Eigen::VectorXd::Zero(u.size());
  const oracle::Rollout r = oracle::rollout(p, cw, x0, lead, u, w);
  if (violation) {
    *violation = r.max_violation;
  }
  return r.cost;
}

TEST(NominalMpc, EquilibriumNeedsNoInput)
{
  VehicleParams p;
  p.v_cruise = 12.0;
  const CostWeights cw;
  // Leader and ego at the same speed: the gap stays put and no row is tight.
  const std::vector<double> lead(6, 12.0);
  const StackedProblem pb = make_problem(p, cw, {12.0, 30.0}, lead);
  const NominalSolution sol = solve_nominal(pb);
  ASSERT_EQ(sol.status, conic::Status::optimal) << sol.message;
  EXPECT_LT(sol.u_opt.cwiseAbs().maxCoeff(), 1e-2);
  EXPECT_NEAR(sol.cost, 0.0, 1e-8);
}

TEST(NominalMpc, InputWeightAloneGivesZeroInput)
{
  VehicleParams p;
  p.v_cruise = 5.0;
  CostWeights cw;
  cw.W1 = 0.0;
  cw.W2_terminal = 0.0;
  const StackedProblem pb = make_problem(p, cw, {5.0, 10.0}, {5.0});
  const NominalSolution sol = solve_nominal(pb);
  ASSERT_EQ(sol.status, conic::Status::optimal) << sol.message;
  ASSERT_EQ(sol.u_opt.size(), 1);
  EXPECT_NEAR(sol.u_opt(0), 0.0, 1e-3);
}

TEST(NominalMpc, TwoStepMatchesGridSearch)
{
  VehicleParams p;
  p.v_cruise = 10.98;
  const CostWeights cw;
  const Eigen::Vector2d x0(0.2778, 3.0);
  const std::vector<double> lead{5.0, 5.0};
  const InputBounds ub = conservative_input_bounds(p);

  auto search = [&](double lo0, double hi0, double lo1, double hi1, double step) {
    Eigen::VectorXd best(2);
    double best_cost = kInf;
    Eigen::VectorXd u(2);
    for (double a = lo0; a <= hi0 + 1e-9; a += step) {
      for (double b = lo1; b <= hi1 + 1e-9; b += step) {
        u << a, b;
        double viol = 0.0;
        const double c = oracle_cost(p, cw, x0, lead, u, &viol);
        if (viol <= 0.0 && c < best_cost) {
          best_cost = c;
          best = u;
        }
      }
    }
    return best;
  };
  const Eigen::VectorXd coarse = search(ub.lo, ub.hi, ub.lo, ub.hi, 10.0);
  const Eigen::VectorXd fine = search(
    std::max(ub.lo, coarse(0) - 50.0), std::min(ub.hi, coarse(0) + 50.0),
    std::max(ub.lo, coarse(1) - 50.0), std::min(ub.hi, coarse(1) + 50.0), 0.5);

  // The valley is shallow along u0 = -u1, so a third pass is needed for 1 N agreement.
  const Eigen::VectorXd finest = search(
    std::max(ub.lo, fine(0) - 5.0), std::min(ub.hi, fine(0) + 5.0),
    std::max(ub.lo, fine(1) - 5.0), std::min(ub.hi, fine(1) + 5.0), 0.05);

  const NominalSolution sol = solve_nominal(make_problem(p, cw, x0, lead));
  ASSERT_EQ(sol.status, conic::Status::optimal) << sol.message;
  EXPECT_NEAR(sol.u_opt(0), finest(0), 1.0);
  EXPECT_NEAR(sol.u_opt(1), finest(1), 1.0);
  EXPECT_LE(sol.cost, oracle_cost(p, cw, x0, lead, finest) + 1e-9);
}

TEST(NominalMpc, ReportsInfeasibleWhenTheInputCannotOpenTheGap)
{
  VehicleParams p;
  p.v_cruise = 10.0;
  // Stopped leader 12.1 m ahead: keeping ds - v >= s_0 after one step needs
  // about -11400 N, beyond the braking limit.
  const StackedProblem pb = make_problem(p, CostWeights{}, {10.0, 12.1}, {0.0, 0.0, 0.0});
  const NominalSolution sol = solve_nominal(pb);
  EXPECT_EQ(sol.status, conic::Status::infeasible) << sol.message;
  EXPECT_EQ(sol.u_opt.size(), 0);
}

TEST(NominalMpc, ReportsInfeasibleForAViolatedInitialRow)
{
  VehicleParams p;
  const StackedProblem pb = make_problem(p, CostWeights{}, {10.0, 3.0}, {0.0, 0.0});
  EXPECT_NE(solve_nominal(pb).status, conic::Status::optimal);
}

TEST(NominalMpc, ProgramObjectivePlusConstantIsTheCost)
{
  VehicleParams p;
  p.v_cruise = 9.0;
  const CostWeights cw;
  const std::vector<double> lead{6.0, 7.0, 8.0, 8.5};
  const StackedProblem pb = make_problem(p, cw, {4.0, 15.0}, lead);
  const double s = 1000.0;
  const conic::ConicProgram prog = nominal_program(pb, s);
  const Eigen::VectorXd r0 = pb.output_offset();
  const double c0 = r0.dot(pb.q_diag.asDiagonal() * r0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-3000.0, 3000.0);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd u(4);
    for (int k = 0; k < 4; ++k) {
      u(k) = U(rng);
    }
    const double j = pb.cost(u, Eigen::VectorXd::Zero(4));
    EXPECT_NEAR(prog.objective(u / s) + c0, j, 1e-9 * (1.0 + j));
    EXPECT_NEAR(j, oracle_cost(p, cw, {4.0, 15.0}, lead, u), 1e-9 * (1.0 + j));
  }
}

TEST(NominalMpc, RejectsBadScale)
{
  const StackedProblem pb = make_problem(VehicleParams{}, CostWeights{}, {1.0, 5.0}, {1.0});
  EXPECT_THROW(nominal_program(pb, 0.0), ConfigError);
  EXPECT_THROW(nominal_program(pb, -1.0), ConfigError);
}

struct Instance
{
  VehicleParams p;
  CostWeights cw;
  Eigen::Vector2d x0;
  std::vector<double> lead;
};

Instance random_instance(std::mt19937_64 & rng)
{
  std::uniform_int_distribution<int> Nd(1, 10);
  std::uniform_real_distribution<double> V(0.0, 20.0);
  std::uniform_real_distribution<double> T(1.3, 6.0);
  std::uniform_real_distribution<double> dV(-0.5, 0.5);
  Instance in;
  in.p.v_cruise = std::uniform_real_distribution<double>(3.0, 18.0)(rng);
  const int N = Nd(rng);
  const double v0 = V(rng);
  in.x0 << v0, in.p.s_0 + T(rng) * v0 + 0.5;
  double vl = std::clamp(v0 + dV(rng) * 4.0, 0.0, 22.0);
  for (int k = 0; k < N; ++k) {
    in.lead.push_back(vl);
    vl = std::clamp(vl + dV(rng), 0.0, 22.0);
  }
  return in;
}

TEST(NominalMpcProperty, LocalPerturbationsDoNotImproveTheCost)
{
  std::mt19937_64 rng(2024);
  int solved = 0;
  for (int t = 0; t < 100; ++t) {
    const Instance in = random_instance(rng);
    const StackedProblem pb = make_problem(in.p, in.cw, in.x0, in.lead);
    const NominalSolution sol = solve_nominal(pb);
    if (sol.status != conic::Status::optimal) {
      continue;
    }
    ++solved;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(pb.N);
    EXPECT_LE(pb.max_row_violation(sol.u_opt, zero), 1e-6);
    for (int k = 0; k < pb.N; ++k) {
      for (double d : {-1.0, 1.0}) {
        Eigen::VectorXd u = sol.u_opt;
        u(k) += d;
        if (pb.max_row_violation(u, zero) > 0.0) {
          continue;
        }
        EXPECT_GE(pb.cost(u, zero), sol.cost - 1e-6 * (1.0 + sol.cost)) << "trial " << t;
      }
    }
  }
  EXPECT_GT(solved, 80);
}

TEST(NominalMpcProperty, InactiveRowsDoNotChangeTheSolution)
{
  std::mt19937_64 rng(77);
  for (int t = 0; t < 20; ++t) {
    const Instance in = random_instance(rng);
    const StackedProblem pb = make_problem(in.p, in.cw, in.x0, in.lead);
    conic::ConicProgram prog = nominal_program(pb);
    const conic::SolveResult base = conic::solve(prog);
    if (base.status != conic::Status::optimal) {
      continue;
    }
    for (int k = 0; k < pb.N; ++k) {
      conic::LinearRow row;
      row.coeffs.emplace_back(k, 1.0);
      row.lo = -1e3;
      row.hi = 1e3;
      prog.rows.push_back(row);
    }
    const conic::SolveResult more = conic::solve(prog);
    ASSERT_EQ(more.status, conic::Status::optimal);
    EXPECT_LT((more.x - base.x).cwiseAbs().maxCoeff() * 1000.0, 1e-2) << "trial " << t;
  }
}

TEST(NominalMpcProperty, SolvesAreDeterministic)
{
  std::mt19937_64 rng(5);
  const Instance in = random_instance(rng);
  const StackedProblem pb = make_problem(in.p, in.cw, in.x0, in.lead);
  const NominalSolution a = solve_nominal(pb);
  const NominalSolution b = solve_nominal(pb);
  ASSERT_EQ(a.status, b.status);
  EXPECT_EQ(a.iterations, b.iterations);
  if (a.status == conic::Status::optimal) {
    EXPECT_EQ(a.u_opt, b.u_opt);
  }
}

}  // namespace
}  // namespace evrmpc
