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

#include "evrmpc/robust_mpc.hpp"

#include <algorithm>
#include <cmath>

#include "evrmpc/errors.hpp"

namespace evrmpc
{

namespace
{

void check_problem(const StackedProblem & pb)
{
  if (pb.N < 1 || pb.D_tilde_zu.cols() != pb.N || pb.D_tilde_fw.cols() != pb.N) {
    throw ConfigError("malformed stacked problem");
  }
  if (pb.w_lo > pb.w_hi) {
    throw ConfigError("disturbance box is inverted");
  }
}

}  // namespace

bool box_is_degenerate(double w_lo, double w_hi)
{
  if (w_lo > w_hi) {
    throw ConfigError("disturbance box is inverted");
  }
  return w_hi - w_lo <= 1e-12 * std::max({1.0, std::abs(w_lo), std::abs(w_hi)});
}

// ---------------------------------------------------------------- cost LMI

Eigen::VectorXd CostLmiData::bd(const Eigen::VectorXd & u) const
{
  return G.transpose() * q.asDiagonal() * (r0 + Dzu * u);
}

double CostLmiData::cd(const Eigen::VectorXd & u) const
{
  return r0.dot(q.cwiseProduct(r0)) + 2.0 * r0.dot(q.cwiseProduct(Dzu * u));
}

double CostLmiData::quadratic_term(const Eigen::VectorXd & u) const
{
  const Eigen::VectorXd e = Dzu * u;
  return e.dot(q.cwiseProduct(e));
}

Eigen::MatrixXd CostLmiData::base_matrix(
  const Eigen::VectorXd & u, const Eigen::VectorXd & D, double gamma) const
{
  const int J = multipliers();
  const double m = 0.5 * (w_lo + w_hi);
  Eigen::MatrixXd L(J + 1, J + 1);
  L.topLeftCorner(J, J) = -GtQG;
  L.topLeftCorner(J, J).diagonal() += D;
  const Eigen::VectorXd off = -m * D - bd(u);
  L.topRightCorner(J, 1) = off;
  L.bottomLeftCorner(1, J) = off.transpose();
  L(J, J) = w_lo * w_hi * D.sum() - cd(u) - quadratic_term(u) + gamma;
  return L;
}

Eigen::MatrixXd CostLmiData::schur_matrix(
  const Eigen::VectorXd & u, const Eigen::VectorXd & D, double gamma) const
{
  const int J = multipliers();
  const int c = corner();
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(dim(), dim());
  L.topLeftCorner(J, J) = -GtQG;
  L.topLeftCorner(J, J).diagonal() += D;
  const Eigen::VectorXd off = -0.5 * (w_lo + w_hi) * D - bd(u);
  L.block(0, c, J, 1) = off;
  L.block(c, 0, 1, J) = off.transpose();
  L(c, c) = w_lo * w_hi * D.sum() - cd(u) + gamma;
  const Eigen::VectorXd e = Dzu * u;
  for (std::size_t t = 0; t < schur_rows.size(); ++t) {
    const int i = schur_rows[t];
    const double v = std::sqrt(q(i)) * e(i);
    L(c + 1 + static_cast<int>(t), c) = v;
    L(c, c + 1 + static_cast<int>(t)) = v;
  }
  return L;
}

CostLmiData assemble_cost_lmi(const StackedProblem & pb)
{
  check_problem(pb);
  if (!pb.q_diag.allFinite() || (pb.q_diag.array() < 0.0).any()) {
    throw ConfigError("cost weight stack is not positive semidefinite");
  }
  CostLmiData d;
  d.N = pb.N;
  d.w_lo = pb.w_lo;
  d.w_hi = pb.w_hi;
  d.q = pb.q_diag;
  d.Dzu = pb.D_tilde_zu;
  d.r0 = pb.output_offset();
  const double m = 0.5 * (pb.w_lo + pb.w_hi);
  const bool pinned = box_is_degenerate(pb.w_lo, pb.w_hi);
  const Eigen::VectorXd sq = d.q.cwiseSqrt();
  for (int j = 0; j < pb.N; ++j) {
    const auto col = pb.D_tilde_zw.col(j);
    if (!pinned && sq.cwiseProduct(col).cwiseAbs().maxCoeff() > 0.0) {
      d.support.push_back(j);
    } else {
      d.r0 += m * col;
    }
  }
  d.G = pb.D_tilde_zw(Eigen::all, d.support);
  d.GtQG = d.G.transpose() * d.q.asDiagonal() * d.G;
  for (int i = 0; i < d.q.size(); ++i) {
    if (d.q(i) > 0.0 && d.Dzu.row(i).cwiseAbs().maxCoeff() > 0.0) {
      d.schur_rows.push_back(i);
    }
  }
  return d;
}

// ---------------------------------------------------------------- row LMIs

double RowLmiData::value(const Eigen::VectorXd & u, const Eigen::VectorXd & w) const
{
  double v = offset + alpha.dot(u);
  for (int j : support) {
    v += g(j) * w(j);
  }
  return v;
}

double RowLmiData::slack(const Eigen::VectorXd & u, const Eigen::VectorXd & w) const
{
  const double v = value(u, w);
  return side == RowSide::upper ? bound - v : v - bound;
}

Eigen::MatrixXd RowLmiData::matrix(const Eigen::VectorXd & u, const Eigen::VectorXd & mult) const
{
  const int J = multipliers();
  const double m = 0.5 * (w_lo + w_hi);
  const double sgn = side == RowSide::upper ? 1.0 : -1.0;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(J + 1, J + 1);
  for (int t = 0; t < J; ++t) {
    const double gj = g(support[t]);
    L(t, t) = mult(t);
    L(t, J) = -mult(t) * m - sgn * 0.5 * gj;
    L(J, t) = L(t, J);
  }
  L(J, J) = w_lo * w_hi * mult.head(J).sum() + sgn * (bound - offset - alpha.dot(u));
  return L;
}

std::vector<RowLmiData> assemble_row_lmis(const StackedProblem & pb)
{
  check_problem(pb);
  const bool pinned = box_is_degenerate(pb.w_lo, pb.w_hi);
  const double m = 0.5 * (pb.w_lo + pb.w_hi);
  const Eigen::VectorXd a0 = pb.row_offset();
  std::vector<RowLmiData> out;
  for (int i = 0; i < static_cast<int>(a0.size()); ++i) {
    RowLmiData base;
    base.row = i;
    base.offset = a0(i);
    base.alpha = pb.D_tilde_fu.row(i).transpose();
    base.g = pb.D_tilde_fw.row(i).transpose();
    base.w_lo = pb.w_lo;
    base.w_hi = pb.w_hi;
    for (int j = 0; j < pb.N; ++j) {
      if (base.g(j) == 0.0) {
        continue;
      }
      if (pinned) {
        base.offset += m * base.g(j);
      } else {
        base.support.push_back(j);
      }
    }
    if (std::isfinite(pb.f_hi(i))) {
      RowLmiData r = base;
      r.side = RowSide::upper;
      r.bound = pb.f_hi(i);
      out.push_back(std::move(r));
    }
    if (std::isfinite(pb.f_lo(i))) {
      RowLmiData r = base;
      r.side = RowSide::lower;
      r.bound = pb.f_lo(i);
      out.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------- program

conic::ConicProgram robust_program(
  const StackedProblem & pb, const CostLmiData & cost, const std::vector<RowLmiData> & rows,
  double s)
{
  if (!(s > 0.0)) {
    throw ConfigError("input scale must be positive");
  }
  const int N = pb.N;
  const int v_gamma = N;
  const int v_D = N + 1;
  int n = v_D + cost.multipliers();
  std::vector<int> row_var(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    row_var[k] = n;
    n += rows[k].multipliers();
  }
  conic::ConicProgram prog(n);
  prog.c(v_gamma) = 1.0;
  // Every multiplier sits alone on a diagonal entry of its block (minus a
  // PSD constant in the cost block), so the block already forces it to be
  // non-negative; explicit sign rows would only add redundant slack.

  {
    const int J = cost.multipliers();
    const int c = cost.corner();
    const double m = 0.5 * (cost.w_lo + cost.w_hi);
    conic::PsdBuilder b(cost.dim(), "cost");
    for (int j = 0; j < J; ++j) {
      for (int k = j; k < J; ++k) {
        if (cost.GtQG(j, k) != 0.0) {
          b.add_constant(j, k, -cost.GtQG(j, k));
        }
      }
      b.add_coeff(v_D + j, j, j, 1.0);
      if (m != 0.0) {
        b.add_coeff(v_D + j, j, c, -m);
      }
      if (cost.w_lo * cost.w_hi != 0.0) {
        b.add_coeff(v_D + j, c, c, cost.w_lo * cost.w_hi);
      }
    }
    const Eigen::VectorXd Qr0 = cost.q.cwiseProduct(cost.r0);
    const Eigen::VectorXd bd0 = cost.G.transpose() * Qr0;
    const Eigen::MatrixXd bdu = cost.G.transpose() * cost.q.asDiagonal() * cost.Dzu;
    for (int j = 0; j < J; ++j) {
      if (bd0(j) != 0.0) {
        b.add_constant(j, c, -bd0(j));
      }
      for (int k = 0; k < N; ++k) {
        if (bdu(j, k) != 0.0) {
          b.add_coeff(k, j, c, -s * bdu(j, k));
        }
      }
    }
    const double cd0 = cost.r0.dot(Qr0);
    if (cd0 != 0.0) {
      b.add_constant(c, c, -cd0);
    }
    const Eigen::VectorXd cdu = cost.Dzu.transpose() * Qr0;
    for (int k = 0; k < N; ++k) {
      if (cdu(k) != 0.0) {
        b.add_coeff(k, c, c, -2.0 * s * cdu(k));
      }
    }
    b.add_coeff(v_gamma, c, c, 1.0);
    for (std::size_t t = 0; t < cost.schur_rows.size(); ++t) {
      const int i = cost.schur_rows[t];
      const int r = c + 1 + static_cast<int>(t);
      const double sq = std::sqrt(cost.q(i));
      b.add_constant(r, r, 1.0);
      for (int k = 0; k < N; ++k) {
        if (cost.Dzu(i, k) != 0.0) {
          b.add_coeff(k, r, c, s * sq * cost.Dzu(i, k));
        }
      }
    }
    prog.psd.push_back(b.build());
  }

  for (std::size_t k = 0; k < rows.size(); ++k) {
    const RowLmiData & row = rows[k];
    const int J = row.multipliers();
    const double m = 0.5 * (row.w_lo + row.w_hi);
    const double sgn = row.side == RowSide::upper ? 1.0 : -1.0;
    conic::PsdBuilder b(row.dim(), (sgn > 0 ? "upper " : "lower ") + std::to_string(row.row));
    for (int t = 0; t < J; ++t) {
      const int v = row_var[k] + t;
      b.add_coeff(v, t, t, 1.0);
      if (m != 0.0) {
        b.add_coeff(v, t, J, -m);
      }
      if (row.w_lo * row.w_hi != 0.0) {
        b.add_coeff(v, J, J, row.w_lo * row.w_hi);
      }
      b.add_constant(t, J, -sgn * 0.5 * row.g(row.support[t]));
    }
    const double corner = sgn * (row.bound - row.offset);
    if (corner != 0.0) {
      b.add_constant(J, J, corner);
    }
    for (int i = 0; i < N; ++i) {
      if (row.alpha(i) != 0.0) {
        b.add_coeff(i, J, J, -sgn * s * row.alpha(i));
      }
    }
    prog.psd.push_back(b.build());
  }
  return prog;
}

RobustSolution solve_robust(const StackedProblem & problem, const MpcSolverConfig & config)
{
  const CostLmiData cost = assemble_cost_lmi(problem);
  const std::vector<RowLmiData> rows = assemble_row_lmis(problem);
  const conic::ConicProgram prog = robust_program(problem, cost, rows, config.input_scale);
  if (!config.dump_path.empty()) {
    conic::write_program(prog, config.dump_path);
  }
  const conic::SolveResult r = conic::solve(prog, config.solver);
  RobustSolution out;
  out.status = r.status;
  out.solve_time = r.solve_time;
  out.iterations = r.iterations;
  out.message = r.message;
  if (r.status != conic::Status::optimal) {
    return out;
  }
  const int N = problem.N;
  out.u_opt = config.input_scale * r.x.head(N);
  out.gamma_bar_opt = r.x(N);
  int pos = N + 1;
  out.D_t = r.x.segment(pos, cost.multipliers());
  pos += cost.multipliers();
  for (const auto & row : rows) {
    out.row_multipliers.push_back(r.x.segment(pos, row.multipliers()));
    pos += row.multipliers();
  }
  return out;
}

// ---------------------------------------------------------------- oracles

double box_extremum(
  double nominal, const Eigen::VectorXd & coef, double w_lo, double w_hi, bool maximize)
{
  if (w_lo > w_hi) {
    throw ConfigError("disturbance box is inverted");
  }
  double v = nominal;
  for (Eigen::Index j = 0; j < coef.size(); ++j) {
    const double a = coef(j);
    if (a != 0.0) {
      v += a * (((a > 0.0) == maximize) ? w_hi : w_lo);
    }
  }
  return v;
}

double robust_row_worstcase(
  const StackedProblem & pb, const Eigen::VectorXd & u, int row, bool maximize)
{
  if (row < 0 || row >= pb.D_tilde_fu.rows()) {
    throw std::out_of_range("row index outside the stacked constraints");
  }
  if (u.size() != pb.N) {
    throw ConfigError("input vector length must equal N");
  }
  const double nominal = pb.row_offset()(row) + pb.D_tilde_fu.row(row).dot(u);
  return box_extremum(
    nominal, pb.D_tilde_fw.row(row).transpose(), pb.w_lo, pb.w_hi, maximize);
}

double row_lmi_margin(
  const RowLmiData & row, const Eigen::VectorXd & u, const conic::SolverOptions & options)
{
  const int J = row.multipliers();
  const double m = 0.5 * (row.w_lo + row.w_hi);
  const double sgn = row.side == RowSide::upper ? 1.0 : -1.0;
  const double corner = sgn * (row.bound - row.offset - row.alpha.dot(u));
  if (J == 0) {
    return corner;
  }
  conic::ConicProgram prog(J + 1);
  prog.c(0) = -1.0;
  conic::PsdBuilder b(J + 1, "row margin");
  b.add_coeff(0, J, J, -1.0);
  b.add_constant(J, J, corner);
  for (int t = 0; t < J; ++t) {
    prog.nonneg.push_back(t + 1);
    b.add_coeff(t + 1, t, t, 1.0);
    if (m != 0.0) {
      b.add_coeff(t + 1, t, J, -m);
    }
    if (row.w_lo * row.w_hi != 0.0) {
      b.add_coeff(t + 1, J, J, row.w_lo * row.w_hi);
    }
    b.add_constant(t, J, -sgn * 0.5 * row.g(row.support[t]));
  }
  prog.psd.push_back(b.build());
  const conic::SolveResult r = conic::solve(prog, options);
  if (r.status != conic::Status::optimal) {
    throw SolverError(std::string("row margin program failed: ") + conic::to_string(r.status));
  }
  return r.x(0);
}

}  // namespace evrmpc
