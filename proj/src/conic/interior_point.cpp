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

// Infeasible-start primal-dual path-following method with the HKM search
// direction and a Mehrotra predictor-corrector. The Schur complement matrix
// is sparse (variables touching disjoint blocks do not couple) and is
// factored with a simplicial Cholesky whose ordering is computed once.

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>

#include "lmi_form.hpp"

namespace evrmpc::conic::detail
{

namespace
{

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// A symmetric coefficient matrix is written as sum_p (e_p w_p' + w_p e_p').
struct Pivot
{
  int p;
  std::vector<int> idx;
  std::vector<double> val;
};

struct VarTerm
{
  int var;
  std::vector<Entry> entries;
  std::vector<Pivot> pivots;
};

std::vector<Pivot> make_pivots(const std::vector<Entry> & entries)
{
  std::map<int, std::vector<int>> adj;
  std::map<int, bool> diag;
  int remaining = 0;
  for (int k = 0; k < static_cast<int>(entries.size()); ++k) {
    const Entry & e = entries[k];
    if (e.r == e.c) {
      diag[e.r] = true;
    } else {
      adj[e.r].push_back(k);
      adj[e.c].push_back(k);
      ++remaining;
    }
  }
  std::vector<char> used(entries.size(), 0);
  std::map<int, Pivot> piv;
  auto pivot_at = [&](int p) -> Pivot & {
    auto it = piv.find(p);
    if (it == piv.end()) {
      it = piv.emplace(p, Pivot{p, {}, {}}).first;
    }
    return it->second;
  };
  // Greedy vertex cover of the off-diagonal pattern.
  while (remaining > 0) {
    int best = -1;
    int best_cnt = -1;
    bool best_diag = false;
    for (const auto & [v, list] : adj) {
      int cnt = 0;
      for (int k : list) {
        cnt += used[k] ? 0 : 1;
      }
      const bool d = diag.count(v) > 0;
      if (cnt > best_cnt || (cnt == best_cnt && d && !best_diag)) {
        best = v;
        best_cnt = cnt;
        best_diag = d;
      }
    }
    Pivot & P = pivot_at(best);
    for (int k : adj[best]) {
      if (used[k]) {
        continue;
      }
      const Entry & e = entries[k];
      P.idx.push_back(e.r == best ? e.c : e.r);
      P.val.push_back(e.v);
      used[k] = 1;
      --remaining;
    }
  }
  for (const Entry & e : entries) {
    if (e.r == e.c) {
      Pivot & P = pivot_at(e.r);
      P.idx.push_back(e.r);
      P.val.push_back(0.5 * e.v);
    }
  }
  std::vector<Pivot> out;
  for (auto & kv : piv) {
    out.push_back(std::move(kv.second));
  }
  return out;
}

struct BlockWork
{
  int d = 0;
  MatrixXd F0;
  std::vector<VarTerm> vars;
  std::vector<int> mpos;  // packed pairs i <= j over `vars`
  MatrixXd X, S, Sinv, Rs, dX, dS, dXa, dSa;
  std::vector<std::vector<VectorXd>> xw, sw;
};

struct LpWork
{
  std::vector<std::vector<std::pair<int, double>>> rows;
  VectorXd f0;
  std::vector<std::vector<int>> mpos;
  VectorXd x, s, rs, dx, ds, dxa, dsa;
};

// A_i^T y restricted to one block (both triangles).
MatrixXd apply_block(const BlockWork & b, const VectorXd & y)
{
  MatrixXd A = MatrixXd::Zero(b.d, b.d);
  for (const auto & t : b.vars) {
    const double yv = y(t.var);
    if (yv == 0.0) {
      continue;
    }
    for (const auto & e : t.entries) {
      A(e.r, e.c) += yv * e.v;
      if (e.r != e.c) {
        A(e.c, e.r) += yv * e.v;
      }
    }
  }
  return A;
}

double inner(const std::vector<Entry> & entries, const MatrixXd & G)
{
  double s = 0.0;
  for (const auto & e : entries) {
    s += e.r == e.c ? e.v * G(e.r, e.r) : e.v * (G(e.r, e.c) + G(e.c, e.r));
  }
  return s;
}

// Largest step a with Z + a dZ PSD, capped at kStepCap; 0 when Z itself is
// not positive definite. A Cholesky probe at the cap avoids most
// eigenvalue computations once full steps become admissible.
constexpr double kStepCap = 1.2;

double max_step(const MatrixXd & Z, const MatrixXd & dZ)
{
  Eigen::LLT<MatrixXd> probe(Z + kStepCap * dZ);
  if (probe.info() == Eigen::Success) {
    return kStepCap;
  }
  Eigen::LLT<MatrixXd> llt(Z);
  if (llt.info() != Eigen::Success) {
    return 0.0;
  }
  const MatrixXd A = llt.matrixL().solve(dZ);
  MatrixXd T = llt.matrixL().solve(A.transpose());
  T = (0.5 * (T + T.transpose())).eval();
  const double lmin =
    Eigen::SelfAdjointEigenSolver<MatrixXd>(T, Eigen::EigenvaluesOnly).eigenvalues()(0);
  return lmin < 0.0 ? std::min(kStepCap, -1.0 / lmin) : kStepCap;
}

double max_step_lp(const VectorXd & z, const VectorXd & dz)
{
  double a = kInf;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (dz(i) < 0.0) {
      a = std::min(a, -z(i) / dz(i));
    }
  }
  return a;
}

class Ipm
{
public:
  Ipm(const LmiForm & form, const SolverOptions & opt) : opt_(opt), m_(form.m)
  {
    // Objective and constraint normalization; PSD-ness is invariant under
    // positive scaling of a block, and the minimizer under scaling of c.
    c_scale_ = std::max(1.0, form.c.cwiseAbs().maxCoeff());
    c_ = form.c / c_scale_;
    used_.assign(m_, 0);

    for (const Block & blk : form.blocks) {
      BlockWork b;
      b.d = blk.dim;
      double s = 0.0;
      for (const auto & t : blk.terms) {
        for (const auto & e : t.entries) {
          s = std::max(s, std::abs(e.v));
        }
      }
      s = s > 0.0 ? 1.0 / s : 1.0;
      b.F0 = MatrixXd::Zero(b.d, b.d);
      for (const auto & e : blk.constant) {
        b.F0(e.r, e.c) += s * e.v;
        if (e.r != e.c) {
          b.F0(e.c, e.r) += s * e.v;
        }
      }
      for (const auto & t : blk.terms) {
        VarTerm vt{t.var, t.entries, {}};
        for (auto & e : vt.entries) {
          e.v *= s;
        }
        vt.pivots = make_pivots(vt.entries);
        used_[t.var] = 1;
        b.vars.push_back(std::move(vt));
      }
      blocks_.push_back(std::move(b));
    }

    const int nlp = static_cast<int>(form.lp.size());
    lp_.f0.resize(nlp);
    for (int r = 0; r < nlp; ++r) {
      double s = 0.0;
      for (const auto & kv : form.lp[r].coeffs) {
        s = std::max(s, std::abs(kv.second));
      }
      s = s > 0.0 ? 1.0 / s : 1.0;
      auto row = form.lp[r].coeffs;
      for (auto & kv : row) {
        kv.second *= s;
        used_[kv.first] = 1;
      }
      lp_.f0(r) = s * form.lp[r].constant;
      lp_.rows.push_back(std::move(row));
    }

    nu_ = nlp;
    for (const auto & b : blocks_) {
      nu_ += b.d;
    }
    build_pattern();
  }

  IpmResult run();

private:
  void build_pattern();
  void initial_point();
  VectorXd apply_adjoint(const std::vector<MatrixXd> & G, const VectorXd & g) const;
  bool assemble_and_factor();
  VectorXd solve_schur(const VectorXd & rhs) const;

  const SolverOptions & opt_;
  int m_;
  double c_scale_ = 1.0;
  VectorXd c_;
  std::vector<char> used_;
  std::vector<BlockWork> blocks_;
  LpWork lp_;
  double nu_ = 0.0;

  Eigen::SparseMatrix<double> M_;
  Eigen::SparseMatrix<double> M_exact_;  // M_ before any regularizing shift
  std::vector<int> diag_pos_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
  VectorXd y_;
};

void Ipm::build_pattern()
{
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < m_; ++i) {
    trip.emplace_back(i, i, 0.0);
  }
  for (const auto & b : blocks_) {
    for (std::size_t i = 0; i < b.vars.size(); ++i) {
      for (std::size_t j = i; j < b.vars.size(); ++j) {
        const int a = b.vars[i].var;
        const int c = b.vars[j].var;
        trip.emplace_back(std::max(a, c), std::min(a, c), 0.0);
      }
    }
  }
  for (const auto & row : lp_.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      for (std::size_t j = i; j < row.size(); ++j) {
        const int a = row[i].first;
        const int c = row[j].first;
        trip.emplace_back(std::max(a, c), std::min(a, c), 0.0);
      }
    }
  }
  M_.resize(m_, m_);
  M_.setFromTriplets(trip.begin(), trip.end());
  M_.makeCompressed();

  auto pos = [&](int a, int c) {
    const int r = std::max(a, c);
    const int col = std::min(a, c);
    const int * begin = M_.innerIndexPtr() + M_.outerIndexPtr()[col];
    const int * end = M_.innerIndexPtr() + M_.outerIndexPtr()[col + 1];
    return static_cast<int>(std::lower_bound(begin, end, r) - M_.innerIndexPtr());
  };
  diag_pos_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    diag_pos_[i] = pos(i, i);
  }
  for (auto & b : blocks_) {
    b.mpos.clear();
    for (std::size_t i = 0; i < b.vars.size(); ++i) {
      for (std::size_t j = i; j < b.vars.size(); ++j) {
        b.mpos.push_back(pos(b.vars[i].var, b.vars[j].var));
      }
    }
  }
  lp_.mpos.clear();
  for (const auto & row : lp_.rows) {
    std::vector<int> mp;
    for (std::size_t i = 0; i < row.size(); ++i) {
      for (std::size_t j = i; j < row.size(); ++j) {
        mp.push_back(pos(row[i].first, row[j].first));
      }
    }
    lp_.mpos.push_back(std::move(mp));
  }
  llt_.analyzePattern(M_);
}

void Ipm::initial_point()
{
  y_ = VectorXd::Zero(m_);
  for (auto & b : blocks_) {
    const double sd = std::sqrt(static_cast<double>(b.d));
    double xi = std::max(10.0, sd);
    double eta = std::max({10.0, sd, b.F0.norm()});
    for (const auto & t : b.vars) {
      double fn = 0.0;
      for (const auto & e : t.entries) {
        fn += (e.r == e.c ? 1.0 : 2.0) * e.v * e.v;
      }
      fn = std::sqrt(fn);
      xi = std::max(xi, b.d * (1.0 + std::abs(c_(t.var))) / (1.0 + fn));
      eta = std::max(eta, fn);
    }
    b.X = xi * MatrixXd::Identity(b.d, b.d);
    b.S = eta * MatrixXd::Identity(b.d, b.d);
  }
  const int nlp = static_cast<int>(lp_.rows.size());
  if (nlp > 0) {
    const double sn = std::sqrt(static_cast<double>(nlp));
    double xi = std::max(10.0, sn);
    double eta = std::max({10.0, sn, lp_.f0.norm()});
    std::vector<double> colnorm(m_, 0.0);
    for (const auto & row : lp_.rows) {
      for (const auto & [i, a] : row) {
        colnorm[i] += a * a;
      }
    }
    for (int i = 0; i < m_; ++i) {
      if (colnorm[i] > 0.0) {
        const double fn = std::sqrt(colnorm[i]);
        xi = std::max(xi, nlp * (1.0 + std::abs(c_(i))) / (1.0 + fn));
        eta = std::max(eta, fn);
      }
    }
    lp_.x = VectorXd::Constant(nlp, xi);
    lp_.s = VectorXd::Constant(nlp, eta);
  } else {
    lp_.x.resize(0);
    lp_.s.resize(0);
  }
}

VectorXd Ipm::apply_adjoint(const std::vector<MatrixXd> & G, const VectorXd & g) const
{
  VectorXd out = VectorXd::Zero(m_);
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    for (const auto & t : blocks_[k].vars) {
      out(t.var) += inner(t.entries, G[k]);
    }
  }
  for (std::size_t r = 0; r < lp_.rows.size(); ++r) {
    for (const auto & [i, a] : lp_.rows[r]) {
      out(i) += a * g(r);
    }
  }
  return out;
}

bool Ipm::assemble_and_factor()
{
  double * val = M_.valuePtr();
  std::fill(val, val + M_.nonZeros(), 0.0);

  for (auto & b : blocks_) {
    const int nv = static_cast<int>(b.vars.size());
    b.xw.resize(nv);
    b.sw.resize(nv);
    for (int i = 0; i < nv; ++i) {
      const auto & piv = b.vars[i].pivots;
      b.xw[i].resize(piv.size());
      b.sw[i].resize(piv.size());
      for (std::size_t p = 0; p < piv.size(); ++p) {
        VectorXd xw = VectorXd::Zero(b.d);
        VectorXd sw = VectorXd::Zero(b.d);
        for (std::size_t k = 0; k < piv[p].idx.size(); ++k) {
          xw.noalias() += piv[p].val[k] * b.X.col(piv[p].idx[k]);
          sw.noalias() += piv[p].val[k] * b.Sinv.col(piv[p].idx[k]);
        }
        b.xw[i][p] = std::move(xw);
        b.sw[i][p] = std::move(sw);
      }
    }
    int k = 0;
    for (int i = 0; i < nv; ++i) {
      const auto & pi = b.vars[i].pivots;
      for (int j = i; j < nv; ++j) {
        const auto & pj = b.vars[j].pivots;
        double sum = 0.0;
        for (std::size_t a = 0; a < pi.size(); ++a) {
          const int p = pi[a].p;
          const VectorXd & xw = b.xw[i][a];
          const VectorXd & sw = b.sw[i][a];
          for (std::size_t c = 0; c < pj.size(); ++c) {
            const Pivot & Q = pj[c];
            const int q = Q.p;
            const VectorXd & xz = b.xw[j][c];
            const VectorXd & sz = b.sw[j][c];
            double xwz = 0.0;
            double swz = 0.0;
            for (std::size_t t = 0; t < Q.idx.size(); ++t) {
              xwz += Q.val[t] * xw(Q.idx[t]);
              swz += Q.val[t] * sw(Q.idx[t]);
            }
            sum += xw(q) * sz(p) + xwz * b.Sinv(q, p) + b.X(p, q) * swz + xz(p) * sw(q);
          }
        }
        val[b.mpos[k++]] += sum;
      }
    }
  }
  for (std::size_t r = 0; r < lp_.rows.size(); ++r) {
    const auto & row = lp_.rows[r];
    const double w = lp_.x(r) / lp_.s(r);
    int k = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      for (std::size_t j = i; j < row.size(); ++j) {
        val[lp_.mpos[r][k++]] += w * row[i].second * row[j].second;
      }
    }
  }
  double dmax = 0.0;
  for (int i = 0; i < m_; ++i) {
    if (!used_[i]) {
      val[diag_pos_[i]] = 1.0;
    }
    dmax = std::max(dmax, val[diag_pos_[i]]);
  }
  M_exact_ = M_;
  llt_.factorize(M_);
  if (llt_.info() == Eigen::Success) {
    return true;
  }
  // Near-singular Schur matrix: retry with growing diagonal shifts.
  std::vector<double> base(val, val + M_.nonZeros());
  for (double shift = 1e-14; shift <= 1e-6; shift *= 100.0) {
    std::copy(base.begin(), base.end(), val);
    for (int i = 0; i < m_; ++i) {
      val[diag_pos_[i]] += shift * std::max(1.0, dmax);
    }
    llt_.factorize(M_);
    if (llt_.info() == Eigen::Success) {
      return true;
    }
  }
  return false;
}

VectorXd Ipm::solve_schur(const VectorXd & rhs) const
{
  // Iterative refinement recovers the accuracy lost to the conditioning of
  // M as mu goes to zero.
  VectorXd x = llt_.solve(rhs);
  VectorXd r = rhs - M_exact_.selfadjointView<Eigen::Lower>() * x;
  double rnorm = r.norm();
  for (int k = 0; k < 3 && rnorm > 0.0; ++k) {
    const VectorXd x2 = x + llt_.solve(r);
    VectorXd r2 = rhs - M_exact_.selfadjointView<Eigen::Lower>() * x2;
    if (!(r2.norm() < rnorm)) {
      break;
    }
    x = x2;
    r = std::move(r2);
    rnorm = r.norm();
  }
  return x;
}

IpmResult Ipm::run()
{
  IpmResult res;
  for (int i = 0; i < m_; ++i) {
    if (!used_[i] && c_(i) != 0.0) {
      res.status = Status::numerical_failure;
      res.message = "unbounded: variable " + std::to_string(i) + " is unconstrained";
      return res;
    }
  }
  initial_point();

  const int nb = static_cast<int>(blocks_.size());
  const int nlp = static_cast<int>(lp_.rows.size());
  double f0_norm2 = lp_.f0.squaredNorm();
  for (const auto & b : blocks_) {
    f0_norm2 += b.F0.squaredNorm();
  }
  const double f0_norm = std::sqrt(f0_norm2);
  const double c_norm = c_.norm();

  VectorXd best_y;
  double best_err = kInf;
  IpmResult best;
  int stall = 0;

  for (int iter = 0; iter <= opt_.max_iterations; ++iter) {
    res.iterations = iter;
    // Residuals and progress measures.
    VectorXd AX = VectorXd::Zero(m_);
    double pobj = c_.dot(y_);
    double dobj = 0.0;
    double gap = 0.0;
    double rs2 = 0.0;
    for (auto & b : blocks_) {
      b.Rs = b.F0 + apply_block(b, y_) - b.S;
      rs2 += b.Rs.squaredNorm();
      dobj -= (b.F0.cwiseProduct(b.X)).sum();
      gap += (b.X.cwiseProduct(b.S)).sum();
      for (const auto & t : b.vars) {
        AX(t.var) += inner(t.entries, b.X);
      }
    }
    if (nlp > 0) {
      lp_.rs = lp_.f0 - lp_.s;
      for (int r = 0; r < nlp; ++r) {
        for (const auto & [i, a] : lp_.rows[r]) {
          lp_.rs(r) += a * y_(i);
          AX(i) += a * lp_.x(r);
        }
      }
      rs2 += lp_.rs.squaredNorm();
      dobj -= lp_.f0.dot(lp_.x);
      gap += lp_.x.dot(lp_.s);
    }
    const double mu = gap / nu_;
    const double pinf = std::sqrt(rs2) / (1.0 + f0_norm);
    const double dinf = (c_ - AX).norm() / (1.0 + c_norm);
    const double rel_gap =
      std::max(std::abs(gap), std::abs(pobj - dobj)) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double err = std::max({rel_gap, pinf, dinf});
    if (opt_.verbose) {
      std::fprintf(
        stderr, "ipm %3d pobj % .9e dobj % .9e gap %.2e pinf %.2e dinf %.2e\n", iter,
        pobj * c_scale_, dobj * c_scale_, rel_gap, pinf, dinf);
    }
    if (err < best_err) {
      best_err = err;
      best_y = y_;
      best.rel_gap = rel_gap;
      best.pinf = pinf;
      best.dinf = dinf;
    }
    if (err <= opt_.tol) {
      res.status = Status::optimal;
      res.y = y_;
      res.rel_gap = rel_gap;
      res.pinf = pinf;
      res.dinf = dinf;
      return res;
    }
    // Infeasibility: X / (-<F0, X>) approaches a Farkas certificate.
    if (dobj > 0.0 && AX.norm() / dobj < 1e-8 && dinf > opt_.tol) {
      res.status = Status::infeasible;
      res.message = "primal infeasibility certificate found";
      return res;
    }
    if (pobj < -1e12) {
      res.status = Status::numerical_failure;
      res.message = "objective unbounded below";
      return res;
    }
    if (iter == opt_.max_iterations || stall >= 3) {
      break;
    }

    bool ok = true;
    for (auto & b : blocks_) {
      Eigen::LLT<MatrixXd> llt(b.S);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      b.Sinv = llt.solve(MatrixXd::Identity(b.d, b.d));
      b.Sinv = (0.5 * (b.Sinv + b.Sinv.transpose())).eval();
    }
    if (!ok || !assemble_and_factor()) {
      res.message = "Schur complement factorization failed";
      break;
    }

    // Predictor.
    std::vector<MatrixXd> G(nb);
    VectorXd g(nlp);
    for (int k = 0; k < nb; ++k) {
      auto & b = blocks_[k];
      G[k] = -b.X * b.Rs * b.Sinv;
    }
    for (int r = 0; r < nlp; ++r) {
      g(r) = -lp_.x(r) * lp_.rs(r) / lp_.s(r);
    }
    VectorXd dy = solve_schur(apply_adjoint(G, g) - c_);
    double ap = 1.0;
    double ad = 1.0;
    for (auto & b : blocks_) {
      b.dSa = apply_block(b, dy) + b.Rs;
      b.dXa = -b.X - b.X * b.dSa * b.Sinv;
      b.dXa = (0.5 * (b.dXa + b.dXa.transpose())).eval();
      ap = std::min(ap, max_step(b.X, b.dXa));
      ad = std::min(ad, max_step(b.S, b.dSa));
    }
    if (nlp > 0) {
      lp_.dsa = lp_.rs;
      for (int r = 0; r < nlp; ++r) {
        for (const auto & [i, a] : lp_.rows[r]) {
          lp_.dsa(r) += a * dy(i);
        }
      }
      lp_.dxa = -lp_.x - lp_.x.cwiseProduct(lp_.dsa).cwiseQuotient(lp_.s);
      ap = std::min(ap, max_step_lp(lp_.x, lp_.dxa));
      ad = std::min(ad, max_step_lp(lp_.s, lp_.dsa));
    }
    double gap_aff = 0.0;
    for (const auto & b : blocks_) {
      gap_aff += ((b.X + ap * b.dXa).cwiseProduct(b.S + ad * b.dSa)).sum();
    }
    if (nlp > 0) {
      gap_aff += (lp_.x + ap * lp_.dxa).dot(lp_.s + ad * lp_.dsa);
    }
    const double expo = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
    const double sigma = std::clamp(std::pow(std::max(gap_aff, 0.0) / gap, expo), 0.0, 1.0);

    // Corrector.
    for (int k = 0; k < nb; ++k) {
      auto & b = blocks_[k];
      G[k] = (sigma * mu) * b.Sinv - b.X * b.Rs * b.Sinv - b.dXa * b.dSa * b.Sinv;
    }
    for (int r = 0; r < nlp; ++r) {
      g(r) = (sigma * mu - lp_.x(r) * lp_.rs(r) - lp_.dxa(r) * lp_.dsa(r)) / lp_.s(r);
    }
    dy = solve_schur(apply_adjoint(G, g) - c_);
    const double tau = std::min(0.99, 0.9 + 0.09 * std::min(ap, ad));
    ap = 1.0;
    ad = 1.0;
    for (int k = 0; k < nb; ++k) {
      auto & b = blocks_[k];
      b.dS = apply_block(b, dy) + b.Rs;
      b.dX = G[k] - b.X - b.X * (b.dS - b.Rs) * b.Sinv;
      b.dX = (0.5 * (b.dX + b.dX.transpose())).eval();
      ap = std::min(ap, tau * max_step(b.X, b.dX));
      ad = std::min(ad, tau * max_step(b.S, b.dS));
    }
    if (nlp > 0) {
      lp_.ds = lp_.rs;
      for (int r = 0; r < nlp; ++r) {
        for (const auto & [i, a] : lp_.rows[r]) {
          lp_.ds(r) += a * dy(i);
        }
      }
      lp_.dx = g - lp_.x - lp_.x.cwiseProduct(lp_.ds - lp_.rs).cwiseQuotient(lp_.s);
      ap = std::min(ap, tau * max_step_lp(lp_.x, lp_.dx));
      ad = std::min(ad, tau * max_step_lp(lp_.s, lp_.ds));
    }
    if (!(ap > 0.0) || !(ad > 0.0) || !dy.allFinite()) {
      res.message = "step length collapsed";
      break;
    }
    stall = (ap < 1e-8 && ad < 1e-8) ? stall + 1 : 0;
    for (auto & b : blocks_) {
      b.X += ap * b.dX;
      b.S += ad * b.dS;
    }
    if (nlp > 0) {
      lp_.x += ap * lp_.dx;
      lp_.s += ad * lp_.ds;
    }
    y_ += ad * dy;
  }

  if (best_err <= opt_.accept_tol) {
    res.status = Status::optimal;
    res.y = best_y;
    res.rel_gap = best.rel_gap;
    res.pinf = best.pinf;
    res.dinf = best.dinf;
    res.message = "accepted at reduced accuracy";
    return res;
  }
  // Weaker certificate check once progress has stopped.
  double dobj = 0.0;
  VectorXd AX = VectorXd::Zero(m_);
  for (const auto & b : blocks_) {
    dobj -= (b.F0.cwiseProduct(b.X)).sum();
    for (const auto & t : b.vars) {
      AX(t.var) += inner(t.entries, b.X);
    }
  }
  for (int r = 0; r < nlp; ++r) {
    dobj -= lp_.f0(r) * lp_.x(r);
    for (const auto & [i, a] : lp_.rows[r]) {
      AX(i) += a * lp_.x(r);
    }
  }
  if (dobj > 0.0 && AX.norm() / dobj < 1e-5) {
    res.status = Status::infeasible;
    res.message = "primal infeasibility certificate found";
    return res;
  }
  res.status = Status::numerical_failure;
  res.y = best_y;
  res.rel_gap = best.rel_gap;
  res.pinf = best.pinf;
  res.dinf = best.dinf;
  if (res.message.empty()) {
    res.message = "iteration limit reached";
  }
  return res;
}

}  // namespace

IpmResult run_ipm(const LmiForm & form, const SolverOptions & options)
{
  Ipm ipm(form, options);
  return ipm.run();
}

}  // namespace evrmpc::conic::detail
