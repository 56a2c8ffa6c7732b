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

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "evrmpc/conic.hpp"
#include "lmi_form.hpp"

namespace evrmpc::conic
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string & what)
{
  if (!ok) {
    throw std::invalid_argument("malformed conic program: " + what);
  }
}

double max_abs(const SymMatrix & A)
{
  double m = 0.0;
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SymMatrix::InnerIterator it(A, k); it; ++it) {
      m = std::max(m, std::abs(it.value()));
    }
  }
  return m;
}

void check_sym(const SymMatrix & A, int dim, const std::string & what)
{
  require(A.rows() == dim && A.cols() == dim, what + " has wrong dimensions");
  const double scale = std::max(1.0, max_abs(A));
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SymMatrix::InnerIterator it(A, k); it; ++it) {
      require(std::isfinite(it.value()), what + " has a non-finite entry");
      if (it.row() != it.col()) {
        require(
          std::abs(it.value() - A.coeff(it.col(), it.row())) <= 1e-12 * scale,
          what + " is not symmetric");
      }
    }
  }
}

// Upper-triangle entries of a symmetric sparse matrix.
std::vector<detail::Entry> upper_entries(const SymMatrix & A)
{
  std::vector<detail::Entry> out;
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SymMatrix::InnerIterator it(A, k); it; ++it) {
      if (it.row() <= it.col() && it.value() != 0.0) {
        out.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
      }
    }
  }
  return out;
}

}  // namespace

const char * to_string(Status status)
{
  switch (status) {
    case Status::optimal:
      return "optimal";
    case Status::infeasible:
      return "infeasible";
    case Status::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

Eigen::MatrixXd PsdConstraint::evaluate(const Eigen::VectorXd & x) const
{
  Eigen::MatrixXd M = Eigen::MatrixXd(constant);
  for (const auto & [var, A] : coeffs) {
    M += x(var) * Eigen::MatrixXd(A);
  }
  return M;
}

PsdBuilder::PsdBuilder(int dim, std::string label) : dim_(dim), label_(std::move(label))
{
  if (dim < 1) {
    throw std::invalid_argument("PSD constraint dimension must be positive");
  }
}

void PsdBuilder::add_constant(int r, int c, double value)
{
  if (r < 0 || c < 0 || r >= dim_ || c >= dim_) {
    throw std::out_of_range("PSD entry outside the block");
  }
  constant_.emplace_back(r, c, value);
  if (r != c) {
    constant_.emplace_back(c, r, value);
  }
}

void PsdBuilder::add_coeff(int var, int r, int c, double value)
{
  if (var < 0) {
    throw std::out_of_range("negative variable index");
  }
  if (r < 0 || c < 0 || r >= dim_ || c >= dim_) {
    throw std::out_of_range("PSD entry outside the block");
  }
  if (static_cast<int>(slot_.size()) <= var) {
    slot_.resize(var + 1, -1);
  }
  if (slot_[var] < 0) {
    slot_[var] = static_cast<int>(coeffs_.size());
    coeffs_.push_back({var, {}});
  }
  auto & list = coeffs_[slot_[var]].second;
  list.emplace_back(r, c, value);
  if (r != c) {
    list.emplace_back(c, r, value);
  }
}

PsdConstraint PsdBuilder::build() const
{
  PsdConstraint out;
  out.dim = dim_;
  out.label = label_;
  out.constant.resize(dim_, dim_);
  out.constant.setFromTriplets(constant_.begin(), constant_.end());
  auto order = coeffs_;
  std::sort(order.begin(), order.end(), [](const auto & a, const auto & b) {
    return a.first < b.first;
  });
  for (const auto & [var, list] : order) {
    SymMatrix A(dim_, dim_);
    A.setFromTriplets(list.begin(), list.end());
    out.coeffs.emplace_back(var, std::move(A));
  }
  return out;
}

double LinearRow::evaluate(const Eigen::VectorXd & x) const
{
  double v = offset;
  for (const auto & [i, a] : coeffs) {
    v += a * x(i);
  }
  return v;
}

ConicProgram::ConicProgram(int num_vars) : n_(num_vars)
{
  if (num_vars < 1) {
    throw std::invalid_argument("conic program needs at least one variable");
  }
  c = Eigen::VectorXd::Zero(n_);
  lower = Eigen::VectorXd::Constant(n_, -kInf);
  upper = Eigen::VectorXd::Constant(n_, kInf);
}

void ConicProgram::validate() const
{
  require(c.size() == n_, "objective length");
  require(c.allFinite(), "objective must be finite");
  if (P.size() > 0) {
    require(P.rows() == n_ && P.cols() == n_, "quadratic term dimensions");
    require(P.allFinite(), "quadratic term must be finite");
    const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
    require((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, "quadratic term symmetry");
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                          P, Eigen::EigenvaluesOnly).eigenvalues()(0);
    require(lmin >= -1e-10 * scale, "quadratic term must be PSD");
  }
  if (A_eq.rows() > 0) {
    require(A_eq.cols() == n_, "equality matrix columns");
    require(b_eq.size() == A_eq.rows(), "equality right-hand side length");
    require(A_eq.allFinite() && b_eq.allFinite(), "equality data must be finite");
  }
  for (int i : nonneg) {
    require(i >= 0 && i < n_, "sign constraint index");
  }
  require(lower.size() == n_ && upper.size() == n_, "box bound length");
  for (int i = 0; i < n_; ++i) {
    require(!std::isnan(lower(i)) && !std::isnan(upper(i)), "box bound is NaN");
    require(lower(i) < kInf && upper(i) > -kInf, "box bound on the wrong side");
  }
  for (const auto & row : rows) {
    require(std::isfinite(row.offset), "linear row offset");
    require(!std::isnan(row.lo) && !std::isnan(row.hi), "linear row bound is NaN");
    require(row.lo < kInf && row.hi > -kInf, "linear row bound on the wrong side");
    for (const auto & [i, a] : row.coeffs) {
      require(i >= 0 && i < n_, "linear row variable index");
      require(std::isfinite(a), "linear row coefficient");
    }
  }
  for (const auto & blk : psd) {
    require(blk.dim >= 1, "PSD block dimension");
    check_sym(blk.constant, blk.dim, "PSD constant '" + blk.label + "'");
    for (const auto & [var, A] : blk.coeffs) {
      require(var >= 0 && var < n_, "PSD variable index");
      check_sym(A, blk.dim, "PSD coefficient '" + blk.label + "'");
    }
  }
}

double ConicProgram::objective(const Eigen::VectorXd & x) const
{
  double v = c.dot(x);
  if (P.size() > 0) {
    v += x.dot(P * x);
  }
  return v;
}

double ConicProgram::max_violation(const Eigen::VectorXd & x) const
{
  double worst = 0.0;
  if (A_eq.rows() > 0) {
    worst = std::max(worst, (A_eq * x - b_eq).cwiseAbs().maxCoeff());
  }
  for (int i : nonneg) {
    worst = std::max(worst, -x(i));
  }
  for (int i = 0; i < n_; ++i) {
    worst = std::max({worst, lower(i) - x(i), x(i) - upper(i)});
  }
  for (const auto & row : rows) {
    const double v = row.evaluate(x);
    worst = std::max({worst, row.lo - v, v - row.hi});
  }
  for (const auto & blk : psd) {
    const Eigen::MatrixXd M = blk.evaluate(x);
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                          M, Eigen::EigenvaluesOnly).eigenvalues()(0);
    worst = std::max(worst, -lmin);
  }
  return worst;
}

namespace detail
{

namespace
{

// Constraint expressed over the extended variables (original plus epigraph).
struct RawLp
{
  double constant;
  std::vector<std::pair<int, double>> coeffs;
};

struct RawBlock
{
  int dim;
  std::vector<Entry> constant;
  std::map<int, std::vector<Entry>> terms;
  std::string label;
};

void add_lp(std::vector<RawLp> & lp, double constant, std::vector<std::pair<int, double>> coeffs)
{
  lp.push_back({constant, std::move(coeffs)});
}

}  // namespace

LmiForm lower(const ConicProgram & program)
{
  program.validate();
  const int n = program.num_vars();
  LmiForm form;

  std::vector<RawLp> lp;
  std::vector<RawBlock> blocks;

  for (int i : program.nonneg) {
    add_lp(lp, 0.0, {{i, 1.0}});
  }
  for (int i = 0; i < n; ++i) {
    const double lo = program.lower(i);
    const double hi = program.upper(i);
    if (lo > hi) {
      form.infeasible = true;
      form.message = "contradictory box bounds on variable " + std::to_string(i);
      return form;
    }
    if (std::isfinite(lo)) {
      add_lp(lp, -lo, {{i, 1.0}});
    }
    if (std::isfinite(hi)) {
      add_lp(lp, hi, {{i, -1.0}});
    }
  }
  for (const auto & row : program.rows) {
    if (row.lo > row.hi) {
      form.infeasible = true;
      form.message = "contradictory bounds on linear row '" + row.label + "'";
      return form;
    }
    if (std::isfinite(row.lo)) {
      add_lp(lp, row.offset - row.lo, row.coeffs);
    }
    if (std::isfinite(row.hi)) {
      auto neg = row.coeffs;
      for (auto & t : neg) {
        t.second = -t.second;
      }
      add_lp(lp, row.hi - row.offset, std::move(neg));
    }
  }
  for (const auto & blk : program.psd) {
    if (blk.dim == 1) {
      RawLp r{blk.constant.coeff(0, 0), {}};
      for (const auto & [var, A] : blk.coeffs) {
        r.coeffs.emplace_back(var, A.coeff(0, 0));
      }
      lp.push_back(std::move(r));
      continue;
    }
    RawBlock rb{blk.dim, upper_entries(blk.constant), {}, blk.label};
    for (const auto & [var, A] : blk.coeffs) {
      auto e = upper_entries(A);
      auto & dst = rb.terms[var];
      dst.insert(dst.end(), e.begin(), e.end());
    }
    blocks.push_back(std::move(rb));
  }

  // Quadratic objective: t >= |R x|^2 with R'R = P.
  int n_ext = n;
  Eigen::VectorXd c_ext = program.c;
  if (program.P.size() > 0 && program.P.cwiseAbs().maxCoeff() > 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(program.P);
    const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
    std::vector<Eigen::VectorXd> rows_R;
    for (int k = 0; k < n; ++k) {
      const double lam = es.eigenvalues()(k);
      if (lam > 1e-14 * lmax) {
        rows_R.push_back(std::sqrt(lam) * es.eigenvectors().col(k));
      }
    }
    const int t = n;
    n_ext = n + 1;
    c_ext.conservativeResize(n_ext);
    c_ext(t) = 1.0;
    const int r = static_cast<int>(rows_R.size());
    RawBlock rb{r + 1, {}, {}, "quadratic objective"};
    rb.terms[t].push_back({0, 0, 1.0});
    for (int k = 0; k < r; ++k) {
      rb.constant.push_back({k + 1, k + 1, 1.0});
      for (int j = 0; j < n; ++j) {
        if (rows_R[k](j) != 0.0) {
          rb.terms[j].push_back({0, k + 1, rows_R[k](j)});
        }
      }
    }
    blocks.push_back(std::move(rb));
  }

  // Null-space elimination of equalities: x_ext = shift + Z y.
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(n_ext);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Identity(n_ext, n_ext);
  const bool has_eq = program.A_eq.rows() > 0;
  if (has_eq) {
    const Eigen::MatrixXd & A = program.A_eq;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_t(A.transpose());
    qr_t.setThreshold(1e-12);
    const int rank = static_cast<int>(qr_t.rank());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    const Eigen::VectorXd x0 = qr.solve(program.b_eq);
    const double res = (A * x0 - program.b_eq).norm();
    if (!(res <= 1e-9 * (1.0 + program.b_eq.norm()))) {
      form.infeasible = true;
      form.message = "inconsistent equality constraints";
      return form;
    }
    const Eigen::MatrixXd Q = qr_t.householderQ();
    Z.setZero(n_ext, n_ext - rank);
    Z.topLeftCorner(n, n - rank) = Q.rightCols(n - rank);
    if (n_ext > n) {
      Z(n, n - rank) = 1.0;
    }
    shift.head(n) = x0;
  }
  const int m = static_cast<int>(Z.cols());

  auto sub_lp = [&](const RawLp & r) {
    LpRow out;
    out.constant = r.constant;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n_ext);
    for (const auto & [i, v] : r.coeffs) {
      a(i) += v;
    }
    if (has_eq) {
      out.constant += a.dot(shift);
      a = Z.transpose() * a;
    }
    const double scale = a.cwiseAbs().maxCoeff();
    for (int j = 0; j < m; ++j) {
      if (a(j) != 0.0 && std::abs(a(j)) > 1e-15 * scale) {
        out.coeffs.emplace_back(j, a(j));
      }
    }
    return out;
  };

  auto sub_block = [&](const RawBlock & rb) {
    Block out;
    out.dim = rb.dim;
    out.label = rb.label;
    auto merge = [](std::vector<Entry> e) {
      std::sort(e.begin(), e.end(), [](const Entry & a, const Entry & b) {
        return a.c != b.c ? a.c < b.c : a.r < b.r;
      });
      std::vector<Entry> out;
      double scale = 0.0;
      for (const auto & x : e) {
        if (!out.empty() && out.back().r == x.r && out.back().c == x.c) {
          out.back().v += x.v;
        } else {
          out.push_back(x);
        }
      }
      for (const auto & x : out) {
        scale = std::max(scale, std::abs(x.v));
      }
      std::erase_if(out, [scale](const Entry & x) {
        return x.v == 0.0 || std::abs(x.v) <= 1e-15 * scale;
      });
      return out;
    };
    std::vector<Entry> cst = rb.constant;
    if (!has_eq) {
      for (const auto & [var, entries] : rb.terms) {
        BlockTerm term{var, merge(entries)};
        if (!term.entries.empty()) {
          out.terms.push_back(std::move(term));
        }
      }
      out.constant = merge(std::move(cst));
      return out;
    }
    std::map<int, std::vector<Entry>> acc;
    for (const auto & [var, entries] : rb.terms) {
      for (const auto & e : entries) {
        if (shift(var) != 0.0) {
          cst.push_back({e.r, e.c, shift(var) * e.v});
        }
        for (int j = 0; j < m; ++j) {
          if (Z(var, j) != 0.0) {
            acc[j].push_back({e.r, e.c, Z(var, j) * e.v});
          }
        }
      }
    }
    for (auto & [j, entries] : acc) {
      BlockTerm term{j, merge(std::move(entries))};
      if (!term.entries.empty()) {
        out.terms.push_back(std::move(term));
      }
    }
    out.constant = merge(std::move(cst));
    return out;
  };

  form.m = m;
  form.c = has_eq ? Eigen::VectorXd(Z.transpose() * c_ext) : c_ext;

  for (const auto & r : lp) {
    LpRow row = sub_lp(r);
    if (row.coeffs.empty()) {
      if (row.constant < -1e-12 * (1.0 + std::abs(r.constant))) {
        form.infeasible = true;
        form.message = "constant linear constraint is violated";
        return form;
      }
      continue;
    }
    form.lp.push_back(std::move(row));
  }
  for (const auto & rb : blocks) {
    Block b = sub_block(rb);
    if (b.terms.empty()) {
      Eigen::MatrixXd F0 = Eigen::MatrixXd::Zero(b.dim, b.dim);
      for (const auto & e : b.constant) {
        F0(e.r, e.c) = e.v;
        F0(e.c, e.r) = e.v;
      }
      const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                            F0, Eigen::EigenvaluesOnly).eigenvalues()(0);
      if (lmin < -1e-12 * (1.0 + F0.norm())) {
        form.infeasible = true;
        form.message = "constant matrix constraint '" + b.label + "' is violated";
        return form;
      }
      continue;
    }
    form.blocks.push_back(std::move(b));
  }

  form.x_shift = shift.head(n);
  form.Z = Z.topRows(n);
  return form;
}

Eigen::VectorXd recover(const LmiForm & form, const Eigen::VectorXd & y)
{
  return form.x_shift + form.Z * y;
}

}  // namespace detail

SolveResult solve(const ConicProgram & program, const SolverOptions & options)
{
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult out;
  const detail::LmiForm form = detail::lower(program);
  if (form.infeasible) {
    out.status = Status::infeasible;
    out.message = form.message;
  } else {
    const detail::IpmResult r = detail::run_ipm(form, options);
    out.status = r.status;
    out.iterations = r.iterations;
    out.rel_gap = r.rel_gap;
    out.primal_infeasibility = r.pinf;
    out.dual_infeasibility = r.dinf;
    out.message = r.message;
    if (r.y.size() == form.m) {
      out.x = detail::recover(form, r.y);
      out.objective = program.objective(out.x);
    }
  }
  out.solve_time =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void write_program(const ConicProgram & program, std::ostream & os)
{
  const int n = program.num_vars();
  os.precision(17);
  os << "VARS " << n << '\n';
  os << "OBJ";
  for (int i = 0; i < n; ++i) {
    os << ' ' << program.c(i);
  }
  os << '\n';
  if (program.P.size() > 0) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        if (program.P(i, j) != 0.0) {
          os << "QUAD " << i << ' ' << j << ' ' << program.P(i, j) << '\n';
        }
      }
    }
  }
  for (int k = 0; k < program.A_eq.rows(); ++k) {
    os << "EQ";
    for (int i = 0; i < n; ++i) {
      os << ' ' << program.A_eq(k, i);
    }
    os << " = " << program.b_eq(k) << '\n';
  }
  for (int i : program.nonneg) {
    os << "NONNEG " << i << '\n';
  }
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(program.lower(i)) || std::isfinite(program.upper(i))) {
      os << "BOX " << i << ' ' << program.lower(i) << ' ' << program.upper(i) << '\n';
    }
  }
  for (const auto & row : program.rows) {
    os << "ROW " << row.lo << ' ' << row.hi << ' ' << row.offset << " |";
    for (const auto & [i, a] : row.coeffs) {
      os << ' ' << i << ':' << a;
    }
    os << '\n';
  }
  for (const auto & blk : program.psd) {
    std::string label = blk.label.empty() ? "-" : blk.label;
    std::replace(label.begin(), label.end(), ' ', '_');
    os << "PSD " << blk.dim << ' ' << label << " |";
    for (const auto & e : upper_entries(blk.constant)) {
      os << " C " << e.r << ' ' << e.c << ' ' << e.v << " ;";
    }
    for (const auto & [var, A] : blk.coeffs) {
      for (const auto & e : upper_entries(A)) {
        os << " x" << var << ' ' << e.r << ' ' << e.c << ' ' << e.v << " ;";
      }
    }
    os << '\n';
  }
}

void write_program(const ConicProgram & program, const std::string & path)
{
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("cannot open " + path + " for writing");
  }
  write_program(program, os);
}

}  // namespace evrmpc::conic
