/*
Copyright 2026 The rsirl Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

     https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "rsirl/linear_program.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rsirl/errors.hpp"

namespace rsirl {

LinearProgram::LinearProgram(int n)
    : objective(Eigen::VectorXd::Zero(n)),
      A_ineq(0, n),
      b_ineq(0),
      A_eq(0, n),
      b_eq(0),
      lower(Eigen::VectorXd::Zero(n)) {}

void LinearProgram::add_inequality(const Eigen::VectorXd& row, double bound) {
  A_ineq.conservativeResize(A_ineq.rows() + 1, num_variables());
  A_ineq.row(A_ineq.rows() - 1) = row.transpose();
  b_ineq.conservativeResize(b_ineq.size() + 1);
  b_ineq[b_ineq.size() - 1] = bound;
}

void LinearProgram::add_equality(const Eigen::VectorXd& row, double value) {
  A_eq.conservativeResize(A_eq.rows() + 1, num_variables());
  A_eq.row(A_eq.rows() - 1) = row.transpose();
  b_eq.conservativeResize(b_eq.size() + 1);
  b_eq[b_eq.size() - 1] = value;
}

void LinearProgram::validate() const {
  const int n = num_variables();
  if (n < 1) throw std::invalid_argument("LinearProgram: need at least one variable");
  if (A_ineq.cols() != n || A_ineq.rows() != b_ineq.size())
    throw std::invalid_argument("LinearProgram: inequality block has inconsistent dimensions");
  if (A_eq.cols() != n || A_eq.rows() != b_eq.size())
    throw std::invalid_argument("LinearProgram: equality block has inconsistent dimensions");
  if (lower.size() != n) throw std::invalid_argument("LinearProgram: lower bound size mismatch");
  for (int i = 0; i < n; ++i)
    if (std::isnan(lower[i]) || lower[i] == std::numeric_limits<double>::infinity())
      throw std::invalid_argument("LinearProgram: lower bounds must be finite or -inf");
}

namespace {

// Simplex tableau in canonical form: basis columns are unit vectors.
class Tableau {
 public:
  Tableau(Eigen::MatrixXd a, Eigen::VectorXd rhs, std::vector<int> basis, double pivot_tol)
      : a_(std::move(a)), rhs_(std::move(rhs)), basis_(std::move(basis)), tol_(pivot_tol) {
    allowed_.assign(static_cast<std::size_t>(a_.cols()), true);
  }

  int rows() const { return static_cast<int>(a_.rows()); }
  int cols() const { return static_cast<int>(a_.cols()); }
  const std::vector<int>& basis() const { return basis_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }
  void forbid(int col) { allowed_[static_cast<std::size_t>(col)] = false; }

  /// Maximizes c . z from the current basic feasible solution. Returns false if unbounded.
  bool maximize(const Eigen::VectorXd& c) {
    Eigen::VectorXd reduced = c;
    for (int i = 0; i < rows(); ++i) reduced -= c[basis_[i]] * a_.row(i).transpose();
    for (int iter = 0; iter < 200000; ++iter) {
      int enter = -1;
      for (int j = 0; j < cols(); ++j) {
        if (allowed_[static_cast<std::size_t>(j)] && reduced[j] > tol_) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows(); ++i) {
        const double p = a_(i, enter);
        if (p > tol_) {
          const double ratio = std::max(rhs_[i], 0.0) / p;
          if (ratio < best - 1e-14 ||
              (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis_[i] < basis_[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      reduced -= reduced[enter] * a_.row(leave).transpose();
      reduced[enter] = 0.0;
    }
    throw NotConverged("solve_lp: simplex iteration cap reached");
  }

  void pivot(int row, int col) {
    const double p = a_(row, col);
    a_.row(row) /= p;
    rhs_[row] /= p;
    for (int i = 0; i < rows(); ++i) {
      if (i == row) continue;
      const double f = a_(i, col);
      if (f != 0.0) {
        a_.row(i) -= f * a_.row(row);
        rhs_[i] -= f * rhs_[row];
        a_(i, col) = 0.0;
      }
    }
    a_(row, col) = 1.0;
    basis_[row] = col;
  }

  /// Pivots artificial columns (index >= first_artificial) out of the basis,
  /// dropping rows that are linearly dependent on the others.
  void expel_artificials(int first_artificial) {
    for (int i = 0; i < rows();) {
      if (basis_[i] < first_artificial) {
        ++i;
        continue;
      }
      int col = -1;
      double best = tol_ * 1e3;
      for (int j = 0; j < first_artificial; ++j) {
        if (std::abs(a_(i, j)) > best) {
          best = std::abs(a_(i, j));
          col = j;
        }
      }
      if (col >= 0) {
        pivot(i, col);
        ++i;
      } else {
        remove_row(i);
      }
    }
  }

 private:
  void remove_row(int row) {
    const int last = rows() - 1;
    if (row != last) {
      a_.row(row) = a_.row(last);
      rhs_[row] = rhs_[last];
      basis_[static_cast<std::size_t>(row)] = basis_[static_cast<std::size_t>(last)];
    }
    a_.conservativeResize(last, Eigen::NoChange);
    rhs_.conservativeResize(last);
    basis_.pop_back();
  }

  Eigen::MatrixXd a_;
  Eigen::VectorXd rhs_;
  std::vector<int> basis_;
  std::vector<bool> allowed_;
  double tol_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  lp.validate();
  const int n = lp.num_variables();

  // x = shift + map * z, z >= 0
  std::vector<int> free_vars;
  for (int i = 0; i < n; ++i)
    if (std::isinf(lp.lower[i])) free_vars.push_back(i);
  const int nz = n + static_cast<int>(free_vars.size());
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(n, nz);
  for (int i = 0; i < n; ++i) {
    map(i, i) = 1.0;
    if (!std::isinf(lp.lower[i])) shift[i] = lp.lower[i];
  }
  for (std::size_t k = 0; k < free_vars.size(); ++k) map(free_vars[k], n + static_cast<int>(k)) = -1.0;

  const int mi = static_cast<int>(lp.A_ineq.rows());
  const int me = static_cast<int>(lp.A_eq.rows());
  const int m = mi + me;
  Eigen::MatrixXd rows(m, nz);
  Eigen::VectorXd rhs(m);
  if (mi > 0) {
    rows.topRows(mi) = lp.A_ineq * map;
    rhs.head(mi) = lp.b_ineq - lp.A_ineq * shift;
  }
  if (me > 0) {
    rows.bottomRows(me) = lp.A_eq * map;
    rhs.tail(me) = lp.b_eq - lp.A_eq * shift;
  }
  // row equilibration
  for (int i = 0; i < m; ++i) {
    const double s = rows.row(i).lpNorm<Eigen::Infinity>();
    if (s > 0.0) {
      rows.row(i) /= s;
      rhs[i] /= s;
    }
  }

  // columns: z | slacks | artificials
  std::vector<int> needs_artificial;
  std::vector<double> sign(static_cast<std::size_t>(m), 1.0);
  for (int i = 0; i < m; ++i) {
    if (rhs[i] < 0.0) sign[static_cast<std::size_t>(i)] = -1.0;
    if (i >= mi || sign[static_cast<std::size_t>(i)] < 0.0) needs_artificial.push_back(i);
  }
  const int first_slack = nz;
  const int first_art = nz + mi;
  const int ncols = first_art + static_cast<int>(needs_artificial.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, ncols);
  Eigen::VectorXd b(m);
  std::vector<int> basis(static_cast<std::size_t>(m), -1);
  for (int i = 0; i < m; ++i) {
    const double s = sign[static_cast<std::size_t>(i)];
    a.row(i).head(nz) = s * rows.row(i);
    if (i < mi) a(i, first_slack + i) = s;
    b[i] = s * rhs[i];
    if (i < mi && s > 0.0) basis[static_cast<std::size_t>(i)] = first_slack + i;
  }
  for (std::size_t k = 0; k < needs_artificial.size(); ++k) {
    const int i = needs_artificial[k];
    a(i, first_art + static_cast<int>(k)) = 1.0;
    basis[static_cast<std::size_t>(i)] = first_art + static_cast<int>(k);
  }

  Tableau tab(std::move(a), std::move(b), std::move(basis), options.pivot_tolerance);

  if (!needs_artificial.empty()) {
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(ncols);
    c1.tail(static_cast<int>(needs_artificial.size())).setConstant(-1.0);
    tab.maximize(c1);
    double infeasibility = 0.0;
    for (int i = 0; i < tab.rows(); ++i)
      if (tab.basis()[static_cast<std::size_t>(i)] >= first_art) infeasibility += std::abs(tab.rhs()[i]);
    if (infeasibility > options.phase_one_tolerance) throw Infeasible();
    tab.expel_artificials(first_art);
    for (int j = first_art; j < ncols; ++j) tab.forbid(j);
  }

  Eigen::VectorXd c2 = Eigen::VectorXd::Zero(ncols);
  c2.head(nz) = map.transpose() * lp.objective;
  if (!tab.maximize(c2)) throw Unbounded();

  Eigen::VectorXd z = Eigen::VectorXd::Zero(ncols);
  for (int i = 0; i < tab.rows(); ++i) z[tab.basis()[static_cast<std::size_t>(i)]] = std::max(tab.rhs()[i], 0.0);
  LpSolution sol;
  sol.x = shift + map * z.head(nz);
  sol.objective = lp.objective.dot(sol.x);
  return sol;
}

}  // namespace rsirl
