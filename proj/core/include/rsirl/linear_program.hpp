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

#pragma once

#include <limits>

#include <Eigen/Core>

namespace rsirl {

/// maximize objective . x
/// subject to A_ineq x <= b_ineq, A_eq x = b_eq, x >= lower (entries may be -inf).
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd A_ineq;
  Eigen::VectorXd b_ineq;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd lower;

  /// Empty program over `n` variables, all with lower bound 0.
  explicit LinearProgram(int n = 0);

  int num_variables() const { return static_cast<int>(objective.size()); }

  void add_inequality(const Eigen::VectorXd& row, double bound);
  void add_equality(const Eigen::VectorXd& row, double value);

  /// Throws std::invalid_argument when dimensions are inconsistent.
  void validate() const;

  static constexpr double kFree = -std::numeric_limits<double>::infinity();
};

struct LpOptions {
  double pivot_tolerance = 1e-11;
  double phase_one_tolerance = 1e-9;  ///< residual infeasibility (row-scaled) accepted as feasible
  double feasibility_check = 1e-8;
};

struct LpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
};

/// Dense two-phase primal simplex with Bland's anti-cycling rule.
/// Throws Infeasible or Unbounded.
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace rsirl
