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

#include <vector>

#include <Eigen/Core>

namespace rsirl {

/// coeff * phi(a . y + b) with a sparse argument vector.
struct Ridge {
  enum class Kind {
    kShiftedSoftplus,  ///< phi(z) = log(1 + e^z) - log 2
    kSquare,           ///< phi(z) = z^2
  };
  Kind kind = Kind::kSquare;
  double coeff = 1.0;
  std::vector<int> index;
  std::vector<double> weight;
  double shift = 0.0;

  double argument(const Eigen::VectorXd& y) const;
};

double shifted_softplus(double z);
/// logistic function, the derivative of shifted_softplus
double logistic(double z);

/// f(y) = 1/2 y'Py + q'y + c + sum of ridge terms. Convex whenever P is PSD and every
/// ridge coefficient is non-negative.
struct SmoothConvexFunction {
  Eigen::MatrixXd quadratic;  ///< empty means no quadratic part
  Eigen::VectorXd linear;
  double constant = 0.0;
  std::vector<Ridge> ridges;

  explicit SmoothConvexFunction(int dim = 0) : linear(Eigen::VectorXd::Zero(dim)) {}

  double value(const Eigen::VectorXd& y) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& y) const;
  /// hess += scale * Hessian(y)
  void add_hessian(const Eigen::VectorXd& y, double scale, Eigen::MatrixXd& hess) const;
};

/// minimize objective(y) subject to constraints[i](y) <= 0.
struct ConvexProgram {
  int dim = 0;
  SmoothConvexFunction objective;
  std::vector<SmoothConvexFunction> constraints;
};

struct ConvexOptions {
  double initial_t = 1.0;
  double t_growth = 10.0;
  double gap_tolerance = 1e-10;  ///< relative duality-gap bound of the barrier phase
  double newton_tolerance = 1e-10;
  int max_newton_steps = 200;
  bool refine = true;            ///< active-set Newton polish on the KKT system
};

struct ConvexSolution {
  Eigen::VectorXd y;
  Eigen::VectorXd multipliers;  ///< one per constraint
  double objective = 0.0;
  bool refined = false;         ///< the KKT polish was accepted
  double kkt_residual = 0.0;
  double duality_gap = 0.0;     ///< m / t bound of the final barrier iterate
};

/// Log-barrier interior-point method followed by an optional active-set Newton
/// refinement. `start` must be strictly feasible. Throws std::invalid_argument otherwise.
ConvexSolution solve_convex(const ConvexProgram& program, const Eigen::VectorXd& start,
                            const ConvexOptions& options = {});

}  // namespace rsirl
