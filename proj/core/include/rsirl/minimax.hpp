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

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace rsirl {

/// u -> 1/2 u'Hu + c'u + k
struct ScenarioQuadratic {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  double constant = 0.0;

  double value(const Eigen::VectorXd& u) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const;
};

/// min over the box of max_i sum_j vertices[i](j) * scenarios[j](u)
struct MinimaxProblem {
  std::vector<ScenarioQuadratic> scenarios;
  std::vector<Eigen::VectorXd> vertices;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int action_dim() const { return static_cast<int>(lower.size()); }
  /// Throws std::invalid_argument on inconsistent sizes, non-PSD Hessians or off-simplex vertices.
  void validate() const;
  /// max over vertices of the weighted scenario cost at u
  double objective(const Eigen::VectorXd& u) const;
};

struct MinimaxOptions {
  double tau_tolerance = 1e-5;  ///< relative
  int restarts = 5;
  int iterations = 2000;
  std::uint64_t seed = 0x5eed;  ///< restart start points are drawn from this stream
  bool polish = true;
};

struct MinimaxResult {
  Eigen::VectorXd u;
  double tau = 0.0;
  bool polished = false;  ///< the interior-point polish improved on the subgradient phase
};

/// Projected subgradient descent with diminishing steps and random restarts,
/// followed by an interior-point polish that recovers the exact KKT point.
/// Throws NotConverged when a restart beats the polished optimum by more than
/// 10 * tau_tolerance (relative).
MinimaxResult solve_minimax(const MinimaxProblem& problem, const MinimaxOptions& options = {});

}  // namespace rsirl
