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

#include "rsirl/stage.hpp"

namespace rsirl {

/// An observed react sequence together with what it was conditioned on.
struct ReactDemonstration {
  StageContext context;
  Eigen::VectorXd prepare;
  int scenario = 0;
  Eigen::VectorXd react;
};

struct FeatureWeights {
  Eigen::Vector4d alpha = Eigen::Vector4d::Zero();  ///< alpha >= 0, |alpha| = 1
  double conditioning = 0.0;  ///< second-smallest over largest singular value of the residual matrix
  double residual = 0.0;      ///< |M alpha|
  int rows = 0;
};

struct InverseKktOptions {
  double saturation_tol = 1e-6;
  double kink_tol = 1e-6;
  double min_conditioning = 1e-8;
};

/// Stationarity rows d/du_k sum_i alpha_i Phi_i of every interior react step,
/// one column per feature. Rows touching a kink are left out.
Eigen::MatrixXd react_residual_matrix(const std::vector<ReactDemonstration>& demos,
                                      const InverseKktOptions& options = {});

/// Non-negative unit alpha minimizing the stacked stationarity residual.
/// Throws IllConditioned when alpha is not identifiable from the demos.
FeatureWeights recover_cost_weights(const std::vector<ReactDemonstration>& demos,
                                    const InverseKktOptions& options = {});

}  // namespace rsirl
