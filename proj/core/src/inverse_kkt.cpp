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

#include "rsirl/inverse_kkt.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

#include "rsirl/errors.hpp"

namespace rsirl {

Eigen::MatrixXd react_residual_matrix(const std::vector<ReactDemonstration>& demos,
                                      const InverseKktOptions& options) {
  const Eigen::Vector4d ones = Eigen::Vector4d::Ones();
  std::vector<Eigen::Vector4d> rows;
  for (const auto& d : demos) {
    const auto& ctx = d.context;
    const int n_r = ctx.config.n_r;
    if (d.react.size() != n_r) throw std::invalid_argument("react demonstration length mismatch");
    const std::vector<StageTerm> terms = react_terms(ctx, d.prepare, d.scenario, ones);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n_r, kCarFeatures);
    std::vector<bool> on_kink(static_cast<std::size_t>(n_r), false);
    for (const auto& t : terms) {
      const double s = t.argument(d.react);
      const bool kink = t.shape != ScalarShape::kSquare && std::abs(s) <= options.kink_tol;
      const double ds = t.coeff * shape_derivative(t.shape, s);
      for (std::size_t k = 0; k < t.index.size(); ++k) {
        if (kink) on_kink[static_cast<std::size_t>(t.index[k])] = true;
        grad(t.index[k], t.feature) += ds * t.weight[k];
      }
    }
    for (int k = 0; k < n_r; ++k) {
      const double u = d.react[k];
      const bool saturated =
          u >= ctx.model.u_hi - options.saturation_tol || u <= ctx.model.u_lo + options.saturation_tol;
      if (saturated || on_kink[static_cast<std::size_t>(k)]) continue;
      rows.push_back(grad.row(k).transpose());
    }
  }
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), kCarFeatures);
  for (std::size_t r = 0; r < rows.size(); ++r) M.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  return M;
}

namespace {

// Smallest right singular vector of M restricted to the columns in `mask`,
// signed to have a positive sum.
Eigen::VectorXd null_direction(const Eigen::MatrixXd& M, unsigned mask) {
  std::vector<int> cols;
  for (int h = 0; h < kCarFeatures; ++h)
    if (mask & (1u << h)) cols.push_back(h);
  Eigen::MatrixXd sub(M.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = M.col(cols[c]);
  Eigen::VectorXd a;
  if (sub.rows() == 0) {
    a = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(cols.size())).normalized();
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeFullV);
    a = svd.matrixV().col(sub.cols() - 1);
  }
  if (a.sum() < 0.0) a = -a;
  Eigen::VectorXd full = Eigen::VectorXd::Zero(kCarFeatures);
  for (std::size_t c = 0; c < cols.size(); ++c) full[cols[c]] = a[static_cast<Eigen::Index>(c)];
  return full;
}

}  // namespace

FeatureWeights recover_cost_weights(const std::vector<ReactDemonstration>& demos,
                                    const InverseKktOptions& options) {
  if (demos.size() < 2) throw std::invalid_argument("recover_cost_weights needs at least two demonstrations");
  const Eigen::MatrixXd M = react_residual_matrix(demos, options);
  FeatureWeights out;
  out.rows = static_cast<int>(M.rows());
  if (M.rows() < kCarFeatures - 1)
    throw IllConditioned("only " + std::to_string(M.rows()) + " interior react rows");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  Eigen::VectorXd sv = Eigen::VectorXd::Zero(kCarFeatures);
  sv.head(svd.singularValues().size()) = svd.singularValues();
  out.conditioning = sv[0] > 0.0 ? sv[kCarFeatures - 2] / sv[0] : 0.0;
  if (!(out.conditioning >= options.min_conditioning))
    throw IllConditioned("cost weights are not identifiable (conditioning " +
                         std::to_string(out.conditioning) + ")");

  Eigen::VectorXd alpha = null_direction(M, (1u << kCarFeatures) - 1);
  if (alpha.minCoeff() < -1e-12) {
    // Active-set fallback: the best non-negative null direction over feature subsets.
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << kCarFeatures); ++mask) {
      const Eigen::VectorXd a = null_direction(M, mask);
      if (a.minCoeff() < -1e-12) continue;
      const double r = (M * a).norm();
      if (r < best) {
        best = r;
        alpha = a;
      }
    }
  }
  alpha = alpha.cwiseMax(0.0);
  alpha.normalize();
  out.alpha = alpha;
  out.residual = (M * alpha).norm();
  return out;
}

}  // namespace rsirl
