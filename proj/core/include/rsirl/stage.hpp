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

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "rsirl/car.hpp"
#include "rsirl/convex_program.hpp"
#include "rsirl/geometry.hpp"
#include "rsirl/inference.hpp"
#include "rsirl/linear_program.hpp"

namespace rsirl {

/// Stage of N = n_p + n_r steps. The disturbance of the previous stage acts on
/// steps 1..n_p-1; the new one is realized at step n_p and acts on n_p..N.
struct StageConfig {
  int N = 6;
  int n_p = 3;
  int n_r = 3;
  int ramp_up = 15;                          ///< D0
  std::vector<double> ramp_pmf{1.0 / 3, 1.0 / 3, 1.0 / 3};

  /// n_r = 0 is accepted as the degenerate single-step stage.
  void validate() const;  ///< throws ConfigError
  Eigen::VectorXd normalized_pmf() const;
};

/// Everything a stage problem depends on besides the decision variables.
struct StageContext {
  CarModel model;
  FeatureParams features;
  StageConfig config;
  CarState x1 = CarState::Zero();
  double u_prev = 0.0;  ///< last action of the previous stage
  int w_prev = 0;       ///< disturbance of the previous stage (0-based)

  /// Prepare actions followed by one react block per disturbance.
  int decision_dim() const { return config.n_p + model.L() * config.n_r; }
  int react_offset(int j) const { return config.n_p + j * config.n_r; }
};

/// Scalar convex shapes appearing in the car features.
enum class ScalarShape {
  kSquare,            ///< s^2
  kPositiveSoftplus,  ///< max(0, log(1 + e^s) - log 2), kink at 0
  kAbsSoftplus,       ///< log(1 + e^|s|) - log 2, kink at 0
};

double shape_value(ScalarShape shape, double s);
/// Derivative away from the kink; the midpoint of the subdifferential at it.
double shape_derivative(ScalarShape shape, double s);
/// Subdifferential bounds at the kink.
std::pair<double, double> shape_kink_interval(ScalarShape shape);

/// coeff * shape(a . y + b) for one feature at one step of one branch.
struct StageTerm {
  int group = -1;    ///< -1 for the prepare cost, otherwise the disturbance of the tail branch
  int step = 0;      ///< 1-based step within the stage
  int feature = 0;   ///< 0-based feature index
  double coeff = 0.0;
  ScalarShape shape = ScalarShape::kSquare;
  std::vector<int> index;
  std::vector<double> weight;
  double shift = 0.0;

  double argument(const Eigen::VectorXd& y) const;
  double value(const Eigen::VectorXd& y) const { return coeff * shape_value(shape, argument(y)); }
};

/// Terms of the prepare cost (steps 1..n_p-1 under w_prev) and of every tail
/// branch (steps n_p..N under j), over the full decision vector. Terms with a
/// zero weight are omitted.
std::vector<StageTerm> stage_terms(const StageContext& ctx, const Eigen::Vector4d& alpha);

/// Tail terms of branch j over its react block only, with the prepare fixed.
std::vector<StageTerm> react_terms(const StageContext& ctx, const Eigen::VectorXd& prepare, int j,
                                   const Eigen::Vector4d& alpha);

/// Packs prepare and per-disturbance reacts into one decision vector.
Eigen::VectorXd pack_decision(const StageContext& ctx, const Eigen::VectorXd& prepare,
                              const std::vector<Eigen::VectorXd>& reacts);

double stage_prepare_cost(const StageContext& ctx, const Eigen::VectorXd& y, const Eigen::Vector4d& alpha);
/// g(j): cumulative cost of the last n_r + 1 steps under disturbance j.
Eigen::VectorXd stage_tail_costs(const StageContext& ctx, const Eigen::VectorXd& y,
                                 const Eigen::Vector4d& alpha);

struct StageGradients {
  Eigen::VectorXd prepare;  ///< d C_{1:n_p-1} / dy
  Eigen::MatrixXd tail;     ///< column j: d g(j) / dy
};

/// Exact gradients at points away from feature kinks.
StageGradients stage_gradients(const StageContext& ctx, const Eigen::VectorXd& y,
                               const Eigen::Vector4d& alpha);

/// States x_2..x_{N+1} of branch j.
std::vector<CarState> rollout_branch(const StageContext& ctx, const Eigen::VectorXd& prepare,
                                     const Eigen::VectorXd& react, int j);

// ---------------------------------------------------------------------------
// Planning

struct PlannerOptions {
  enum class Mode {
    kGrid,    ///< exhaustive grid search, optionally polished by the convex solver
    kConvex,  ///< convex solve only (for stage shapes too long to enumerate)
  };
  Mode mode = Mode::kGrid;
  int grid_levels = 7;
  std::vector<double> grid;  ///< explicit action grid; overrides grid_levels when non-empty
  double node_cap = 2e7;
  bool polish = true;
  ConvexOptions convex;
};

struct StagePlan {
  Eigen::VectorXd prepare;
  std::vector<Eigen::VectorXd> reacts;
  double tau = 0.0;        ///< worst-case tail cost over the envelope
  double objective = 0.0;  ///< prepare cost + tau
  bool certified = false;  ///< the convex polish reached a certified KKT point
};

std::vector<double> action_grid(const CarModel& model, const PlannerOptions& options);

/// The stage problem: min C_{1:n_p-1} + max_v v . g over open-loop sequences.
/// Throws GridTooLarge when the enumeration exceeds options.node_cap.
StagePlan plan_stage(const StageContext& ctx, const Envelope& envelope, const Eigen::Vector4d& alpha,
                     const PlannerOptions& options = {});

/// min over branch j's react block of g(j), with the prepare fixed.
Eigen::VectorXd plan_react(const StageContext& ctx, const Eigen::VectorXd& prepare, int j,
                           const Eigen::Vector4d& alpha, const PlannerOptions& options = {});

/// Completes the scenario tree: the observed react for `realized`, the
/// planned react for every other disturbance.
std::vector<Eigen::VectorXd> infer_unrealized_reacts(const StageContext& ctx,
                                                     const Eigen::VectorXd& prepare, int realized,
                                                     const Eigen::VectorXd& observed_react,
                                                     const Eigen::Vector4d& alpha,
                                                     const PlannerOptions& options = {});

// ---------------------------------------------------------------------------
// Stage half-space

struct StageKktOptions {
  double saturation_tol = 1e-6;
  double kink_tol = 1e-6;          ///< |s| below this counts as sitting on a kink
  double stationarity_tol = 1e-8;  ///< per-row residual allowance, relative to the row scale
  LpOptions lp;
};

/// max g . v over the domain subject to the stage stationarity conditions.
/// Kinks contribute bounded subgradient multipliers; saturated actions get
/// sign-constrained multipliers. Throws InfeasibleKkt.
KktHalfspace stage_kkt_halfspace(const StageContext& ctx, const Eigen::VectorXd& prepare,
                                 const std::vector<Eigen::VectorXd>& reacts,
                                 const Eigen::Vector4d& alpha, const Envelope& domain,
                                 const StageKktOptions& options = {});

}  // namespace rsirl
