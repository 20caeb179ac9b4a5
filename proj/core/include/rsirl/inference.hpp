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
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rsirl/expert.hpp"
#include "rsirl/geometry.hpp"
#include "rsirl/linear_program.hpp"

namespace rsirl {

struct SaturationPattern {
  std::vector<int> upper;  ///< components at their upper bound
  std::vector<int> lower;  ///< components at their lower bound
  std::vector<int> free;
  double tolerance = 1e-6;

  enum class State { kFree, kUpper, kLower };
  State state(int j) const;
};

SaturationPattern saturation_pattern(const Eigen::VectorXd& u, const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi, double tol = 1e-6);

/// Entry (j, l) is d g_l / d u(j) at (x, u).
Eigen::MatrixXd cost_gradient_matrix(const LinearQuadraticSystem& sys, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u);

/// Half-space implied by one optimal demonstration, with its LP certificate.
struct KktHalfspace {
  HalfSpace halfspace;
  double tau_prime = 0.0;
  Eigen::VectorXd v;            ///< maximizing distribution
  Eigen::VectorXd sigma_plus;   ///< per action component, zero off the upper-saturated set
  Eigen::VectorXd sigma_minus;  ///< per action component, zero off the lower-saturated set
};

/// maximize g . v over v in `domain` subject to the stationarity rows of the
/// minimax problem: G_j . v + sigma_plus(j) = 0 on upper-saturated components,
/// G_j . v - sigma_minus(j) = 0 on lower-saturated ones, G_j . v = 0 elsewhere.
/// Each row may be violated by stationarity_tol * (1 + |G_j|_1), which absorbs
/// the solver error in the demonstrated action. `gradients` is m x L. Throws
/// InfeasibleKkt when the LP is infeasible.
KktHalfspace kkt_halfspace_from_gradients(const Eigen::VectorXd& g, const Eigen::MatrixXd& gradients,
                                          const SaturationPattern& pattern, const Envelope& domain,
                                          double stationarity_tol = 1e-7, const LpOptions& lp = {});

KktHalfspace kkt_halfspace(const LinearQuadraticSystem& sys, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, const Envelope& domain,
                           double saturation_tol = 1e-6, double stationarity_tol = 1e-7);

struct LearnerRecord {
  int step = 0;
  bool skipped = false;       ///< no usable half-space (infeasible LP or zero cost vector)
  std::string note;
  double tau_prime = 0.0;
  bool refined = false;
  double area = 0.0;
  std::optional<HalfSpace> halfspace;
};

/// Envelope approximation, explored refinement directions and step log.
struct LearnerState {
  Envelope envelope = Envelope::simplex(1);
  std::vector<RefinementDirection> explored;
  std::vector<int> explored_steps;
  int step = 0;
  std::vector<LearnerRecord> log;

  static LearnerState fresh(int L);
};

struct InferenceOptions {
  double saturation_tol = 1e-6;
  double stationarity_tol = 1e-7;
  GeometryTolerances geometry;
};

/// One iteration of the envelope update. InfeasibleKkt steps are logged and
/// skipped; EmptyEnvelope propagates.
LearnerState process_demonstration(const LearnerState& state, const LinearQuadraticSystem& sys,
                                   const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                   const InferenceOptions& options = {});

/// Minimax action under the learned envelope.
Eigen::VectorXd predict_action(const Envelope& envelope, const LinearQuadraticSystem& sys,
                               const Eigen::VectorXd& x, const MinimaxOptions& options = {});

// ---------------------------------------------------------------------------
// Episodes

struct EpisodeStep {
  int step = 0;
  Demonstration demo;
  int sampled_w = -1;  ///< 0-based
  double tau_star = 0.0;
  LearnerRecord learner;
  double mse = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd preferences;    ///< active mode only
  Eigen::VectorXd probabilities;  ///< active mode only
};

struct EpisodeLog {
  std::vector<EpisodeStep> steps;
  std::vector<std::pair<int, Envelope>> snapshots;
  Envelope final_envelope = Envelope::simplex(1);
  bool failed = false;
  std::string failure;
};

struct SamplerOutput {
  int w = 0;
  Eigen::VectorXd preferences;
  Eigen::VectorXd probabilities;
};

/// Chooses the next disturbance after a demonstration has been processed.
using DisturbanceSampler = std::function<SamplerOutput(
    int step, const LearnerState& state, const Demonstration& demo, Rng& rng)>;

struct EpisodeOptions {
  StateMode state_mode = StateMode::kRenormalize;
  MinimaxOptions minimax;
  InferenceOptions inference;
  int snapshot_every = 0;  ///< 0 disables envelope snapshots
  /// Called after each processed step (e.g. for test-set evaluation).
  std::function<double(int step, const LearnerState& state)> evaluate;
};

/// Shared episode loop: act, process, sample, advance. Starts at sys.x0.
EpisodeLog run_episode(const ExpertSpec& spec, int steps, std::uint64_t seed,
                       const DisturbanceSampler& sampler, const EpisodeOptions& options = {});

/// Disturbances drawn from the fixed pmf.
EpisodeLog run_passive(const ExpertSpec& spec, int steps, std::uint64_t seed,
                       const EpisodeOptions& options = {});

}  // namespace rsirl
