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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rsirl/active.hpp"
#include "rsirl/clustering.hpp"
#include "rsirl/geometry.hpp"
#include "rsirl/inverse_kkt.hpp"
#include "rsirl/stage.hpp"

namespace rsirl {

struct MultistepConfig {
  CarModel model;
  FeatureParams features;
  StageConfig stage;
  int stages = 30;
  int clusters = 5;  ///< K of the react library
  SamplingPolicy policy;
  Eigen::Vector4d expert_alpha = Eigen::Vector4d::Constant(0.5);
  bool known_alpha = false;  ///< learner uses expert_alpha instead of recovering it
  CarState x1 = (CarState() << 0.0, 10.0, 7.0, 10.0).finished();
  double u_initial = 0.0;
  int w_initial = 0;
  int envelope_points = 20;
  PlannerOptions expert_planner;
  PlannerOptions learner_planner;
  StageKktOptions kkt;
  InverseKktOptions inverse;
  GeometryTolerances geometry;

  void validate() const;  ///< throws ConfigError

  /// Stage shape of the timing used with human drivers (4 s stages at 10 Hz).
  static MultistepConfig fidelity();
};

/// What the learner sees of one stage.
struct StageDemonstration {
  StageContext context;
  Eigen::VectorXd prepare;
  int realized = 0;
  Eigen::VectorXd react;
};

struct StageRecord {
  int stage = 0;
  int realized = 0;  ///< 0-based
  double tau_star = 0.0;
  bool skipped = false;
  std::string note;
  double tau_prime = std::numeric_limits<double>::quiet_NaN();
  bool refined = false;
  double area = 0.0;
  std::optional<HalfSpace> halfspace;
  Eigen::VectorXd preferences;
  Eigen::VectorXd probabilities;
  Eigen::Vector4d alpha = Eigen::Vector4d::Constant(std::numeric_limits<double>::quiet_NaN());
  StageDemonstration demo;
};

struct MultistepLog {
  std::vector<StageRecord> stages;
  Envelope true_envelope = Envelope::simplex(1);
  Envelope final_envelope = Envelope::simplex(1);
  std::vector<RefinementDirection> explored;
  ReactLibrary library;
  bool failed = false;
  std::string failure;
};

/// Preferences at step n_p: for each j, library reacts are rolled out under j,
/// their branch cost replaces component j of g_prior, and the projected
/// directions are scored against the explored ones.
PreferenceVector multistep_preferences(const StageContext& ctx, const Eigen::VectorXd& prepare,
                                       const Eigen::VectorXd& g_prior, const ReactLibrary& library,
                                       const std::vector<RefinementDirection>& explored,
                                       const Eigen::Vector4d& alpha, int budget, std::uint64_t seed);

/// Simulated expert over `config.stages` stages. The true envelope comes from
/// generate_envelope(split_seed(seed, 1), L, envelope_points) unless given.
MultistepLog run_multistep(const MultistepConfig& config, std::uint64_t seed,
                           const std::optional<Envelope>& true_envelope = std::nullopt);

}  // namespace rsirl
