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
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rsirl/expert.hpp"
#include "rsirl/geometry.hpp"
#include "rsirl/inference.hpp"
#include "rsirl/rng.hpp"

namespace rsirl {

enum class SamplingMode { kActive, kPassive };

SamplingMode parse_sampling_mode(const std::string& name);  ///< throws ConfigError
std::string to_string(SamplingMode mode);

struct PreferenceVector {
  Eigen::VectorXd U;
  std::vector<int> sample_counts;
  std::vector<int> discarded;
};

struct SamplingPolicy {
  SamplingMode mode = SamplingMode::kActive;
  int budget = 1000;
  double temperature = 1.0;

  void validate() const;
};

struct PredictedDirections {
  std::vector<RefinementDirection> directions;
  int discarded = 0;
};

/// Directions of the cost vectors seen at the next state under realization j,
/// with the next action drawn uniformly from the box. Throws AllDegenerate when
/// no draw yields a direction. The next state is post-processed like the
/// episode's (`mode`), except that kRedraw predicts from the raw transition.
PredictedDirections predict_refinement_directions(const LinearQuadraticSystem& sys,
                                                  const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                                  int j, int budget, std::uint64_t seed,
                                                  StateMode mode = StateMode::kRaw);

/// U(j) = sum over explored phi_k of the mean of -cos(phi_k, phi') over predictions for j.
/// A disturbance whose predictions were all degenerate gets U(j) = 0.
PreferenceVector disturbance_preferences(const std::vector<PredictedDirections>& predicted,
                                         const std::vector<RefinementDirection>& explored);

/// softmax(U / temperature), max-subtracted.
Eigen::VectorXd boltzmann_probabilities(const Eigen::VectorXd& U, double temperature = 1.0);

struct BoltzmannDraw {
  int index = 0;
  Eigen::VectorXd probabilities;
};

BoltzmannDraw boltzmann_sample(const Eigen::VectorXd& U, double temperature, Rng& rng);

/// Preferences for every disturbance after the demonstration (x, u).
/// Monte Carlo streams are split per (step, j) from `seed`.
PreferenceVector compute_preferences(const LinearQuadraticSystem& sys, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u,
                                     const std::vector<RefinementDirection>& explored,
                                     const SamplingPolicy& policy, std::uint64_t seed, int step,
                                     StateMode mode);

DisturbanceSampler make_active_sampler(const LinearQuadraticSystem& sys, const SamplingPolicy& policy,
                                       std::uint64_t seed, StateMode mode);

/// Fixed disturbance sequence (0-based), cycled if shorter than the episode.
DisturbanceSampler make_scripted_sampler(std::vector<int> sequence);

EpisodeLog run_active(const ExpertSpec& spec, int steps, const SamplingPolicy& policy,
                      std::uint64_t seed, const EpisodeOptions& options = {});

}  // namespace rsirl
