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

#include "rsirl/active.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "rsirl/errors.hpp"

namespace rsirl {

SamplingMode parse_sampling_mode(const std::string& name) {
  if (name == "active") return SamplingMode::kActive;
  if (name == "passive") return SamplingMode::kPassive;
  throw ConfigError("unknown mode '" + name + "' (expected active|passive)");
}

std::string to_string(SamplingMode mode) {
  return mode == SamplingMode::kActive ? "active" : "passive";
}

void SamplingPolicy::validate() const {
  if (budget < 1) throw ConfigError("sampling budget must be >= 1");
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw ConfigError("softmax temperature must be positive");
}

PredictedDirections predict_refinement_directions(const LinearQuadraticSystem& sys,
                                                  const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                                  int j, int budget, std::uint64_t seed,
                                                  StateMode mode) {
  if (j < 0 || j >= sys.L) throw std::out_of_range("predict_refinement_directions: bad disturbance");
  if (budget < 1) throw std::invalid_argument("predict_refinement_directions: budget must be >= 1");
  const StateMode next_mode = mode == StateMode::kRenormalize ? mode : StateMode::kRaw;
  const Eigen::VectorXd next = step_dynamics(sys, x, u, j, next_mode);

  Rng rng(seed);
  PredictedDirections out;
  out.directions.reserve(static_cast<std::size_t>(budget));
  Eigen::VectorXd action(sys.m);
  for (int b = 0; b < budget; ++b) {
    for (int i = 0; i < sys.m; ++i) action[i] = rng.uniform(sys.u_lo[i], sys.u_hi[i]);
    try {
      out.directions.push_back(project_to_simplex_tangent(cost_vector(sys, next, action)));
    } catch (const DegenerateDirection&) {
      ++out.discarded;
    }
  }
  if (out.directions.empty())
    throw AllDegenerate("every predicted refinement direction was degenerate");
  return out;
}

PreferenceVector disturbance_preferences(const std::vector<PredictedDirections>& predicted,
                                         const std::vector<RefinementDirection>& explored) {
  const int L = static_cast<int>(predicted.size());
  PreferenceVector out;
  out.U = Eigen::VectorXd::Zero(L);
  out.sample_counts.assign(static_cast<std::size_t>(L), 0);
  out.discarded.assign(static_cast<std::size_t>(L), 0);
  for (int j = 0; j < L; ++j) {
    const auto& p = predicted[static_cast<std::size_t>(j)];
    out.sample_counts[static_cast<std::size_t>(j)] = static_cast<int>(p.directions.size());
    out.discarded[static_cast<std::size_t>(j)] = p.discarded;
    if (p.directions.empty() || explored.empty()) continue;
    double total = 0.0;
    for (const auto& phi : explored) {
      double s = 0.0;
      for (const auto& d : p.directions) s += cosine_similarity(phi, d);
      total -= s / static_cast<double>(p.directions.size());
    }
    out.U[j] = total;
  }
  return out;
}

Eigen::VectorXd boltzmann_probabilities(const Eigen::VectorXd& U, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("boltzmann: temperature must be positive");
  if (U.size() == 0) throw std::invalid_argument("boltzmann: empty preference vector");
  const Eigen::VectorXd z = U / temperature;
  const Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

BoltzmannDraw boltzmann_sample(const Eigen::VectorXd& U, double temperature, Rng& rng) {
  BoltzmannDraw d;
  d.probabilities = boltzmann_probabilities(U, temperature);
  d.index = rng.categorical(d.probabilities);
  return d;
}

PreferenceVector compute_preferences(const LinearQuadraticSystem& sys, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u,
                                     const std::vector<RefinementDirection>& explored,
                                     const SamplingPolicy& policy, std::uint64_t seed, int step,
                                     StateMode mode) {
  std::vector<PredictedDirections> predicted(static_cast<std::size_t>(sys.L));
  if (explored.empty()) return disturbance_preferences(predicted, explored);
  for (int j = 0; j < sys.L; ++j) {
    try {
      predicted[static_cast<std::size_t>(j)] = predict_refinement_directions(
          sys, x, u, j, policy.budget,
          split_seed(seed, static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(j)), mode);
    } catch (const AllDegenerate&) {
      predicted[static_cast<std::size_t>(j)].discarded = policy.budget;
    }
  }
  return disturbance_preferences(predicted, explored);
}

DisturbanceSampler make_active_sampler(const LinearQuadraticSystem& sys, const SamplingPolicy& policy,
                                       std::uint64_t seed, StateMode mode) {
  policy.validate();
  return [&sys, policy, seed, mode](int step, const LearnerState& state, const Demonstration& demo,
                                    Rng& rng) {
    const PreferenceVector pref =
        compute_preferences(sys, demo.x, demo.u, state.explored, policy, seed, step, mode);
    BoltzmannDraw d = boltzmann_sample(pref.U, policy.temperature, rng);
    return SamplerOutput{d.index, pref.U, std::move(d.probabilities)};
  };
}

DisturbanceSampler make_scripted_sampler(std::vector<int> sequence) {
  if (sequence.empty()) throw std::invalid_argument("scripted sampler: empty sequence");
  return [seq = std::move(sequence)](int step, const LearnerState&, const Demonstration&, Rng&) {
    return SamplerOutput{seq[static_cast<std::size_t>(step - 1) % seq.size()], {}, {}};
  };
}

EpisodeLog run_active(const ExpertSpec& spec, int steps, const SamplingPolicy& policy,
                      std::uint64_t seed, const EpisodeOptions& options) {
  if (policy.mode == SamplingMode::kPassive) return run_passive(spec, steps, seed, options);
  const DisturbanceSampler sampler =
      make_active_sampler(spec.system, policy, split_seed(seed, 3), options.state_mode);
  return run_episode(spec, steps, seed, sampler, options);
}

}  // namespace rsirl
