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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rsirl/active.hpp"
#include "rsirl/errors.hpp"
#include "rsirl/expert.hpp"
#include "test_util.hpp"

namespace rsirl {
namespace {

RefinementDirection circle_direction(double theta) {
  // orthonormal basis of the zero-sum plane in R^3
  const Eigen::Vector3d e1 = Eigen::Vector3d(1, -1, 0).normalized();
  const Eigen::Vector3d e2 = Eigen::Vector3d(1, 1, -2).normalized();
  Eigen::VectorXd d = std::cos(theta) * e1 + std::sin(theta) * e2;
  return RefinementDirection(d.normalized());
}

TEST(Boltzmann, Examples) {
  const Eigen::VectorXd p0 = boltzmann_probabilities(Eigen::Vector3d::Zero());
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(p0[j], 1.0 / 3.0, 1e-15);
  const Eigen::VectorXd p1 = boltzmann_probabilities(Eigen::Vector3d(std::log(2.0), 0, 0), 1.0);
  EXPECT_NEAR(p1[0], 0.5, 1e-15);
  EXPECT_NEAR(p1[1], 0.25, 1e-15);
  EXPECT_NEAR(p1[2], 0.25, 1e-15);
  EXPECT_THROW(boltzmann_probabilities(Eigen::Vector3d::Zero(), 0.0), std::invalid_argument);
}

TEST(Boltzmann, ShiftInvarianceAndShape) {
  Rng rng(1);
  for (int t = 0; t < 500; ++t) {
    const int L = 2 + t % 5;
    const Eigen::VectorXd U = 3.0 * rng.normal_vector(L);
    const double T = rng.uniform(0.2, 3.0);
    const Eigen::VectorXd p = boltzmann_probabilities(U, T);
    const double c = rng.uniform(-50, 50);
    EXPECT_LE((boltzmann_probabilities(U + Eigen::VectorXd::Constant(L, c), T) - p).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_GT(p.minCoeff(), 0.0);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    Eigen::Index au, ap;
    U.maxCoeff(&au);
    p.maxCoeff(&ap);
    EXPECT_EQ(au, ap);
    // raising one preference strictly raises its probability
    Eigen::VectorXd U2 = U;
    const int j = t % L;
    U2[j] += 0.5;
    EXPECT_GT(boltzmann_probabilities(U2, T)[j], p[j]);
  }
  // overflow guard
  const Eigen::VectorXd big = boltzmann_probabilities(Eigen::Vector3d(1000, 999, -1000));
  EXPECT_TRUE(big.allFinite());
  EXPECT_NEAR(big.sum(), 1.0, 1e-12);
}

TEST(Boltzmann, SampleReportsProbabilities) {
  Rng rng(3);
  const Eigen::Vector3d U(0.3, -0.1, 0.2);
  const BoltzmannDraw d = boltzmann_sample(U, 1.0, rng);
  EXPECT_GE(d.index, 0);
  EXPECT_LT(d.index, 3);
  EXPECT_LE((d.probabilities - boltzmann_probabilities(U, 1.0)).norm(), 0.0);
}

TEST(DisturbancePreferences, EmptyExploredGivesZero) {
  std::vector<PredictedDirections> pred(3);
  for (auto& p : pred) p.directions = {circle_direction(0.3)};
  const PreferenceVector U = disturbance_preferences(pred, {});
  EXPECT_EQ(U.U, Eigen::VectorXd::Zero(3));
}

TEST(DisturbancePreferences, IdenticalPredictionIsMinusOne) {
  const RefinementDirection phi = circle_direction(1.1);
  std::vector<PredictedDirections> pred(3);
  pred[0].directions.assign(10, phi);
  pred[1].directions.assign(10, -phi);
  pred[2].directions = {circle_direction(1.1 + M_PI / 2)};
  const PreferenceVector U = disturbance_preferences(pred, {phi});
  EXPECT_NEAR(U.U[0], -1.0, 1e-12);
  EXPECT_NEAR(U.U[1], 1.0, 1e-12);
  EXPECT_NEAR(U.U[2], 0.0, 1e-12);
  EXPECT_EQ(U.sample_counts[0], 10);
}

TEST(DisturbancePreferences, UniformCircleAveragesToZero) {
  const int budget = 1000;
  Rng rng(5);
  std::vector<PredictedDirections> pred(1);
  for (int k = 0; k < budget; ++k) pred[0].directions.push_back(circle_direction(rng.uniform(0, 2 * M_PI)));
  const PreferenceVector U = disturbance_preferences(pred, {circle_direction(0.7)});
  EXPECT_LE(std::abs(U.U[0]), 2.0 / std::sqrt(static_cast<double>(budget)));
}

TEST(DisturbancePreferences, PermutationInvariant) {
  Rng rng(8);
  std::mt19937_64 shuffler(2);
  for (int t = 0; t < 20; ++t) {
    std::vector<PredictedDirections> pred(3);
    for (auto& p : pred)
      for (int k = 0; k < 50; ++k) p.directions.push_back(circle_direction(rng.uniform(0, 2 * M_PI)));
    std::vector<RefinementDirection> explored;
    for (int k = 0; k < 6; ++k) explored.push_back(circle_direction(rng.uniform(0, 2 * M_PI)));
    const PreferenceVector a = disturbance_preferences(pred, explored);
    auto pred2 = pred;
    for (auto& p : pred2) std::shuffle(p.directions.begin(), p.directions.end(), shuffler);
    auto explored2 = explored;
    std::shuffle(explored2.begin(), explored2.end(), shuffler);
    const PreferenceVector b = disturbance_preferences(pred2, explored2);
    EXPECT_LE((a.U - b.U).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(DisturbancePreferences, AllDegenerateScenarioScoresZero) {
  std::vector<PredictedDirections> pred(2);
  pred[0].directions = {circle_direction(0.0)};
  pred[1].discarded = 5;
  const PreferenceVector U = disturbance_preferences(pred, {circle_direction(0.0)});
  EXPECT_EQ(U.U[1], 0.0);
  EXPECT_EQ(U.discarded[1], 5);
}

TEST(PredictRefinementDirections, DeterministicSingleDraw) {
  const auto spec = make_expert_spec(2, 4, 2, 3);
  const Eigen::VectorXd x = spec.system.x0.normalized();
  const Eigen::Vector2d u(0.1, -0.2);
  const auto a = predict_refinement_directions(spec.system, x, u, 1, 1, 42);
  const auto b = predict_refinement_directions(spec.system, x, u, 1, 1, 42);
  ASSERT_EQ(a.directions.size(), 1u);
  EXPECT_EQ(a.directions[0].vector(), b.directions[0].vector());
}

TEST(PredictRefinementDirections, EqualCostsAreAllDegenerate) {
  auto spec = make_expert_spec(2, 4, 2, 3);
  spec.system.Q.setZero();
  EXPECT_THROW(predict_refinement_directions(spec.system, spec.system.x0, Eigen::Vector2d(0.1, 0.2), 0, 50, 1),
               AllDegenerate);
}

TEST(PredictRefinementDirections, SplitHalfMeanIsStable) {
  const auto spec = make_expert_spec(12, 10, 5, 3);
  const Eigen::VectorXd x = spec.system.x0.normalized();
  const MinimaxResult act = expert_act(spec, x);
  for (int j = 0; j < 3; ++j) {
    const auto pred = predict_refinement_directions(spec.system, x, act.u, j, 1000, 99);
    Eigen::VectorXd first = Eigen::VectorXd::Zero(3), second = Eigen::VectorXd::Zero(3);
    const std::size_t half = pred.directions.size() / 2;
    for (std::size_t k = 0; k < pred.directions.size(); ++k) (k < half ? first : second) += pred.directions[k].vector();
    EXPECT_GE(first.normalized().dot(second.normalized()), 0.9) << "scenario " << j;
  }
}

// chi-square survival function for 2 degrees of freedom
double chi2_sf_2(double x) { return std::exp(-x / 2.0); }

TEST(RunActive, UniformSamplingWithEmptyExploredSet) {
  // zero state: every cost vector vanishes, nothing is ever explored
  auto spec = make_expert_spec(3, 4, 2, 3);
  spec.system.x0.setZero();
  const int steps = 10000;
  const EpisodeLog log = run_active(spec, steps, SamplingPolicy{}, 5);
  ASSERT_FALSE(log.failed);
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  for (const auto& st : log.steps) {
    counts[st.sampled_w] += 1;
    EXPECT_EQ(st.preferences, Eigen::VectorXd::Zero(3));
  }
  const double expected = steps / 3.0;
  const double chi2 = ((counts.array() - expected).square() / expected).sum();
  EXPECT_GE(chi2_sf_2(chi2), 0.001) << "counts " << counts.transpose();
}

TEST(RunActive, LogsProbabilitiesAndStaysSound) {
  const auto spec = make_expert_spec(7, 4, 2, 3);
  const EpisodeLog log = run_active(spec, 40, SamplingPolicy{}, 11);
  ASSERT_FALSE(log.failed) << log.failure;
  double prev = 1e9;
  bool explored = false;
  for (const auto& st : log.steps) {
    // the explored set includes the demonstration just processed
    explored = explored || st.learner.refined;
    if (!explored) EXPECT_LE((st.probabilities - Eigen::VectorXd::Constant(3, 1.0 / 3.0)).norm(), 1e-15);
    ASSERT_EQ(st.probabilities.size(), 3);
    EXPECT_NEAR(st.probabilities.sum(), 1.0, 1e-12);
    EXPECT_LE(st.learner.area, prev + 1e-12);
    prev = st.learner.area;
    if (!st.learner.skipped) EXPECT_GE(st.learner.tau_prime, st.tau_star - 1e-6);
  }
  for (const auto& v : spec.envelope.vertices())
    for (const auto& h : log.final_envelope.halfspaces()) EXPECT_GE(h.slack(v), -1e-6);
}

TEST(RunActive, SamplingRuleDoesNotAlterInference) {
  const auto spec = make_expert_spec(13, 4, 2, 3);
  for (bool active : {false, true}) {
    const EpisodeLog log = active ? run_active(spec, 25, SamplingPolicy{}, 4) : run_passive(spec, 25, 4);
    std::vector<int> seq;
    for (const auto& st : log.steps) seq.push_back(st.sampled_w);
    const EpisodeLog replay = run_episode(spec, 25, 4, make_scripted_sampler(seq));
    ASSERT_EQ(replay.steps.size(), log.steps.size());
    for (std::size_t k = 0; k < log.steps.size(); ++k) {
      EXPECT_EQ(replay.steps[k].learner.tau_prime, log.steps[k].learner.tau_prime);
      EXPECT_EQ(replay.steps[k].learner.area, log.steps[k].learner.area);
      EXPECT_EQ(replay.steps[k].learner.refined, log.steps[k].learner.refined);
    }
  }
}

TEST(SamplingPolicy, Validation) {
  SamplingPolicy p;
  p.budget = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p.budget = 1;
  p.temperature = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_EQ(parse_sampling_mode("passive"), SamplingMode::kPassive);
  EXPECT_THROW(parse_sampling_mode("greedy"), ConfigError);
}

}  // namespace
}  // namespace rsirl
