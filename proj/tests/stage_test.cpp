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
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "rsirl/errors.hpp"
#include "rsirl/expert.hpp"
#include "rsirl/rng.hpp"
#include "rsirl/stage.hpp"

namespace rsirl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

StageContext make_context(int n_p, int n_r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  StageContext ctx;
  ctx.config.n_p = n_p;
  ctx.config.n_r = n_r;
  ctx.config.N = n_p + n_r;
  ctx.x1 = CarState(0.0, 10.0 + u(rng), 7.0 + 2.0 * u(rng), 10.0 + u(rng));
  ctx.u_prev = u(rng);
  ctx.w_prev = static_cast<int>(rng() % 3);
  return ctx;
}

Eigen::VectorXd random_actions(std::mt19937_64& rng, int size, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd a(size);
  for (int i = 0; i < size; ++i) a[i] = u(rng);
  return a;
}

// Branch costs by simulating the car and summing the features directly.
struct RolloutCosts {
  double prepare = 0.0;
  Eigen::VectorXd tail;
};

RolloutCosts rollout_costs(const StageContext& ctx, const Eigen::VectorXd& prepare,
                           const std::vector<Eigen::VectorXd>& reacts, const Eigen::Vector4d& alpha) {
  const int n_p = ctx.config.n_p;
  const int L = ctx.model.L();
  RolloutCosts out{0.0, Eigen::VectorXd::Zero(L)};
  for (int j = 0; j < L; ++j) {
    CarState x = ctx.x1;
    double prev = ctx.u_prev;
    for (int k = 1; k <= ctx.config.N; ++k) {
      const double a = k <= n_p ? prepare[k - 1] : reacts[static_cast<std::size_t>(j)][k - n_p - 1];
      x = car_step(ctx.model, x, a, k < n_p ? ctx.w_prev : j);
      const double c = alpha.dot(car_features(x, a, prev, ctx.features));
      if (k >= n_p)
        out.tail[j] += c;
      else if (j == 0)
        out.prepare += c;
      prev = a;
    }
  }
  return out;
}

// Exhaustive minimum of prepare + support(g) over grid sequences, each branch
// choosing its react independently.
double brute_force_stage(const StageContext& ctx, const Envelope& env, const Eigen::Vector4d& alpha,
                         const std::vector<double>& grid) {
  const int n_p = ctx.config.n_p;
  const int n_r = ctx.config.n_r;
  const int L = ctx.model.L();
  const int G = static_cast<int>(grid.size());
  auto sequence = [&](long code, int len) {
    Eigen::VectorXd s(len);
    for (int i = len - 1; i >= 0; --i) {
      s[i] = grid[static_cast<std::size_t>(code % G)];
      code /= G;
    }
    return s;
  };
  long n_prep = 1, n_react = 1, n_tree = 1;
  for (int i = 0; i < n_p; ++i) n_prep *= G;
  for (int i = 0; i < n_r; ++i) n_react *= G;
  for (int j = 0; j < L; ++j) n_tree *= n_react;
  double best = kInf;
  for (long p = 0; p < n_prep; ++p) {
    const Eigen::VectorXd prep = sequence(p, n_p);
    for (long t = 0; t < n_tree; ++t) {
      std::vector<Eigen::VectorXd> reacts;
      long code = t;
      for (int j = 0; j < L; ++j) {
        reacts.push_back(sequence(code % n_react, n_r));
        code /= n_react;
      }
      const RolloutCosts c = rollout_costs(ctx, prep, reacts, alpha);
      best = std::min(best, c.prepare + env.support(c.tail));
    }
  }
  return best;
}

Envelope single_vertex(int L, int j) {
  Eigen::VectorXd n = -Eigen::VectorXd::Unit(L, j);
  return Envelope::from_halfspaces(L, {HalfSpace(n, -1.0)});
}

const Eigen::Vector4d kAlpha = Eigen::Vector4d::Constant(0.5);

TEST(StageConfig, Validation) {
  StageConfig c;
  EXPECT_NO_THROW(c.validate());
  c.N = 5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = StageConfig{};
  c.n_p = 0;
  c.N = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = StageConfig{};
  c.n_r = 0;
  c.N = 3;
  EXPECT_NO_THROW(c.validate());
  c = StageConfig{};
  c.ramp_pmf = {0.0, 0.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c.ramp_pmf = {1.0, -1.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c.ramp_pmf = {2.0, 2.0};
  EXPECT_NEAR(c.normalized_pmf().sum(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(c.normalized_pmf()[0], 0.5);
}

TEST(StageShapes, ValuesAndKinks) {
  EXPECT_EQ(shape_value(ScalarShape::kSquare, -3.0), 9.0);
  EXPECT_EQ(shape_value(ScalarShape::kPositiveSoftplus, -1.0), 0.0);
  EXPECT_NEAR(shape_value(ScalarShape::kPositiveSoftplus, 1.0), std::log1p(std::exp(1.0)) - std::log(2.0), 1e-15);
  EXPECT_EQ(shape_value(ScalarShape::kAbsSoftplus, -2.0), shape_value(ScalarShape::kAbsSoftplus, 2.0));
  EXPECT_EQ(shape_value(ScalarShape::kAbsSoftplus, 0.0), 0.0);
  EXPECT_EQ(shape_kink_interval(ScalarShape::kPositiveSoftplus), std::make_pair(0.0, 0.5));
  EXPECT_EQ(shape_kink_interval(ScalarShape::kAbsSoftplus), std::make_pair(-0.5, 0.5));
  for (double s : {-2.0, -0.3, 0.4, 1.7})
    for (auto shape : {ScalarShape::kSquare, ScalarShape::kPositiveSoftplus, ScalarShape::kAbsSoftplus}) {
      const double h = 1e-6;
      const double fd = (shape_value(shape, s + h) - shape_value(shape, s - h)) / (2 * h);
      EXPECT_NEAR(shape_derivative(shape, s), fd, 1e-8);
    }
}

TEST(StageCosts, MatchCarRollout) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int n_p = 1 + static_cast<int>(seed % 3);
    const int n_r = static_cast<int>(seed % 4);
    StageContext ctx = make_context(n_p, n_r, seed);
    std::mt19937_64 rng(seed + 100);
    const Eigen::VectorXd prep = random_actions(rng, n_p, -3, 3);
    std::vector<Eigen::VectorXd> reacts;
    for (int j = 0; j < 3; ++j) reacts.push_back(random_actions(rng, n_r, -3, 3));
    const Eigen::Vector4d alpha = random_actions(rng, 4, 0.1, 1.0);
    const Eigen::VectorXd y = pack_decision(ctx, prep, reacts);
    const RolloutCosts oracle = rollout_costs(ctx, prep, reacts, alpha);
    EXPECT_NEAR(stage_prepare_cost(ctx, y, alpha), oracle.prepare, 1e-10);
    EXPECT_LT((stage_tail_costs(ctx, y, alpha) - oracle.tail).cwiseAbs().maxCoeff(), 1e-10);
    for (int j = 0; j < 3; ++j) {
      double c = 0.0;
      for (const auto& t : react_terms(ctx, prep, j, alpha)) c += t.value(reacts[static_cast<std::size_t>(j)]);
      EXPECT_NEAR(c, oracle.tail[j], 1e-10);
    }
  }
}

TEST(StageCosts, RolloutBranchMatchesCarStep) {
  StageContext ctx = make_context(3, 3, 4);
  const Eigen::VectorXd prep = Eigen::Vector3d(0.5, -1.0, 2.0);
  const Eigen::VectorXd react = Eigen::Vector3d(-2.0, 0.0, 1.0);
  const auto states = rollout_branch(ctx, prep, react, 1);
  ASSERT_EQ(states.size(), 6u);
  CarState x = ctx.x1;
  x = car_step(ctx.model, x, 0.5, ctx.w_prev);
  x = car_step(ctx.model, x, -1.0, ctx.w_prev);
  x = car_step(ctx.model, x, 2.0, 1);
  EXPECT_LT((states[2] - x).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(StageCosts, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    StageContext ctx = make_context(3, 3, seed);
    std::mt19937_64 rng(seed + 7);
    const Eigen::VectorXd y = random_actions(rng, ctx.decision_dim(), -2.5, 2.5);
    const Eigen::Vector4d alpha = random_actions(rng, 4, 0.1, 1.0);
    const StageGradients grad = stage_gradients(ctx, y, alpha);
    const double h = 1e-6;
    for (int i = 0; i < y.size(); ++i) {
      Eigen::VectorXd yp = y, ym = y;
      yp[i] += h;
      ym[i] -= h;
      const double fd_prep = (stage_prepare_cost(ctx, yp, alpha) - stage_prepare_cost(ctx, ym, alpha)) / (2 * h);
      const Eigen::VectorXd fd_tail = (stage_tail_costs(ctx, yp, alpha) - stage_tail_costs(ctx, ym, alpha)) / (2 * h);
      EXPECT_NEAR(grad.prepare[i], fd_prep, 1e-4);
      EXPECT_LT((grad.tail.row(i).transpose() - fd_tail).cwiseAbs().maxCoeff(), 1e-4);
    }
  }
}

TEST(StageCosts, ShapeErrors) {
  StageContext ctx = make_context(3, 3, 0);
  EXPECT_THROW(pack_decision(ctx, Eigen::VectorXd::Zero(2), {}), std::invalid_argument);
  ctx.w_prev = 3;
  EXPECT_THROW(stage_terms(ctx, kAlpha), std::out_of_range);
}

TEST(PlanStage, GridMatchesBruteForce) {
  PlannerOptions opts;
  opts.grid = {-1.0, 0.0, 1.0};
  opts.polish = false;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    StageContext ctx = make_context(1, 1, seed);
    const Envelope env = seed % 2 == 0 ? Envelope::simplex(3) : generate_envelope(seed, 3, 20);
    const StagePlan plan = plan_stage(ctx, env, kAlpha, opts);
    EXPECT_NEAR(plan.objective, brute_force_stage(ctx, env, kAlpha, opts.grid), 1e-12);
    const Eigen::VectorXd y = pack_decision(ctx, plan.prepare, plan.reacts);
    EXPECT_NEAR(plan.tau, env.support(stage_tail_costs(ctx, y, kAlpha)), 1e-12);
    EXPECT_FALSE(plan.certified);
  }
}

TEST(PlanStage, TwoStepPrepareMatchesBruteForce) {
  PlannerOptions opts;
  opts.grid = {-2.0, 0.0, 2.0};
  opts.polish = false;
  StageContext ctx = make_context(2, 1, 11);
  const Envelope env = generate_envelope(3, 3, 20);
  EXPECT_NEAR(plan_stage(ctx, env, kAlpha, opts).objective, brute_force_stage(ctx, env, kAlpha, opts.grid),
              1e-12);
}

TEST(PlanStage, SingleVertexIsDeterministicControl) {
  PlannerOptions opts;
  opts.grid = {-1.5, -0.5, 0.5, 1.5};
  opts.polish = false;
  StageContext ctx = make_context(2, 2, 5);
  for (int j = 0; j < 3; ++j) {
    const StagePlan plan = plan_stage(ctx, single_vertex(3, j), kAlpha, opts);
    // Deterministic control under j: minimize prepare + g(j) over one sequence.
    double best = kInf;
    for (double a1 : opts.grid)
      for (double a2 : opts.grid)
        for (double r1 : opts.grid)
          for (double r2 : opts.grid) {
            const Eigen::VectorXd p = Eigen::Vector2d(a1, a2);
            const Eigen::VectorXd r = Eigen::Vector2d(r1, r2);
            const RolloutCosts c = rollout_costs(ctx, p, {r, r, r}, kAlpha);
            best = std::min(best, c.prepare + c.tail[j]);
          }
    EXPECT_NEAR(plan.objective, best, 1e-12);
  }
}

TEST(PlanStage, FinerGridNeverWorse) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    StageContext ctx = make_context(2, 2, seed);
    const Envelope env = generate_envelope(seed + 20, 3, 20);
    PlannerOptions coarse, fine;
    coarse.grid = {-3.0, 0.0, 3.0};
    fine.grid = {-3.0, -1.5, 0.0, 1.5, 3.0};
    coarse.polish = fine.polish = false;
    EXPECT_LE(plan_stage(ctx, env, kAlpha, fine).objective, plan_stage(ctx, env, kAlpha, coarse).objective + 1e-12);
  }
}

TEST(PlanStage, PolishNeverWorse) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    StageContext ctx = make_context(3, 3, seed);
    const Envelope env = generate_envelope(seed + 40, 3, 20);
    PlannerOptions raw;
    raw.polish = false;
    const StagePlan a = plan_stage(ctx, env, kAlpha, raw);
    const StagePlan b = plan_stage(ctx, env, kAlpha);
    EXPECT_LE(b.objective, a.objective + 1e-12);
    for (const auto& r : b.reacts) {
      EXPECT_LE(r.maxCoeff(), ctx.model.u_hi + 1e-12);
      EXPECT_GE(r.minCoeff(), ctx.model.u_lo - 1e-12);
    }
  }
}

TEST(PlanStage, GridTooLarge) {
  StageContext ctx = make_context(3, 3, 0);
  PlannerOptions opts;
  opts.node_cap = 1e3;
  EXPECT_THROW(plan_stage(ctx, Envelope::simplex(3), kAlpha, opts), GridTooLarge);
  EXPECT_THROW(plan_stage(ctx, Envelope::simplex(2), kAlpha),
               std::invalid_argument);
}

TEST(ActionGrid, Levels) {
  CarModel m;
  PlannerOptions o;
  o.grid_levels = 7;
  const auto g = action_grid(m, o);
  ASSERT_EQ(g.size(), 7u);
  EXPECT_EQ(g.front(), -3.0);
  EXPECT_EQ(g.back(), 3.0);
  EXPECT_NEAR(g[3], 0.0, 1e-15);
  o.grid = {5.0};
  EXPECT_THROW(action_grid(m, o), std::invalid_argument);
  o.grid.clear();
  o.grid_levels = 0;
  EXPECT_THROW(action_grid(m, o), std::invalid_argument);
}

TEST(PlanReact, OneStepArgmin) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    StageContext ctx = make_context(3, 1, seed);
    const Eigen::VectorXd prep = Eigen::Vector3d(0.3, -0.4, 0.1);
    for (int j = 0; j < 3; ++j) {
      const Eigen::VectorXd r = plan_react(ctx, prep, j, kAlpha);
      // fine scan of the single react action
      double best = kInf;
      for (int i = 0; i <= 60000; ++i) {
        const double a = -3.0 + 6.0 * i / 60000.0;
        best = std::min(best, rollout_costs(ctx, prep, {Eigen::VectorXd::Constant(1, a), Eigen::VectorXd::Constant(1, a),
                                                        Eigen::VectorXd::Constant(1, a)}, kAlpha).tail[j]);
      }
      const double got = rollout_costs(ctx, prep, {r, r, r}, kAlpha).tail[j];
      EXPECT_LE(got, best + 1e-9);
    }
  }
}

TEST(InferUnrealizedReacts, KeepsObservedAndPlansOthers) {
  StageContext ctx = make_context(3, 3, 2);
  const Eigen::VectorXd prep = Eigen::Vector3d(0.0, 0.5, -0.5);
  const Eigen::VectorXd observed = Eigen::Vector3d(1.0, 2.0, -1.0);
  const auto reacts = infer_unrealized_reacts(ctx, prep, 1, observed, kAlpha);
  ASSERT_EQ(reacts.size(), 3u);
  EXPECT_EQ(reacts[1], observed);
  for (int j : {0, 2}) EXPECT_LT((reacts[static_cast<std::size_t>(j)] - plan_react(ctx, prep, j, kAlpha)).norm(), 1e-12);
  EXPECT_THROW(infer_unrealized_reacts(ctx, prep, 3, observed, kAlpha), std::out_of_range);
}

TEST(InferUnrealizedReacts, IdenticalBranchesGetIdenticalReacts) {
  StageContext ctx = make_context(2, 2, 3);
  ctx.model.leader_accel = {0.0, 1.0, 1.0};
  ctx.w_prev = 0;
  const Eigen::VectorXd prep = Eigen::Vector2d(0.2, -0.2);
  const auto reacts = infer_unrealized_reacts(ctx, prep, 0, Eigen::Vector2d(0.0, 0.0), kAlpha);
  EXPECT_LT((reacts[1] - reacts[2]).norm(), 1e-12);
}

TEST(StageKkt, SingleStepMatchesGradientForm) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    StageContext ctx = make_context(1, 0, seed);
    PlannerOptions opts;
    opts.mode = PlannerOptions::Mode::kConvex;
    const Envelope truth = generate_envelope(seed + 60, 3, 20);
    const StagePlan plan = plan_stage(ctx, truth, kAlpha, opts);
    const Eigen::VectorXd y = plan.prepare;
    const StageGradients grad = stage_gradients(ctx, y, kAlpha);
    const Eigen::VectorXd g = stage_tail_costs(ctx, y, kAlpha);
    const SaturationPattern pattern =
        saturation_pattern(y, Eigen::VectorXd::Constant(1, -3.0), Eigen::VectorXd::Constant(1, 3.0));
    bool near_kink = false;
    for (const auto& t : stage_terms(ctx, kAlpha))
      if (t.shape != ScalarShape::kSquare && std::abs(t.argument(y)) <= 1e-6) near_kink = true;
    if (near_kink) continue;
    const KktHalfspace a = stage_kkt_halfspace(ctx, plan.prepare, plan.reacts, kAlpha, Envelope::simplex(3));
    const KktHalfspace b = kkt_halfspace_from_gradients(g, grad.tail, pattern, Envelope::simplex(3),
                                                        StageKktOptions{}.stationarity_tol);
    EXPECT_NEAR(a.tau_prime, b.tau_prime, 1e-6 * (1.0 + std::abs(b.tau_prime)));
    ++checked;
  }
  EXPECT_GE(checked, 5);
}

TEST(StageKkt, SoundForTheExpertEnvelope) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    StageContext ctx = make_context(3, 3, seed);
    const Envelope truth = generate_envelope(seed + 80, 3, 20);
    const StagePlan plan = plan_stage(ctx, truth, kAlpha);
    const KktHalfspace h = stage_kkt_halfspace(ctx, plan.prepare, plan.reacts, kAlpha, Envelope::simplex(3));
    for (const auto& v : truth.vertices()) EXPECT_GE(h.halfspace.slack(v), -1e-6) << "seed " << seed;
    EXPECT_GE(h.tau_prime, plan.tau - 1e-6);
  }
}

TEST(StageKkt, AllActionsSaturatedHigh) {
  StageContext ctx;
  ctx.x1 = CarState(0.0, 0.0, 40.0, 15.0);  // leader far ahead and pulling away
  ctx.u_prev = 3.0;
  const Envelope truth = generate_envelope(5, 3, 20);
  const StagePlan plan = plan_stage(ctx, truth, kAlpha);
  EXPECT_NEAR(plan.prepare.minCoeff(), 3.0, 1e-6);
  for (const auto& r : plan.reacts) EXPECT_NEAR(r.minCoeff(), 3.0, 1e-6);
  const KktHalfspace h = stage_kkt_halfspace(ctx, plan.prepare, plan.reacts, kAlpha, Envelope::simplex(3));
  EXPECT_GE(h.sigma_plus.minCoeff(), -1e-9);
  for (const auto& v : truth.vertices()) EXPECT_GE(h.halfspace.slack(v), -1e-6);
}

TEST(StageKkt, ZeroCostIsInfeasible) {
  StageContext ctx = make_context(2, 1, 0);
  const std::vector<Eigen::VectorXd> reacts(3, Eigen::VectorXd::Zero(1));
  EXPECT_THROW(stage_kkt_halfspace(ctx, Eigen::Vector2d::Zero(), reacts, Eigen::Vector4d::Zero(), Envelope::simplex(3)),
               InfeasibleKkt);
}

}  // namespace
}  // namespace rsirl
