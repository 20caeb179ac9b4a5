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

#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "rsirl/errors.hpp"
#include "rsirl/expert.hpp"
#include "test_util.hpp"

namespace rsirl {
namespace {

// Dense re-evaluation of u'Ru + x''Qx' per realization.
Eigen::VectorXd oracle_costs(const LinearQuadraticSystem& s, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  Eigen::VectorXd g(s.L);
  for (int j = 0; j < s.L; ++j) {
    const Eigen::VectorXd xn = s.A[j] * x + s.B[j] * u;
    double c = 0.0;
    for (int a = 0; a < s.m; ++a)
      for (int b = 0; b < s.m; ++b) c += u[a] * s.R(a, b) * u[b];
    for (int a = 0; a < s.n; ++a)
      for (int b = 0; b < s.n; ++b) c += xn[a] * s.Q(a, b) * xn[b];
    g[j] = c;
  }
  return g;
}

double worst_case(const ExpertSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  const Eigen::VectorXd g = cost_vector(spec.system, x, u);
  double worst = -1e300;
  for (const auto& v : spec.envelope.vertices()) worst = std::max(worst, g.dot(v));
  return worst;
}

TEST(GenerateSystem, FullScaleDimensions) {
  const auto s = generate_system(1, 10, 5, 3);
  EXPECT_EQ(s.n, 10);
  EXPECT_EQ(s.m, 5);
  EXPECT_EQ(s.L, 3);
  ASSERT_EQ(s.A.size(), 3u);
  EXPECT_EQ(s.A[0].rows(), 10);
  EXPECT_EQ(s.B[2].cols(), 5);
  EXPECT_EQ(s.x0.size(), 10);
  EXPECT_TRUE(s.R.isIdentity());
  EXPECT_TRUE((s.u_lo.array() == -1.0).all());
  EXPECT_TRUE((s.u_hi.array() == 1.0).all());
}

TEST(GenerateSystem, DeterministicAndPsd) {
  const auto a = generate_system(2, 4, 2, 3);
  const auto b = generate_system(2, 4, 2, 3);
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(a.A[j], b.A[j]);
    EXPECT_EQ(a.B[j], b.B[j]);
  }
  EXPECT_EQ(a.Q, b.Q);
  EXPECT_EQ(a.x0, b.x0);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a.Q).eigenvalues().minCoeff(), -1e-10);
  EXPECT_TRUE(a.Q.isApprox(a.Q.transpose(), 0.0));
  EXPECT_NE(generate_system(3, 4, 2, 3).x0, a.x0);
}

TEST(LinearQuadraticSystem, ValidateRejectsBadBounds) {
  auto s = generate_system(4, 3, 2, 2);
  s.u_hi = s.u_lo;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = generate_system(4, 3, 2, 2);
  s.R = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(GenerateEnvelope, HullOfDirichletPoints) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Envelope e = generate_envelope(seed, 3, 20);
    e.validate();
    EXPECT_LE(e.vertices().size(), 20u);
    EXPECT_GE(e.vertices().size(), 3u);
    for (const auto& v : e.vertices()) {
      EXPECT_GE(v.minCoeff(), -1e-9);
      EXPECT_NEAR(v.sum(), 1.0, 1e-9);
    }
    EXPECT_GT(envelope_area(e), 0.0);
    EXPECT_LT(envelope_area(e), std::sqrt(3.0) / 2.0);
  }
}

TEST(GenerateEnvelope, ThreePointsGiveTriangle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) EXPECT_EQ(generate_envelope(seed, 3, 3).vertices().size(), 3u);
}

TEST(GenerateEnvelope, HigherDimension) {
  const Envelope e = generate_envelope(3, 4, 20);
  e.validate();
  EXPECT_GE(e.vertices().size(), 4u);
}

TEST(GenerateEnvelope, Deterministic) {
  const Envelope a = generate_envelope(5, 3, 20);
  const Envelope b = generate_envelope(5, 3, 20);
  ASSERT_EQ(a.vertices().size(), b.vertices().size());
  for (std::size_t i = 0; i < a.vertices().size(); ++i) EXPECT_EQ(a.vertices()[i], b.vertices()[i]);
}

TEST(CostVector, Examples) {
  auto s = generate_system(6, 4, 2, 3);
  const Eigen::VectorXd zero_x = Eigen::VectorXd::Zero(4);
  EXPECT_EQ(cost_vector(s, zero_x, Eigen::VectorXd::Zero(2)), Eigen::VectorXd::Zero(3));
  s.Q.setZero();
  const Eigen::Vector2d u(0.3, -0.4);
  const Eigen::VectorXd g = cost_vector(s, s.x0, u);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(g[j], 0.25, 1e-15);
}

TEST(CostVector, MatchesDenseOracleAndIsConvex) {
  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    const auto s = generate_system(100 + t, 4, 2, 3);
    const Eigen::VectorXd x = rng.normal_vector(4);
    const Eigen::VectorXd u1 = rng.normal_vector(2), u2 = rng.normal_vector(2);
    const Eigen::VectorXd g = cost_vector(s, x, u1);
    EXPECT_LT((g - oracle_costs(s, x, u1)).lpNorm<Eigen::Infinity>(), 1e-10 * (1.0 + g.lpNorm<Eigen::Infinity>()));
    EXPECT_GE(g.minCoeff(), 0.0);
    const double lam = rng.uniform();
    const Eigen::VectorXd mid = cost_vector(s, x, lam * u1 + (1 - lam) * u2);
    const Eigen::VectorXd chord = lam * cost_vector(s, x, u1) + (1 - lam) * cost_vector(s, x, u2);
    for (int j = 0; j < 3; ++j) EXPECT_LE(mid[j], chord[j] + 1e-9);
    // scenario quadratics reproduce the cost exactly
    const auto qs = scenario_quadratics(s, x);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(qs[j].value(u1), g[j], 1e-10 * (1.0 + std::abs(g[j])));
  }
}

TEST(ExpertAct, SingleVertexMatchesClosedForm) {
  auto spec = make_expert_spec(21, 4, 2, 3);
  // x scaled down so the unconstrained minimizer is inside the box
  const Eigen::VectorXd x = 0.05 * spec.system.x0;
  for (int j = 0; j < 3; ++j) {
    spec.envelope = Envelope::from_halfspaces(3, {HalfSpace(-Eigen::VectorXd::Unit(3, j), -1.0)});
    const auto& sys = spec.system;
    const Eigen::MatrixXd H = sys.R + sys.B[j].transpose() * sys.Q * sys.B[j];
    const Eigen::VectorXd u = H.ldlt().solve(-sys.B[j].transpose() * sys.Q * sys.A[j] * x);
    ASSERT_TRUE((u.array().abs() < 1.0).all());
    const MinimaxResult r = expert_act(spec, x);
    EXPECT_LT((r.u - u).lpNorm<Eigen::Infinity>(), 1e-5);
  }
}

TEST(ExpertAct, FullSimplexMatchesGridOracle) {
  for (int t = 0; t < 10; ++t) {
    auto spec = make_expert_spec(300 + t, 4, 2, 3);
    spec.envelope = Envelope::simplex(3);
    const Eigen::VectorXd x = spec.system.x0.normalized();
    MinimaxProblem p;
    p.scenarios = scenario_quadratics(spec.system, x);
    p.vertices = spec.envelope.vertices();
    p.lower = spec.system.u_lo;
    p.upper = spec.system.u_hi;
    const auto g = testing::grid_minimax(p, 201);
    const MinimaxResult r = expert_act(spec, x);
    EXPECT_LE(std::abs(r.tau - g.tau), g.lipschitz * g.step * std::sqrt(2.0) / 2.0 + 1e-5 * std::max(1.0, g.tau));
  }
}

TEST(ExpertAct, ZeroStateGivesZeroAction) {
  const auto spec = make_expert_spec(9, 4, 2, 3);
  const MinimaxResult r = expert_act(spec, Eigen::VectorXd::Zero(4));
  EXPECT_LT(r.u.norm(), 1e-9);
  EXPECT_NEAR(r.tau, 0.0, 1e-12);
}

TEST(ExpertAct, OptimalityCertificate) {
  Rng rng(31);
  for (int t = 0; t < 5; ++t) {
    const auto spec = make_expert_spec(400 + t, 4, 2, 3);
    const Eigen::VectorXd x = spec.system.x0.normalized();
    const MinimaxResult r = expert_act(spec, x);
    EXPECT_NEAR(r.tau, worst_case(spec, x, r.u), 1e-9);
    for (int k = 0; k < 1000; ++k) {
      Eigen::VectorXd u(2);
      for (int i = 0; i < 2; ++i) u[i] = rng.uniform(-1, 1);
      EXPECT_LE(r.tau, worst_case(spec, x, u) + 2e-5 * std::max(1.0, r.tau));
    }
  }
}

TEST(StepDynamics, Examples) {
  auto s = generate_system(1, 3, 2, 2);
  s.A[1] = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::Vector3d x(0.5, -1, 2);
  EXPECT_EQ(step_dynamics(s, x, Eigen::VectorXd::Zero(2), 1, StateMode::kRaw), Eigen::VectorXd(x));
  EXPECT_EQ(step_dynamics(s, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2), 0, StateMode::kRaw),
            Eigen::VectorXd::Zero(3));
  EXPECT_NEAR(step_dynamics(s, x, Eigen::Vector2d(0.2, 0.1), 0, StateMode::kRenormalize).norm(), 1.0, 1e-15);
  EXPECT_EQ(step_dynamics(s, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2), 0, StateMode::kRenormalize),
            Eigen::VectorXd::Zero(3));
  Rng a(4), b(4);
  const Eigen::VectorXd r1 = step_dynamics(s, x, Eigen::VectorXd::Zero(2), 0, StateMode::kRedraw, &a);
  EXPECT_EQ(r1, step_dynamics(s, x, Eigen::VectorXd::Zero(2), 0, StateMode::kRedraw, &b));
  EXPECT_THROW(step_dynamics(s, x, Eigen::VectorXd::Zero(2), 0, StateMode::kRedraw), std::invalid_argument);
}

TEST(StateMode, ParsesNames) {
  EXPECT_EQ(parse_state_mode("raw"), StateMode::kRaw);
  EXPECT_EQ(parse_state_mode("renormalize"), StateMode::kRenormalize);
  EXPECT_EQ(parse_state_mode("redraw"), StateMode::kRedraw);
  EXPECT_THROW(parse_state_mode("reset"), ConfigError);
  EXPECT_EQ(to_string(StateMode::kRedraw), "redraw");
}

TEST(MakeExpertSpec, UniformPmf) {
  const auto spec = make_expert_spec(3, 4, 2, 3);
  spec.validate();
  EXPECT_NEAR(spec.pmf.sum(), 1.0, 1e-15);
  EXPECT_NEAR(spec.pmf[0], 1.0 / 3.0, 1e-15);
}

}  // namespace
}  // namespace rsirl
