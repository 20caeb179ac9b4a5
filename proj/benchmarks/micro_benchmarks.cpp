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

#include <benchmark/benchmark.h>

#include "rsirl/active.hpp"
#include "rsirl/expert.hpp"
#include "rsirl/geometry.hpp"
#include "rsirl/inference.hpp"
#include "rsirl/linear_program.hpp"
#include "rsirl/rng.hpp"
#include "rsirl/stage.hpp"

namespace rsirl {
namespace {

void BM_SolveLp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  LinearProgram lp(n);
  lp.objective = rng.normal_vector(n);
  const Eigen::VectorXd interior = Eigen::VectorXd::Constant(n, 0.5);
  for (int r = 0; r < 3 * n; ++r) {
    const Eigen::VectorXd a = rng.normal_vector(n);
    lp.add_inequality(a, a.dot(interior) + 0.5);
  }
  for (int i = 0; i < n; ++i) lp.add_inequality(Eigen::VectorXd::Unit(n, i), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lp(lp));
}
BENCHMARK(BM_SolveLp)->Arg(3)->Arg(10)->Arg(30);

void BM_ExpertAct(benchmark::State& state) {
  const ExpertSpec spec = make_expert_spec(3, 4, 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(expert_act(spec, spec.system.x0));
}
BENCHMARK(BM_ExpertAct)->Unit(benchmark::kMillisecond);

void BM_KktHalfspace(benchmark::State& state) {
  const ExpertSpec spec = make_expert_spec(3, 4, 2, 3);
  const Eigen::VectorXd u = expert_act(spec, spec.system.x0).u;
  const Envelope domain = generate_envelope(9, 3, 20);
  for (auto _ : state) benchmark::DoNotOptimize(kkt_halfspace(spec.system, spec.system.x0, u, domain));
}
BENCHMARK(BM_KktHalfspace);

void BM_ClipEnvelope(benchmark::State& state) {
  const Envelope env = generate_envelope(4, 3, 20);
  const HalfSpace h(Eigen::Vector3d(1.0, 0.2, 0.1), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(clip_envelope(env, h));
}
BENCHMARK(BM_ClipEnvelope);

void BM_ComputePreferences(benchmark::State& state) {
  const ExpertSpec spec = make_expert_spec(3, 4, 2, 3);
  const Eigen::VectorXd u = expert_act(spec, spec.system.x0).u;
  std::vector<RefinementDirection> explored;
  for (int k = 0; k < 10; ++k) explored.push_back(project_to_simplex_tangent(Rng(k).normal_vector(3)));
  SamplingPolicy policy;
  policy.budget = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        compute_preferences(spec.system, spec.system.x0, u, explored, policy, 5, 1, StateMode::kRenormalize));
}
BENCHMARK(BM_ComputePreferences)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_PlanStage(benchmark::State& state) {
  StageContext ctx;
  ctx.x1 = CarState(0.0, 10.0, 7.5, 10.5);
  PlannerOptions options;
  options.grid_levels = static_cast<int>(state.range(0));
  const Envelope env = generate_envelope(2, 3, 20);
  const Eigen::Vector4d alpha = Eigen::Vector4d::Constant(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(plan_stage(ctx, env, alpha, options));
}
BENCHMARK(BM_PlanStage)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_StageKktHalfspace(benchmark::State& state) {
  StageContext ctx;
  ctx.x1 = CarState(0.0, 10.0, 7.5, 10.5);
  const Envelope env = generate_envelope(2, 3, 20);
  const Eigen::Vector4d alpha = Eigen::Vector4d::Constant(0.5);
  const StagePlan plan = plan_stage(ctx, env, alpha);
  for (auto _ : state)
    benchmark::DoNotOptimize(stage_kkt_halfspace(ctx, plan.prepare, plan.reacts, alpha, Envelope::simplex(3)));
}
BENCHMARK(BM_StageKktHalfspace);

}  // namespace
}  // namespace rsirl

BENCHMARK_MAIN();
