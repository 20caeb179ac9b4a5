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

#include "rsirl/multistep.hpp"

#include <cmath>
#include <stdexcept>

#include "rsirl/errors.hpp"
#include "rsirl/expert.hpp"

namespace rsirl {

void MultistepConfig::validate() const {
  model.validate();
  stage.validate();
  policy.validate();
  if (stage.n_r < 1) throw ConfigError("multistep: n_r must be >= 1");
  if (static_cast<int>(stage.ramp_pmf.size()) != model.L())
    throw ConfigError("multistep: ramp-up pmf length must equal the number of maneuvers");
  if (stages < 1) throw ConfigError("multistep: stages must be >= 1");
  if (clusters < 1) throw ConfigError("multistep: clusters must be >= 1");
  if (w_initial < 0 || w_initial >= model.L()) throw ConfigError("multistep: initial maneuver out of range");
  if (u_initial < model.u_lo || u_initial > model.u_hi)
    throw ConfigError("multistep: initial action outside the bounds");
  if (expert_alpha.minCoeff() < 0.0 || !(expert_alpha.norm() > 0.0))
    throw ConfigError("multistep: expert weights must be non-negative and not all zero");
  if (envelope_points < model.L()) throw ConfigError("multistep: too few envelope points");
}

MultistepConfig MultistepConfig::fidelity() {
  MultistepConfig c;
  c.stage.N = 40;
  c.stage.n_p = 22;
  c.stage.n_r = 18;
  c.stage.ramp_up = 40;
  c.stage.ramp_pmf = {0.3, 0.4, 0.4};
  c.stages = 60;
  c.clusters = 15;
  c.expert_planner.mode = PlannerOptions::Mode::kConvex;
  c.learner_planner.mode = PlannerOptions::Mode::kConvex;
  return c;
}

PreferenceVector multistep_preferences(const StageContext& ctx, const Eigen::VectorXd& prepare,
                                       const Eigen::VectorXd& g_prior, const ReactLibrary& library,
                                       const std::vector<RefinementDirection>& explored,
                                       const Eigen::Vector4d& alpha, int budget, std::uint64_t seed) {
  const int L = ctx.model.L();
  if (g_prior.size() != L) throw std::invalid_argument("multistep_preferences: prior size mismatch");
  std::vector<PredictedDirections> predicted(static_cast<std::size_t>(L));
  if (explored.empty()) return disturbance_preferences(predicted, explored);
  if (library.size() == 0) throw std::invalid_argument("multistep_preferences: empty react library");
  if (budget < 1) throw std::invalid_argument("multistep_preferences: budget must be >= 1");
  for (int j = 0; j < L; ++j) {
    const std::vector<StageTerm> terms = react_terms(ctx, prepare, j, alpha);
    std::vector<double> branch_cost;
    for (const auto& r : library.sequences) {
      double c = 0.0;
      for (const auto& t : terms) c += t.value(r);
      branch_cost.push_back(c);
    }
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(j)));
    auto& out = predicted[static_cast<std::size_t>(j)];
    for (int b = 0; b < budget; ++b) {
      Eigen::VectorXd g = g_prior;
      g[j] = branch_cost[static_cast<std::size_t>(rng.index(library.size()))];
      try {
        out.directions.push_back(project_to_simplex_tangent(g));
      } catch (const DegenerateDirection&) {
        ++out.discarded;
      }
    }
  }
  return disturbance_preferences(predicted, explored);
}

namespace {

struct LearnerWeights {
  std::optional<Eigen::Vector4d> alpha;
  std::string note;
};

LearnerWeights learner_weights(const MultistepConfig& config, const std::vector<ReactDemonstration>& demos) {
  if (config.known_alpha) return {config.expert_alpha.normalized(), {}};
  if (demos.size() < 2) return {std::nullopt, "too few react demonstrations for weight recovery"};
  try {
    return {recover_cost_weights(demos, config.inverse).alpha, {}};
  } catch (const IllConditioned& e) {
    return {std::nullopt, e.what()};
  }
}

}  // namespace

MultistepLog run_multistep(const MultistepConfig& config, std::uint64_t seed,
                           const std::optional<Envelope>& true_envelope) {
  config.validate();
  const int L = config.model.L();
  MultistepLog log;
  log.true_envelope = true_envelope ? *true_envelope
                                    : generate_envelope(split_seed(seed, 1), L, config.envelope_points);
  if (log.true_envelope.dim() != L) throw std::invalid_argument("run_multistep: envelope dimension mismatch");
  Envelope learned = Envelope::simplex(L);
  const Eigen::VectorXd ramp_pmf = config.stage.normalized_pmf();
  const Eigen::Vector4d expert_alpha = config.expert_alpha.normalized();
  Rng disturbance_rng(split_seed(seed, 2));

  StageContext ctx;
  ctx.model = config.model;
  ctx.features = config.features;
  ctx.config = config.stage;
  ctx.x1 = config.x1;
  ctx.u_prev = config.u_initial;
  ctx.w_prev = config.w_initial;

  std::vector<ReactDemonstration> react_demos;
  std::vector<Eigen::VectorXd> observed_reacts;

  for (int d = 1; d <= config.stages; ++d) {
    StageRecord rec;
    rec.stage = d;
    try {
      const StagePlan plan = plan_stage(ctx, log.true_envelope, expert_alpha, config.expert_planner);
      rec.tau_star = plan.tau;

      // Disturbance selection at step n_p.
      rec.preferences = Eigen::VectorXd::Zero(L);
      rec.probabilities = ramp_pmf;
      bool active = config.policy.mode == SamplingMode::kActive && d > config.stage.ramp_up;
      if (active) {
        const LearnerWeights lw = learner_weights(config, react_demos);
        if (!lw.alpha || static_cast<int>(observed_reacts.size()) < config.clusters) {
          active = false;
          rec.note = lw.alpha ? "react library not available yet" : lw.note;
        } else {
          log.library = cluster_react_sequences(observed_reacts, config.clusters,
                                                split_seed(seed, 3, static_cast<std::uint64_t>(d)),
                                                config.model.u_lo, config.model.u_hi);
          std::vector<Eigen::VectorXd> prior;
          for (int j = 0; j < L; ++j) prior.push_back(plan_react(ctx, plan.prepare, j, *lw.alpha, config.learner_planner));
          const Eigen::VectorXd g_prior = stage_tail_costs(ctx, pack_decision(ctx, plan.prepare, prior), *lw.alpha);
          const PreferenceVector pref = multistep_preferences(
              ctx, plan.prepare, g_prior, log.library, log.explored, *lw.alpha, config.policy.budget,
              split_seed(seed, 4, static_cast<std::uint64_t>(d)));
          rec.preferences = pref.U;
          rec.probabilities = boltzmann_probabilities(pref.U, config.policy.temperature);
        }
      }
      rec.realized = disturbance_rng.categorical(rec.probabilities);
      const int j = rec.realized;

      StageDemonstration demo{ctx, plan.prepare, j, plan.reacts[static_cast<std::size_t>(j)]};
      react_demos.push_back({ctx, plan.prepare, j, demo.react});
      observed_reacts.push_back(demo.react);

      // Inference.
      const LearnerWeights lw = learner_weights(config, react_demos);
      if (lw.alpha) rec.alpha = *lw.alpha;
      if (!lw.alpha) {
        rec.skipped = true;
        rec.note = lw.note;
      } else {
        const std::vector<Eigen::VectorXd> reacts =
            infer_unrealized_reacts(ctx, demo.prepare, j, demo.react, *lw.alpha, config.learner_planner);
        try {
          const KktHalfspace kkt = stage_kkt_halfspace(ctx, demo.prepare, reacts, *lw.alpha, learned, config.kkt);
          rec.tau_prime = kkt.tau_prime;
          rec.halfspace = kkt.halfspace;
          ClipResult clip = clip_envelope(learned, kkt.halfspace, config.geometry);
          rec.refined = clip.refined;
          if (clip.refined) {
            learned = std::move(clip.envelope);
            try {
              log.explored.push_back(project_to_simplex_tangent(kkt.halfspace.normal, config.geometry));
            } catch (const DegenerateDirection&) {
              rec.note = "degenerate refinement direction";
            }
          }
        } catch (const InfeasibleKkt& e) {
          rec.skipped = true;
          rec.note = e.what();
        }
      }
      rec.area = envelope_area(learned);
      rec.demo = std::move(demo);

      // Advance to the next stage along the realized branch.
      const auto states = rollout_branch(ctx, plan.prepare, plan.reacts[static_cast<std::size_t>(j)], j);
      ctx.x1 = states.back();
      ctx.u_prev = plan.reacts[static_cast<std::size_t>(j)][config.stage.n_r - 1];
      ctx.w_prev = j;
    } catch (const Error& e) {
      log.failed = true;
      log.failure = "stage " + std::to_string(d) + ": " + e.what();
      break;
    }
    log.stages.push_back(std::move(rec));
  }
  log.final_envelope = learned;
  return log;
}

}  // namespace rsirl
