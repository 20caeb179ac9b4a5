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

#include "rsirl/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsirl/errors.hpp"

namespace rsirl {

SaturationPattern::State SaturationPattern::state(int j) const {
  if (std::find(upper.begin(), upper.end(), j) != upper.end()) return State::kUpper;
  if (std::find(lower.begin(), lower.end(), j) != lower.end()) return State::kLower;
  return State::kFree;
}

SaturationPattern saturation_pattern(const Eigen::VectorXd& u, const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi, double tol) {
  if (u.size() != lo.size() || u.size() != hi.size())
    throw std::invalid_argument("saturation_pattern: dimension mismatch");
  SaturationPattern p;
  p.tolerance = tol;
  for (int j = 0; j < u.size(); ++j) {
    if (hi[j] - u[j] <= tol)
      p.upper.push_back(j);
    else if (u[j] - lo[j] <= tol)
      p.lower.push_back(j);
    else
      p.free.push_back(j);
  }
  return p;
}

Eigen::MatrixXd cost_gradient_matrix(const LinearQuadraticSystem& sys, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u) {
  Eigen::MatrixXd grad(sys.m, sys.L);
  const Eigen::VectorXd ru = 2.0 * sys.R * u;
  for (int l = 0; l < sys.L; ++l) {
    const Eigen::VectorXd next = sys.A[l] * x + sys.B[l] * u;
    grad.col(l) = ru + 2.0 * sys.B[l].transpose() * (sys.Q * next);
  }
  return grad;
}

KktHalfspace kkt_halfspace_from_gradients(const Eigen::VectorXd& g, const Eigen::MatrixXd& gradients,
                                          const SaturationPattern& pattern, const Envelope& domain,
                                          double stationarity_tol, const LpOptions& lp_options) {
  const int L = static_cast<int>(g.size());
  const int m = static_cast<int>(gradients.rows());
  if (gradients.cols() != L || domain.dim() != L)
    throw std::invalid_argument("kkt_halfspace: dimension mismatch");
  const int np = static_cast<int>(pattern.upper.size());
  const int nm = static_cast<int>(pattern.lower.size());

  // variables: v (L) | sigma_plus on J+ | sigma_minus on J-
  LinearProgram lp(L + np + nm);
  lp.objective.head(L) = g;
  Eigen::VectorXd row = Eigen::VectorXd::Zero(L + np + nm);
  row.head(L).setOnes();
  lp.add_equality(row, 1.0);
  for (const auto& h : domain.halfspaces()) {
    row.setZero();
    row.head(L) = h.normal;
    lp.add_inequality(row, h.offset);
  }
  for (int j = 0; j < m; ++j) {
    row.setZero();
    row.head(L) = gradients.row(j).transpose();
    const auto up = std::find(pattern.upper.begin(), pattern.upper.end(), j);
    const auto dn = std::find(pattern.lower.begin(), pattern.lower.end(), j);
    if (up != pattern.upper.end())
      row[L + static_cast<int>(up - pattern.upper.begin())] = 1.0;
    else if (dn != pattern.lower.end())
      row[L + np + static_cast<int>(dn - pattern.lower.begin())] = -1.0;
    const double slack = stationarity_tol * (1.0 + gradients.row(j).lpNorm<1>());
    lp.add_inequality(row, slack);
    lp.add_inequality(-row, slack);
  }

  LpSolution sol;
  try {
    sol = solve_lp(lp, lp_options);
  } catch (const Infeasible&) {
    throw InfeasibleKkt("kkt_halfspace: stationarity LP is infeasible");
  }
  KktHalfspace out{HalfSpace(g, sol.objective), sol.objective, sol.x.head(L),
                   Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m)};
  for (int k = 0; k < np; ++k) out.sigma_plus[pattern.upper[static_cast<std::size_t>(k)]] = sol.x[L + k];
  for (int k = 0; k < nm; ++k) out.sigma_minus[pattern.lower[static_cast<std::size_t>(k)]] = sol.x[L + np + k];
  return out;
}

KktHalfspace kkt_halfspace(const LinearQuadraticSystem& sys, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, const Envelope& domain, double saturation_tol,
                           double stationarity_tol) {
  const Eigen::VectorXd g = cost_vector(sys, x, u);
  if (g.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("kkt_halfspace: zero cost vector");
  return kkt_halfspace_from_gradients(g, cost_gradient_matrix(sys, x, u),
                                      saturation_pattern(u, sys.u_lo, sys.u_hi, saturation_tol), domain,
                                      stationarity_tol);
}

LearnerState LearnerState::fresh(int L) {
  LearnerState s;
  s.envelope = Envelope::simplex(L);
  return s;
}

LearnerState process_demonstration(const LearnerState& state, const LinearQuadraticSystem& sys,
                                   const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                   const InferenceOptions& options) {
  LearnerState next = state;
  next.step = state.step + 1;
  LearnerRecord rec;
  rec.step = next.step;

  const Eigen::VectorXd g = cost_vector(sys, x, u);
  if (g.cwiseAbs().maxCoeff() == 0.0) {
    rec.skipped = true;
    rec.note = "zero cost vector";
  } else {
    try {
      const KktHalfspace kkt = kkt_halfspace_from_gradients(
          g, cost_gradient_matrix(sys, x, u),
          saturation_pattern(u, sys.u_lo, sys.u_hi, options.saturation_tol), state.envelope,
          options.stationarity_tol);
      rec.tau_prime = kkt.tau_prime;
      rec.halfspace = kkt.halfspace;
      ClipResult clip = clip_envelope(state.envelope, kkt.halfspace, options.geometry);
      rec.refined = clip.refined;
      if (clip.refined) {
        next.envelope = std::move(clip.envelope);
        try {
          next.explored.push_back(project_to_simplex_tangent(g, options.geometry));
          next.explored_steps.push_back(next.step);
        } catch (const DegenerateDirection&) {
          rec.note = "degenerate refinement direction";
        }
      }
    } catch (const InfeasibleKkt& e) {
      rec.skipped = true;
      rec.note = e.what();
    }
  }
  rec.area = envelope_area(next.envelope);
  next.log.push_back(std::move(rec));
  return next;
}

Eigen::VectorXd predict_action(const Envelope& envelope, const LinearQuadraticSystem& sys,
                               const Eigen::VectorXd& x, const MinimaxOptions& options) {
  return minimax_action(sys, envelope, x, options).u;
}

EpisodeLog run_episode(const ExpertSpec& spec, int steps, std::uint64_t seed,
                       const DisturbanceSampler& sampler, const EpisodeOptions& options) {
  if (steps < 1) throw std::invalid_argument("run_episode: steps must be >= 1");
  const auto& sys = spec.system;
  Rng disturbance_rng(split_seed(seed, 1));
  Rng state_rng(split_seed(seed, 2));
  LearnerState learner = LearnerState::fresh(sys.L);
  EpisodeLog log;
  Eigen::VectorXd x = sys.x0;
  if (options.state_mode == StateMode::kRenormalize && x.norm() > 0.0) x.normalize();

  for (int k = 1; k <= steps; ++k) {
    EpisodeStep rec;
    rec.step = k;
    try {
      const MinimaxResult act = expert_act(spec, x, options.minimax);
      rec.demo.x = x;
      rec.demo.u = act.u;
      rec.demo.tau = act.tau;
      rec.tau_star = act.tau;
      learner = process_demonstration(learner, sys, x, act.u, options.inference);
      rec.learner = learner.log.back();
      if (options.evaluate) rec.mse = options.evaluate(k, learner);
      SamplerOutput s = sampler(k, learner, rec.demo, disturbance_rng);
      rec.sampled_w = s.w;
      rec.demo.realized = s.w;
      rec.preferences = std::move(s.preferences);
      rec.probabilities = std::move(s.probabilities);
      x = step_dynamics(sys, x, act.u, s.w, options.state_mode, &state_rng);
    } catch (const Error& e) {
      log.failed = true;
      log.failure = e.what();
      break;
    }
    if (options.snapshot_every > 0 && k % options.snapshot_every == 0)
      log.snapshots.emplace_back(k, learner.envelope);
    log.steps.push_back(std::move(rec));
  }
  log.final_envelope = learner.envelope;
  return log;
}

EpisodeLog run_passive(const ExpertSpec& spec, int steps, std::uint64_t seed,
                       const EpisodeOptions& options) {
  const Eigen::VectorXd pmf = spec.pmf;
  DisturbanceSampler sampler = [pmf](int, const LearnerState&, const Demonstration&, Rng& rng) {
    return SamplerOutput{rng.categorical(pmf), {}, {}};
  };
  return run_episode(spec, steps, seed, sampler, options);
}

}  // namespace rsirl
