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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rsirl/geometry.hpp"
#include "rsirl/minimax.hpp"
#include "rsirl/rng.hpp"

namespace rsirl {

/// How the state is post-processed after each transition.
enum class StateMode {
  kRaw,          ///< x' = A x + B u
  kRenormalize,  ///< x' rescaled to unit norm (left at zero if zero)
  kRedraw,       ///< fresh standard normal state every step
};

StateMode parse_state_mode(const std::string& name);  ///< throws ConfigError
std::string to_string(StateMode mode);

/// x' = A[j] x + B[j] u,  C(x, u, j) = u'Ru + x''Qx'.
struct LinearQuadraticSystem {
  int n = 0;
  int m = 0;
  int L = 0;
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::MatrixXd> B;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::VectorXd u_lo;
  Eigen::VectorXd u_hi;
  Eigen::VectorXd x0;

  void validate() const;
};

struct Demonstration {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  int realized = -1;  ///< disturbance index (0-based) sampled after acting
  double tau = 0.0;   ///< expert objective
};

struct ExpertSpec {
  LinearQuadraticSystem system;
  Envelope envelope = Envelope::simplex(1);
  Eigen::VectorXd pmf;  ///< true disturbance distribution, used when sampling passively

  void validate() const;
};

/// Gaussian A[j], B[j] and x0; Q = M'M for Gaussian M; R = I; box [-1, 1]^m.
/// Draw order: A[0..L), B[0..L) (row-major), M, x0.
LinearQuadraticSystem generate_system(std::uint64_t seed, int n, int m, int L);

/// Convex hull of `n_points` flat-Dirichlet samples on the simplex.
/// Resamples up to 10 times on affinely dependent draws, then throws DegenerateHull.
Envelope generate_envelope(std::uint64_t seed, int L, int n_points);

/// System from split_seed(seed, 0), envelope from split_seed(seed, 1), uniform pmf.
ExpertSpec make_expert_spec(std::uint64_t seed, int n, int m, int L, int envelope_points = 20);

/// Component j is the one-step cost under realization j.
Eigen::VectorXd cost_vector(const LinearQuadraticSystem& sys, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u);

/// Per-realization cost as an exact quadratic in u at the given state.
std::vector<ScenarioQuadratic> scenario_quadratics(const LinearQuadraticSystem& sys,
                                                   const Eigen::VectorXd& x);

/// Minimax action under `envelope` at state x.
MinimaxResult minimax_action(const LinearQuadraticSystem& sys, const Envelope& envelope,
                             const Eigen::VectorXd& x, const MinimaxOptions& options = {});

/// The forward problem: the expert's action under its true envelope.
MinimaxResult expert_act(const ExpertSpec& spec, const Eigen::VectorXd& x,
                         const MinimaxOptions& options = {});

/// `rng` is required for StateMode::kRedraw and ignored otherwise.
Eigen::VectorXd step_dynamics(const LinearQuadraticSystem& sys, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u, int j, StateMode mode,
                              Rng* rng = nullptr);

}  // namespace rsirl
