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

#include "rsirl/expert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "rsirl/errors.hpp"

namespace rsirl {

StateMode parse_state_mode(const std::string& name) {
  if (name == "raw") return StateMode::kRaw;
  if (name == "renormalize") return StateMode::kRenormalize;
  if (name == "redraw") return StateMode::kRedraw;
  throw ConfigError("unknown state mode '" + name + "' (expected raw|renormalize|redraw)");
}

std::string to_string(StateMode mode) {
  switch (mode) {
    case StateMode::kRaw: return "raw";
    case StateMode::kRenormalize: return "renormalize";
    case StateMode::kRedraw: return "redraw";
  }
  return "unknown";
}

void LinearQuadraticSystem::validate() const {
  auto fail = [](const char* msg) { throw std::invalid_argument(std::string("LinearQuadraticSystem: ") + msg); };
  if (n < 1 || m < 1 || L < 1) fail("dimensions must be positive");
  if (static_cast<int>(A.size()) != L || static_cast<int>(B.size()) != L) fail("need one A and B per realization");
  for (int j = 0; j < L; ++j) {
    if (A[j].rows() != n || A[j].cols() != n) fail("A has wrong shape");
    if (B[j].rows() != n || B[j].cols() != m) fail("B has wrong shape");
  }
  if (Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m) fail("Q or R has wrong shape");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + Q.cwiseAbs().maxCoeff())) fail("Q not symmetric");
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12) fail("R not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eq(Q, Eigen::EigenvaluesOnly);
  if (eq.eigenvalues().minCoeff() < -1e-10 * (1.0 + Q.cwiseAbs().maxCoeff())) fail("Q not PSD");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(R, Eigen::EigenvaluesOnly);
  if (er.eigenvalues().minCoeff() <= 1e-10) fail("R not positive definite");
  if (u_lo.size() != m || u_hi.size() != m) fail("action bounds have wrong size");
  for (int i = 0; i < m; ++i)
    if (!(u_lo[i] < u_hi[i])) fail("action bounds must satisfy u_lo < u_hi");
  if (x0.size() != n) fail("x0 has wrong size");
}

void ExpertSpec::validate() const {
  system.validate();
  if (envelope.dim() != system.L) throw std::invalid_argument("ExpertSpec: envelope dimension != L");
  envelope.validate();
  if (pmf.size() != system.L || pmf.minCoeff() < 0.0 || std::abs(pmf.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("ExpertSpec: pmf must be a probability vector of length L");
}

LinearQuadraticSystem generate_system(std::uint64_t seed, int n, int m, int L) {
  if (n < 1 || m < 1 || L < 1) throw std::invalid_argument("generate_system: n, m, L must be >= 1");
  Rng rng(seed);
  LinearQuadraticSystem sys;
  sys.n = n;
  sys.m = m;
  sys.L = L;
  for (int j = 0; j < L; ++j) sys.A.push_back(rng.normal_matrix(n, n));
  for (int j = 0; j < L; ++j) sys.B.push_back(rng.normal_matrix(n, m));
  const Eigen::MatrixXd M = rng.normal_matrix(n, n);
  sys.Q = M.transpose() * M;
  sys.Q = 0.5 * (sys.Q + sys.Q.transpose());
  sys.R = Eigen::MatrixXd::Identity(m, m);
  sys.u_lo = Eigen::VectorXd::Constant(m, -1.0);
  sys.u_hi = Eigen::VectorXd::Constant(m, 1.0);
  sys.x0 = rng.normal_vector(n);
  return sys;
}

namespace {

// Facets of conv(points) within the simplex plane, by brute force over (L-1)-subsets.
std::vector<HalfSpace> hull_facets(const std::vector<Eigen::VectorXd>& pts, int L) {
  const int np = static_cast<int>(pts.size());
  const int k = L - 1;
  std::vector<HalfSpace> facets;
  std::vector<int> combo(k);
  for (int i = 0; i < k; ++i) combo[i] = i;
  while (true) {
    Eigen::MatrixXd sys(k, L);  // (k-1) edge directions plus the all-ones row
    for (int i = 1; i < k; ++i) sys.row(i - 1) = (pts[combo[i]] - pts[combo[0]]).transpose();
    sys.row(k - 1).setOnes();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    lu.setThreshold(1e-10);
    if (lu.dimensionOfKernel() == 1) {
      Eigen::VectorXd normal = lu.kernel().col(0).normalized();
      double offset = normal.dot(pts[combo[0]]);
      double lo = 0.0, hi = 0.0;
      for (const auto& p : pts) {
        const double s = normal.dot(p) - offset;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      const bool below = hi <= 1e-12;
      const bool above = lo >= -1e-12;
      if (below || above) {
        if (above) {
          normal = -normal;
          offset = -offset;
        }
        // canonical sign is fixed by the side test; dedupe by value
        bool dup = false;
        for (const auto& f : facets)
          if ((f.normal - normal).lpNorm<Eigen::Infinity>() < 1e-9 && std::abs(f.offset - offset) < 1e-9) {
            dup = true;
            break;
          }
        if (!dup) facets.emplace_back(std::move(normal), offset);
      }
    }
    int i = k - 1;
    while (i >= 0 && combo[i] == np - k + i) --i;
    if (i < 0) break;
    ++combo[i];
    for (int j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
  }
  return facets;
}

}  // namespace

Envelope generate_envelope(std::uint64_t seed, int L, int n_points) {
  if (L < 1) throw std::invalid_argument("generate_envelope: L must be >= 1");
  if (n_points < L) throw std::invalid_argument("generate_envelope: need n_points >= L");
  if (L == 1) return Envelope::simplex(1);
  Rng rng(seed);
  for (int attempt = 0; attempt < 10; ++attempt) {
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < n_points; ++i) pts.push_back(rng.dirichlet(L));
    Eigen::MatrixXd d(L, n_points - 1);
    for (int i = 1; i < n_points; ++i) d.col(i - 1) = pts[i] - pts[0];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
    const auto sv = svd.singularValues();
    if (sv.size() < L - 1 || sv[L - 2] < 1e-9) continue;
    auto facets = hull_facets(pts, L);
    if (facets.size() < static_cast<std::size_t>(L)) continue;
    Envelope env = Envelope::from_halfspaces(L, std::move(facets));
    if (env.vertices().size() < static_cast<std::size_t>(L)) continue;
    return env;
  }
  throw DegenerateHull("generate_envelope: sampled points stayed affinely dependent after 10 draws");
}

ExpertSpec make_expert_spec(std::uint64_t seed, int n, int m, int L, int envelope_points) {
  ExpertSpec spec;
  spec.system = generate_system(split_seed(seed, 0), n, m, L);
  spec.envelope = generate_envelope(split_seed(seed, 1), L, envelope_points);
  spec.pmf = Eigen::VectorXd::Constant(L, 1.0 / L);
  return spec;
}

Eigen::VectorXd cost_vector(const LinearQuadraticSystem& sys, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u) {
  Eigen::VectorXd g(sys.L);
  const double action_cost = u.dot(sys.R * u);
  for (int j = 0; j < sys.L; ++j) {
    const Eigen::VectorXd next = sys.A[j] * x + sys.B[j] * u;
    g[j] = action_cost + next.dot(sys.Q * next);
  }
  return g;
}

std::vector<ScenarioQuadratic> scenario_quadratics(const LinearQuadraticSystem& sys,
                                                   const Eigen::VectorXd& x) {
  std::vector<ScenarioQuadratic> out;
  out.reserve(static_cast<std::size_t>(sys.L));
  for (int j = 0; j < sys.L; ++j) {
    const Eigen::VectorXd ax = sys.A[j] * x;
    const Eigen::MatrixXd qb = sys.Q * sys.B[j];
    ScenarioQuadratic s;
    s.hessian = 2.0 * (sys.R + sys.B[j].transpose() * qb);
    s.hessian = 0.5 * (s.hessian + s.hessian.transpose());
    s.linear = 2.0 * qb.transpose() * ax;
    s.constant = ax.dot(sys.Q * ax);
    out.push_back(std::move(s));
  }
  return out;
}

MinimaxResult minimax_action(const LinearQuadraticSystem& sys, const Envelope& envelope,
                             const Eigen::VectorXd& x, const MinimaxOptions& options) {
  MinimaxProblem p;
  p.scenarios = scenario_quadratics(sys, x);
  p.vertices = envelope.vertices();
  p.lower = sys.u_lo;
  p.upper = sys.u_hi;
  return solve_minimax(p, options);
}

MinimaxResult expert_act(const ExpertSpec& spec, const Eigen::VectorXd& x,
                         const MinimaxOptions& options) {
  return minimax_action(spec.system, spec.envelope, x, options);
}

Eigen::VectorXd step_dynamics(const LinearQuadraticSystem& sys, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u, int j, StateMode mode, Rng* rng) {
  if (j < 0 || j >= sys.L) throw std::out_of_range("step_dynamics: disturbance index out of range");
  switch (mode) {
    case StateMode::kRaw:
      return sys.A[j] * x + sys.B[j] * u;
    case StateMode::kRenormalize: {
      Eigen::VectorXd next = sys.A[j] * x + sys.B[j] * u;
      const double norm = next.norm();
      if (norm > 0.0) next /= norm;
      return next;
    }
    case StateMode::kRedraw:
      if (!rng) throw std::invalid_argument("step_dynamics: redraw mode needs an Rng");
      return rng->normal_vector(sys.n);
  }
  return x;
}

}  // namespace rsirl
