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

#include "rsirl/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "rsirl/convex_program.hpp"
#include "rsirl/errors.hpp"
#include "rsirl/rng.hpp"

namespace rsirl {

double ScenarioQuadratic::value(const Eigen::VectorXd& u) const {
  return 0.5 * u.dot(hessian * u) + linear.dot(u) + constant;
}

Eigen::VectorXd ScenarioQuadratic::gradient(const Eigen::VectorXd& u) const {
  return hessian * u + linear;
}

void MinimaxProblem::validate() const {
  const int m = action_dim();
  if (m < 1 || upper.size() != m) throw std::invalid_argument("MinimaxProblem: bad action box");
  for (int i = 0; i < m; ++i)
    if (!(lower[i] <= upper[i])) throw std::invalid_argument("MinimaxProblem: lower > upper");
  if (scenarios.empty()) throw std::invalid_argument("MinimaxProblem: no scenarios");
  if (vertices.empty()) throw std::invalid_argument("MinimaxProblem: empty vertex set");
  for (const auto& s : scenarios) {
    if (s.hessian.rows() != m || s.hessian.cols() != m || s.linear.size() != m)
      throw std::invalid_argument("MinimaxProblem: scenario dimension mismatch");
    if ((s.hessian - s.hessian.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + s.hessian.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("MinimaxProblem: Hessian is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.hessian, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-8) throw std::invalid_argument("MinimaxProblem: Hessian is not PSD");
  }
  for (const auto& v : vertices) {
    if (v.size() != static_cast<int>(scenarios.size()))
      throw std::invalid_argument("MinimaxProblem: vertex dimension mismatch");
    if (v.minCoeff() < -1e-9 || std::abs(v.sum() - 1.0) > 1e-9)
      throw std::invalid_argument("MinimaxProblem: vertex is not on the simplex");
  }
}

double MinimaxProblem::objective(const Eigen::VectorXd& u) const {
  Eigen::VectorXd g(static_cast<int>(scenarios.size()));
  for (std::size_t j = 0; j < scenarios.size(); ++j) g[static_cast<int>(j)] = scenarios[j].value(u);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) best = std::max(best, v.dot(g));
  return best;
}

namespace {

// Vertex-weighted quadratics packed for the subgradient inner loop.
struct Packed {
  int m = 0;
  int count = 0;
  std::vector<double> hess;  // count * m * m
  std::vector<double> lin;   // count * m
  std::vector<double> cst;   // count

  double eval(int i, const double* u, double* grad) const {
    const double* h = hess.data() + static_cast<std::size_t>(i) * m * m;
    const double* c = lin.data() + static_cast<std::size_t>(i) * m;
    double v = cst[static_cast<std::size_t>(i)];
    for (int r = 0; r < m; ++r) {
      double hu = 0.0;
      for (int k = 0; k < m; ++k) hu += h[r * m + k] * u[k];
      if (grad) grad[r] = hu + c[r];
      v += u[r] * (0.5 * hu + c[r]);
    }
    return v;
  }

  double max_value(const double* u, int* arg) const {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) {
      const double v = eval(i, u, nullptr);
      if (v > best) {
        best = v;
        if (arg) *arg = i;
      }
    }
    return best;
  }
};

Packed pack(const MinimaxProblem& p, const std::vector<Eigen::VectorXd>& vertices) {
  Packed out;
  out.m = p.action_dim();
  out.count = static_cast<int>(vertices.size());
  const int m = out.m;
  out.hess.assign(static_cast<std::size_t>(out.count) * m * m, 0.0);
  out.lin.assign(static_cast<std::size_t>(out.count) * m, 0.0);
  out.cst.assign(static_cast<std::size_t>(out.count), 0.0);
  for (int i = 0; i < out.count; ++i) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
    double k = 0.0;
    for (std::size_t j = 0; j < p.scenarios.size(); ++j) {
      const double w = vertices[static_cast<std::size_t>(i)][static_cast<int>(j)];
      if (w == 0.0) continue;
      h += w * p.scenarios[j].hessian;
      c += w * p.scenarios[j].linear;
      k += w * p.scenarios[j].constant;
    }
    for (int r = 0; r < m; ++r) {
      for (int s = 0; s < m; ++s) out.hess[static_cast<std::size_t>(i) * m * m + r * m + s] = 0.5 * (h(r, s) + h(s, r));
      out.lin[static_cast<std::size_t>(i) * m + r] = c[r];
    }
    out.cst[static_cast<std::size_t>(i)] = k;
  }
  return out;
}

std::vector<Eigen::VectorXd> unique_vertices(const std::vector<Eigen::VectorXd>& vertices) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& v : vertices) {
    bool dup = false;
    for (const auto& w : out)
      if ((v - w).lpNorm<Eigen::Infinity>() <= 1e-12) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(v);
  }
  return out;
}

struct Candidate {
  Eigen::VectorXd u;
  double value;
  bool certified = false;  // KKT point verified, or barrier gap certificate
};

Candidate subgradient_run(const Packed& q, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                          Eigen::VectorXd u, int iterations) {
  const int m = q.m;
  const double width = (hi - lo).maxCoeff();
  const double step0 = width > 0.0 ? 0.5 * width : 1.0;
  std::vector<double> grad(static_cast<std::size_t>(m));
  Candidate best{u, q.max_value(u.data(), nullptr)};
  for (int t = 1; t <= iterations; ++t) {
    int arg = 0;
    const double val = q.max_value(u.data(), &arg);
    if (val < best.value) best = {u, val};
    q.eval(arg, u.data(), grad.data());
    double norm = 0.0;
    for (double g : grad) norm += g * g;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    const double step = step0 / std::sqrt(static_cast<double>(t)) / norm;
    for (int r = 0; r < m; ++r) u[r] = std::clamp(u[r] - step * grad[static_cast<std::size_t>(r)], lo[r], hi[r]);
  }
  const double val = q.max_value(u.data(), nullptr);
  if (val < best.value) best = {u, val};
  return best;
}

// Unconstrained minimizer of the active vertex's quadratic, clamped to the box.
Candidate clamped_active_solve(const Packed& q, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                               const Eigen::VectorXd& u) {
  const int m = q.m;
  int arg = 0;
  q.max_value(u.data(), &arg);
  Eigen::Map<const Eigen::MatrixXd> h(q.hess.data() + static_cast<std::size_t>(arg) * m * m, m, m);
  Eigen::Map<const Eigen::VectorXd> c(q.lin.data() + static_cast<std::size_t>(arg) * m, m);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
  Eigen::VectorXd x = u;
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.vectorD().minCoeff() > 1e-14) {
    x = ldlt.solve(-c);
    if (!x.allFinite()) x = u;
  }
  x = x.cwiseMax(lo).cwiseMin(hi);
  return {x, q.max_value(x.data(), nullptr)};
}

// Epigraph program over (u, tau): tau >= q_i(u), lo <= u <= hi.
Candidate interior_point_polish(const Packed& q, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                const Eigen::VectorXd& u_start) {
  const int m = q.m;
  ConvexProgram prog;
  prog.dim = m + 1;
  prog.objective = SmoothConvexFunction(m + 1);
  prog.objective.linear[m] = 1.0;
  for (int i = 0; i < q.count; ++i) {
    SmoothConvexFunction f(m + 1);
    f.quadratic = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (int r = 0; r < m; ++r) {
      for (int s = 0; s < m; ++s) f.quadratic(r, s) = q.hess[static_cast<std::size_t>(i) * m * m + r * m + s];
      f.linear[r] = q.lin[static_cast<std::size_t>(i) * m + r];
    }
    f.linear[m] = -1.0;
    f.constant = q.cst[static_cast<std::size_t>(i)];
    prog.constraints.push_back(std::move(f));
  }
  std::vector<int> fixed;
  for (int r = 0; r < m; ++r) {
    if (hi[r] - lo[r] <= 0.0) {
      fixed.push_back(r);
      continue;
    }
    SmoothConvexFunction up(m + 1), down(m + 1);
    up.linear[r] = 1.0;
    up.constant = -hi[r];
    down.linear[r] = -1.0;
    down.constant = lo[r];
    prog.constraints.push_back(std::move(up));
    prog.constraints.push_back(std::move(down));
  }
  if (!fixed.empty()) {
    // degenerate box component: pin it with an equality-free substitution
    return clamped_active_solve(q, lo, hi, u_start);
  }
  Eigen::VectorXd start(m + 1);
  for (int r = 0; r < m; ++r) {
    const double margin = 1e-3 * (hi[r] - lo[r]);
    start[r] = std::clamp(u_start[r], lo[r] + margin, hi[r] - margin);
  }
  const double phi = q.max_value(start.data(), nullptr);
  start[m] = phi + 1e-2 * (1.0 + std::abs(phi));
  ConvexOptions opt;
  opt.initial_t = 1.0 / (1e-2 * (1.0 + std::abs(phi)));
  const ConvexSolution sol = solve_convex(prog, start, opt);
  Eigen::VectorXd u = sol.y.head(m).cwiseMax(lo).cwiseMin(hi);
  // The barrier gap bounds suboptimality when the KKT polish was not accepted.
  const double value = q.max_value(u.data(), nullptr);
  const bool gap_ok = sol.duality_gap <= 1e-8 * std::max(1.0, std::abs(value));
  return {u, value, sol.refined || gap_ok};
}

}  // namespace

MinimaxResult solve_minimax(const MinimaxProblem& problem, const MinimaxOptions& options) {
  problem.validate();
  const Eigen::VectorXd& lo = problem.lower;
  const Eigen::VectorXd& hi = problem.upper;
  const int m = problem.action_dim();
  const Packed q = pack(problem, unique_vertices(problem.vertices));

  Rng rng(options.seed);
  std::vector<Candidate> runs;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    Eigen::VectorXd start(m);
    for (int k = 0; k < m; ++k) start[k] = r == 0 ? 0.5 * (lo[k] + hi[k]) : rng.uniform(lo[k], hi[k]);
    runs.push_back(subgradient_run(q, lo, hi, std::move(start), options.iterations));
  }
  auto best_run = std::min_element(runs.begin(), runs.end(),
                                   [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  Candidate best = *best_run;
  MinimaxResult result;

  const Candidate active = clamped_active_solve(q, lo, hi, best.u);
  if (active.value < best.value) best = active;
  if (options.polish) {
    const Candidate polished = interior_point_polish(q, lo, hi, best.u);
    if (polished.value <= best.value) {
      result.polished = polished.value < best.value;
      best = polished;
    } else if (polished.certified &&
               polished.value <= best.value + 1e-9 * std::max(1.0, std::abs(best.value))) {
      // best lies within tolerance of the certified optimum
      best.certified = true;
    }
  }

  // A certified point is the global optimum of this convex problem. Without a
  // certificate the restarts themselves must agree.
  if (!best.certified) {
    const double scale = std::max(1.0, std::abs(best.value));
    for (const auto& run : runs) {
      if (run.value > best.value + 10.0 * options.tau_tolerance * scale) {
        std::ostringstream os;
        os << "solve_minimax: restart value " << run.value << " disagrees with best " << best.value;
        throw NotConverged(os.str());
      }
    }
  }
  result.u = best.u;
  result.tau = problem.objective(best.u);
  return result;
}

}  // namespace rsirl
