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

#include "rsirl/convex_program.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace rsirl {

namespace {

constexpr double kLog2 = 0.69314718055994530942;

double phi(Ridge::Kind kind, double z) {
  return kind == Ridge::Kind::kSquare ? z * z : shifted_softplus(z);
}
double dphi(Ridge::Kind kind, double z) {
  return kind == Ridge::Kind::kSquare ? 2.0 * z : logistic(z);
}
double ddphi(Ridge::Kind kind, double z) {
  if (kind == Ridge::Kind::kSquare) return 2.0;
  const double s = logistic(z);
  return s * (1.0 - s);
}

}  // namespace

double shifted_softplus(double z) {
  return (z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - kLog2;
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Ridge::argument(const Eigen::VectorXd& y) const {
  double z = shift;
  for (std::size_t k = 0; k < index.size(); ++k) z += weight[k] * y[index[k]];
  return z;
}

double SmoothConvexFunction::value(const Eigen::VectorXd& y) const {
  double v = constant + linear.dot(y);
  if (quadratic.size() > 0) v += 0.5 * y.dot(quadratic * y);
  for (const auto& r : ridges) v += r.coeff * phi(r.kind, r.argument(y));
  return v;
}

Eigen::VectorXd SmoothConvexFunction::gradient(const Eigen::VectorXd& y) const {
  Eigen::VectorXd g = linear;
  if (quadratic.size() > 0) g += quadratic * y;
  for (const auto& r : ridges) {
    const double d = r.coeff * dphi(r.kind, r.argument(y));
    for (std::size_t k = 0; k < r.index.size(); ++k) g[r.index[k]] += d * r.weight[k];
  }
  return g;
}

void SmoothConvexFunction::add_hessian(const Eigen::VectorXd& y, double scale,
                                       Eigen::MatrixXd& hess) const {
  if (quadratic.size() > 0) hess += scale * quadratic;
  for (const auto& r : ridges) {
    const double c = scale * r.coeff * ddphi(r.kind, r.argument(y));
    if (c == 0.0) continue;
    for (std::size_t p = 0; p < r.index.size(); ++p)
      for (std::size_t q = 0; q < r.index.size(); ++q)
        hess(r.index[p], r.index[q]) += c * r.weight[p] * r.weight[q];
  }
}

namespace {

struct Barrier {
  const ConvexProgram& prog;

  // +inf outside the strict interior
  double value(const Eigen::VectorXd& y, double t) const {
    double v = t * prog.objective.value(y);
    for (const auto& c : prog.constraints) {
      const double f = c.value(y);
      if (!(f < 0.0)) return std::numeric_limits<double>::infinity();
      v -= std::log(-f);
    }
    return v;
  }

  void derivatives(const Eigen::VectorXd& y, double t, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& hess) const {
    const int n = prog.dim;
    grad = t * prog.objective.gradient(y);
    hess.setZero(n, n);
    prog.objective.add_hessian(y, t, hess);
    std::vector<int> nz;
    for (const auto& c : prog.constraints) {
      const double f = c.value(y);
      const Eigen::VectorXd g = c.gradient(y);
      grad -= g / f;
      // Constraint gradients are mostly sparse; accumulate the outer product on the support.
      nz.clear();
      for (int i = 0; i < n; ++i)
        if (g[i] != 0.0) nz.push_back(i);
      const double w = 1.0 / (f * f);
      for (int a : nz)
        for (int b : nz) hess(a, b) += w * g[a] * g[b];
      c.add_hessian(y, -1.0 / f, hess);
    }
  }
};

Eigen::VectorXd newton_direction(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Eigen::VectorXd dx = ldlt.solve(-grad);
    if (dx.allFinite()) return dx;
  }
  const double reg = 1e-12 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
  Eigen::MatrixXd h = hess;
  h.diagonal().array() += reg;
  return h.ldlt().solve(-grad);
}

// Lagrangian gradient and active-constraint values stacked; scaled KKT residual.
double kkt_residual(const ConvexProgram& prog, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& lambda, const std::vector<int>& active) {
  Eigen::VectorXd r = prog.objective.gradient(y);
  double worst = 0.0;
  for (std::size_t k = 0; k < active.size(); ++k) {
    const auto& c = prog.constraints[static_cast<std::size_t>(active[k])];
    r += lambda[static_cast<int>(k)] * c.gradient(y);
    worst = std::max(worst, std::abs(c.value(y)));
  }
  return std::max(r.lpNorm<Eigen::Infinity>(), worst);
}

bool refine_kkt(const ConvexProgram& prog, ConvexSolution& sol, double t) {
  const int n = prog.dim;
  const int m = static_cast<int>(prog.constraints.size());
  std::vector<int> active;
  for (int i = 0; i < m; ++i) {
    const double slack = -prog.constraints[static_cast<std::size_t>(i)].value(sol.y);
    if (slack < 1.0 / std::sqrt(t)) active.push_back(i);
  }
  const int na = static_cast<int>(active.size());
  Eigen::VectorXd y = sol.y;
  Eigen::VectorXd lambda(na);
  for (int k = 0; k < na; ++k) lambda[k] = sol.multipliers[active[static_cast<std::size_t>(k)]];

  const double scale = 1.0 + prog.objective.gradient(y).lpNorm<Eigen::Infinity>();
  double residual = kkt_residual(prog, y, lambda, active);
  for (int iter = 0; iter < 30 && residual > 1e-15 * scale; ++iter) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n + na, n + na);
    Eigen::VectorXd rhs(n + na);
    Eigen::MatrixXd hl = Eigen::MatrixXd::Zero(n, n);
    prog.objective.add_hessian(y, 1.0, hl);
    Eigen::VectorXd lg = prog.objective.gradient(y);
    for (int k = 0; k < na; ++k) {
      const auto& c = prog.constraints[static_cast<std::size_t>(active[static_cast<std::size_t>(k)])];
      c.add_hessian(y, lambda[k], hl);
      const Eigen::VectorXd g = c.gradient(y);
      lg += lambda[k] * g;
      jac.block(n + k, 0, 1, n) = g.transpose();
      jac.block(0, n + k, n, 1) = g;
      rhs[n + k] = -c.value(y);
    }
    jac.topLeftCorner(n, n) = hl;
    rhs.head(n) = -lg;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
    const Eigen::VectorXd step = cod.solve(rhs);
    if (!step.allFinite()) return false;
    Eigen::VectorXd y_new = y + step.head(n);
    Eigen::VectorXd l_new = lambda + step.tail(na);
    const double r_new = kkt_residual(prog, y_new, l_new, active);
    if (!(r_new < residual)) break;
    y = std::move(y_new);
    lambda = std::move(l_new);
    residual = r_new;
  }
  if (residual > 1e-9 * scale) return false;
  for (int k = 0; k < na; ++k)
    if (lambda[k] < -1e-10 * scale) return false;
  for (int i = 0; i < m; ++i) {
    const auto& c = prog.constraints[static_cast<std::size_t>(i)];
    if (c.value(y) > 1e-12 * (1.0 + c.gradient(y).lpNorm<Eigen::Infinity>())) return false;
  }
  const double obj = prog.objective.value(y);
  if (obj > sol.objective + 1e-9 * (1.0 + std::abs(sol.objective))) return false;

  sol.y = std::move(y);
  sol.objective = obj;
  sol.multipliers.setZero();
  for (int k = 0; k < na; ++k) sol.multipliers[active[static_cast<std::size_t>(k)]] = std::max(lambda[k], 0.0);
  sol.kkt_residual = residual;
  sol.refined = true;
  return true;
}

}  // namespace

ConvexSolution solve_convex(const ConvexProgram& program, const Eigen::VectorXd& start,
                            const ConvexOptions& options) {
  if (start.size() != program.dim) throw std::invalid_argument("solve_convex: start has wrong size");
  for (const auto& c : program.constraints)
    if (!(c.value(start) < 0.0)) throw std::invalid_argument("solve_convex: start is not strictly feasible");

  const Barrier barrier{program};
  const double m = static_cast<double>(program.constraints.size());
  Eigen::VectorXd y = start;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  double t = options.initial_t;

  while (true) {
    for (int it = 0; it < options.max_newton_steps; ++it) {
      barrier.derivatives(y, t, grad, hess);
      const Eigen::VectorXd dx = newton_direction(hess, grad);
      const double decrement = -grad.dot(dx);
      if (!(decrement > 2.0 * options.newton_tolerance)) break;
      const double f0 = barrier.value(y, t);
      double s = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Eigen::VectorXd cand = y + s * dx;
        if (barrier.value(cand, t) <= f0 - 0.25 * s * decrement) {
          moved = (s * dx).lpNorm<Eigen::Infinity>() > 1e-15 * (1.0 + y.lpNorm<Eigen::Infinity>());
          y = cand;
          break;
        }
        s *= 0.5;
      }
      if (!moved) break;
    }
    const double obj = program.objective.value(y);
    if (m == 0.0 || m / t <= options.gap_tolerance * std::max(1.0, std::abs(obj))) break;
    if (t > 1e16) break;
    t *= options.t_growth;
  }

  ConvexSolution sol;
  sol.y = y;
  sol.objective = program.objective.value(y);
  sol.duality_gap = m / t;
  sol.multipliers.resize(static_cast<int>(program.constraints.size()));
  for (std::size_t i = 0; i < program.constraints.size(); ++i)
    sol.multipliers[static_cast<int>(i)] = 1.0 / (t * -program.constraints[i].value(y));
  {
    Eigen::VectorXd lg = program.objective.gradient(y);
    for (std::size_t i = 0; i < program.constraints.size(); ++i)
      lg += sol.multipliers[static_cast<int>(i)] * program.constraints[i].gradient(y);
    sol.kkt_residual = lg.lpNorm<Eigen::Infinity>();
  }
  if (options.refine) refine_kkt(program, sol, t);
  return sol;
}

}  // namespace rsirl
