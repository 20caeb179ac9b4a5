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

#include "rsirl/stage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rsirl/errors.hpp"

namespace rsirl {

void StageConfig::validate() const {
  if (n_p < 1) throw ConfigError("stage: n_p must be >= 1");
  if (n_r < 0) throw ConfigError("stage: n_r must be >= 0");
  if (N != n_p + n_r) throw ConfigError("stage: N must equal n_p + n_r");
  if (ramp_up < 0) throw ConfigError("stage: ramp-up stage count must be >= 0");
  if (ramp_pmf.empty()) throw ConfigError("stage: ramp-up pmf is empty");
  double total = 0.0;
  for (double p : ramp_pmf) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("stage: ramp-up pmf entries must be >= 0");
    total += p;
  }
  if (!(total > 0.0)) throw ConfigError("stage: ramp-up pmf sums to zero");
}

Eigen::VectorXd StageConfig::normalized_pmf() const {
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(ramp_pmf.data(), static_cast<Eigen::Index>(ramp_pmf.size()));
  return p / p.sum();
}

double shape_value(ScalarShape shape, double s) {
  switch (shape) {
    case ScalarShape::kSquare: return s * s;
    case ScalarShape::kPositiveSoftplus: return s > 0.0 ? shifted_softplus(s) : 0.0;
    case ScalarShape::kAbsSoftplus: return shifted_softplus(std::abs(s));
  }
  return 0.0;
}

double shape_derivative(ScalarShape shape, double s) {
  switch (shape) {
    case ScalarShape::kSquare: return 2.0 * s;
    case ScalarShape::kPositiveSoftplus:
      if (s > 0.0) return logistic(s);
      return s < 0.0 ? 0.0 : 0.25;
    case ScalarShape::kAbsSoftplus:
      if (s > 0.0) return logistic(s);
      return s < 0.0 ? -logistic(-s) : 0.0;
  }
  return 0.0;
}

std::pair<double, double> shape_kink_interval(ScalarShape shape) {
  switch (shape) {
    case ScalarShape::kPositiveSoftplus: return {0.0, 0.5};
    case ScalarShape::kAbsSoftplus: return {-0.5, 0.5};
    case ScalarShape::kSquare: break;
  }
  return {0.0, 0.0};
}

double StageTerm::argument(const Eigen::VectorXd& y) const {
  double s = shift;
  for (std::size_t k = 0; k < index.size(); ++k) s += weight[k] * y[index[k]];
  return s;
}

namespace {

// An action slot is either a decision variable or a fixed value.
struct Slot {
  int index = -1;
  double value = 0.0;
};

struct Affine {
  std::vector<double> coeff;  // per slot
  double constant = 0.0;
};

void emit(int group, int step, int feature, double coeff, ScalarShape shape, const Affine& arg,
          const std::vector<Slot>& slots, std::vector<StageTerm>& out) {
  if (coeff == 0.0) return;
  StageTerm t;
  t.group = group;
  t.step = step;
  t.feature = feature;
  t.coeff = coeff;
  t.shape = shape;
  t.shift = arg.constant;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double c = arg.coeff[i];
    if (c == 0.0) continue;
    if (slots[i].index >= 0) {
      t.index.push_back(slots[i].index);
      t.weight.push_back(c);
    } else {
      t.shift += c * slots[i].value;
    }
  }
  out.push_back(std::move(t));
}

// Feature terms of steps k_begin..k_end of the branch whose leader follows
// w_prev before step n_p and j from then on. slots[0] is the previous stage's
// last action, slots[i] the action of step i.
void append_branch(const StageContext& ctx, const Eigen::Vector4d& alpha, int group, int j,
                   const std::vector<Slot>& slots, int k_begin, int k_end,
                   std::vector<StageTerm>& out) {
  const auto& fp = ctx.features;
  const double dt = ctx.model.dt;
  const int n_p = ctx.config.n_p;
  const std::size_t n_slots = slots.size();
  const double xr1 = ctx.x1[2] - ctx.x1[0];
  const double vr1 = ctx.x1[3] - ctx.x1[1];
  auto accel = [&](int i) {
    return ctx.model.leader_accel[static_cast<std::size_t>(i < n_p ? ctx.w_prev : j)];
  };

  for (int k = k_begin; k <= k_end; ++k) {
    Affine xr{std::vector<double>(n_slots, 0.0), xr1 + k * dt * vr1};
    Affine vr{std::vector<double>(n_slots, 0.0), vr1};
    for (int i = 1; i <= k; ++i) {
      const double lever = dt * dt * (k - i + 0.5);
      xr.constant += lever * accel(i);
      xr.coeff[static_cast<std::size_t>(i)] -= lever;
      vr.constant += dt * accel(i);
      vr.coeff[static_cast<std::size_t>(i)] -= dt;
    }
    Affine s1 = xr;
    s1.constant = -fp.r1 * (xr.constant - fp.x0);
    for (double& c : s1.coeff) c *= -fp.r1;
    Affine s2 = xr;
    s2.constant = fp.r2 * (xr.constant - fp.x0);
    for (double& c : s2.coeff) c *= fp.r2;
    Affine s3{std::vector<double>(n_slots, 0.0), 0.0};
    s3.coeff[static_cast<std::size_t>(k)] = 1.0;
    s3.coeff[static_cast<std::size_t>(k - 1)] = -1.0;
    Affine s4 = vr;
    s4.constant *= fp.r4;
    for (double& c : s4.coeff) c *= fp.r4;

    emit(group, k, 0, alpha[0], ScalarShape::kPositiveSoftplus, s1, slots, out);
    emit(group, k, 1, alpha[1], ScalarShape::kPositiveSoftplus, s2, slots, out);
    emit(group, k, 2, alpha[2] * fp.r3, ScalarShape::kSquare, s3, slots, out);
    emit(group, k, 3, alpha[3], ScalarShape::kAbsSoftplus, s4, slots, out);
  }
}

std::vector<Slot> full_slots(const StageContext& ctx, int j) {
  const int n_p = ctx.config.n_p;
  std::vector<Slot> slots(static_cast<std::size_t>(ctx.config.N + 1));
  slots[0].value = ctx.u_prev;
  for (int i = 1; i <= ctx.config.N; ++i)
    slots[static_cast<std::size_t>(i)].index = i <= n_p ? i - 1 : ctx.react_offset(j) + (i - n_p - 1);
  return slots;
}

void check_context(const StageContext& ctx) {
  ctx.config.validate();
  ctx.model.validate();
  if (ctx.w_prev < 0 || ctx.w_prev >= ctx.model.L())
    throw std::out_of_range("stage: previous disturbance index out of range");
}

}  // namespace

std::vector<StageTerm> stage_terms(const StageContext& ctx, const Eigen::Vector4d& alpha) {
  check_context(ctx);
  std::vector<StageTerm> out;
  const int n_p = ctx.config.n_p;
  append_branch(ctx, alpha, -1, ctx.w_prev, full_slots(ctx, 0), 1, n_p - 1, out);
  for (int j = 0; j < ctx.model.L(); ++j)
    append_branch(ctx, alpha, j, j, full_slots(ctx, j), n_p, ctx.config.N, out);
  return out;
}

std::vector<StageTerm> react_terms(const StageContext& ctx, const Eigen::VectorXd& prepare, int j,
                                   const Eigen::Vector4d& alpha) {
  check_context(ctx);
  const int n_p = ctx.config.n_p;
  if (prepare.size() != n_p) throw std::invalid_argument("react_terms: prepare length mismatch");
  std::vector<Slot> slots(static_cast<std::size_t>(ctx.config.N + 1));
  slots[0].value = ctx.u_prev;
  for (int i = 1; i <= ctx.config.N; ++i) {
    if (i <= n_p)
      slots[static_cast<std::size_t>(i)].value = prepare[i - 1];
    else
      slots[static_cast<std::size_t>(i)].index = i - n_p - 1;
  }
  std::vector<StageTerm> out;
  append_branch(ctx, alpha, j, j, slots, n_p, ctx.config.N, out);
  return out;
}

Eigen::VectorXd pack_decision(const StageContext& ctx, const Eigen::VectorXd& prepare,
                              const std::vector<Eigen::VectorXd>& reacts) {
  const int n_r = ctx.config.n_r;
  if (prepare.size() != ctx.config.n_p || static_cast<int>(reacts.size()) != ctx.model.L())
    throw std::invalid_argument("pack_decision: shape mismatch");
  Eigen::VectorXd y(ctx.decision_dim());
  y.head(ctx.config.n_p) = prepare;
  for (int j = 0; j < ctx.model.L(); ++j) {
    if (reacts[static_cast<std::size_t>(j)].size() != n_r)
      throw std::invalid_argument("pack_decision: react length mismatch");
    y.segment(ctx.react_offset(j), n_r) = reacts[static_cast<std::size_t>(j)];
  }
  return y;
}

double stage_prepare_cost(const StageContext& ctx, const Eigen::VectorXd& y, const Eigen::Vector4d& alpha) {
  double c = 0.0;
  for (const auto& t : stage_terms(ctx, alpha))
    if (t.group < 0) c += t.value(y);
  return c;
}

Eigen::VectorXd stage_tail_costs(const StageContext& ctx, const Eigen::VectorXd& y,
                                 const Eigen::Vector4d& alpha) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(ctx.model.L());
  for (const auto& t : stage_terms(ctx, alpha))
    if (t.group >= 0) g[t.group] += t.value(y);
  return g;
}

StageGradients stage_gradients(const StageContext& ctx, const Eigen::VectorXd& y,
                               const Eigen::Vector4d& alpha) {
  StageGradients out{Eigen::VectorXd::Zero(y.size()), Eigen::MatrixXd::Zero(y.size(), ctx.model.L())};
  for (const auto& t : stage_terms(ctx, alpha)) {
    const double d = t.coeff * shape_derivative(t.shape, t.argument(y));
    for (std::size_t k = 0; k < t.index.size(); ++k) {
      if (t.group < 0)
        out.prepare[t.index[k]] += d * t.weight[k];
      else
        out.tail(t.index[k], t.group) += d * t.weight[k];
    }
  }
  return out;
}

std::vector<CarState> rollout_branch(const StageContext& ctx, const Eigen::VectorXd& prepare,
                                     const Eigen::VectorXd& react, int j) {
  const int n_p = ctx.config.n_p;
  std::vector<CarState> states;
  CarState x = ctx.x1;
  for (int k = 1; k <= ctx.config.N; ++k) {
    const double u = k <= n_p ? prepare[k - 1] : react[k - n_p - 1];
    x = car_step(ctx.model, x, u, k < n_p ? ctx.w_prev : j);
    states.push_back(x);
  }
  return states;
}

// ---------------------------------------------------------------------------
// Planning

namespace {

// Epigraph form of a sum of stage terms: square terms stay as ridges, every
// softplus-shaped term gets an auxiliary variable t >= shape(s).
struct Epigraph {
  ConvexProgram program;
  std::vector<int> aux;  // per term, -1 when the term has no auxiliary variable
  int n_u = 0;
};

bool needs_aux(const StageTerm& t) { return t.shape != ScalarShape::kSquare && !t.index.empty(); }

Epigraph make_epigraph(int n_u, const std::vector<StageTerm>& terms, int extra, double lo, double hi) {
  Epigraph e;
  e.n_u = n_u;
  int dim = n_u + extra;
  e.aux.assign(terms.size(), -1);
  for (std::size_t q = 0; q < terms.size(); ++q)
    if (needs_aux(terms[q])) e.aux[q] = dim++;
  e.program.dim = dim;
  e.program.objective = SmoothConvexFunction(dim);
  for (int i = 0; i < n_u; ++i) {
    SmoothConvexFunction up(dim), dn(dim);
    up.linear[i] = 1.0;
    up.constant = -hi;
    dn.linear[i] = -1.0;
    dn.constant = lo;
    e.program.constraints.push_back(std::move(up));
    e.program.constraints.push_back(std::move(dn));
  }
  for (std::size_t q = 0; q < terms.size(); ++q) {
    const int a = e.aux[q];
    if (a < 0) continue;
    const auto& t = terms[q];
    auto piece = [&](double sign) {
      SmoothConvexFunction f(dim);
      Ridge r;
      r.kind = Ridge::Kind::kShiftedSoftplus;
      r.index = t.index;
      r.weight = t.weight;
      for (double& w : r.weight) w *= sign;
      r.shift = sign * t.shift;
      f.ridges.push_back(std::move(r));
      f.linear[a] = -1.0;
      return f;
    };
    e.program.constraints.push_back(piece(1.0));
    if (t.shape == ScalarShape::kAbsSoftplus) {
      e.program.constraints.push_back(piece(-1.0));
    } else {
      SmoothConvexFunction f(dim);
      f.linear[a] = -1.0;
      e.program.constraints.push_back(std::move(f));
    }
  }
  return e;
}

// Adds scale * term to f in epigraph form.
void add_term(SmoothConvexFunction& f, const Epigraph& e, const std::vector<StageTerm>& terms,
              std::size_t q, double scale) {
  const auto& t = terms[q];
  if (t.index.empty()) {
    f.constant += scale * t.coeff * shape_value(t.shape, t.shift);
  } else if (e.aux[q] >= 0) {
    f.linear[e.aux[q]] += scale * t.coeff;
  } else {
    Ridge r;
    r.kind = Ridge::Kind::kSquare;
    r.coeff = scale * t.coeff;
    r.index = t.index;
    r.weight = t.weight;
    r.shift = t.shift;
    f.ridges.push_back(std::move(r));
  }
}

// Strictly feasible start: actions pulled off the box, auxiliaries above their pieces.
Eigen::VectorXd epigraph_start(const Epigraph& e, const std::vector<StageTerm>& terms,
                               const Eigen::VectorXd& u, double lo, double hi) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(e.program.dim);
  const double margin = 1e-3 * (hi - lo);
  for (int i = 0; i < e.n_u; ++i) y[i] = std::clamp(u[i], lo + margin, hi - margin);
  for (std::size_t q = 0; q < terms.size(); ++q)
    if (e.aux[q] >= 0)
      y[e.aux[q]] = shape_value(terms[q].shape, terms[q].argument(y)) + 1.0;
  return y;
}

double terms_value(const std::vector<StageTerm>& terms, const Eigen::VectorXd& y, int group) {
  double v = 0.0;
  for (const auto& t : terms)
    if (t.group == group) v += t.value(y);
  return v;
}

struct Evaluated {
  double tau = 0.0;
  double objective = 0.0;
};

Evaluated evaluate_plan(const std::vector<StageTerm>& terms, const Envelope& envelope,
                        const Eigen::VectorXd& y, int L) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(L);
  double prep = 0.0;
  for (const auto& t : terms) {
    if (t.group < 0)
      prep += t.value(y);
    else
      g[t.group] += t.value(y);
  }
  const double tau = envelope.support(g);
  return {tau, prep + tau};
}

ConvexOptions polish_options(const PlannerOptions& options, double scale) {
  ConvexOptions c = options.convex;
  c.initial_t = std::max(c.initial_t, 1.0 / (1e-2 * (1.0 + std::abs(scale))));
  return c;
}

// Joint epigraph solve of the full stage problem from the given decision vector.
std::optional<std::pair<Eigen::VectorXd, bool>> polish_stage(const StageContext& ctx,
                                                             const Envelope& envelope,
                                                             const std::vector<StageTerm>& terms,
                                                             const Eigen::VectorXd& start,
                                                             const PlannerOptions& options) {
  const int n_u = ctx.decision_dim();
  const double lo = ctx.model.u_lo;
  const double hi = ctx.model.u_hi;
  Epigraph e = make_epigraph(n_u, terms, 1, lo, hi);
  const int tau = n_u;
  auto& prog = e.program;
  prog.objective.linear[tau] = 1.0;
  for (std::size_t q = 0; q < terms.size(); ++q)
    if (terms[q].group < 0) add_term(prog.objective, e, terms, q, 1.0);
  const std::size_t first_vertex = prog.constraints.size();
  for (const auto& v : envelope.vertices()) {
    SmoothConvexFunction f(prog.dim);
    f.linear[tau] = -1.0;
    for (std::size_t q = 0; q < terms.size(); ++q) {
      const int j = terms[q].group;
      if (j >= 0 && v[j] > 0.0) add_term(f, e, terms, q, v[j]);
    }
    prog.constraints.push_back(std::move(f));
  }
  Eigen::VectorXd y0 = epigraph_start(e, terms, start, lo, hi);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t c = first_vertex; c < prog.constraints.size(); ++c)
    worst = std::max(worst, prog.constraints[c].value(y0));
  y0[tau] = worst + 1e-2 * (1.0 + std::abs(worst));
  try {
    ConvexSolution sol = solve_convex(prog, y0, polish_options(options, prog.objective.value(y0)));
    return std::make_pair(Eigen::VectorXd(sol.y.head(n_u)), sol.refined);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

std::optional<std::pair<Eigen::VectorXd, bool>> polish_react(const StageContext& ctx,
                                                             const std::vector<StageTerm>& terms,
                                                             const Eigen::VectorXd& start,
                                                             const PlannerOptions& options) {
  const int n_r = ctx.config.n_r;
  Epigraph e = make_epigraph(n_r, terms, 0, ctx.model.u_lo, ctx.model.u_hi);
  for (std::size_t q = 0; q < terms.size(); ++q) add_term(e.program.objective, e, terms, q, 1.0);
  const Eigen::VectorXd y0 = epigraph_start(e, terms, start, ctx.model.u_lo, ctx.model.u_hi);
  try {
    ConvexSolution sol = solve_convex(e.program, y0, polish_options(options, e.program.objective.value(y0)));
    return std::make_pair(Eigen::VectorXd(sol.y.head(n_r)), sol.refined);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

// Enumerates every grid sequence of `length` steps; visit(sequence) for each.
template <class Visit>
void for_each_sequence(const std::vector<double>& grid, int length, Eigen::VectorXd& seq,
                       Visit&& visit) {
  const int G = static_cast<int>(grid.size());
  std::vector<int> digit(static_cast<std::size_t>(length), 0);
  for (int i = 0; i < length; ++i) seq[i] = grid[0];
  while (true) {
    visit(seq);
    int pos = length - 1;
    while (pos >= 0 && digit[static_cast<std::size_t>(pos)] == G - 1) {
      digit[static_cast<std::size_t>(pos)] = 0;
      seq[pos] = grid[0];
      --pos;
    }
    if (pos < 0) return;
    seq[pos] = grid[static_cast<std::size_t>(++digit[static_cast<std::size_t>(pos)])];
  }
}

}  // namespace

std::vector<double> action_grid(const CarModel& model, const PlannerOptions& options) {
  if (!options.grid.empty()) {
    for (double a : options.grid)
      if (a < model.u_lo - 1e-12 || a > model.u_hi + 1e-12)
        throw std::invalid_argument("action grid leaves the action bounds");
    return options.grid;
  }
  if (options.grid_levels < 1) throw std::invalid_argument("action grid needs at least one level");
  std::vector<double> g(static_cast<std::size_t>(options.grid_levels));
  if (options.grid_levels == 1) {
    g[0] = 0.5 * (model.u_lo + model.u_hi);
    return g;
  }
  for (int i = 0; i < options.grid_levels; ++i)
    g[static_cast<std::size_t>(i)] =
        model.u_lo + (model.u_hi - model.u_lo) * i / static_cast<double>(options.grid_levels - 1);
  return g;
}

StagePlan plan_stage(const StageContext& ctx, const Envelope& envelope, const Eigen::Vector4d& alpha,
                     const PlannerOptions& options) {
  check_context(ctx);
  if (envelope.dim() != ctx.model.L()) throw std::invalid_argument("plan_stage: envelope dimension mismatch");
  const int L = ctx.model.L();
  const int n_p = ctx.config.n_p;
  const int n_r = ctx.config.n_r;
  const std::vector<StageTerm> terms = stage_terms(ctx, alpha);

  std::vector<std::vector<std::size_t>> by_group(static_cast<std::size_t>(L + 1));
  for (std::size_t q = 0; q < terms.size(); ++q)
    by_group[static_cast<std::size_t>(terms[q].group + 1)].push_back(q);
  auto group_value = [&](int group, const Eigen::VectorXd& y) {
    double v = 0.0;
    for (std::size_t q : by_group[static_cast<std::size_t>(group + 1)]) v += terms[q].value(y);
    return v;
  };

  Eigen::VectorXd best_y = Eigen::VectorXd::Zero(ctx.decision_dim());
  if (options.mode == PlannerOptions::Mode::kConvex) {
    best_y.setConstant(0.5 * (ctx.model.u_lo + ctx.model.u_hi));
  } else {
    const std::vector<double> grid = action_grid(ctx.model, options);
    const double G = static_cast<double>(grid.size());
    const double nodes = std::pow(G, n_p) * (1.0 + L * std::pow(G, n_r));
    if (nodes > options.node_cap)
      throw GridTooLarge("stage grid has " + std::to_string(nodes) + " nodes, above the cap of " +
                         std::to_string(options.node_cap));
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd y = Eigen::VectorXd::Zero(ctx.decision_dim());
    Eigen::VectorXd prep(n_p), react(n_r);
    Eigen::VectorXd g(L);
    for_each_sequence(grid, n_p, prep, [&](const Eigen::VectorXd& p) {
      y.head(n_p) = p;
      for (int j = 0; j < L; ++j) {
        double best_j = std::numeric_limits<double>::infinity();
        Eigen::VectorXd arg = Eigen::VectorXd::Zero(n_r);
        auto consider = [&](const Eigen::VectorXd& r) {
          y.segment(ctx.react_offset(j), n_r) = r;
          const double c = group_value(j, y);
          if (c < best_j) {
            best_j = c;
            arg = r;
          }
        };
        if (n_r == 0)
          consider(react);
        else
          for_each_sequence(grid, n_r, react, consider);
        y.segment(ctx.react_offset(j), n_r) = arg;
        g[j] = best_j;
      }
      const double obj = group_value(-1, y) + envelope.support(g);
      if (obj < best) {
        best = obj;
        best_y = y;
      }
    });
  }

  StagePlan plan;
  Evaluated ev = evaluate_plan(terms, envelope, best_y, L);
  const bool polish = options.polish || options.mode == PlannerOptions::Mode::kConvex;
  if (polish) {
    if (auto solved = polish_stage(ctx, envelope, terms, best_y, options)) {
      Eigen::VectorXd y = solved->first;
      // Each react is the exact minimizer of its own branch cost given the
      // prepare; re-solving it separately tightens the joint solution.
      for (int j = 0; j < L && n_r > 0; ++j) {
        const std::vector<StageTerm> rt = react_terms(ctx, y.head(n_p), j, alpha);
        if (auto r = polish_react(ctx, rt, y.segment(ctx.react_offset(j), n_r), options)) {
          Eigen::VectorXd trial = y;
          trial.segment(ctx.react_offset(j), n_r) = r->first;
          if (terms_value(terms, trial, j) <= terms_value(terms, y, j)) y = trial;
        }
      }
      const Evaluated pe = evaluate_plan(terms, envelope, y, L);
      if (options.mode == PlannerOptions::Mode::kConvex || pe.objective <= ev.objective) {
        best_y = y;
        ev = pe;
        plan.certified = solved->second;
      }
    }
  }
  plan.prepare = best_y.head(n_p);
  for (int j = 0; j < L; ++j) plan.reacts.push_back(best_y.segment(ctx.react_offset(j), n_r));
  plan.tau = ev.tau;
  plan.objective = ev.objective;
  return plan;
}

Eigen::VectorXd plan_react(const StageContext& ctx, const Eigen::VectorXd& prepare, int j,
                           const Eigen::Vector4d& alpha, const PlannerOptions& options) {
  if (j < 0 || j >= ctx.model.L()) throw std::out_of_range("plan_react: bad disturbance index");
  const int n_r = ctx.config.n_r;
  const std::vector<StageTerm> terms = react_terms(ctx, prepare, j, alpha);
  Eigen::VectorXd best = Eigen::VectorXd::Constant(n_r, 0.5 * (ctx.model.u_lo + ctx.model.u_hi));
  if (n_r == 0) return best;
  auto total = [&](const Eigen::VectorXd& r) {
    double v = 0.0;
    for (const auto& t : terms) v += t.value(r);
    return v;
  };
  if (options.mode == PlannerOptions::Mode::kGrid) {
    const std::vector<double> grid = action_grid(ctx.model, options);
    if (std::pow(static_cast<double>(grid.size()), n_r) > options.node_cap)
      throw GridTooLarge("react grid exceeds the node cap");
    double best_v = std::numeric_limits<double>::infinity();
    Eigen::VectorXd seq(n_r);
    for_each_sequence(grid, n_r, seq, [&](const Eigen::VectorXd& r) {
      const double v = total(r);
      if (v < best_v) {
        best_v = v;
        best = r;
      }
    });
  }
  if (options.polish || options.mode == PlannerOptions::Mode::kConvex) {
    if (auto r = polish_react(ctx, terms, best, options))
      if (options.mode == PlannerOptions::Mode::kConvex || total(r->first) <= total(best)) best = r->first;
  }
  return best;
}

std::vector<Eigen::VectorXd> infer_unrealized_reacts(const StageContext& ctx,
                                                     const Eigen::VectorXd& prepare, int realized,
                                                     const Eigen::VectorXd& observed_react,
                                                     const Eigen::Vector4d& alpha,
                                                     const PlannerOptions& options) {
  if (realized < 0 || realized >= ctx.model.L()) throw std::out_of_range("infer_unrealized_reacts: bad index");
  std::vector<Eigen::VectorXd> reacts;
  for (int j = 0; j < ctx.model.L(); ++j)
    reacts.push_back(j == realized ? observed_react : plan_react(ctx, prepare, j, alpha, options));
  return reacts;
}

// ---------------------------------------------------------------------------
// Stage half-space

KktHalfspace stage_kkt_halfspace(const StageContext& ctx, const Eigen::VectorXd& prepare,
                                 const std::vector<Eigen::VectorXd>& reacts,
                                 const Eigen::Vector4d& alpha, const Envelope& domain,
                                 const StageKktOptions& options) {
  const int L = ctx.model.L();
  if (domain.dim() != L) throw std::invalid_argument("stage_kkt_halfspace: domain dimension mismatch");
  const Eigen::VectorXd y = pack_decision(ctx, prepare, reacts);
  const int n_u = static_cast<int>(y.size());
  const std::vector<StageTerm> terms = stage_terms(ctx, alpha);

  Eigen::VectorXd g = Eigen::VectorXd::Zero(L);
  Eigen::VectorXd constant = Eigen::VectorXd::Zero(n_u);   // prepare-cost gradient
  Eigen::MatrixXd smooth = Eigen::MatrixXd::Zero(n_u, L);  // tail gradients, kinks excluded
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n_u);
  std::vector<std::size_t> kinks;
  for (std::size_t q = 0; q < terms.size(); ++q) {
    const auto& t = terms[q];
    const double s = t.argument(y);
    if (t.group >= 0) g[t.group] += t.coeff * shape_value(t.shape, s);
    if (t.shape != ScalarShape::kSquare && std::abs(s) <= options.kink_tol && !t.index.empty()) {
      kinks.push_back(q);
      for (std::size_t k = 0; k < t.index.size(); ++k)
        scale[t.index[k]] += std::abs(t.coeff * t.weight[k]);
      continue;
    }
    const double d = t.coeff * shape_derivative(t.shape, s);
    for (std::size_t k = 0; k < t.index.size(); ++k) {
      const double c = d * t.weight[k];
      if (t.group < 0)
        constant[t.index[k]] += c;
      else
        smooth(t.index[k], t.group) += c;
      scale[t.index[k]] += std::abs(c);
    }
  }
  if (g.cwiseAbs().maxCoeff() == 0.0) throw InfeasibleKkt("stage_kkt_halfspace: zero tail cost vector");

  const SaturationPattern pattern =
      saturation_pattern(y, Eigen::VectorXd::Constant(n_u, ctx.model.u_lo),
                         Eigen::VectorXd::Constant(n_u, ctx.model.u_hi), options.saturation_tol);
  std::vector<int> sat_var(static_cast<std::size_t>(n_u), -1);
  int nv = L;
  for (int q = 0; q < n_u; ++q)
    if (pattern.state(q) != SaturationPattern::State::kFree) sat_var[static_cast<std::size_t>(q)] = nv++;
  const int kink_base = nv;
  nv += static_cast<int>(kinks.size());

  LinearProgram lp(nv);
  lp.objective.head(L) = g;
  for (std::size_t k = 0; k < kinks.size(); ++k) lp.lower[kink_base + static_cast<int>(k)] = LinearProgram::kFree;
  Eigen::VectorXd row = Eigen::VectorXd::Zero(nv);
  row.head(L).setOnes();
  lp.add_equality(row, 1.0);
  for (const auto& h : domain.halfspaces()) {
    row.setZero();
    row.head(L) = h.normal;
    lp.add_inequality(row, h.offset);
  }

  // Kink multipliers: mu in [lo, hi] for the prepare cost, in [lo v_j, hi v_j]
  // inside tail branch j (the subgradient enters scaled by v_j).
  const double eps = options.kink_tol;
  for (std::size_t k = 0; k < kinks.size(); ++k) {
    const auto& t = terms[kinks[k]];
    const auto [lo, hi] = shape_kink_interval(t.shape);
    const int mu = kink_base + static_cast<int>(k);
    row.setZero();
    row[mu] = 1.0;
    if (t.group < 0) {
      lp.add_inequality(row, hi + eps);
      row[mu] = -1.0;
      lp.add_inequality(row, -(lo - eps));
    } else {
      row[t.group] = -(hi + eps);
      lp.add_inequality(row, 0.0);
      row[mu] = -1.0;
      row[t.group] = lo - eps;
      lp.add_inequality(row, 0.0);
    }
  }

  // Stationarity per decision variable, relaxed to |residual| <= tol * scale.
  std::vector<Eigen::VectorXd> rows(static_cast<std::size_t>(n_u), Eigen::VectorXd::Zero(nv));
  for (int q = 0; q < n_u; ++q) {
    auto& r = rows[static_cast<std::size_t>(q)];
    r.head(L) = smooth.row(q).transpose();
    const int s = sat_var[static_cast<std::size_t>(q)];
    if (s >= 0) r[s] = pattern.state(q) == SaturationPattern::State::kUpper ? 1.0 : -1.0;
  }
  for (std::size_t k = 0; k < kinks.size(); ++k) {
    const auto& t = terms[kinks[k]];
    for (std::size_t i = 0; i < t.index.size(); ++i)
      rows[static_cast<std::size_t>(t.index[i])][kink_base + static_cast<int>(k)] += t.coeff * t.weight[i];
  }
  for (int q = 0; q < n_u; ++q) {
    const auto& r = rows[static_cast<std::size_t>(q)];
    if (r.cwiseAbs().maxCoeff() == 0.0 && constant[q] == 0.0) continue;
    const double slack = options.stationarity_tol * scale[q];
    lp.add_inequality(r, -constant[q] + slack);
    lp.add_inequality(-r, constant[q] + slack);
  }

  LpSolution sol;
  try {
    sol = solve_lp(lp, options.lp);
  } catch (const Infeasible&) {
    throw InfeasibleKkt("stage stationarity LP is infeasible");
  }
  KktHalfspace out{HalfSpace(g, sol.objective), sol.objective, sol.x.head(L),
                   Eigen::VectorXd::Zero(n_u), Eigen::VectorXd::Zero(n_u)};
  for (int q = 0; q < n_u; ++q) {
    const int s = sat_var[static_cast<std::size_t>(q)];
    if (s < 0) continue;
    if (pattern.state(q) == SaturationPattern::State::kUpper)
      out.sigma_plus[q] = sol.x[s];
    else
      out.sigma_minus[q] = sol.x[s];
  }
  return out;
}

}  // namespace rsirl
