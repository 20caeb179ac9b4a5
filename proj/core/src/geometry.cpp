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

#include "rsirl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "rsirl/errors.hpp"

namespace rsirl {

namespace {

// Constraint a . v <= b in ambient coordinates; the simplex nonnegativity rows come first.
struct Row {
  Eigen::VectorXd a;
  double b;
};

std::vector<Row> all_rows(const std::vector<HalfSpace>& halfspaces, int dim) {
  std::vector<Row> rows;
  rows.reserve(dim + halfspaces.size());
  for (int i = 0; i < dim; ++i) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
    a[i] = -1.0;
    rows.push_back({std::move(a), 0.0});
  }
  for (const auto& h : halfspaces) rows.push_back({h.normal, h.offset});
  return rows;
}

double row_scale(const Row& r) { return std::max(1.0, r.a.lpNorm<Eigen::Infinity>()); }

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double acc = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (acc > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(std::llround(acc));
}

bool lex_less(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] < y[i]) return true;
    if (x[i] > y[i]) return false;
  }
  return false;
}

int affine_rank(const std::vector<Eigen::VectorXd>& pts, const std::vector<int>& idx, double tol) {
  if (idx.size() <= 1) return 0;
  const int dim = static_cast<int>(pts[idx[0]].size());
  Eigen::MatrixXd d(dim, static_cast<int>(idx.size()) - 1);
  for (std::size_t i = 1; i < idx.size(); ++i) d.col(i - 1) = pts[idx[i]] - pts[idx[0]];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(d);
  lu.setThreshold(tol);
  return static_cast<int>(lu.rank());
}

// Volume of the polytope conv(pts[idx]) whose affine dimension is `k`, by
// recursive cone decomposition over facets cut out by the constraint rows.
double hull_volume(const std::vector<Eigen::VectorXd>& pts, const std::vector<int>& idx, int k,
                   const std::vector<Row>& rows) {
  if (k == 0) return 1.0;
  const int dim = static_cast<int>(pts[idx[0]].size());
  Eigen::VectorXd center = Eigen::VectorXd::Zero(dim);
  for (int i : idx) center += pts[i];
  center /= static_cast<double>(idx.size());

  std::set<std::vector<int>> seen;
  double volume = 0.0;
  for (const auto& row : rows) {
    const double scale = row.a.norm();
    if (scale == 0.0) continue;
    std::vector<int> tight;
    for (int i : idx)
      if (std::abs(row.a.dot(pts[i]) - row.b) <= 1e-8 * std::max(1.0, scale)) tight.push_back(i);
    if (tight.size() < static_cast<std::size_t>(k) || tight.size() == idx.size()) continue;
    if (!seen.insert(tight).second) continue;
    if (affine_rank(pts, tight, 1e-9) != k - 1) continue;

    // distance from the center to the facet's affine hull
    Eigen::VectorXd offset = center - pts[tight[0]];
    if (k - 1 > 0) {
      Eigen::MatrixXd span(dim, static_cast<int>(tight.size()) - 1);
      for (std::size_t i = 1; i < tight.size(); ++i) span.col(i - 1) = pts[tight[i]] - pts[tight[0]];
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(span, Eigen::ComputeThinU);
      const Eigen::MatrixXd basis = svd.matrixU().leftCols(k - 1);
      offset -= basis * (basis.transpose() * offset);
    }
    volume += offset.norm() * hull_volume(pts, tight, k - 1, rows) / static_cast<double>(k);
  }
  return volume;
}

// Area of {v in the 3-simplex : every half-space holds}, by clipping the
// simplex triangle with each half-space in turn, in an orthonormal basis of
// the simplex plane. Working from the H-representation keeps the area exactly
// monotone under further clips, which the deduplicated vertex list cannot.
double polygon_area_3(const std::vector<HalfSpace>& halfspaces) {
  const Eigen::Vector3d c0 = Eigen::Vector3d::Constant(1.0 / 3.0);
  const Eigen::Vector3d e1 = Eigen::Vector3d(1.0, -1.0, 0.0) / std::sqrt(2.0);
  const Eigen::Vector3d e2 = Eigen::Vector3d(1.0, 1.0, -2.0) / std::sqrt(6.0);
  std::vector<Eigen::Vector2d> poly;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d d = Eigen::Vector3d::Unit(i) - c0;
    poly.emplace_back(e1.dot(d), e2.dot(d));
  }
  std::vector<Eigen::Vector2d> next;
  for (const auto& h : halfspaces) {
    const Eigen::Vector3d n(h.normal[0], h.normal[1], h.normal[2]);
    const Eigen::Vector2d a(n.dot(e1), n.dot(e2));
    const double b = h.offset - n.dot(c0);
    next.clear();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Eigen::Vector2d& p = poly[i];
      const Eigen::Vector2d& q = poly[(i + 1) % poly.size()];
      const double fp = a.dot(p) - b;
      const double fq = a.dot(q) - b;
      if (fp <= 0.0) next.push_back(p);
      if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) next.push_back(p + (fp / (fp - fq)) * (q - p));
    }
    poly.swap(next);
    if (poly.size() < 3) return 0.0;
  }
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * std::abs(twice);
}

}  // namespace

HalfSpace::HalfSpace(Eigen::VectorXd n, double b) : normal(std::move(n)), offset(b) {
  if (normal.size() == 0 || normal.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("HalfSpace: normal must have a nonzero component");
}

Envelope Envelope::simplex(int dim) {
  if (dim < 1) throw std::invalid_argument("Envelope::simplex: dim must be positive");
  std::vector<Eigen::VectorXd> vertices;
  // lexicographic order: e_dim < ... < e_1
  for (int i = dim - 1; i >= 0; --i) vertices.push_back(Eigen::VectorXd::Unit(dim, i));
  return Envelope(dim, {}, std::move(vertices));
}

Envelope Envelope::from_halfspaces(int dim, std::vector<HalfSpace> halfspaces,
                                   const GeometryTolerances& tol) {
  auto vertices = enumerate_vertices(halfspaces, dim, tol);
  if (vertices.empty()) throw EmptyEnvelope("Envelope::from_halfspaces: no feasible point");
  return Envelope(dim, std::move(halfspaces), std::move(vertices));
}

Envelope Envelope::from_parts(int dim, std::vector<HalfSpace> halfspaces,
                              std::vector<Eigen::VectorXd> vertices) {
  return Envelope(dim, std::move(halfspaces), std::move(vertices));
}

double Envelope::support(const Eigen::VectorXd& c) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices_) best = std::max(best, c.dot(v));
  return best;
}

double Envelope::min_value(const Eigen::VectorXd& c) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : vertices_) best = std::min(best, c.dot(v));
  return best;
}

bool Envelope::contains(const Eigen::VectorXd& v, double tol) const {
  if (v.size() != dim_) return false;
  if (v.minCoeff() < -tol || std::abs(v.sum() - 1.0) > tol) return false;
  for (const auto& h : halfspaces_)
    if (h.slack(v) < -tol) return false;
  return true;
}

void Envelope::validate(const GeometryTolerances& tol) const {
  auto fail = [](const std::string& msg) { throw std::logic_error("Envelope invariant: " + msg); };
  if (dim_ < 1) fail("dimension must be positive");
  if (vertices_.empty()) fail("empty vertex list");
  for (const auto& h : halfspaces_)
    if (h.normal.size() != dim_) fail("half-space dimension mismatch");
  for (const auto& v : vertices_) {
    if (v.size() != dim_) fail("vertex dimension mismatch");
    if (v.minCoeff() < -tol.feasibility) fail("vertex has a negative component");
    if (std::abs(v.sum() - 1.0) > tol.feasibility) fail("vertex does not sum to one");
    for (const auto& h : halfspaces_)
      if (h.slack(v) < -tol.feasibility * std::max(1.0, h.normal.lpNorm<Eigen::Infinity>()))
        fail("vertex violates a half-space");
  }
}

RefinementDirection::RefinementDirection(Eigen::VectorXd direction)
    : direction_(std::move(direction)) {
  if (direction_.size() < 2) throw std::invalid_argument("RefinementDirection: dim must be >= 2");
  if (std::abs(direction_.sum()) > 1e-9 || std::abs(direction_.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("RefinementDirection: must be zero-sum with unit norm");
}

RefinementDirection project_to_simplex_tangent(const Eigen::VectorXd& g,
                                               const GeometryTolerances& tol) {
  if (g.size() < 2) throw std::invalid_argument("project_to_simplex_tangent: need L >= 2");
  Eigen::VectorXd centered = g.array() - g.mean();
  const double norm = centered.norm();
  if (!(norm >= tol.degenerate)) throw DegenerateDirection();
  centered /= norm;
  // re-center once more so rounding in the mean does not leak into the sum
  centered.array() -= centered.mean();
  centered.normalize();
  return RefinementDirection(std::move(centered));
}

double cosine_similarity(const RefinementDirection& a, const RefinementDirection& b) {
  return std::clamp(a.vector().dot(b.vector()), -1.0, 1.0);
}

ClipResult clip_envelope(const Envelope& envelope, const HalfSpace& h,
                         const GeometryTolerances& tol) {
  if (h.normal.size() != envelope.dim())
    throw std::invalid_argument("clip_envelope: dimension mismatch");
  const double scale = std::max(1.0, h.normal.lpNorm<Eigen::Infinity>());
  const double support = envelope.support(h.normal);
  if (envelope.min_value(h.normal) > h.offset + tol.feasibility * scale) throw EmptyEnvelope();
  if (support <= h.offset + tol.strict) return {envelope, false, support};

  std::vector<HalfSpace> hs = envelope.halfspaces();
  hs.push_back(h);
  auto vertices = enumerate_vertices(hs, envelope.dim(), tol);
  if (vertices.empty()) throw EmptyEnvelope("clip_envelope: vertex enumeration found no point");
  return {Envelope::from_parts(envelope.dim(), std::move(hs), std::move(vertices)), true, support};
}

std::vector<Eigen::VectorXd> enumerate_vertices(const std::vector<HalfSpace>& halfspaces, int dim,
                                                const GeometryTolerances& tol) {
  if (dim < 1) throw std::invalid_argument("enumerate_vertices: dim must be positive");
  for (const auto& h : halfspaces)
    if (h.normal.size() != dim) throw std::invalid_argument("enumerate_vertices: dimension mismatch");
  const auto rows = all_rows(halfspaces, dim);
  const int n = static_cast<int>(rows.size());
  const int k = dim - 1;
  const std::uint64_t count = binomial_capped(n, k, tol.max_subsets);
  if (count > tol.max_subsets) {
    std::ostringstream os;
    os << "enumerate_vertices: C(" << n << ", " << k << ") exceeds cap " << tol.max_subsets;
    throw TooManyConstraints(os.str());
  }

  std::vector<Eigen::VectorXd> out;
  std::vector<int> combo(k);
  for (int i = 0; i < k; ++i) combo[i] = i;
  Eigen::MatrixXd m(dim, dim);
  Eigen::VectorXd rhs(dim);
  m.row(dim - 1).setOnes();
  rhs[dim - 1] = 1.0;

  while (true) {
    for (int i = 0; i < k; ++i) {
      // normalize rows so the singularity test is scale-free
      const double s = rows[combo[i]].a.norm();
      m.row(i) = rows[combo[i]].a.transpose() / s;
      rhs[i] = rows[combo[i]].b / s;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    lu.setThreshold(1e-10);
    if (lu.isInvertible()) {
      Eigen::VectorXd v = lu.solve(rhs);
      bool feasible = true;
      for (const auto& r : rows) {
        if (r.a.dot(v) - r.b > tol.feasibility * row_scale(r)) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        bool duplicate = false;
        for (const auto& w : out) {
          if ((w - v).lpNorm<Eigen::Infinity>() <= tol.dedup) {
            duplicate = true;
            break;
          }
        }
        if (!duplicate) out.push_back(std::move(v));
      }
    }
    // next combination
    int i = k - 1;
    while (i >= 0 && combo[i] == n - k + i) --i;
    if (i < 0) break;
    ++combo[i];
    for (int j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
  }
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

double envelope_area(const Envelope& envelope) {
  const auto& pts = envelope.vertices();
  const int dim = envelope.dim();
  if (pts.size() < static_cast<std::size_t>(dim) || dim < 2) return dim == 1 ? 1.0 : 0.0;
  std::vector<int> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  if (affine_rank(pts, idx, 1e-9) < dim - 1) return 0.0;
  if (dim == 3) return polygon_area_3(envelope.halfspaces());
  return hull_volume(pts, idx, dim - 1, all_rows(envelope.halfspaces(), dim));
}

}  // namespace rsirl
