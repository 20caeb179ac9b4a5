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
#include <vector>

#include <Eigen/Core>

namespace rsirl {

/// Numerical thresholds shared by every polytope operation.
struct GeometryTolerances {
  double feasibility = 1e-9;      ///< constraint slack accepted as satisfied
  double dedup = 1e-8;            ///< vertices closer than this (max-norm) are merged
  double strict = 1e-7;           ///< support decrease required to call a clip a refinement
  double degenerate = 1e-12;      ///< centered cost norm below which no direction exists
  std::uint64_t max_subsets = 1000000;  ///< cap on enumerated constraint subsets
};

/// {v : normal . v <= offset}
struct HalfSpace {
  Eigen::VectorXd normal;
  double offset = 0.0;

  HalfSpace() = default;
  /// Throws std::invalid_argument if `normal` is identically zero.
  HalfSpace(Eigen::VectorXd normal, double offset);

  double slack(const Eigen::VectorXd& v) const { return offset - normal.dot(v); }
};

/// Polytope inside the probability simplex, kept in H- and V-representation.
/// The simplex constraints (v >= 0, sum v = 1) are implicit and never stored.
class Envelope {
 public:
  /// The full simplex of dimension `dim`.
  static Envelope simplex(int dim);
  /// Builds the V-representation by vertex enumeration.
  static Envelope from_halfspaces(int dim, std::vector<HalfSpace> halfspaces,
                                  const GeometryTolerances& tol = {});
  /// Trusts the caller that `vertices` is the vertex set of `halfspaces`.
  /// Used by deserialization; validate() checks the claim.
  static Envelope from_parts(int dim, std::vector<HalfSpace> halfspaces,
                             std::vector<Eigen::VectorXd> vertices);

  int dim() const { return dim_; }
  const std::vector<HalfSpace>& halfspaces() const { return halfspaces_; }
  const std::vector<Eigen::VectorXd>& vertices() const { return vertices_; }

  /// max over the envelope of c . v (evaluated on the vertex list)
  double support(const Eigen::VectorXd& c) const;
  double min_value(const Eigen::VectorXd& c) const;
  bool contains(const Eigen::VectorXd& v, double tol = 1e-9) const;

  /// Checks the type invariants; throws std::logic_error with a description on failure.
  void validate(const GeometryTolerances& tol = {}) const;

 private:
  Envelope(int dim, std::vector<HalfSpace> halfspaces, std::vector<Eigen::VectorXd> vertices)
      : dim_(dim), halfspaces_(std::move(halfspaces)), vertices_(std::move(vertices)) {}

  int dim_ = 0;
  std::vector<HalfSpace> halfspaces_;
  std::vector<Eigen::VectorXd> vertices_;
};

/// Unit vector in the zero-sum hyperplane (tangent space of the simplex).
class RefinementDirection {
 public:
  /// Throws std::invalid_argument unless `direction` is zero-sum and unit norm within 1e-9.
  explicit RefinementDirection(Eigen::VectorXd direction);

  const Eigen::VectorXd& vector() const { return direction_; }
  int dim() const { return static_cast<int>(direction_.size()); }
  RefinementDirection operator-() const { return RefinementDirection(-direction_); }

 private:
  Eigen::VectorXd direction_;
};

/// normalize(g - mean(g) * 1). Throws DegenerateDirection when the centered
/// vector has norm below 1e-12, and std::invalid_argument when g has fewer than 2 entries.
RefinementDirection project_to_simplex_tangent(const Eigen::VectorXd& g,
                                               const GeometryTolerances& tol = {});

double cosine_similarity(const RefinementDirection& a, const RefinementDirection& b);

struct ClipResult {
  Envelope envelope;
  bool refined = false;
  double support_before = 0.0;  ///< max over the input envelope of normal . v
};

/// P intersected with h. Redundant half-spaces (support decrease <= tol.strict)
/// leave P untouched and are not appended. Throws EmptyEnvelope when nothing survives.
ClipResult clip_envelope(const Envelope& envelope, const HalfSpace& h,
                         const GeometryTolerances& tol = {});

/// Exact vertex set of {v in simplex : every half-space holds}, by brute-force
/// intersection of (dim - 1)-subsets of constraint boundaries with sum v = 1.
/// Output is sorted lexicographically. Throws TooManyConstraints above the subset cap.
std::vector<Eigen::VectorXd> enumerate_vertices(const std::vector<HalfSpace>& halfspaces, int dim,
                                                const GeometryTolerances& tol = {});

/// (dim - 1)-dimensional volume of the envelope (area for dim = 3). Zero for
/// envelopes of lower affine dimension.
double envelope_area(const Envelope& envelope);

}  // namespace rsirl
