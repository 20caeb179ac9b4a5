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

#include "rsirl/clustering.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "rsirl/errors.hpp"
#include "rsirl/rng.hpp"

namespace rsirl {

namespace {

struct Clustering {
  std::vector<Eigen::VectorXd> centers;
  double wcss = 0.0;
};

int nearest(const std::vector<Eigen::VectorXd>& centers, const Eigen::VectorXd& x, double* dist) {
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = (centers[c] - x).squaredNorm();
    if (d < bd) {
      bd = d;
      best = static_cast<int>(c);
    }
  }
  if (dist) *dist = bd;
  return best;
}

Clustering run_kmeans(const std::vector<Eigen::VectorXd>& xs, int K, Rng& rng, int iterations) {
  const std::size_t n = xs.size();
  Clustering out;
  out.centers.push_back(xs[static_cast<std::size_t>(rng.index(static_cast<int>(n)))]);
  Eigen::VectorXd d2(static_cast<Eigen::Index>(n));
  while (static_cast<int>(out.centers.size()) < K) {
    for (std::size_t i = 0; i < n; ++i) nearest(out.centers, xs[i], &d2[static_cast<Eigen::Index>(i)]);
    // All remaining points coincide with a center: duplicate one.
    const int pick = d2.sum() > 0.0 ? rng.categorical(d2) : rng.index(static_cast<int>(n));
    out.centers.push_back(xs[static_cast<std::size_t>(pick)]);
  }

  std::vector<int> assign(n, -1);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = nearest(out.centers, xs[i], nullptr);
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    if (!changed && it > 0) break;
    std::vector<Eigen::VectorXd> sum(static_cast<std::size_t>(K), Eigen::VectorXd::Zero(xs[0].size()));
    std::vector<int> count(static_cast<std::size_t>(K), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[static_cast<std::size_t>(assign[i])] += xs[i];
      ++count[static_cast<std::size_t>(assign[i])];
    }
    for (int c = 0; c < K; ++c)
      if (count[static_cast<std::size_t>(c)] > 0)
        out.centers[static_cast<std::size_t>(c)] = sum[static_cast<std::size_t>(c)] / count[static_cast<std::size_t>(c)];
  }
  out.wcss = 0.0;
  for (const auto& x : xs) {
    double d = 0.0;
    nearest(out.centers, x, &d);
    out.wcss += d;
  }
  return out;
}

}  // namespace

ReactLibrary cluster_react_sequences(const std::vector<Eigen::VectorXd>& sequences, int K,
                                     std::uint64_t seed, double lo, double hi,
                                     const KMeansOptions& options) {
  if (K < 1) throw std::invalid_argument("cluster_react_sequences: K must be >= 1");
  if (static_cast<int>(sequences.size()) < K)
    throw TooFewSequences("need at least " + std::to_string(K) + " react sequences, have " +
                          std::to_string(sequences.size()));
  for (const auto& s : sequences)
    if (s.size() != sequences[0].size()) throw std::invalid_argument("react sequences differ in length");

  Rng rng(seed);
  Clustering best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    Clustering c = run_kmeans(sequences, K, rng, options.max_iterations);
    if (c.wcss < best.wcss - 1e-12 * (1.0 + best.wcss) || best.centers.empty()) best = std::move(c);
  }
  // Canonical order so equal partitions give equal libraries.
  std::sort(best.centers.begin(), best.centers.end(), [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  ReactLibrary lib;
  for (auto& c : best.centers) lib.sequences.push_back(c.cwiseMax(lo).cwiseMin(hi));
  return lib;
}

}  // namespace rsirl
