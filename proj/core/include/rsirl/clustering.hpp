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

/// Representative react sequences (cluster centers).
struct ReactLibrary {
  std::vector<Eigen::VectorXd> sequences;

  int size() const { return static_cast<int>(sequences.size()); }
};

struct KMeansOptions {
  int max_iterations = 50;
  int restarts = 5;
};

/// K-means with K-means++ seeding, best of `restarts` by within-cluster sum of
/// squares; centers are clamped to [lo, hi]. Throws TooFewSequences when there
/// are fewer than K sequences.
ReactLibrary cluster_react_sequences(const std::vector<Eigen::VectorXd>& sequences, int K,
                                     std::uint64_t seed, double lo, double hi,
                                     const KMeansOptions& options = {});

}  // namespace rsirl
