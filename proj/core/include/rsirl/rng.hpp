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
#include <random>

#include <Eigen/Core>

namespace rsirl {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives the seed of child stream `stream` from `master`:
/// splitmix64(master ^ splitmix64(stream + 0x9E3779B97F4A7C15)).
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream);

/// Same as split_seed applied twice: split_seed(split_seed(master, a), b).
std::uint64_t split_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b);

/// Seeded random stream. All randomness in the library flows through this type.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0);
  double normal();
  /// Integer in [0, n).
  int index(int n);
  /// Draws an index from an unnormalized non-negative weight vector.
  int categorical(const Eigen::VectorXd& probabilities);

  Eigen::VectorXd normal_vector(int n);
  Eigen::MatrixXd normal_matrix(int rows, int cols);
  /// Uniform point on the probability simplex (flat Dirichlet).
  Eigen::VectorXd dirichlet(int n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rsirl
