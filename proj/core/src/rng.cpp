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

#include "rsirl/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rsirl {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 0x9E3779B97F4A7C15ULL));
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return split_seed(split_seed(master, a), b);
}

double Rng::uniform(double lo, double hi) {
  // 53 random bits mapped to [0, 1); avoids implementation-defined distributions.
  const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

double Rng::normal() {
  // Box-Muller, one value per call.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int Rng::index(int n) {
  if (n <= 0) throw std::invalid_argument("Rng::index: n must be positive");
  int i = static_cast<int>(uniform() * n);
  return i >= n ? n - 1 : i;
}

int Rng::categorical(const Eigen::VectorXd& probabilities) {
  const double total = probabilities.sum();
  double r = uniform() * total;
  for (int i = 0; i < probabilities.size(); ++i) {
    r -= probabilities[i];
    if (r < 0.0) return i;
  }
  // rounding: return the last index with positive mass
  for (int i = static_cast<int>(probabilities.size()) - 1; i >= 0; --i)
    if (probabilities[i] > 0.0) return i;
  return 0;
}

Eigen::VectorXd Rng::normal_vector(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Eigen::MatrixXd Rng::normal_matrix(int rows, int cols) {
  // row-major fill order
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = normal();
  return m;
}

Eigen::VectorXd Rng::dirichlet(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    v[i] = -std::log(u);
  }
  return v / v.sum();
}

}  // namespace rsirl
