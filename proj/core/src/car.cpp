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

#include "rsirl/car.hpp"

#include <cmath>

#include "rsirl/convex_program.hpp"
#include "rsirl/errors.hpp"

namespace rsirl {

void CarModel::validate() const {
  if (!(dt > 0.0)) throw ConfigError("car model: dt must be positive");
  if (!(u_lo < u_hi)) throw ConfigError("car model: action bounds must satisfy u_lo < u_hi");
  if (leader_accel.empty()) throw ConfigError("car model: at least one leader maneuver is required");
}

CarState car_step(const CarModel& model, const CarState& s, double u_f, int j) {
  if (j < 0 || j >= model.L()) throw std::out_of_range("car_step: bad disturbance index");
  const double dt = model.dt;
  const double a = model.leader_accel[static_cast<std::size_t>(j)];
  CarState n;
  n[0] = s[0] + s[1] * dt + 0.5 * u_f * dt * dt;
  n[1] = s[1] + u_f * dt;
  n[2] = s[2] + s[3] * dt + 0.5 * a * dt * dt;
  n[3] = s[3] + a * dt;
  return n;
}

Eigen::Vector4d car_features(const CarState& next, double u, double u_prev, const FeatureParams& p) {
  const double x_rel = next[2] - next[0];
  const double v_rel = next[3] - next[1];
  const double z = x_rel - p.x0;
  Eigen::Vector4d phi;
  phi[0] = z < 0.0 ? shifted_softplus(-p.r1 * z) : 0.0;
  phi[1] = z > 0.0 ? shifted_softplus(p.r2 * z) : 0.0;
  phi[2] = p.r3 * (u - u_prev) * (u - u_prev);
  phi[3] = shifted_softplus(p.r4 * std::abs(v_rel));
  return phi;
}

}  // namespace rsirl
