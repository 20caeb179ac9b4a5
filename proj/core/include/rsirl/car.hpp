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

#include <vector>

#include <Eigen/Core>

namespace rsirl {

/// State layout: [x_f, v_f, x_l, v_l] (follower position/velocity, leader position/velocity).
using CarState = Eigen::Vector4d;

/// Double-integrator car following. Disturbance j selects the leader's acceleration.
struct CarModel {
  double dt = 0.1;
  std::vector<double> leader_accel{0.0, 2.0, -2.0};  ///< keep speed, accelerate, decelerate
  double u_lo = -3.0;
  double u_hi = 3.0;

  int L() const { return static_cast<int>(leader_accel.size()); }
  void validate() const;  ///< throws ConfigError
};

struct FeatureParams {
  double x0 = 7.0;  ///< critical following distance
  double r1 = 3.0;
  double r2 = 0.5;
  double r3 = 0.5;
  double r4 = 1.0;
};

inline constexpr int kCarFeatures = 4;

CarState car_step(const CarModel& model, const CarState& state, double u_f, int j);

/// Features of taking u after u_prev and landing in `next`:
///   phi1 = [x_rel < x0] (log(1 + e^{-r1 (x_rel - x0)}) - log 2)   too close
///   phi2 = [x_rel > x0] (log(1 + e^{ r2 (x_rel - x0)}) - log 2)   too far
///   phi3 = r3 (u - u_prev)^2                                       jerk
///   phi4 = log(1 + e^{r4 |v_rel|}) - log 2                         relative speed
Eigen::Vector4d car_features(const CarState& next, double u, double u_prev,
                             const FeatureParams& params = {});

}  // namespace rsirl
