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

#include <cmath>

#include <gtest/gtest.h>

#include "rsirl/car.hpp"
#include "rsirl/errors.hpp"

namespace rsirl {
namespace {

CarState state(double xf, double vf, double xl, double vl) { return CarState(xf, vf, xl, vl); }

TEST(CarStep, Examples) {
  const CarModel model;
  const CarState a = car_step(model, state(0, 10, 20, 10), 0.0, 0);
  EXPECT_NEAR(a[0], 1.0, 1e-15);
  EXPECT_NEAR(a[1], 10.0, 1e-15);
  EXPECT_EQ(car_step(model, CarState::Zero(), 0.0, 0), CarState::Zero());
  const CarState d = car_step(model, state(0, 0, 5, 10), 0.0, 2);
  EXPECT_NEAR(d[3], 9.8, 1e-12);
  EXPECT_NEAR(d[2], 5.0 + 0.99, 1e-12);
  const CarState f = car_step(model, state(0, 0, 0, 0), 3.0, 1);
  EXPECT_NEAR(f[0], 0.015, 1e-15);
  EXPECT_NEAR(f[1], 0.3, 1e-15);
  EXPECT_NEAR(f[3], 0.2, 1e-15);
  EXPECT_THROW(car_step(model, CarState::Zero(), 0.0, 3), std::out_of_range);
}

TEST(CarModel, Validation) {
  CarModel m;
  m.dt = 0.0;
  EXPECT_THROW(m.validate(), ConfigError);
  m = CarModel{};
  m.u_lo = 3.0;
  EXPECT_THROW(m.validate(), ConfigError);
  EXPECT_EQ(CarModel{}.L(), 3);
}

TEST(CarFeatures, ZeroPoint) {
  // x_rel = 7, v_rel = 0, no jerk
  const Eigen::Vector4d phi = car_features(state(0, 10, 7, 10), 1.0, 1.0);
  EXPECT_NEAR(phi[0], 0.0, 1e-15);
  EXPECT_NEAR(phi[1], 0.0, 1e-15);
  EXPECT_NEAR(phi[2], 0.0, 1e-15);
  EXPECT_NEAR(phi[3], 0.0, 1e-15);
}

TEST(CarFeatures, DerivedEvaluations) {
  const double phi1 = car_features(state(0, 0, 6, 0), 0, 0)[0];
  // log(1 + e^3) - log 2
  EXPECT_NEAR(phi1, std::log(1 + std::exp(3.0)) - std::log(2.0), 1e-6);
  EXPECT_NEAR(phi1, 2.355440171, 1e-6);
  const double phi4 = car_features(state(0, 0, 7, 1), 0, 0)[3];
  EXPECT_NEAR(phi4, std::log(1 + std::exp(1.0)) - std::log(2.0), 1e-6);
  EXPECT_NEAR(phi4, 0.6201, 1e-4);
  // too far: phi2 only
  const Eigen::Vector4d far = car_features(state(0, 0, 9, 0), 0, 0);
  EXPECT_EQ(far[0], 0.0);
  EXPECT_NEAR(far[1], std::log(1 + std::exp(1.0)) - std::log(2.0), 1e-12);
  // jerk and symmetric relative speed
  EXPECT_NEAR(car_features(state(0, 0, 7, 0), 1.0, -1.0)[2], 0.5 * 4.0, 1e-15);
  EXPECT_EQ(car_features(state(0, 2, 7, 0), 0, 0)[3], car_features(state(0, 0, 7, 2), 0, 0)[3]);
}

TEST(CarFeatures, NonNegative) {
  for (double xr = 0; xr < 15; xr += 0.37)
    for (double vr = -3; vr < 3; vr += 0.41) {
      const Eigen::Vector4d phi = car_features(state(0, 0, xr, vr), 0.3, -0.2);
      EXPECT_GE(phi.minCoeff(), 0.0);
    }
}

}  // namespace
}  // namespace rsirl
