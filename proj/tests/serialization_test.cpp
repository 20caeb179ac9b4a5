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
#include <limits>

#include <gtest/gtest.h>

#include "rsirl/errors.hpp"
#include "rsirl/serialization.hpp"

namespace rsirl {
namespace {

TEST(FormatDouble, SeventeenDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(EnvelopeJson, RoundTripIsExact) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Envelope e = generate_envelope(seed, 3, 20);
    const std::string text = envelope_to_json(e);
    const Envelope back = envelope_from_json(text);
    ASSERT_EQ(back.halfspaces().size(), e.halfspaces().size());
    for (std::size_t i = 0; i < e.halfspaces().size(); ++i) {
      EXPECT_EQ(back.halfspaces()[i].normal, e.halfspaces()[i].normal);
      EXPECT_EQ(back.halfspaces()[i].offset, e.halfspaces()[i].offset);
    }
    ASSERT_EQ(back.vertices().size(), e.vertices().size());
    EXPECT_EQ(envelope_to_json(back), text);
  }
  EXPECT_NE(envelope_to_json(Envelope::simplex(3)).find("\"L\""), std::string::npos);
}

TEST(EnvelopeJson, RejectsMalformedInput) {
  EXPECT_THROW(envelope_from_json("{"), ConfigError);
  EXPECT_THROW(envelope_from_json(R"({"L": 3, "halfspaces": [{"normal": [1, 0], "offset": 1}], "vertices": []})"),
               ConfigError);
  EXPECT_THROW(envelope_from_json(R"({"halfspaces": [], "vertices": []})"), ConfigError);
}

TEST(SystemJson, RoundTripIsExact) {
  const LinearQuadraticSystem s = generate_system(3, 4, 2, 3);
  const std::string text = system_to_json(s);
  const LinearQuadraticSystem b = system_from_json(text);
  EXPECT_EQ(b.n, 4);
  EXPECT_EQ(b.m, 2);
  EXPECT_EQ(b.L, 3);
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(b.A[static_cast<std::size_t>(j)], s.A[static_cast<std::size_t>(j)]);
    EXPECT_EQ(b.B[static_cast<std::size_t>(j)], s.B[static_cast<std::size_t>(j)]);
  }
  EXPECT_EQ(b.Q, s.Q);
  EXPECT_EQ(b.R, s.R);
  EXPECT_EQ(b.u_lo, s.u_lo);
  EXPECT_EQ(b.u_hi, s.u_hi);
  EXPECT_EQ(b.x0, s.x0);
  EXPECT_EQ(system_to_json(b), text);
  EXPECT_THROW(system_from_json(R"({"n": 1})"), ConfigError);
}

TEST(LibraryJson, RoundTrip) {
  ReactLibrary lib;
  lib.sequences = {Eigen::Vector3d(0.1, -2.0, 3.0), Eigen::Vector3d(1.0 / 3.0, 0.0, -1e-17)};
  const ReactLibrary b = library_from_json(library_to_json(lib));
  ASSERT_EQ(b.size(), 2);
  EXPECT_EQ(b.sequences[1], lib.sequences[1]);
}

TEST(EpisodeCsv, Header) {
  EpisodeLog log;
  EXPECT_EQ(episode_csv(log, 3, false), "step,sampled_w,tau_prime,refined,area,mse\n");
  EXPECT_EQ(episode_csv(log, 3, true), "step,sampled_w,tau_prime,refined,area,mse,U_1,U_2,U_3,p_1,p_2,p_3\n");
}

TEST(StageCsv, Header) {
  MultistepLog log;
  EXPECT_EQ(stage_log_csv(log, 3),
            "stage,realized_w,tau_prime,refined,area,U_1,U_2,U_3,p_1,p_2,p_3,alpha_1,alpha_2,alpha_3,alpha_4\n");
}

TEST(MultistepConfigJson, ParsesAndRejects) {
  const MultistepConfig c = multistep_config_from_json(R"({"stages": 7, "N": 5, "n_p": 2, "n_r": 3, "known_alpha": true})");
  EXPECT_EQ(c.stages, 7);
  EXPECT_EQ(c.stage.N, 5);
  EXPECT_TRUE(c.known_alpha);
  const MultistepConfig f = multistep_config_from_json(R"({"fidelity": true})");
  EXPECT_EQ(f.stage.N, 40);
  EXPECT_THROW(multistep_config_from_json(R"({"stagez": 7})"), ConfigError);
  EXPECT_THROW(multistep_config_from_json(R"({"N": 7})"), ConfigError);
  EXPECT_THROW(multistep_config_from_json(R"({"planner": "tree"})"), ConfigError);
  EXPECT_THROW(multistep_config_from_json("[1, 2]"), ConfigError);
}

TEST(TextFiles, MissingFileIsConfigError) {
  EXPECT_THROW(read_text_file("/nonexistent/rsirl/file.json"), ConfigError);
}

}  // namespace
}  // namespace rsirl
