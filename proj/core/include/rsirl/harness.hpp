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
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rsirl/active.hpp"
#include "rsirl/expert.hpp"
#include "rsirl/inference.hpp"

namespace rsirl {

/// (1/m) |a - b|^2
double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct TestPair {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
};

/// Expert-optimal pairs along episodes driven by the true pmf, each starting at x0.
std::vector<TestPair> build_test_set(const ExpertSpec& spec, int episodes, int steps, std::uint64_t seed,
                                     StateMode mode = StateMode::kRenormalize,
                                     const MinimaxOptions& minimax = {});

/// Mean over the test set of mse(predicted action under `envelope`, expert action).
double test_set_mse(const Envelope& envelope, const LinearQuadraticSystem& sys,
                    const std::vector<TestPair>& test, const MinimaxOptions& minimax = {});

struct BenchmarkConfig {
  int setups = 3;
  int n = 4;
  int m = 2;
  int L = 3;
  int envelope_points = 20;
  int episodes = 20;
  int steps = 60;
  int test_episodes = 20;
  int test_steps = 10;
  std::vector<SamplingMode> modes{SamplingMode::kActive, SamplingMode::kPassive};
  SamplingPolicy policy;
  StateMode state_mode = StateMode::kRenormalize;
  int eval_every = 1;
  int auc_steps = 50;  ///< AUC summary covers steps 1..auc_steps
  int std_step = 25;   ///< step at which the cross-episode spread is summarized
  int workers = 1;    ///< episode-level threads; results do not depend on it
  std::uint64_t seed = 0;
  std::string csv = "benchmark.csv";
  std::string report = "report.json";

  void validate() const;  ///< throws ConfigError
  /// Flat JSON object; unknown keys and wrong types throw ConfigError.
  static BenchmarkConfig from_json(const std::string& text);
  std::string to_json() const;
};

/// FNV-1a over the canonical JSON form.
std::uint64_t config_hash(const BenchmarkConfig& config);

struct BenchmarkRow {
  int setup = 0;
  SamplingMode mode = SamplingMode::kPassive;
  int episode = 0;
  int step = 0;
  double mse = 0.0;  ///< NaN on steps skipped by eval_every
  double area = 0.0;
  bool refined = false;
  int sampled_w = 0;  ///< 0-based
};

struct ModeSeries {
  SamplingMode mode = SamplingMode::kPassive;
  std::vector<double> mean_mse;
  std::vector<double> std_mse;
  std::vector<double> mean_area;
  std::vector<double> episode_auc;  ///< per completed episode, over steps 1..auc_steps
  double median_auc = 0.0;
  double std_at_step = 0.0;  ///< std_mse at config.std_step
  int completed = 0;
  int failed = 0;
  std::vector<std::string> failures;
};

struct SetupReport {
  int setup = 0;
  std::uint64_t spec_seed = 0;
  std::vector<ModeSeries> modes;
};

struct BenchmarkReport {
  std::vector<SetupReport> setups;
  std::vector<BenchmarkRow> rows;  ///< sorted by (setup, mode, episode, step)
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string build;
};

/// Trapezoidal area under the finite points of `curve` (1-based steps) over 1..last_step.
double curve_auc(const std::vector<double>& curve, int last_step);

/// Every setup shares one system, envelope, x0 and test set across modes, and
/// episode e uses the same seed in every mode.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

/// setup,mode,episode,step,mse_mean_over_test,area,refined,sampled_w
std::string benchmark_csv(const BenchmarkReport& report);
std::string report_json(const BenchmarkReport& report, const BenchmarkConfig& config);

std::string build_identifier();

}  // namespace rsirl
