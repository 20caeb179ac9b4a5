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

#include "rsirl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "rsirl/errors.hpp"
#include "rsirl/serialization.hpp"

#ifndef RSIRL_VERSION
#define RSIRL_VERSION "unknown"
#endif

namespace rsirl {

using nlohmann::json;

double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() == 0) throw std::invalid_argument("mse: dimension mismatch");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

std::vector<TestPair> build_test_set(const ExpertSpec& spec, int episodes, int steps, std::uint64_t seed,
                                     StateMode mode, const MinimaxOptions& minimax) {
  if (episodes < 1 || steps < 1) throw std::invalid_argument("build_test_set: counts must be >= 1");
  std::vector<TestPair> out;
  out.reserve(static_cast<std::size_t>(episodes * steps));
  for (int e = 0; e < episodes; ++e) {
    Rng w_rng(split_seed(seed, static_cast<std::uint64_t>(e), 1));
    Rng x_rng(split_seed(seed, static_cast<std::uint64_t>(e), 2));
    Eigen::VectorXd x = spec.system.x0;
    if (mode == StateMode::kRenormalize && x.norm() > 0.0) x.normalize();
    for (int k = 0; k < steps; ++k) {
      const Eigen::VectorXd u = expert_act(spec, x, minimax).u;
      out.push_back({x, u});
      x = step_dynamics(spec.system, x, u, w_rng.categorical(spec.pmf), mode, &x_rng);
    }
  }
  return out;
}

double test_set_mse(const Envelope& envelope, const LinearQuadraticSystem& sys,
                    const std::vector<TestPair>& test, const MinimaxOptions& minimax) {
  if (test.empty()) throw std::invalid_argument("test_set_mse: empty test set");
  double total = 0.0;
  for (const auto& p : test) total += mse(predict_action(envelope, sys, p.x, minimax), p.u);
  return total / static_cast<double>(test.size());
}

// ---------------------------------------------------------------------------
// Config

void BenchmarkConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
  };
  positive(setups, "setups");
  positive(n, "n");
  positive(m, "m");
  positive(episodes, "episodes");
  positive(steps, "steps");
  positive(test_episodes, "test_episodes");
  positive(test_steps, "test_steps");
  positive(eval_every, "eval_every");
  positive(auc_steps, "auc_steps");
  positive(std_step, "std_step");
  positive(workers, "workers");
  if (L < 2) throw ConfigError("L must be >= 2");
  if (envelope_points < L) throw ConfigError("envelope_points must be >= L");
  if (modes.empty()) throw ConfigError("modes must list at least one of active|passive");
  policy.validate();
  if (csv.empty() || report.empty()) throw ConfigError("output names must be non-empty");
  for (const auto& name : {csv, report})
    if (name.find('/') != std::string::npos || name == "." || name == "..")
      throw ConfigError("output names must be plain file names");
}

namespace {

int get_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
  const auto x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw ConfigError("config key '" + key + "' is out of range");
  return static_cast<int>(x);
}

double get_double(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  return v.get<double>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

BenchmarkConfig BenchmarkConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  BenchmarkConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "setups") c.setups = get_int(v, k);
    else if (k == "n") c.n = get_int(v, k);
    else if (k == "m") c.m = get_int(v, k);
    else if (k == "L") c.L = get_int(v, k);
    else if (k == "envelope_points") c.envelope_points = get_int(v, k);
    else if (k == "episodes") c.episodes = get_int(v, k);
    else if (k == "steps") c.steps = get_int(v, k);
    else if (k == "test_episodes") c.test_episodes = get_int(v, k);
    else if (k == "test_steps") c.test_steps = get_int(v, k);
    else if (k == "eval_every") c.eval_every = get_int(v, k);
    else if (k == "auc_steps") c.auc_steps = get_int(v, k);
    else if (k == "std_step") c.std_step = get_int(v, k);
    else if (k == "workers") c.workers = get_int(v, k);
    else if (k == "budget") c.policy.budget = get_int(v, k);
    else if (k == "temperature") c.policy.temperature = get_double(v, k);
    else if (k == "state_mode") c.state_mode = parse_state_mode(get_string(v, k));
    else if (k == "csv") c.csv = get_string(v, k);
    else if (k == "report") c.report = get_string(v, k);
    else if (k == "seed") {
      if (!v.is_number_unsigned()) throw ConfigError("config key 'seed' must be a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (k == "modes") {
      if (!v.is_array()) throw ConfigError("config key 'modes' must be an array");
      c.modes.clear();
      for (const auto& m : v) c.modes.push_back(parse_sampling_mode(get_string(m, k)));
    } else {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
  c.validate();
  return c;
}

std::string BenchmarkConfig::to_json() const {
  json j;
  j["setups"] = setups;
  j["n"] = n;
  j["m"] = m;
  j["L"] = L;
  j["envelope_points"] = envelope_points;
  j["episodes"] = episodes;
  j["steps"] = steps;
  j["test_episodes"] = test_episodes;
  j["test_steps"] = test_steps;
  json ms = json::array();
  for (auto mode : modes) ms.push_back(to_string(mode));
  j["modes"] = ms;
  j["budget"] = policy.budget;
  j["temperature"] = format_double(policy.temperature);
  j["state_mode"] = to_string(state_mode);
  j["eval_every"] = eval_every;
  j["auc_steps"] = auc_steps;
  j["std_step"] = std_step;
  j["workers"] = workers;
  j["seed"] = seed;
  j["csv"] = csv;
  j["report"] = report;
  std::string s = j.dump();
  // temperature is stored as text above so the canonical form carries 17 digits
  const std::string key = "\"temperature\":\"" + format_double(policy.temperature) + "\"";
  const auto pos = s.find(key);
  if (pos != std::string::npos) s.replace(pos, key.size(), "\"temperature\":" + format_double(policy.temperature));
  return s;
}

std::uint64_t config_hash(const BenchmarkConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : config.to_json()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string build_identifier() { return std::string("rsirl ") + RSIRL_VERSION; }

// ---------------------------------------------------------------------------
// Benchmark

double curve_auc(const std::vector<double>& curve, int last_step) {
  double area = 0.0;
  int prev_step = -1;
  double prev = 0.0;
  const int end = std::min<int>(last_step, static_cast<int>(curve.size()));
  for (int k = 1; k <= end; ++k) {
    const double v = curve[static_cast<std::size_t>(k - 1)];
    if (!std::isfinite(v)) continue;
    if (prev_step > 0) area += 0.5 * (prev + v) * (k - prev_step);
    prev_step = k;
    prev = v;
  }
  return area;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Population mean / std of the finite entries.
std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double s = 0.0;
  int n = 0;
  for (double x : xs)
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  if (n == 0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double mean = s / n;
  double var = 0.0;
  for (double x : xs)
    if (std::isfinite(x)) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / n)};
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  config.validate();
  BenchmarkReport report;
  report.seed = config.seed;
  report.config_hash = config_hash(config);
  report.build = build_identifier();
  const MinimaxOptions minimax;

  for (int s = 0; s < config.setups; ++s) {
    SetupReport setup;
    setup.setup = s + 1;
    setup.spec_seed = split_seed(config.seed, 1000 + static_cast<std::uint64_t>(s));
    const ExpertSpec spec = make_expert_spec(setup.spec_seed, config.n, config.m, config.L, config.envelope_points);
    const std::vector<TestPair> test =
        build_test_set(spec, config.test_episodes, config.test_steps,
                       split_seed(config.seed, 2000 + static_cast<std::uint64_t>(s)), config.state_mode, minimax);

    // Episodes are independent; each gets its own RNG streams and MSE cache, and
    // results are gathered in (mode, episode) order regardless of worker count.
    const int n_modes = static_cast<int>(config.modes.size());
    const int n_tasks = n_modes * config.episodes;
    std::vector<EpisodeLog> logs(static_cast<std::size_t>(n_tasks));
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int t = next++; t < n_tasks; t = next++) {
        const SamplingMode mode = config.modes[static_cast<std::size_t>(t / config.episodes)];
        const int e = t % config.episodes;
        const std::uint64_t episode_seed =
            split_seed(config.seed, 3000 + static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(e));
        EpisodeOptions opts;
        opts.state_mode = config.state_mode;
        opts.minimax = minimax;
        // The envelope only changes on refinement, so the last score is reused otherwise.
        double cached = std::numeric_limits<double>::quiet_NaN();
        bool dirty = true;
        opts.evaluate = [&](int step, const LearnerState& st) {
          if (st.log.back().refined) dirty = true;
          const bool due = (step - 1) % config.eval_every == 0 || step == config.steps;
          if (!due) return std::numeric_limits<double>::quiet_NaN();
          if (dirty) {
            cached = test_set_mse(st.envelope, spec.system, test, minimax);
            dirty = false;
          }
          return cached;
        };
        SamplingPolicy policy = config.policy;
        policy.mode = mode;
        logs[static_cast<std::size_t>(t)] = mode == SamplingMode::kActive
                                                ? run_active(spec, config.steps, policy, episode_seed, opts)
                                                : run_passive(spec, config.steps, episode_seed, opts);
      }
    };
    {
      std::vector<std::jthread> pool;
      for (int w = 1; w < std::min(config.workers, n_tasks); ++w) pool.emplace_back(worker);
      worker();
    }

    for (int mi = 0; mi < n_modes; ++mi) {
      const SamplingMode mode = config.modes[static_cast<std::size_t>(mi)];
      ModeSeries series;
      series.mode = mode;
      std::vector<std::vector<double>> mse_by_step(static_cast<std::size_t>(config.steps));
      std::vector<std::vector<double>> area_by_step(static_cast<std::size_t>(config.steps));
      for (int e = 0; e < config.episodes; ++e) {
        const EpisodeLog& log = logs[static_cast<std::size_t>(mi * config.episodes + e)];
        if (log.failed) {
          ++series.failed;
          series.failures.push_back("episode " + std::to_string(e + 1) + ": " + log.failure);
          continue;
        }
        ++series.completed;
        std::vector<double> curve;
        for (const auto& st : log.steps) {
          report.rows.push_back({setup.setup, mode, e + 1, st.step, st.mse, st.learner.area, st.learner.refined,
                                 st.sampled_w});
          mse_by_step[static_cast<std::size_t>(st.step - 1)].push_back(st.mse);
          area_by_step[static_cast<std::size_t>(st.step - 1)].push_back(st.learner.area);
          curve.push_back(st.mse);
        }
        series.episode_auc.push_back(curve_auc(curve, config.auc_steps));
      }
      for (int k = 0; k < config.steps; ++k) {
        const auto [m, sd] = mean_std(mse_by_step[static_cast<std::size_t>(k)]);
        series.mean_mse.push_back(m);
        series.std_mse.push_back(sd);
        series.mean_area.push_back(mean_std(area_by_step[static_cast<std::size_t>(k)]).first);
      }
      series.median_auc = median(series.episode_auc);
      series.std_at_step = config.std_step <= config.steps
                               ? series.std_mse[static_cast<std::size_t>(config.std_step - 1)]
                               : std::numeric_limits<double>::quiet_NaN();
      setup.modes.push_back(std::move(series));
    }
    report.setups.push_back(std::move(setup));
  }
  return report;
}

std::string benchmark_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "setup,mode,episode,step,mse_mean_over_test,area,refined,sampled_w\n";
  for (const auto& r : report.rows)
    out << r.setup << ',' << to_string(r.mode) << ',' << r.episode << ',' << r.step << ',' << format_double(r.mse)
        << ',' << format_double(r.area) << ',' << (r.refined ? 1 : 0) << ',' << r.sampled_w + 1 << '\n';
  return out.str();
}

namespace {

// Non-finite entries become null; numbers go through format_double.
std::string num(double x) { return std::isfinite(x) ? format_double(x) : "null"; }

std::string num_array(const std::vector<double>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += num(xs[i]);
  }
  return s + "]";
}

}  // namespace

std::string report_json(const BenchmarkReport& report, const BenchmarkConfig& config) {
  std::ostringstream out;
  out << "{\"provenance\":{\"config_hash\":\"" << std::hex << report.config_hash << std::dec
      << "\",\"seed\":" << report.seed << ",\"build\":" << json(report.build).dump() << "},";
  out << "\"config\":" << config.to_json() << ",\"setups\":[";
  for (std::size_t s = 0; s < report.setups.size(); ++s) {
    const auto& su = report.setups[s];
    if (s) out << ',';
    out << "{\"setup\":" << su.setup << ",\"spec_seed\":" << su.spec_seed << ",\"modes\":[";
    for (std::size_t m = 0; m < su.modes.size(); ++m) {
      const auto& ms = su.modes[m];
      if (m) out << ',';
      out << "{\"mode\":\"" << to_string(ms.mode) << "\",\"completed\":" << ms.completed
          << ",\"failed\":" << ms.failed << ",\"failures\":" << json(ms.failures).dump()
          << ",\"mean_mse\":" << num_array(ms.mean_mse) << ",\"std_mse\":" << num_array(ms.std_mse)
          << ",\"mean_area\":" << num_array(ms.mean_area) << ",\"episode_auc\":" << num_array(ms.episode_auc)
          << ",\"median_auc\":" << num(ms.median_auc) << ",\"std_at_step\":" << num(ms.std_at_step) << "}";
    }
    out << "]}";
  }
  out << "]}\n";
  return out.str();
}

}  // namespace rsirl
