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

#include "cli.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>

#include <CLI11.hpp>

#include "rsirl/active.hpp"
#include "rsirl/errors.hpp"
#include "rsirl/expert.hpp"
#include "rsirl/harness.hpp"
#include "rsirl/inference.hpp"
#include "rsirl/multistep.hpp"
#include "rsirl/serialization.hpp"

namespace rsirl::cli {
namespace {

struct Flags {
  std::uint64_t seed = 0;
  std::string config;
  std::string out = ".";
  std::string mode = "active";
  std::string state_mode;
  int eval_every = 0;
  std::string system;
  std::string envelope;
  int snapshot_every = 10;
};

struct Given {
  bool seed = false;
  bool mode = false;
};

std::filesystem::path output_dir(const Flags& f) {
  std::filesystem::path dir(f.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + f.out + "': " + ec.message());
  return dir;
}

void write_output(const std::filesystem::path& path, const std::string& content, std::ostream& out) {
  write_text_file(path.string(), content);
  out << path.string() << '\n';
}

// Benchmark-style config with the command-line overrides applied.
BenchmarkConfig load_config(const Flags& f, const Given& given) {
  BenchmarkConfig c = f.config.empty() ? BenchmarkConfig{} : BenchmarkConfig::from_json(read_text_file(f.config));
  if (given.seed) c.seed = f.seed;
  if (!f.state_mode.empty()) c.state_mode = parse_state_mode(f.state_mode);
  if (f.eval_every > 0) c.eval_every = f.eval_every;
  c.validate();
  return c;
}

ExpertSpec load_spec(const Flags& f, const BenchmarkConfig& c) {
  ExpertSpec spec = make_expert_spec(c.seed, c.n, c.m, c.L, c.envelope_points);
  if (!f.system.empty()) spec.system = system_from_json(read_text_file(f.system));
  if (!f.envelope.empty()) spec.envelope = envelope_from_json(read_text_file(f.envelope));
  if (spec.envelope.dim() != spec.system.L)
    throw ConfigError("envelope dimension does not match the system's disturbance count");
  spec.pmf = Eigen::VectorXd::Constant(spec.system.L, 1.0 / spec.system.L);
  return spec;
}

// One episode in the requested mode, scored against a test set after each step.
EpisodeLog simulate_episode(const ExpertSpec& spec, const BenchmarkConfig& c, SamplingMode mode,
                            int snapshot_every) {
  const std::vector<TestPair> test =
      build_test_set(spec, c.test_episodes, c.test_steps, split_seed(c.seed, 4), c.state_mode);
  EpisodeOptions opts;
  opts.state_mode = c.state_mode;
  opts.snapshot_every = snapshot_every;
  double cached = std::numeric_limits<double>::quiet_NaN();
  bool dirty = true;
  opts.evaluate = [&](int step, const LearnerState& st) {
    if (st.log.back().refined) dirty = true;
    if ((step - 1) % c.eval_every != 0 && step != c.steps) return std::numeric_limits<double>::quiet_NaN();
    if (dirty) {
      cached = test_set_mse(st.envelope, spec.system, test);
      dirty = false;
    }
    return cached;
  };
  const std::uint64_t seed = split_seed(c.seed, 3);
  SamplingPolicy policy = c.policy;
  policy.mode = mode;
  return mode == SamplingMode::kActive ? run_active(spec, c.steps, policy, seed, opts)
                                       : run_passive(spec, c.steps, seed, opts);
}

void require_success(const EpisodeLog& log) {
  if (log.failed) throw Error("episode failed: " + log.failure);
}

std::string snapshot_name(int step) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "envelope_step_%04d.json", step);
  return buf;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Risk-sensitive inverse reinforcement learning with active disturbance sampling", "rsirl"};
  app.require_subcommand(1);
  Flags f;
  auto* seed_opt = app.add_option("--seed", f.seed, "Seed for every random draw");
  app.add_option("--config", f.config, "Flat JSON config file");
  app.add_option("--out", f.out, "Output directory")->capture_default_str();
  auto* mode_opt = app.add_option("--mode", f.mode, "Disturbance sampling: active|passive")
                       ->check(CLI::IsMember({"active", "passive"}));
  app.add_option("--state-mode", f.state_mode, "State transition: raw|renormalize|redraw")
      ->check(CLI::IsMember({"raw", "renormalize", "redraw"}));
  app.add_option("--eval-every", f.eval_every, "Evaluate the test-set MSE every k steps")
      ->check(CLI::PositiveNumber);

  auto* gen_system = app.add_subcommand("gen-system", "Write a random linear-quadratic system");
  auto* gen_envelope = app.add_subcommand("gen-envelope", "Write a random risk envelope");
  auto* simulate = app.add_subcommand("simulate", "Run one learning episode");
  auto* bench = app.add_subcommand("bench", "Compare active and passive learning");
  auto* multistep = app.add_subcommand("multistep", "Run the stage-based car-following experiment");
  auto* export_envelope = app.add_subcommand("export-envelope", "Write learned envelope snapshots of one episode");
  for (auto* sub : {gen_system, gen_envelope, simulate, bench, multistep, export_envelope}) sub->fallthrough();
  for (auto* sub : {simulate, export_envelope}) {
    sub->add_option("--system", f.system, "System JSON to use instead of the seeded one");
    sub->add_option("--envelope", f.envelope, "True envelope JSON to use instead of the seeded one");
  }
  export_envelope->add_option("--every", f.snapshot_every, "Snapshot interval in steps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::vector<std::string> argv_store{"rsirl"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "rsirl: " << e.what() << '\n';
    return kConfigError;
  }
  const Given given{seed_opt->count() > 0, mode_opt->count() > 0};

  try {
    if (gen_system->parsed()) {
      const BenchmarkConfig c = load_config(f, given);
      const auto dir = output_dir(f);
      write_output(dir / "system.json", system_to_json(generate_system(split_seed(c.seed, 0), c.n, c.m, c.L)), out);
    } else if (gen_envelope->parsed()) {
      const BenchmarkConfig c = load_config(f, given);
      const auto dir = output_dir(f);
      write_output(dir / "envelope.json",
                   envelope_to_json(generate_envelope(split_seed(c.seed, 1), c.L, c.envelope_points)), out);
    } else if (simulate->parsed() || export_envelope->parsed()) {
      const BenchmarkConfig c = load_config(f, given);
      const SamplingMode mode = parse_sampling_mode(f.mode);
      const ExpertSpec spec = load_spec(f, c);
      const auto dir = output_dir(f);
      const bool snapshots = export_envelope->parsed();
      const EpisodeLog log = simulate_episode(spec, c, mode, snapshots ? f.snapshot_every : 0);
      require_success(log);
      if (snapshots) {
        for (const auto& [step, env] : log.snapshots) write_output(dir / snapshot_name(step), envelope_to_json(env), out);
      } else {
        write_output(dir / "episode.csv", episode_csv(log, spec.system.L, mode == SamplingMode::kActive), out);
      }
      write_output(dir / "envelope_final.json", envelope_to_json(log.final_envelope), out);
    } else if (bench->parsed()) {
      const BenchmarkConfig c = load_config(f, given);
      const auto dir = output_dir(f);
      const BenchmarkReport report = run_benchmark(c);
      write_output(dir / c.csv, benchmark_csv(report), out);
      write_output(dir / c.report, report_json(report, c), out);
      int failed = 0;
      for (const auto& s : report.setups)
        for (const auto& m : s.modes) failed += m.failed;
      if (failed > 0) err << "rsirl: " << failed << " episode(s) failed and were excluded\n";
    } else if (multistep->parsed()) {
      MultistepConfig c = f.config.empty() ? MultistepConfig{} : multistep_config_from_json(read_text_file(f.config));
      if (given.mode) c.policy.mode = parse_sampling_mode(f.mode);
      const auto dir = output_dir(f);
      const MultistepLog log = run_multistep(c, f.seed);
      if (log.failed) throw Error("multistep run failed: " + log.failure);
      write_output(dir / "stages.csv", stage_log_csv(log, c.model.L()), out);
      write_output(dir / "library.json", library_to_json(log.library), out);
      write_output(dir / "envelope_true.json", envelope_to_json(log.true_envelope), out);
      write_output(dir / "envelope_final.json", envelope_to_json(log.final_envelope), out);
    }
  } catch (const ConfigError& e) {
    err << "rsirl: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "rsirl: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kSuccess;
}

}  // namespace rsirl::cli
