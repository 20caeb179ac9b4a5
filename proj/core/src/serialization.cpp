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

#include "rsirl/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rsirl/errors.hpp"

namespace rsirl {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

// nlohmann prints the shortest round-trip form; numbers are written with 17
// significant digits here instead so that files diff cleanly across tools.
void write_json(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) throw std::invalid_argument("non-finite number in JSON output");
      out += format_double(x);
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        write_json(j[i], out);
      }
      out += ']';
      break;
    }
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        write_json(it.value(), out);
      }
      out += '}';
      break;
    }
    default:
      out += j.dump();
  }
}

std::string dump(const json& j) {
  std::string out;
  write_json(j, out);
  out += '\n';
  return out;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat(const Eigen::MatrixXd& M) {
  json a = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) a.push_back(vec(M.row(r).transpose()));
  return a;
}

Eigen::VectorXd to_vec(const json& j, Eigen::Index n, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
    throw ConfigError(std::string(what) + ": expected an array of " + std::to_string(n) + " numbers");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw ConfigError(std::string(what) + ": non-numeric entry");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

Eigen::MatrixXd to_mat(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw ConfigError(std::string(what) + ": expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) M.row(r) = to_vec(j[static_cast<std::size_t>(r)], cols, what).transpose();
  return M;
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return j.at(key);
}

int int_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer()) throw ConfigError(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

}  // namespace

std::string envelope_to_json(const Envelope& envelope) {
  json j;
  j["L"] = envelope.dim();
  json hs = json::array();
  for (const auto& h : envelope.halfspaces()) hs.push_back({{"normal", vec(h.normal)}, {"offset", h.offset}});
  j["halfspaces"] = hs;
  json vs = json::array();
  for (const auto& v : envelope.vertices()) vs.push_back(vec(v));
  j["vertices"] = vs;
  return dump(j);
}

Envelope envelope_from_json(const std::string& text) {
  const json j = parse(text);
  const int L = int_field(j, "L");
  if (L < 1) throw ConfigError("envelope: L must be >= 1");
  std::vector<HalfSpace> hs;
  const json& arr = field(j, "halfspaces");
  if (!arr.is_array()) throw ConfigError("envelope: halfspaces must be an array");
  for (const auto& h : arr) {
    if (!field(h, "offset").is_number()) throw ConfigError("envelope: offset must be a number");
    try {
      hs.emplace_back(to_vec(field(h, "normal"), L, "envelope normal"), h.at("offset").get<double>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("envelope: ") + e.what());
    }
  }
  return Envelope::from_halfspaces(L, hs);
}

std::string system_to_json(const LinearQuadraticSystem& sys) {
  json j;
  j["n"] = sys.n;
  j["m"] = sys.m;
  j["L"] = sys.L;
  json A = json::array(), B = json::array();
  for (int l = 0; l < sys.L; ++l) {
    A.push_back(mat(sys.A[static_cast<std::size_t>(l)]));
    B.push_back(mat(sys.B[static_cast<std::size_t>(l)]));
  }
  j["A"] = A;
  j["B"] = B;
  j["Q"] = mat(sys.Q);
  j["R"] = mat(sys.R);
  j["u_lo"] = vec(sys.u_lo);
  j["u_hi"] = vec(sys.u_hi);
  j["x0"] = vec(sys.x0);
  return dump(j);
}

LinearQuadraticSystem system_from_json(const std::string& text) {
  const json j = parse(text);
  LinearQuadraticSystem s;
  s.n = int_field(j, "n");
  s.m = int_field(j, "m");
  s.L = int_field(j, "L");
  if (s.n < 1 || s.m < 1 || s.L < 1) throw ConfigError("system: n, m and L must be >= 1");
  const json& A = field(j, "A");
  const json& B = field(j, "B");
  if (!A.is_array() || !B.is_array() || static_cast<int>(A.size()) != s.L || static_cast<int>(B.size()) != s.L)
    throw ConfigError("system: A and B must hold L matrices");
  for (int l = 0; l < s.L; ++l) {
    s.A.push_back(to_mat(A[static_cast<std::size_t>(l)], s.n, s.n, "A"));
    s.B.push_back(to_mat(B[static_cast<std::size_t>(l)], s.n, s.m, "B"));
  }
  s.Q = to_mat(field(j, "Q"), s.n, s.n, "Q");
  s.R = to_mat(field(j, "R"), s.m, s.m, "R");
  s.u_lo = to_vec(field(j, "u_lo"), s.m, "u_lo");
  s.u_hi = to_vec(field(j, "u_hi"), s.m, "u_hi");
  s.x0 = to_vec(field(j, "x0"), s.n, "x0");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
  return s;
}

std::string library_to_json(const ReactLibrary& library) {
  json a = json::array();
  for (const auto& s : library.sequences) a.push_back(vec(s));
  return dump(a);
}

ReactLibrary library_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_array()) throw ConfigError("react library must be an array of arrays");
  ReactLibrary lib;
  for (const auto& s : j) {
    if (!s.is_array()) throw ConfigError("react library must be an array of arrays");
    lib.sequences.push_back(to_vec(s, static_cast<Eigen::Index>(s.size()), "react sequence"));
  }
  return lib;
}

std::string episode_csv(const EpisodeLog& log, int L, bool with_preferences) {
  std::ostringstream out;
  out << "step,sampled_w,tau_prime,refined,area,mse";
  if (with_preferences) {
    for (int j = 1; j <= L; ++j) out << ",U_" << j;
    for (int j = 1; j <= L; ++j) out << ",p_" << j;
  }
  out << '\n';
  for (const auto& s : log.steps) {
    const double tp = s.learner.skipped ? std::numeric_limits<double>::quiet_NaN() : s.learner.tau_prime;
    out << s.step << ',' << s.sampled_w + 1 << ',' << format_double(tp) << ',' << (s.learner.refined ? 1 : 0)
        << ',' << format_double(s.learner.area) << ',' << format_double(s.mse);
    if (with_preferences) {
      for (int j = 0; j < L; ++j)
        out << ',' << format_double(s.preferences.size() == L ? s.preferences[j] : 0.0);
      for (int j = 0; j < L; ++j)
        out << ',' << format_double(s.probabilities.size() == L ? s.probabilities[j] : 1.0 / L);
    }
    out << '\n';
  }
  return out.str();
}

std::string stage_log_csv(const MultistepLog& log, int L) {
  std::ostringstream out;
  out << "stage,realized_w,tau_prime,refined,area";
  for (int j = 1; j <= L; ++j) out << ",U_" << j;
  for (int j = 1; j <= L; ++j) out << ",p_" << j;
  for (int h = 1; h <= kCarFeatures; ++h) out << ",alpha_" << h;
  out << '\n';
  for (const auto& r : log.stages) {
    out << r.stage << ',' << r.realized + 1 << ',' << format_double(r.tau_prime) << ',' << (r.refined ? 1 : 0)
        << ',' << format_double(r.area);
    for (int j = 0; j < L; ++j) out << ',' << format_double(r.preferences[j]);
    for (int j = 0; j < L; ++j) out << ',' << format_double(r.probabilities[j]);
    for (int h = 0; h < kCarFeatures; ++h) out << ',' << format_double(r.alpha[h]);
    out << '\n';
  }
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Multistep config

namespace {

double config_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  return v.get<double>();
}

int config_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
  return v.get<int>();
}

std::vector<double> config_numbers(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError("config key '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(config_number(x, key));
  return out;
}

}  // namespace

MultistepConfig multistep_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  MultistepConfig c;
  if (j.contains("fidelity")) {
    if (!j["fidelity"].is_boolean()) throw ConfigError("config key 'fidelity' must be a boolean");
    if (j["fidelity"].get<bool>()) c = MultistepConfig::fidelity();
  }
  auto set_planners = [&](auto&& apply) {
    apply(c.expert_planner);
    apply(c.learner_planner);
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "fidelity") continue;
    if (k == "stages") c.stages = config_int(v, k);
    else if (k == "clusters") c.clusters = config_int(v, k);
    else if (k == "N") c.stage.N = config_int(v, k);
    else if (k == "n_p") c.stage.n_p = config_int(v, k);
    else if (k == "n_r") c.stage.n_r = config_int(v, k);
    else if (k == "ramp_up") c.stage.ramp_up = config_int(v, k);
    else if (k == "ramp_pmf") c.stage.ramp_pmf = config_numbers(v, k);
    else if (k == "budget") c.policy.budget = config_int(v, k);
    else if (k == "temperature") c.policy.temperature = config_number(v, k);
    else if (k == "mode") {
      if (!v.is_string()) throw ConfigError("config key 'mode' must be a string");
      c.policy.mode = parse_sampling_mode(v.get<std::string>());
    } else if (k == "known_alpha") {
      if (!v.is_boolean()) throw ConfigError("config key 'known_alpha' must be a boolean");
      c.known_alpha = v.get<bool>();
    } else if (k == "expert_alpha") {
      const auto a = config_numbers(v, k);
      if (a.size() != 4) throw ConfigError("expert_alpha must have 4 entries");
      c.expert_alpha = Eigen::Vector4d(a[0], a[1], a[2], a[3]);
    } else if (k == "x1") {
      const auto x = config_numbers(v, k);
      if (x.size() != 4) throw ConfigError("x1 must have 4 entries");
      c.x1 = CarState(x[0], x[1], x[2], x[3]);
    } else if (k == "u_initial") c.u_initial = config_number(v, k);
    else if (k == "w_initial") c.w_initial = config_int(v, k);
    else if (k == "envelope_points") c.envelope_points = config_int(v, k);
    else if (k == "dt") c.model.dt = config_number(v, k);
    else if (k == "u_lo") c.model.u_lo = config_number(v, k);
    else if (k == "u_hi") c.model.u_hi = config_number(v, k);
    else if (k == "leader_accel") c.model.leader_accel = config_numbers(v, k);
    else if (k == "grid_levels") {
      const int g = config_int(v, k);
      set_planners([&](PlannerOptions& p) { p.grid_levels = g; });
    } else if (k == "planner") {
      if (!v.is_string()) throw ConfigError("config key 'planner' must be a string");
      const std::string name = v.get<std::string>();
      PlannerOptions::Mode mode;
      if (name == "grid") mode = PlannerOptions::Mode::kGrid;
      else if (name == "convex") mode = PlannerOptions::Mode::kConvex;
      else throw ConfigError("planner must be grid|convex, got '" + name + "'");
      set_planners([&](PlannerOptions& p) { p.mode = mode; });
    } else {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
  c.validate();
  return c;
}

}  // namespace rsirl
