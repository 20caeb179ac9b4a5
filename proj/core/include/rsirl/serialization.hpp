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

#include <string>
#include <vector>

#include "rsirl/clustering.hpp"
#include "rsirl/expert.hpp"
#include "rsirl/geometry.hpp"
#include "rsirl/inference.hpp"
#include "rsirl/multistep.hpp"

namespace rsirl {

/// %.17g; "nan" / "inf" / "-inf" for non-finite values.
std::string format_double(double x);

/// {"L", "halfspaces": [{"normal", "offset"}], "vertices"}
std::string envelope_to_json(const Envelope& envelope);
/// Rebuilt from the half-spaces; the stored vertices are not trusted.
Envelope envelope_from_json(const std::string& text);

/// {"n", "m", "L", "A", "B", "Q", "R", "u_lo", "u_hi", "x0"}, matrices row-major.
std::string system_to_json(const LinearQuadraticSystem& sys);
LinearQuadraticSystem system_from_json(const std::string& text);

/// Array of action sequences.
std::string library_to_json(const ReactLibrary& library);
ReactLibrary library_from_json(const std::string& text);

/// step,sampled_w,tau_prime,refined,area,mse[,U_1..U_L,p_1..p_L]; disturbances 1-based.
std::string episode_csv(const EpisodeLog& log, int L, bool with_preferences);

/// stage,realized_w,tau_prime,refined,area,U_1..U_L,p_1..p_L,alpha_1..alpha_H
std::string stage_log_csv(const MultistepLog& log, int L);

/// Flat JSON overrides of MultistepConfig. "fidelity": true starts from
/// MultistepConfig::fidelity() instead of the desk defaults. Unknown keys throw ConfigError.
MultistepConfig multistep_config_from_json(const std::string& text);

std::string read_text_file(const std::string& path);  ///< throws ConfigError when unreadable
void write_text_file(const std::string& path, const std::string& content);  ///< throws std::runtime_error

}  // namespace rsirl
