// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "rme/diffusion.hpp"
#include "rme/functionals.hpp"
#include "rme/kriging.hpp"
#include "rme/model.hpp"
#include "rme/priors.hpp"

// JSON formats:
//   map:          {"grid":{"origin":[x,y],"spacing":s,"nx":n,"ny":m,"plane_height":h},
//                  "values_dbm":[...]}               (row-major)
//   measurements: [{"loc":[x,y,z],"dbm":v}, ...]
//   posterior:    {"grid":{...},"mean_db":[...],"cov_db2":[[...],...]}  (cov optional)
//   schedule:     {"L":1000,"alpha_first":0.9999,"alpha_last":0.98}
//   functional:   {"tag":"capacity","bandwidth_hz":B,"noise_dbm":N,"mc_order":M,
//                  "signal_dbm":S,"tau_dbm":T,"eval_loc":[x,y(,z)],"length_step_m":h}
// Parse failures raise ConfigError.

namespace rme {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

std::string grid_to_json(const Grid& grid);
Grid grid_from_json(std::string_view text);

std::string radio_map_to_json(const RadioMap& map);
RadioMap radio_map_from_json(std::string_view text);
RadioMap load_radio_map(const std::filesystem::path& path);
void save_radio_map(const std::filesystem::path& path, const RadioMap& map);

std::string measurements_to_json(const MeasurementSet& set);
MeasurementSet measurements_from_json(std::string_view text);
MeasurementSet load_measurements(const std::filesystem::path& path);
void save_measurements(const std::filesystem::path& path, const MeasurementSet& set);

std::string posterior_to_json(const GaussianPosterior& post, bool with_covariance = true);
GaussianPosterior posterior_from_json(std::string_view text);

std::string schedule_to_json(std::size_t steps, double alpha_first, double alpha_last);
NoiseSchedule schedule_from_json(std::string_view text);

Functional functional_from_json(std::string_view text);

LinkBudget link_budget_from_json(std::string_view text);
GudmundsonPrior gudmundson_from_json(std::string_view text);
LoS2DPrior los2d_from_json(std::string_view text);
/// Accepts "alpha" directly or a "link" budget; "x_half_range" defaults to
/// 10 sqrt(alpha / tau) when "tau_dbm" is given.
Analytic1DPrior analytic1d_from_json(std::string_view text);

/// Writes map_00000.json ... and manifest.json (base seed, prior config,
/// file list) into \p dir.
void write_map_batch(const std::filesystem::path& dir, std::span<const RadioMap> maps,
                     std::string_view manifest_json);

}  // namespace rme
