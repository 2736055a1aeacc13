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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rme/analytic1d.hpp"
#include "rme/diffusion.hpp"
#include "rme/functionals.hpp"
#include "rme/kriging.hpp"
#include "rme/mc_oracle.hpp"
#include "rme/priors.hpp"

namespace rme {

/// Percentage error 100 |truth - estimate| / truth. Throws DomainError for
/// truth <= 0.
double pae(double truth, double estimate);

enum class Scenario { analytic1d, los2d, gudmundson };
enum class Estimator { kriging, diffusion, mc_rejection, mc_importance };

std::string_view to_string(Scenario s);
std::string_view to_string(Estimator e);

struct ExperimentConfig {
  Scenario scenario = Scenario::gudmundson;
  Analytic1DPrior analytic{};
  LoS2DPrior los{};
  GudmundsonPrior gudmundson{};
  Grid grid{0.0, 0.0, 5.0, 8, 8, 1.0};

  Estimator estimator = Estimator::kriging;
  KrigingModel kriging{};  ///< model used by the kriging and diffusion estimators
  std::size_t schedule_steps = 1000;
  double alpha_first = 0.9999;
  double alpha_last = 0.98;

  Functional functional{};
  std::vector<std::size_t> m_list{1, 5, 20};
  std::size_t trials = 1;
  std::uint64_t seed = 1;

  double meas_noise_std_db = 1.0;
  std::size_t n_samples = 1000;
  double abc_epsilon_db = 0.5;
  std::size_t abc_max_draws = 1'000'000;
  /// 1D scenario: readings at x uniform on [-r, r]; 0 means x_half_range / 10.
  double meas_half_range_m = 0.0;
  AveragingDomain averaging = AveragingDomain::watts;
  bool record_timing = false;

  void validate() const;
};

/// Parses the experiment JSON. Missing keys keep the defaults above.
ExperimentConfig experiment_config_from_json(std::string_view text);

struct ResultRow {
  std::string scenario;
  std::string estimator;
  std::string functional;
  std::string kind;  ///< "bayes" or "nonbayes"
  std::size_t m = 0;
  std::size_t trial = 0;
  double estimate = 0.0;
  double truth = 0.0;
  double pae_pct = 0.0;  ///< NaN when truth <= 0
  double wall_ms = 0.0;  ///< 0 unless record_timing
  std::uint64_t seed = 0;
  std::string error;  ///< empty on success
};

/// For every M and trial: draw a true map, take M readings, run the
/// estimator, and emit one bayes and one nonbayes row. Estimator failures
/// become rows with a non-empty error. Rows are ordered by (M, trial, kind)
/// and do not depend on the worker count.
std::vector<ResultRow> run_functional_comparison(const ExperimentConfig& config);

/// First line "# rme-results v1", then the column header.
void write_results_csv(std::ostream& os, std::span<const ResultRow> rows);

struct Fig1Config {
  LinkBudget link{30.0, 0.0, 0.0, 2.4e9};
  double d = 2.0;
  double x_t = 3.0;
  double x1 = 0.0;
  SweepVariable sweep = SweepVariable::tau;
  /// Explicit sweep values; empty means n_points log-spaced values of tau
  /// over [1e-3, 0.999] * alpha / d^2 (or m1 over (0, alpha / d^2]).
  std::vector<double> values;
  std::size_t n_points = 64;
  double tau_w = 1e-6;  ///< for m1 sweeps
};

Fig1Config fig1_config_from_json(std::string_view text);

struct Fig1Result {
  std::vector<Fig1Row> rows;
  double max_rel_error_pct = 0.0;
};

Fig1Result run_fig1(const Fig1Config& config);

}  // namespace rme
