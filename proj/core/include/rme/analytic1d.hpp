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

#include <iosfwd>
#include <span>
#include <vector>

namespace rme {

/// One noiseless reading m1 of a single Friis transmitter at lateral
/// offset d, taken at x1 on the x-axis, plus a coverage threshold.
struct AnalyticScenario {
  double alpha = 0.0;
  double d = 0.0;
  double x1 = 0.0;
  double m1_w = 0.0;
  double tau_w = 0.0;

  /// Throws ConfigError for alpha, tau, m1 <= 0 or d < 0, and
  /// InfeasibleMeasurement for m1 > alpha / d^2.
  void validate() const;
};

/// Coefficients of the quadratic A w^2 + B w + C = 0 in w = (x - x1)^2 whose
/// roots bound the super-level set of the posterior-mean profile.
struct Prop1Coefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double discriminant = 0.0;
  double delta = 0.0;
  double p_est_max_w = 0.0;
};

/// Length of {x : alpha / ((x - x_t)^2 + d^2) >= tau}: 2 sqrt(alpha/tau - d^2)
/// when tau < alpha / d^2, else 0. Does not depend on x_t.
double true_coverage_length(double alpha, double d, double tau_w);

/// Distance delta = sqrt(alpha / m1 - d^2) from x1 to each of the two
/// transmitter positions consistent with the reading.
double posterior_offset(double alpha, double d, double m1_w);

/// x -> (p(x; x1 - delta) + p(x; x1 + delta)) / 2, the posterior mean map.
class PosteriorMeanProfile {
 public:
  explicit PosteriorMeanProfile(const AnalyticScenario& scn);
  double operator()(double x) const;
  double delta() const noexcept { return delta_; }

 private:
  double alpha_;
  double d_;
  double x1_;
  double delta_;
};

PosteriorMeanProfile posterior_mean_profile(const AnalyticScenario& scn);

/// Maximum of the posterior-mean profile. Coarse grid of 2048 points over
/// [x1 - 2 delta - 3 d, x1 + 2 delta + 3 d] refined by golden-section search
/// to 1e-10 m. Infinite when d = 0.
double p_est_max(const AnalyticScenario& scn);

Prop1Coefficients prop1_coefficients(const AnalyticScenario& scn);

/// Coverage length of the posterior-mean profile, in closed form.
double nonbayesian_coverage_length(const AnalyticScenario& scn);

/// E[coverage length | reading]. Every consistent map has the same length.
double bayesian_coverage_length(const AnalyticScenario& scn);

enum class SweepVariable { tau, m1 };

struct Fig1Template {
  double alpha = 0.0;
  double d = 0.0;
  double x_t = 3.0;
  double x1 = 0.0;
  double tau_w = 0.0;  ///< used when sweeping m1
};

struct Fig1Row {
  double sweep_value = 0.0;
  double true_len_m = 0.0;
  double nonbayes_len_m = 0.0;
  double rel_error_pct = 0.0;  ///< NaN when the true length is 0
};

/// One row per sweep value. Sweeping tau uses m1 = p(x1; x_t); sweeping m1
/// uses the template's tau.
std::vector<Fig1Row> fig1_sweep(const Fig1Template& tmpl, SweepVariable var,
                                std::span<const double> values);

/// Header "sweep_var,true_len_m,nonbayes_len_m,rel_error_pct".
void write_fig1_csv(std::ostream& os, std::span<const Fig1Row> rows);

}  // namespace rme
