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
#include "rme/analytic1d.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "rme/error.hpp"
#include "rme/model.hpp"

namespace rme {

namespace {

// Relative slack when comparing a reading against the peak power alpha/d^2.
constexpr double kFeasibilitySlack = 1e-12;

}  // namespace

void AnalyticScenario::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("scenario: alpha must be > 0");
  if (!(d >= 0.0)) throw ConfigError("scenario: d must be >= 0");
  if (!(tau_w > 0.0)) throw ConfigError("scenario: tau must be > 0");
  if (!(m1_w > 0.0)) throw ConfigError("scenario: m1 must be > 0");
  if (!std::isfinite(x1)) throw ConfigError("scenario: x1 must be finite");
  posterior_offset(alpha, d, m1_w);
}

double true_coverage_length(double alpha, double d, double tau_w) {
  if (!(alpha > 0.0) || !(tau_w > 0.0) || !(d >= 0.0)) {
    throw ConfigError("true_coverage_length: needs alpha, tau > 0 and d >= 0");
  }
  if (tau_w * d * d >= alpha) return 0.0;
  return 2.0 * std::sqrt(alpha / tau_w - d * d);
}

double posterior_offset(double alpha, double d, double m1_w) {
  const double r2 = alpha / m1_w - d * d;
  if (r2 < 0.0) {
    if (r2 >= -kFeasibilitySlack * d * d) return 0.0;
    throw InfeasibleMeasurement("reading above alpha / d^2 cannot come from this model");
  }
  return std::sqrt(r2);
}

PosteriorMeanProfile::PosteriorMeanProfile(const AnalyticScenario& scn)
    : alpha_(scn.alpha), d_(scn.d), x1_(scn.x1), delta_(posterior_offset(scn.alpha, scn.d, scn.m1_w)) {}

double PosteriorMeanProfile::operator()(double x) const {
  return 0.5 * (friis_1d(alpha_, x, x1_ - delta_, d_) + friis_1d(alpha_, x, x1_ + delta_, d_));
}

PosteriorMeanProfile posterior_mean_profile(const AnalyticScenario& scn) {
  scn.validate();
  return PosteriorMeanProfile(scn);
}

double p_est_max(const AnalyticScenario& scn) {
  scn.validate();
  if (scn.d == 0.0) return std::numeric_limits<double>::infinity();
  const PosteriorMeanProfile profile(scn);
  const double delta = profile.delta();
  const double lo = scn.x1 - 2.0 * delta - 3.0 * scn.d;
  const double hi = scn.x1 + 2.0 * delta + 3.0 * scn.d;

  constexpr int kCoarse = 2048;
  const double step = (hi - lo) / (kCoarse - 1);
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i < kCoarse; ++i) {
    const double v = profile(lo + step * i);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }

  // Golden-section maximization on the bracket around the coarse maximum.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo + step * std::max(best - 1, 0);
  double b = lo + step * std::min(best + 1, kCoarse - 1);
  double c = b - inv_phi * (b - a);
  double e = a + inv_phi * (b - a);
  double fc = profile(c);
  double fe = profile(e);
  while (b - a > 1e-10) {
    if (fc > fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - inv_phi * (b - a);
      fc = profile(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + inv_phi * (b - a);
      fe = profile(e);
    }
  }
  return std::max({best_val, fc, fe, profile(0.5 * (a + b))});
}

Prop1Coefficients prop1_coefficients(const AnalyticScenario& scn) {
  scn.validate();
  const double alpha = scn.alpha;
  const double tau = scn.tau_w;
  const double m1 = scn.m1_w;
  Prop1Coefficients k;
  k.a = -tau / alpha;
  k.b = 1.0 + 2.0 * tau / m1 - 4.0 * tau * scn.d * scn.d / alpha;
  k.c = alpha / m1 - tau * alpha / (m1 * m1);
  k.discriminant = k.b * k.b - 4.0 * k.a * k.c;
  k.delta = posterior_offset(alpha, scn.d, m1);
  k.p_est_max_w = p_est_max(scn);
  return k;
}

double nonbayesian_coverage_length(const AnalyticScenario& scn) {
  const auto k = prop1_coefficients(scn);
  const double tau = scn.tau_w;
  if (tau >= k.p_est_max_w) return 0.0;

  double disc = k.discriminant;
  if (disc < 0.0) {
    // Only reachable through rounding right below p_est_max.
    if (disc >= -1e-9 * k.b * k.b) {
      disc = 0.0;
    } else {
      throw NumericalError("negative discriminant below p_est_max");
    }
  }
  const double scale = scn.alpha / tau;
  const double w_hi = scale * (k.b + std::sqrt(disc)) / 2.0;
  const double w_lo = scale * (k.b - std::sqrt(disc)) / 2.0;
  if (tau < scn.m1_w) return 2.0 * std::sqrt(w_hi);
  return 2.0 * (std::sqrt(std::max(w_hi, 0.0)) - std::sqrt(std::max(w_lo, 0.0)));
}

double bayesian_coverage_length(const AnalyticScenario& scn) {
  scn.validate();
  return true_coverage_length(scn.alpha, scn.d, scn.tau_w);
}

std::vector<Fig1Row> fig1_sweep(const Fig1Template& tmpl, SweepVariable var,
                                std::span<const double> values) {
  if (values.empty()) throw ConfigError("fig1 sweep list is empty");
  std::vector<Fig1Row> rows;
  rows.reserve(values.size());
  for (double v : values) {
    AnalyticScenario scn{tmpl.alpha, tmpl.d, tmpl.x1, 0.0, 0.0};
    if (var == SweepVariable::tau) {
      scn.m1_w = friis_1d(tmpl.alpha, tmpl.x1, tmpl.x_t, tmpl.d);
      scn.tau_w = v;
    } else {
      scn.m1_w = v;
      scn.tau_w = tmpl.tau_w;
    }
    Fig1Row row;
    row.sweep_value = v;
    row.true_len_m = bayesian_coverage_length(scn);
    row.nonbayes_len_m = nonbayesian_coverage_length(scn);
    row.rel_error_pct = row.true_len_m > 0.0
                            ? 100.0 * std::abs(row.nonbayes_len_m - row.true_len_m) / row.true_len_m
                            : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

void write_fig1_csv(std::ostream& os, std::span<const Fig1Row> rows) {
  os << "sweep_var,true_len_m,nonbayes_len_m,rel_error_pct\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.sweep_value << ',' << r.true_len_m << ',' << r.nonbayes_len_m << ',';
    if (std::isnan(r.rel_error_pct)) {
      os << "nan";
    } else {
      os << r.rel_error_pct;
    }
    os << '\n';
  }
}

}  // namespace rme
