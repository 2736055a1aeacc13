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

#include <functional>
#include <string>
#include <string_view>

#include "rme/model.hpp"
#include "rme/priors.hpp"

namespace rme {

/// Shannon capacity B log2(1 + p / sigma^2) [bit/s].
double capacity(double p_w, double bandwidth_hz, double sigma2_w);

/// Approximate M_c-QAM bit error rate
/// 3 (1 - 1/sqrt(M_c)) erfc(sqrt(3 p / ((M_c - 1) sigma^2))).
/// Not clipped to 1 at low SNR.
double ber_qam(double p_w, int mc_order, double sigma2_w);

/// P_s / (p + sigma^2), with p the interference power.
double sinr(double signal_w, double p_w, double sigma2_w);

/// 1 if p < tau (strict), else 0.
double outage(double p_w, double tau_w);

/// Area of the cells whose power (in watts) is >= tau.
double coverage_area(const RadioMap& map, double tau_w);

/// Midpoint-rule measure of {x in [x_lo, x_hi] : profile(x) >= tau}
/// with n_points equal cells.
double coverage_length_numeric(const std::function<double(double)>& profile_w, double tau_w,
                               double x_lo, double x_hi, std::size_t n_points);

/// Same scan, but every transition between neighbouring midpoints is refined
/// by bisection to |dx| < tol_m. Exact for profiles whose super-level set
/// changes at most once per cell.
double coverage_length_refined(const std::function<double(double)>& profile_w, double tau_w,
                               double x_lo, double x_hi, std::size_t n_points,
                               double tol_m = 1e-9);

enum class FunctionalTag { capacity, ber_qam, sinr, outage, coverage_area, coverage_length_1d, power };

std::string_view to_string(FunctionalTag tag);
/// Throws ConfigError on unknown names.
FunctionalTag functional_tag_from_string(std::string_view name);

struct FunctionalParams {
  double bandwidth_hz = 1.0;
  double noise_pow_w = 1e-6;
  int mc_order = 256;
  double signal_pow_w = 1e-6;
  double threshold_w = 1e-6;
  Vec3 eval_loc{};
  /// Profile1D coverage length: 0 evaluates the super-level interval in
  /// closed form; > 0 counts midpoints of the global lattice
  /// {(k + 1/2) * step}.
  double length_step_m = 0.0;
};

/// A map functional g. Local tags read the map at eval_loc only.
struct Functional {
  FunctionalTag tag = FunctionalTag::capacity;
  FunctionalParams params{};

  void validate() const;
  bool is_local() const noexcept;
  /// phi(p) for local tags, p in watts.
  double local(double p_w) const;

  double operator()(const RadioMap& map) const;
  double operator()(const Profile1D& profile) const;
  /// Local tags read f(eval_loc.x); coverage_length_1d integrates f over
  /// [x_lo, x_hi] with \p n_points cells and bisection refinement.
  double evaluate_profile(const std::function<double(double)>& profile_w, double x_lo, double x_hi,
                          std::size_t n_points) const;
};

/// Exact length of {x : alpha / ((x - x_t)^2 + d^2) >= tau}.
double friis_1d_coverage_length(double alpha, double d, double tau_w);

}  // namespace rme
