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
#include "rme/functionals.hpp"

#include <array>
#include <cmath>
#include <string>

#include "rme/error.hpp"

namespace rme {

double capacity(double p_w, double bandwidth_hz, double sigma2_w) {
  return bandwidth_hz * std::log2(1.0 + p_w / sigma2_w);
}

double ber_qam(double p_w, int mc_order, double sigma2_w) {
  const double m = static_cast<double>(mc_order);
  return 3.0 * (1.0 - 1.0 / std::sqrt(m)) * std::erfc(std::sqrt(3.0 * p_w / ((m - 1.0) * sigma2_w)));
}

double sinr(double signal_w, double p_w, double sigma2_w) { return signal_w / (p_w + sigma2_w); }

double outage(double p_w, double tau_w) { return p_w < tau_w ? 1.0 : 0.0; }

double coverage_area(const RadioMap& map, double tau_w) {
  std::size_t covered = 0;
  for (double v : map.values()) {
    if (dbm_to_watts(v) >= tau_w) ++covered;
  }
  return static_cast<double>(covered) * map.grid().cell_area();
}

namespace {

void check_scan(double x_lo, double x_hi, std::size_t n_points) {
  if (n_points < 2) throw ConfigError("coverage scan needs n_points >= 2");
  if (!(x_lo < x_hi)) throw ConfigError("coverage scan needs x_lo < x_hi");
}

// Boundary of the super-level set between a (inside == a_in) and b.
double bisect_crossing(const std::function<double(double)>& f, double tau, double a, double b,
                       bool a_in, double tol) {
  while (b - a > tol) {
    const double mid = 0.5 * (a + b);
    if ((f(mid) >= tau) == a_in) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double coverage_length_numeric(const std::function<double(double)>& profile_w, double tau_w,
                               double x_lo, double x_hi, std::size_t n_points) {
  check_scan(x_lo, x_hi, n_points);
  const double h = (x_hi - x_lo) / static_cast<double>(n_points);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < n_points; ++i) {
    if (profile_w(x_lo + (static_cast<double>(i) + 0.5) * h) >= tau_w) ++covered;
  }
  return static_cast<double>(covered) * h;
}

double coverage_length_refined(const std::function<double(double)>& profile_w, double tau_w,
                               double x_lo, double x_hi, std::size_t n_points, double tol_m) {
  check_scan(x_lo, x_hi, n_points);
  const double h = (x_hi - x_lo) / static_cast<double>(n_points);
  auto mid = [&](std::size_t i) { return x_lo + (static_cast<double>(i) + 0.5) * h; };

  double length = 0.0;
  bool prev_in = profile_w(mid(0)) >= tau_w;
  double run_start = x_lo;
  for (std::size_t i = 1; i < n_points; ++i) {
    const bool in = profile_w(mid(i)) >= tau_w;
    if (in == prev_in) continue;
    const double edge = bisect_crossing(profile_w, tau_w, mid(i - 1), mid(i), prev_in, tol_m);
    if (prev_in) {
      length += edge - run_start;
    } else {
      run_start = edge;
    }
    prev_in = in;
  }
  if (prev_in) length += x_hi - run_start;
  return length;
}

std::string_view to_string(FunctionalTag tag) {
  switch (tag) {
    case FunctionalTag::capacity: return "capacity";
    case FunctionalTag::ber_qam: return "ber_qam";
    case FunctionalTag::sinr: return "sinr";
    case FunctionalTag::outage: return "outage";
    case FunctionalTag::coverage_area: return "coverage_area";
    case FunctionalTag::coverage_length_1d: return "coverage_length_1d";
    case FunctionalTag::power: return "power";
  }
  return "unknown";
}

FunctionalTag functional_tag_from_string(std::string_view name) {
  static constexpr std::array tags{FunctionalTag::capacity,      FunctionalTag::ber_qam,
                                   FunctionalTag::sinr,          FunctionalTag::outage,
                                   FunctionalTag::coverage_area, FunctionalTag::coverage_length_1d,
                                   FunctionalTag::power};
  for (auto t : tags) {
    if (to_string(t) == name) return t;
  }
  throw ConfigError("unknown functional tag '" + std::string(name) + "'");
}

void Functional::validate() const {
  const auto& p = params;
  switch (tag) {
    case FunctionalTag::capacity:
      if (!(p.bandwidth_hz > 0.0)) throw ConfigError("capacity: bandwidth must be > 0");
      [[fallthrough]];
    case FunctionalTag::sinr:
      if (!(p.noise_pow_w > 0.0)) throw ConfigError("noise power must be > 0");
      if (tag == FunctionalTag::sinr && !(p.signal_pow_w > 0.0)) {
        throw ConfigError("sinr: signal power must be > 0");
      }
      break;
    case FunctionalTag::ber_qam: {
      if (!(p.noise_pow_w > 0.0)) throw ConfigError("noise power must be > 0");
      const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p.mc_order))));
      if (p.mc_order < 4 || root * root != p.mc_order) {
        throw ConfigError("ber_qam: mc_order must be a perfect square >= 4");
      }
      break;
    }
    case FunctionalTag::outage:
    case FunctionalTag::coverage_area:
    case FunctionalTag::coverage_length_1d:
      if (!(p.threshold_w > 0.0)) throw ConfigError("threshold must be > 0");
      break;
    case FunctionalTag::power:
      break;
  }
  if (!(p.length_step_m >= 0.0)) throw ConfigError("length_step_m must be >= 0");
}

bool Functional::is_local() const noexcept {
  return tag != FunctionalTag::coverage_area && tag != FunctionalTag::coverage_length_1d;
}

double Functional::local(double p_w) const {
  switch (tag) {
    case FunctionalTag::capacity: return capacity(p_w, params.bandwidth_hz, params.noise_pow_w);
    case FunctionalTag::ber_qam: return ber_qam(p_w, params.mc_order, params.noise_pow_w);
    case FunctionalTag::sinr: return sinr(params.signal_pow_w, p_w, params.noise_pow_w);
    case FunctionalTag::outage: return outage(p_w, params.threshold_w);
    case FunctionalTag::power: return p_w;
    default: break;
  }
  throw ConfigError(std::string(to_string(tag)) + " is not a local functional");
}

double Functional::operator()(const RadioMap& map) const {
  if (is_local()) return local(dbm_to_watts(map.value_at(params.eval_loc)));
  if (tag == FunctionalTag::coverage_area) return coverage_area(map, params.threshold_w);
  throw ConfigError("coverage_length_1d needs a 1D profile, not a grid map");
}

double friis_1d_coverage_length(double alpha, double d, double tau_w) {
  const double r2 = alpha / tau_w - d * d;
  return r2 > 0.0 ? 2.0 * std::sqrt(r2) : 0.0;
}

double Functional::operator()(const Profile1D& profile) const {
  if (is_local()) return local(profile.watts(params.eval_loc[0]));
  if (tag != FunctionalTag::coverage_length_1d) {
    throw ConfigError("coverage_area needs a grid map, not a 1D profile");
  }
  const double tau = params.threshold_w;
  const double half = 0.5 * friis_1d_coverage_length(profile.alpha, profile.d, tau);
  if (params.length_step_m == 0.0) return 2.0 * half;
  if (half == 0.0) return 0.0;
  // Midpoints (k + 1/2) h inside [x_t - half - h, x_t + half + h].
  const double h = params.length_step_m;
  const auto k_lo = static_cast<long long>(std::floor((profile.x_t - half) / h)) - 1;
  const auto k_hi = static_cast<long long>(std::ceil((profile.x_t + half) / h)) + 1;
  std::size_t covered = 0;
  for (long long k = k_lo; k <= k_hi; ++k) {
    if (profile.watts((static_cast<double>(k) + 0.5) * h) >= tau) ++covered;
  }
  return static_cast<double>(covered) * h;
}

double Functional::evaluate_profile(const std::function<double(double)>& profile_w, double x_lo,
                                    double x_hi, std::size_t n_points) const {
  if (is_local()) return local(profile_w(params.eval_loc[0]));
  if (tag != FunctionalTag::coverage_length_1d) {
    throw ConfigError("coverage_area needs a grid map, not a 1D profile");
  }
  return coverage_length_refined(profile_w, params.threshold_w, x_lo, x_hi, n_points);
}

}  // namespace rme
