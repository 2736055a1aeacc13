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
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rme/error.hpp"
#include "rme/model.hpp"
#include "rme/parallel.hpp"
#include "rme/random.hpp"

namespace rme {

// ---------------------------------------------------------------------------
// Single transmitter over the x-axis

/// Transmitter at lateral distance d from the x-axis, x-position uniform on
/// [-x_half_range, x_half_range].
struct Analytic1DPrior {
  double alpha = 0.0;
  double d = 0.0;
  double x_half_range = 0.0;

  void validate() const;
};

/// Half range 10 * sqrt(alpha / tau): coverage intervals of width
/// 2 sqrt(alpha / tau) stay far from the support boundary.
double default_x_half_range(double alpha, double tau_w);

/// One realization of the 1D map: x -> alpha / ((x - x_t)^2 + d^2).
struct Profile1D {
  double alpha = 0.0;
  double x_t = 0.0;
  double d = 0.0;

  double watts(double x) const { return friis_1d(alpha, x, x_t, d); }
};

double sample_analytic1d(const Analytic1DPrior& prior, std::uint64_t seed);

/// Sampler adaptor: draw(seed) yields a Profile1D.
class Analytic1DSampler {
 public:
  using sample_type = Profile1D;
  explicit Analytic1DSampler(Analytic1DPrior prior);
  Profile1D draw(std::uint64_t seed) const;
  const Analytic1DPrior& prior() const noexcept { return prior_; }

 private:
  Analytic1DPrior prior_;
};

// ---------------------------------------------------------------------------
// Line-of-sight, several transmitters

struct LoS2DPrior {
  double width_m = 160.0;
  double height_m = 96.0;
  std::size_t n_tx = 1;
  double tx_height_m = 10.0;
  double rx_height_m = 1.0;
  LinkBudget link{44.0, 0.0, 0.0, 3.5e9};

  void validate() const;
};

/// Map in dBm for fixed transmitter positions; power adds in watts.
/// Distances below spacing / 2 are clamped to spacing / 2.
RadioMap los2d_map(const LoS2DPrior& prior, const Grid& grid, std::span<const Vec3> tx_locs);

/// Transmitter positions uniform over the region at tx height.
std::vector<Vec3> sample_los2d_transmitters(const LoS2DPrior& prior, std::uint64_t seed);

RadioMap sample_los2d(const LoS2DPrior& prior, const Grid& grid, std::uint64_t seed);

class LoS2DSampler {
 public:
  using sample_type = RadioMap;
  LoS2DSampler(LoS2DPrior prior, Grid grid);
  RadioMap draw(std::uint64_t seed) const;
  const Grid& grid() const noexcept { return grid_; }

 private:
  LoS2DPrior prior_;
  Grid grid_;
};

// ---------------------------------------------------------------------------
// Log-normal shadowing with exponential spatial correlation

struct GudmundsonPrior {
  double sigma_sh_db = 4.0;
  double d_corr_m = 20.0;
  double mean_db = -60.0;

  void validate() const;
  /// sigma^2 exp(-|a - b| / d_corr)
  double kernel(const Vec3& a, const Vec3& b) const;
};

Eigen::MatrixXd gram_matrix(const GudmundsonPrior& prior, std::span<const Vec3> a,
                            std::span<const Vec3> b);
Eigen::MatrixXd gram_matrix(const GudmundsonPrior& prior, std::span<const Vec3> locs);

/// Holds the factor of the grid Gram matrix so repeated draws are cheap.
class GudmundsonSampler {
 public:
  using sample_type = RadioMap;
  GudmundsonSampler(GudmundsonPrior prior, Grid grid);
  RadioMap draw(std::uint64_t seed) const;
  const Grid& grid() const noexcept { return grid_; }
  const GudmundsonPrior& prior() const noexcept { return prior_; }
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }

 private:
  GudmundsonPrior prior_;
  Grid grid_;
  Eigen::MatrixXd factor_;
};

RadioMap sample_gudmundson(const GudmundsonPrior& prior, const Grid& grid, std::uint64_t seed);

// ---------------------------------------------------------------------------

/// Power [dBm] a realization produces at a location.
double value_dbm_at(const RadioMap& map, const Vec3& loc);
/// 1D profiles read the x coordinate only.
double value_dbm_at(const Profile1D& profile, const Vec3& loc);

/// n independent draws; draw i uses derive_seed(base_seed, i), so the
/// result is the same for any worker count.
template <class Sampler>
std::vector<typename Sampler::sample_type> prior_dataset(const Sampler& sampler, std::size_t n,
                                                         std::uint64_t base_seed) {
  using T = typename Sampler::sample_type;
  if (n == 0) throw ConfigError("prior_dataset needs n >= 1");
  std::vector<std::optional<T>> slots(n);
  parallel_for(n, [&](std::size_t i) { slots[i].emplace(sampler.draw(derive_seed(base_seed, i))); });
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace rme
