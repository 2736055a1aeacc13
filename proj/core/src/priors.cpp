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
#include "rme/priors.hpp"

#include <algorithm>
#include <cmath>

#include "rme/error.hpp"
#include "rme/linalg.hpp"

namespace rme {

void Analytic1DPrior::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("analytic1d: alpha must be > 0");
  if (!(d >= 0.0)) throw ConfigError("analytic1d: d must be >= 0");
  if (!(x_half_range > 0.0)) throw ConfigError("analytic1d: x_half_range must be > 0");
}

double default_x_half_range(double alpha, double tau_w) {
  if (!(alpha > 0.0) || !(tau_w > 0.0)) throw ConfigError("alpha and tau must be > 0");
  return 10.0 * std::sqrt(alpha / tau_w);
}

double sample_analytic1d(const Analytic1DPrior& prior, std::uint64_t seed) {
  prior.validate();
  Rng rng(seed);
  return rng.uniform(-prior.x_half_range, prior.x_half_range);
}

Analytic1DSampler::Analytic1DSampler(Analytic1DPrior prior) : prior_(prior) { prior_.validate(); }

Profile1D Analytic1DSampler::draw(std::uint64_t seed) const {
  return {prior_.alpha, sample_analytic1d(prior_, seed), prior_.d};
}

void LoS2DPrior::validate() const {
  if (!(width_m > 0.0) || !(height_m > 0.0)) throw ConfigError("los2d: region must be non-empty");
  if (n_tx < 1) throw ConfigError("los2d: n_tx must be >= 1");
  if (!(tx_height_m >= 0.0) || !(rx_height_m >= 0.0)) {
    throw ConfigError("los2d: heights must be >= 0");
  }
  if (!(link.freq_hz > 0.0)) throw ConfigError("los2d: carrier frequency must be > 0");
}

namespace {

void check_grid_in_region(const LoS2DPrior& prior, const Grid& grid) {
  const double eps = 1e-9 * std::max(prior.width_m, prior.height_m);
  const double x_hi = grid.origin_x() + grid.spacing() * static_cast<double>(grid.nx());
  const double y_hi = grid.origin_y() + grid.spacing() * static_cast<double>(grid.ny());
  if (grid.origin_x() < -eps || grid.origin_y() < -eps || x_hi > prior.width_m + eps ||
      y_hi > prior.height_m + eps) {
    throw ConfigError("los2d: grid must lie inside the region");
  }
}

}  // namespace

RadioMap los2d_map(const LoS2DPrior& prior, const Grid& grid, std::span<const Vec3> tx_locs) {
  prior.validate();
  const double alpha = alpha_const(prior.link);
  const double r_min = 0.5 * grid.spacing();
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Vec3 cell = grid.cell_center(i);
    cell[2] = prior.rx_height_m;
    double total_w = 0.0;
    for (const auto& tx : tx_locs) {
      const double r = std::max(distance(cell, tx), r_min);
      total_w += alpha / (r * r);
    }
    values[i] = watts_to_dbm(total_w);
  }
  return RadioMap(grid, std::move(values));
}

std::vector<Vec3> sample_los2d_transmitters(const LoS2DPrior& prior, std::uint64_t seed) {
  prior.validate();
  Rng rng(seed);
  std::vector<Vec3> tx(prior.n_tx);
  for (auto& t : tx) {
    t[0] = rng.uniform(0.0, prior.width_m);
    t[1] = rng.uniform(0.0, prior.height_m);
    t[2] = prior.tx_height_m;
  }
  return tx;
}

RadioMap sample_los2d(const LoS2DPrior& prior, const Grid& grid, std::uint64_t seed) {
  check_grid_in_region(prior, grid);
  const auto tx = sample_los2d_transmitters(prior, seed);
  return los2d_map(prior, grid, tx);
}

LoS2DSampler::LoS2DSampler(LoS2DPrior prior, Grid grid) : prior_(prior), grid_(std::move(grid)) {
  prior_.validate();
  check_grid_in_region(prior_, grid_);
}

RadioMap LoS2DSampler::draw(std::uint64_t seed) const { return sample_los2d(prior_, grid_, seed); }

void GudmundsonPrior::validate() const {
  if (!(sigma_sh_db >= 0.0)) throw ConfigError("gudmundson: sigma_sh_db must be >= 0");
  if (!(d_corr_m > 0.0)) throw ConfigError("gudmundson: d_corr_m must be > 0");
  if (!std::isfinite(mean_db)) throw ConfigError("gudmundson: mean_db must be finite");
}

double GudmundsonPrior::kernel(const Vec3& a, const Vec3& b) const {
  return sigma_sh_db * sigma_sh_db * std::exp(-distance(a, b) / d_corr_m);
}

Eigen::MatrixXd gram_matrix(const GudmundsonPrior& prior, std::span<const Vec3> a,
                            std::span<const Vec3> b) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = prior.kernel(a[i], b[j]);
    }
  }
  return k;
}

Eigen::MatrixXd gram_matrix(const GudmundsonPrior& prior, std::span<const Vec3> locs) {
  return gram_matrix(prior, locs, locs);
}

GudmundsonSampler::GudmundsonSampler(GudmundsonPrior prior, Grid grid)
    : prior_(prior), grid_(std::move(grid)) {
  prior_.validate();
  const auto cells = grid_.cell_centers();
  const double var = prior_.sigma_sh_db * prior_.sigma_sh_db;
  factor_ = cholesky_with_jitter(gram_matrix(prior_, cells), var).lower;
}

RadioMap GudmundsonSampler::draw(std::uint64_t seed) const {
  Rng rng(seed);
  const auto n = static_cast<Eigen::Index>(grid_.size());
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  Eigen::VectorXd field = factor_.triangularView<Eigen::Lower>() * z;
  std::vector<double> values(grid_.size());
  for (Eigen::Index i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = prior_.mean_db + field[i];
  return RadioMap(grid_, std::move(values));
}

RadioMap sample_gudmundson(const GudmundsonPrior& prior, const Grid& grid, std::uint64_t seed) {
  return GudmundsonSampler(prior, grid).draw(seed);
}

double value_dbm_at(const RadioMap& map, const Vec3& loc) { return map.value_at(loc); }

double value_dbm_at(const Profile1D& profile, const Vec3& loc) {
  return watts_to_dbm(profile.watts(loc[0]));
}

}  // namespace rme
