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
#include "rme/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rme/error.hpp"
#include "rme/random.hpp"

namespace rme {

double distance(const Vec3& a, const Vec3& b) noexcept {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Grid::Grid(double origin_x, double origin_y, double spacing, std::size_t nx, std::size_t ny,
           double plane_height)
    : origin_x_(origin_x),
      origin_y_(origin_y),
      spacing_(spacing),
      nx_(nx),
      ny_(ny),
      plane_height_(plane_height) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ConfigError("grid spacing must be > 0");
  if (nx == 0 || ny == 0) throw ConfigError("grid needs at least one cell per axis");
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y) || !std::isfinite(plane_height)) {
    throw ConfigError("grid origin and height must be finite");
  }
}

Vec3 Grid::cell_center(std::size_t index) const {
  if (index >= size()) throw DomainError("cell index out of range");
  const auto ix = index % nx_;
  const auto iy = index / nx_;
  return {origin_x_ + (static_cast<double>(ix) + 0.5) * spacing_,
          origin_y_ + (static_cast<double>(iy) + 0.5) * spacing_, plane_height_};
}

std::vector<Vec3> Grid::cell_centers() const {
  std::vector<Vec3> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(cell_center(i));
  return out;
}

bool Grid::contains(double x, double y) const noexcept {
  return x >= origin_x_ && y >= origin_y_ &&
         x <= origin_x_ + spacing_ * static_cast<double>(nx_) &&
         y <= origin_y_ + spacing_ * static_cast<double>(ny_);
}

std::size_t Grid::nearest_cell(double x, double y) const {
  if (!contains(x, y)) {
    throw DomainError("location (" + std::to_string(x) + ", " + std::to_string(y) +
                      ") outside map domain");
  }
  auto clamp_index = [](double u, std::size_t n) {
    const auto i = static_cast<std::size_t>(std::floor(u));
    return i >= n ? n - 1 : i;
  };
  const auto ix = clamp_index((x - origin_x_) / spacing_, nx_);
  const auto iy = clamp_index((y - origin_y_) / spacing_, ny_);
  return iy * nx_ + ix;
}

RadioMap::RadioMap(Grid grid, std::vector<double> values_dbm)
    : grid_(std::move(grid)), values_(std::move(values_dbm)) {
  if (values_.size() != grid_.size()) throw ConfigError("map length does not match grid");
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("map values must be finite");
  }
}

RadioMap::RadioMap(Grid grid, double value_dbm)
    : RadioMap(grid, std::vector<double>(grid.size(), value_dbm)) {}

double RadioMap::value_at(const Vec3& loc) const {
  return values_[grid_.nearest_cell(loc[0], loc[1])];
}

double dbm_to_watts(double p_dbm) noexcept { return std::pow(10.0, (p_dbm - 30.0) / 10.0); }

double watts_to_dbm(double p_w) {
  if (!(p_w > 0.0)) throw DomainError("watts_to_dbm needs positive power");
  return 10.0 * std::log10(p_w) + 30.0;
}

double alpha_const(const LinkBudget& link) {
  if (!(link.freq_hz > 0.0)) throw ConfigError("carrier frequency must be > 0");
  const double ptx_w = dbm_to_watts(link.ptx_dbm);
  const double gains = std::pow(10.0, (link.gtx_dbi + link.grx_dbi) / 10.0);
  const double k = link.wavelength() / (4.0 * std::numbers::pi);
  return ptx_w * gains * k * k;
}

double friis_power(double alpha, const Vec3& rx_loc, const Vec3& tx_loc) {
  const double r = distance(rx_loc, tx_loc);
  if (r == 0.0) throw DomainError("Friis model is singular at zero distance");
  return alpha / (r * r);
}

double friis_power(const LinkBudget& link, const Vec3& rx_loc, const Vec3& tx_loc) {
  return friis_power(alpha_const(link), rx_loc, tx_loc);
}

double friis_1d(double alpha, double x, double x_t, double d) {
  const double u = x - x_t;
  const double r2 = u * u + d * d;
  if (r2 == 0.0) throw DomainError("Friis model is singular at zero distance");
  return alpha / r2;
}

MeasurementSet measure(const std::function<double(const Vec3&)>& map_dbm_at,
                       std::span<const Vec3> locations, double noise_std_db, std::uint64_t seed) {
  if (!(noise_std_db >= 0.0)) throw ConfigError("noise std must be >= 0");
  Rng rng(seed);
  MeasurementSet out;
  out.reserve(locations.size());
  for (const auto& loc : locations) {
    for (double c : loc) {
      if (!std::isfinite(c)) throw DomainError("measurement location must be finite");
    }
    const double clean = map_dbm_at(loc);
    const double noise = noise_std_db > 0.0 ? noise_std_db * rng.normal() : 0.0;
    out.push_back({loc, clean + noise});
  }
  return out;
}

MeasurementSet measure(const RadioMap& map, std::span<const Vec3> locations, double noise_std_db,
                       std::uint64_t seed) {
  return measure([&map](const Vec3& loc) { return map.value_at(loc); }, locations, noise_std_db,
                 seed);
}

}  // namespace rme
