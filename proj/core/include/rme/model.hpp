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

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rme {

/// Speed of light in vacuum [m/s].
inline constexpr double kSpeedOfLight = 299'792'458.0;

using Vec3 = std::array<double, 3>;

double distance(const Vec3& a, const Vec3& b) noexcept;

/// Rectangular evaluation grid on a horizontal plane.
///
/// `origin` is the lower-left corner of the covered rectangle; cell (ix, iy)
/// has its center at origin + ((ix + 0.5) * spacing, (iy + 0.5) * spacing) and
/// flat index iy * nx + ix (row-major).
class Grid {
 public:
  Grid(double origin_x, double origin_y, double spacing, std::size_t nx, std::size_t ny,
       double plane_height = 0.0);

  double origin_x() const noexcept { return origin_x_; }
  double origin_y() const noexcept { return origin_y_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  double plane_height() const noexcept { return plane_height_; }
  std::size_t size() const noexcept { return nx_ * ny_; }
  double cell_area() const noexcept { return spacing_ * spacing_; }
  double total_area() const noexcept { return cell_area() * static_cast<double>(size()); }

  Vec3 cell_center(std::size_t index) const;
  std::vector<Vec3> cell_centers() const;

  /// True if (x, y) lies inside the closed rectangle covered by the grid.
  bool contains(double x, double y) const noexcept;
  /// Flat index of the cell containing (x, y). Throws DomainError outside.
  std::size_t nearest_cell(double x, double y) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double origin_x_;
  double origin_y_;
  double spacing_;
  std::size_t nx_;
  std::size_t ny_;
  double plane_height_;
};

/// Received power [dBm] sampled at the cell centers of a grid.
class RadioMap {
 public:
  RadioMap(Grid grid, std::vector<double> values_dbm);
  /// Constant map.
  RadioMap(Grid grid, double value_dbm);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  /// Value of the cell containing the horizontal position of \p loc.
  double value_at(const Vec3& loc) const;

  friend bool operator==(const RadioMap&, const RadioMap&) = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

struct LinkBudget {
  double ptx_dbm = 30.0;
  double gtx_dbi = 0.0;
  double grx_dbi = 0.0;
  double freq_hz = 2.4e9;

  double wavelength() const noexcept { return kSpeedOfLight / freq_hz; }
};

struct Measurement {
  Vec3 loc{};
  double value_dbm = 0.0;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

using MeasurementSet = std::vector<Measurement>;

double dbm_to_watts(double p_dbm) noexcept;
/// Throws DomainError for p_w <= 0.
double watts_to_dbm(double p_w);

/// Friis constant P_tx G_t G_r (lambda / 4 pi)^2 in W m^2.
double alpha_const(const LinkBudget& link);

/// Free-space received power alpha / |rx - tx|^2 in watts.
double friis_power(const LinkBudget& link, const Vec3& rx_loc, const Vec3& tx_loc);
double friis_power(double alpha, const Vec3& rx_loc, const Vec3& tx_loc);

/// Friis power along the x-axis for a transmitter at lateral offset \p d
/// from the axis: alpha / ((x - x_t)^2 + d^2).
double friis_1d(double alpha, double x, double x_t, double d);

/// Noisy located readings p = map(loc) + w, w ~ N(0, noise_std_db^2) in dB.
MeasurementSet measure(const std::function<double(const Vec3&)>& map_dbm_at,
                       std::span<const Vec3> locations, double noise_std_db, std::uint64_t seed);

/// Convenience overload reading the map by nearest cell.
MeasurementSet measure(const RadioMap& map, std::span<const Vec3> locations, double noise_std_db,
                       std::uint64_t seed);

}  // namespace rme
