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
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rme/functionals.hpp"
#include "rme/model.hpp"
#include "rme/priors.hpp"

namespace rme {

/// Simple Kriging with the Gudmundson covariance, in dB.
struct KrigingModel {
  GudmundsonPrior prior{};
  double meas_noise_std_db = 0.0;
  /// Replace the configured constant mean by the sample mean of the readings.
  bool estimate_mean = false;

  void validate() const;
};

/// Joint Gaussian over all grid cells, in dB.
struct GaussianPosterior {
  Grid grid;
  Eigen::VectorXd mean_db;
  Eigen::MatrixXd cov_db2;
};

/// Prior conditioned on the readings. Kernels are evaluated at the true
/// reading locations, so off-grid readings need no snapping. Exact duplicate
/// noiseless readings are merged; conflicting ones raise IllPosedError.
GaussianPosterior posterior(const KrigingModel& model, const MeasurementSet& measurements,
                            const Grid& grid);

/// Draws from a GaussianPosterior with a cached Cholesky factor.
class GaussianMapSampler {
 public:
  using sample_type = RadioMap;
  explicit GaussianMapSampler(GaussianPosterior post);
  RadioMap draw(std::uint64_t seed) const;
  const GaussianPosterior& posterior() const noexcept { return post_; }
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }

 private:
  GaussianPosterior post_;
  Eigen::MatrixXd factor_;
};

/// n maps mean + L z; map i is seeded with derive_seed(seed, i).
std::vector<RadioMap> sample_posterior(const GaussianPosterior& post, std::size_t n,
                                       std::uint64_t seed);

/// E[phi(X)] for the marginal X ~ N(mean, var) of the cell containing
/// eval_loc, by an n_quad-point Gauss-Hermite rule. phi takes dBm.
double integral_local_functional(const GaussianPosterior& post,
                                 const std::function<double(double)>& phi_dbm, const Vec3& eval_loc,
                                 int n_quad);

/// Same for a local Functional; the rule feeds it watts.
double integral_local_functional(const GaussianPosterior& post, const Functional& g, int n_quad);

RadioMap mean_map(const GaussianPosterior& post);
/// Per-cell posterior standard deviation [dB].
RadioMap marginal_std_map(const GaussianPosterior& post);

}  // namespace rme
