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
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rme/kriging.hpp"
#include "rme/random.hpp"

namespace rme {

/// alpha_1..alpha_L and their running products. Steps are 1-based;
/// alpha_bar(0) is defined as 1.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<double> alphas);

  std::size_t steps() const noexcept { return alphas_.size(); }
  double alpha(std::size_t l) const { return alphas_.at(l - 1); }
  double alpha_bar(std::size_t l) const { return l == 0 ? 1.0 : alpha_bars_.at(l - 1); }
  std::span<const double> alphas() const noexcept { return alphas_; }
  std::span<const double> alpha_bars() const noexcept { return alpha_bars_; }

 private:
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
};

/// alpha_l decreasing linearly from alpha_first (l = 1) to alpha_last (l = L).
NoiseSchedule linear_schedule(std::size_t steps, double alpha_first, double alpha_last);

/// Per-cell affine map to zero mean and unit variance.
struct Normalization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  Eigen::MatrixXd normalize(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd denormalize(const Eigen::MatrixXd& z) const;

  /// Cells whose std is below 1e-3 of the largest std use that floor; an
  /// all-zero std vector gives unit scales.
  static Normalization from_moments(const Eigen::VectorXd& mean, const Eigen::VectorXd& std);
  /// Column-wise samples.
  static Normalization from_samples(const Eigen::MatrixXd& samples);
};

/// Predicts the clean state from a noisy state at step l. States are
/// columns of a dim x batch matrix; the output has the same shape.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Eigen::Index dim() const = 0;
  virtual Eigen::MatrixXd predict(const Eigen::MatrixXd& states, std::size_t step) const = 0;
};

/// Wraps an arbitrary per-state callable.
class FunctionDenoiser final : public Denoiser {
 public:
  using Fn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, std::size_t)>;
  FunctionDenoiser(Eigen::Index dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}
  Eigen::Index dim() const override { return dim_; }
  Eigen::MatrixXd predict(const Eigen::MatrixXd& states, std::size_t step) const override;

 private:
  Eigen::Index dim_;
  Fn fn_;
};

/// E[x0 | x_l] for x0 ~ N(mu, Sigma) pushed through the forward process:
/// mu + sqrt(ab) Sigma (ab Sigma + (1 - ab) I)^{-1} (x_l - sqrt(ab) mu),
/// ab = alpha_bar(l). Applied through the eigenbasis of Sigma.
class GaussianOptimalDenoiser final : public Denoiser {
 public:
  /// mean / cov given in the denoiser's (normalized) coordinates.
  GaussianOptimalDenoiser(Eigen::VectorXd mean, const Eigen::MatrixXd& cov, NoiseSchedule schedule);

  Eigen::Index dim() const override { return mean_.size(); }
  Eigen::MatrixXd predict(const Eigen::MatrixXd& states, std::size_t step) const override;

  /// Explicit affine form x0 = W x_l + b at one step.
  Eigen::MatrixXd gain(std::size_t step) const;
  Eigen::VectorXd bias(std::size_t step) const;

 private:
  Eigen::VectorXd shrink(std::size_t step) const;

  Eigen::VectorXd mean_;
  Eigen::MatrixXd basis_;
  Eigen::VectorXd eigvals_;
  NoiseSchedule schedule_;
};

/// Closed-form denoiser for a Gaussian posterior, in the coordinates given
/// by \p norm.
GaussianOptimalDenoiser gaussian_optimal_denoiser(const GaussianPosterior& target,
                                                  const Normalization& norm,
                                                  const NoiseSchedule& schedule);

/// Per-step affine x0 = W_l x_l + b_l fitted by ridge least squares.
/// Steps that were not fitted use the nearest fitted step.
class AffineDenoiser final : public Denoiser {
 public:
  AffineDenoiser(Normalization norm, std::vector<std::size_t> steps, std::vector<Eigen::MatrixXd> gains,
                 std::vector<Eigen::VectorXd> biases);

  Eigen::Index dim() const override { return norm_.mean.size(); }
  Eigen::MatrixXd predict(const Eigen::MatrixXd& states, std::size_t step) const override;

  const Normalization& normalization() const noexcept { return norm_; }
  std::span<const std::size_t> fitted_steps() const noexcept { return steps_; }
  const Eigen::MatrixXd& gain(std::size_t step) const { return gains_[slot(step)]; }
  const Eigen::VectorXd& bias(std::size_t step) const { return biases_[slot(step)]; }

 private:
  std::size_t slot(std::size_t step) const;

  Normalization norm_;
  std::vector<std::size_t> steps_;
  std::vector<Eigen::MatrixXd> gains_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Every \p stride-th step starting at 1, plus step L.
std::vector<std::size_t> strided_steps(std::size_t steps, std::size_t stride);

struct AffineFitOptions {
  std::vector<std::size_t> steps;  ///< empty: strided_steps(L, 25)
  double ridge = 1e-6;
  std::size_t noise_replicates = 1;  ///< forward-noise draws per data map
};

/// Least-squares denoiser from raw data maps (columns of \p dataset).
/// Pairs (x_l, x0) are drawn with forward_sample; the fit is done in the
/// dataset's own normalized coordinates.
AffineDenoiser fit_affine_denoiser(const Eigen::MatrixXd& dataset, const NoiseSchedule& schedule,
                                   std::uint64_t seed, const AffineFitOptions& options = {});

/// x_l = sqrt(alpha_bar_l) x0 + sqrt(1 - alpha_bar_l) z.
Eigen::VectorXd forward_sample(const Eigen::VectorXd& x0, std::size_t step,
                               const NoiseSchedule& schedule, std::uint64_t seed);

/// One kernel x_l = sqrt(alpha_l) x_{l-1} + sqrt(1 - alpha_l) z.
Eigen::VectorXd forward_step(const Eigen::VectorXd& x_prev, std::size_t step,
                             const NoiseSchedule& schedule, Rng& rng);

/// x_{l-1} = state * x_l + pred * x0_hat + sigma * z.
struct ReverseStep {
  double state = 0.0;
  double pred = 0.0;
  double sigma = 0.0;
};

/// Posterior q(x_{l-1} | x_l, x0) coefficients with alpha_bar(0) = 1; the
/// l = 1 step is deterministic and returns x0_hat.
ReverseStep reverse_step(const NoiseSchedule& schedule, std::size_t step);

/// Ancestral sampling from x_L ~ N(0, I). Returns dim x n, chain j seeded by
/// derive_seed(seed, j). Chains are batched in fixed blocks so the output
/// is independent of the worker count.
Eigen::MatrixXd reverse_sample(const Denoiser& denoiser, const NoiseSchedule& schedule,
                               std::size_t n, std::uint64_t seed);

/// Diffusion sampler targeting the Kriging posterior of the readings.
std::vector<RadioMap> conditional_sample(const KrigingModel& model, const MeasurementSet& measurements,
                                         const Grid& grid, const NoiseSchedule& schedule,
                                         std::size_t n, std::uint64_t seed);

/// Columns of a matrix as maps on \p grid.
std::vector<RadioMap> to_maps(const Grid& grid, const Eigen::MatrixXd& columns);
/// Maps as columns.
Eigen::MatrixXd to_matrix(std::span<const RadioMap> maps);

}  // namespace rme
