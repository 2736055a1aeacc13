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
#include "rme/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rme/error.hpp"
#include "rme/parallel.hpp"

namespace rme {

NoiseSchedule::NoiseSchedule(std::vector<double> alphas) : alphas_(std::move(alphas)) {
  if (alphas_.empty()) throw ConfigError("noise schedule needs at least one step");
  alpha_bars_.reserve(alphas_.size());
  double prod = 1.0;
  for (double a : alphas_) {
    if (!(a > 0.0) || a > 1.0) throw ConfigError("schedule alphas must lie in (0, 1]");
    prod *= a;
    alpha_bars_.push_back(prod);
  }
}

NoiseSchedule linear_schedule(std::size_t steps, double alpha_first, double alpha_last) {
  if (steps < 1) throw ConfigError("schedule needs L >= 1");
  if (!(alpha_last > 0.0) || !(alpha_last <= alpha_first) || !(alpha_first <= 1.0)) {
    throw ConfigError("schedule needs 0 < alpha_last <= alpha_first <= 1");
  }
  std::vector<double> alphas(steps);
  const double slope = steps > 1 ? (alpha_first - alpha_last) / static_cast<double>(steps - 1) : 0.0;
  for (std::size_t l = 0; l < steps; ++l) alphas[l] = alpha_first - static_cast<double>(l) * slope;
  alphas.back() = steps > 1 ? alpha_last : alpha_first;
  return NoiseSchedule(std::move(alphas));
}

Eigen::MatrixXd Normalization::normalize(const Eigen::MatrixXd& x) const {
  return (x.colwise() - mean).array().colwise() / scale.array();
}

Eigen::MatrixXd Normalization::denormalize(const Eigen::MatrixXd& z) const {
  return (z.array().colwise() * scale.array()).matrix().colwise() + mean;
}

Normalization Normalization::from_moments(const Eigen::VectorXd& mean, const Eigen::VectorXd& std) {
  Normalization n{mean, std};
  const double top = std.size() ? std.maxCoeff() : 0.0;
  if (top <= 0.0) {
    n.scale.setOnes();
  } else {
    n.scale = std.cwiseMax(1e-3 * top);
  }
  return n;
}

Normalization Normalization::from_samples(const Eigen::MatrixXd& samples) {
  const Eigen::VectorXd mean = samples.rowwise().mean();
  const Eigen::MatrixXd centered = samples.colwise() - mean;
  const double denom = std::max<double>(1.0, static_cast<double>(samples.cols()) - 1.0);
  const Eigen::VectorXd sd = (centered.array().square().rowwise().sum() / denom).sqrt();
  return from_moments(mean, sd);
}

Eigen::MatrixXd FunctionDenoiser::predict(const Eigen::MatrixXd& states, std::size_t step) const {
  Eigen::MatrixXd out(states.rows(), states.cols());
  for (Eigen::Index j = 0; j < states.cols(); ++j) {
    Eigen::VectorXd y = fn_(states.col(j), step);
    if (y.size() != states.rows()) throw ConfigError("denoiser changed the state shape");
    out.col(j) = y;
  }
  return out;
}

GaussianOptimalDenoiser::GaussianOptimalDenoiser(Eigen::VectorXd mean, const Eigen::MatrixXd& cov,
                                                 NoiseSchedule schedule)
    : mean_(std::move(mean)), schedule_(std::move(schedule)) {
  if (cov.rows() != mean_.size() || cov.cols() != mean_.size()) {
    throw ConfigError("denoiser target: mean and covariance sizes differ");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (cov + cov.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of target failed");
  basis_ = eig.eigenvectors();
  eigvals_ = eig.eigenvalues().cwiseMax(0.0);
}

Eigen::VectorXd GaussianOptimalDenoiser::shrink(std::size_t step) const {
  const double ab = schedule_.alpha_bar(step);
  const double root = std::sqrt(ab);
  Eigen::VectorXd s(eigvals_.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double denom = ab * eigvals_[i] + (1.0 - ab);
    s[i] = denom > 0.0 ? root * eigvals_[i] / denom : 1.0 / root;
  }
  return s;
}

Eigen::MatrixXd GaussianOptimalDenoiser::predict(const Eigen::MatrixXd& states, std::size_t step) const {
  if (states.rows() != mean_.size()) throw ConfigError("state size does not match denoiser");
  const double root = std::sqrt(schedule_.alpha_bar(step));
  Eigen::MatrixXd proj = basis_.transpose() * (states.colwise() - root * mean_);
  proj = shrink(step).asDiagonal() * proj;
  Eigen::MatrixXd out = basis_ * proj;
  out.colwise() += mean_;
  return out;
}

Eigen::MatrixXd GaussianOptimalDenoiser::gain(std::size_t step) const {
  return basis_ * shrink(step).asDiagonal() * basis_.transpose();
}

Eigen::VectorXd GaussianOptimalDenoiser::bias(std::size_t step) const {
  return mean_ - std::sqrt(schedule_.alpha_bar(step)) * (gain(step) * mean_);
}

GaussianOptimalDenoiser gaussian_optimal_denoiser(const GaussianPosterior& target,
                                                  const Normalization& norm,
                                                  const NoiseSchedule& schedule) {
  if (norm.mean.size() != target.mean_db.size()) throw ConfigError("normalization size mismatch");
  const Eigen::VectorXd inv = norm.scale.cwiseInverse();
  Eigen::VectorXd mean = (target.mean_db - norm.mean).cwiseProduct(inv);
  Eigen::MatrixXd cov = inv.asDiagonal() * target.cov_db2 * inv.asDiagonal();
  return GaussianOptimalDenoiser(std::move(mean), cov, schedule);
}

AffineDenoiser::AffineDenoiser(Normalization norm, std::vector<std::size_t> steps,
                               std::vector<Eigen::MatrixXd> gains, std::vector<Eigen::VectorXd> biases)
    : norm_(std::move(norm)), steps_(std::move(steps)), gains_(std::move(gains)), biases_(std::move(biases)) {
  if (steps_.empty() || steps_.size() != gains_.size() || steps_.size() != biases_.size()) {
    throw ConfigError("affine denoiser needs one gain and bias per fitted step");
  }
  if (!std::is_sorted(steps_.begin(), steps_.end())) throw ConfigError("fitted steps must be sorted");
}

std::size_t AffineDenoiser::slot(std::size_t step) const {
  const auto it = std::lower_bound(steps_.begin(), steps_.end(), step);
  if (it == steps_.end()) return steps_.size() - 1;
  if (*it == step || it == steps_.begin()) return static_cast<std::size_t>(it - steps_.begin());
  const auto prev = it - 1;
  // Ties go to the earlier step.
  return static_cast<std::size_t>((step - *prev <= *it - step ? prev : it) - steps_.begin());
}

Eigen::MatrixXd AffineDenoiser::predict(const Eigen::MatrixXd& states, std::size_t step) const {
  const auto k = slot(step);
  Eigen::MatrixXd out = gains_[k] * states;
  out.colwise() += biases_[k];
  return out;
}

std::vector<std::size_t> strided_steps(std::size_t steps, std::size_t stride) {
  if (stride == 0) throw ConfigError("step stride must be >= 1");
  std::vector<std::size_t> out;
  for (std::size_t l = 1; l <= steps; l += stride) out.push_back(l);
  if (out.back() != steps) out.push_back(steps);
  return out;
}

Eigen::VectorXd forward_sample(const Eigen::VectorXd& x0, std::size_t step,
                               const NoiseSchedule& schedule, std::uint64_t seed) {
  if (step < 1 || step > schedule.steps()) throw ConfigError("forward step out of range");
  Rng rng(seed);
  const double ab = schedule.alpha_bar(step);
  const double a = std::sqrt(ab);
  const double s = std::sqrt(1.0 - ab);
  Eigen::VectorXd out(x0.size());
  for (Eigen::Index i = 0; i < x0.size(); ++i) out[i] = a * x0[i] + s * rng.normal();
  return out;
}

Eigen::VectorXd forward_step(const Eigen::VectorXd& x_prev, std::size_t step,
                             const NoiseSchedule& schedule, Rng& rng) {
  const double al = schedule.alpha(step);
  const double a = std::sqrt(al);
  const double s = std::sqrt(1.0 - al);
  Eigen::VectorXd out(x_prev.size());
  for (Eigen::Index i = 0; i < x_prev.size(); ++i) out[i] = a * x_prev[i] + s * rng.normal();
  return out;
}

AffineDenoiser fit_affine_denoiser(const Eigen::MatrixXd& dataset, const NoiseSchedule& schedule,
                                   std::uint64_t seed, const AffineFitOptions& options) {
  if (dataset.cols() < 2) throw ConfigError("affine fit needs at least 2 data maps");
  if (!(options.ridge >= 0.0)) throw ConfigError("ridge must be >= 0");
  if (options.noise_replicates < 1) throw ConfigError("noise_replicates must be >= 1");

  auto steps = options.steps.empty() ? strided_steps(schedule.steps(), 25) : options.steps;
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  for (auto l : steps) {
    if (l < 1 || l > schedule.steps()) throw ConfigError("fitted step out of range");
  }

  Normalization norm = Normalization::from_samples(dataset);
  const Eigen::MatrixXd clean = norm.normalize(dataset);
  const Eigen::Index dim = clean.rows();
  const Eigen::Index n = clean.cols();
  const auto reps = static_cast<Eigen::Index>(options.noise_replicates);

  std::vector<Eigen::MatrixXd> gains(steps.size());
  std::vector<Eigen::VectorXd> biases(steps.size());
  parallel_for(steps.size(), [&](std::size_t k) {
    const std::size_t l = steps[k];
    const double a = std::sqrt(schedule.alpha_bar(l));
    const double s = std::sqrt(1.0 - schedule.alpha_bar(l));
    // Design rows: [x_l; 1]. Accumulate normal equations.
    Eigen::MatrixXd design(dim + 1, n * reps);
    Eigen::MatrixXd target(dim, n * reps);
    for (Eigen::Index r = 0; r < reps; ++r) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto col = r * n + j;
        Rng rng(derive_seed(derive_seed(seed, l), static_cast<std::uint64_t>(col)));
        for (Eigen::Index i = 0; i < dim; ++i) design(i, col) = a * clean(i, j) + s * rng.normal();
        design(dim, col) = 1.0;
        target.col(col) = clean.col(j);
      }
    }
    Eigen::MatrixXd gram = design * design.transpose();
    gram.diagonal().head(dim).array() += options.ridge * static_cast<double>(n * reps);
    const Eigen::MatrixXd rhs = design * target.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("affine fit: normal equations are rank deficient at step " +
                           std::to_string(l));
    }
    const Eigen::MatrixXd beta = llt.solve(rhs);  // (dim + 1) x dim
    gains[k] = beta.topRows(dim).transpose();
    biases[k] = beta.row(dim).transpose();
  });
  return AffineDenoiser(std::move(norm), std::move(steps), std::move(gains), std::move(biases));
}

ReverseStep reverse_step(const NoiseSchedule& schedule, std::size_t step) {
  const double al = schedule.alpha(step);
  const double ab = schedule.alpha_bar(step);
  const double ab_prev = schedule.alpha_bar(step - 1);
  const double denom = 1.0 - ab;
  if (step == 1 || denom <= 0.0) return {0.0, 1.0, 0.0};
  ReverseStep r;
  r.state = std::sqrt(al) * (1.0 - ab_prev) / denom;
  r.pred = std::sqrt(ab_prev) * (1.0 - al) / denom;
  r.sigma = std::sqrt((1.0 - al) * (1.0 - ab_prev) / denom);
  return r;
}

namespace {

constexpr std::size_t kChainBlock = 64;

}  // namespace

Eigen::MatrixXd reverse_sample(const Denoiser& denoiser, const NoiseSchedule& schedule,
                               std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("reverse_sample needs n >= 1");
  const Eigen::Index dim = denoiser.dim();
  Eigen::MatrixXd out(dim, static_cast<Eigen::Index>(n));
  const std::size_t blocks = (n + kChainBlock - 1) / kChainBlock;

  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t first = b * kChainBlock;
    const std::size_t count = std::min(kChainBlock, n - first);
    std::vector<Rng> rngs;
    rngs.reserve(count);
    for (std::size_t j = 0; j < count; ++j) rngs.emplace_back(derive_seed(seed, first + j));

    Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(count));
    for (std::size_t j = 0; j < count; ++j) {
      for (Eigen::Index i = 0; i < dim; ++i) x(i, static_cast<Eigen::Index>(j)) = rngs[j].normal();
    }
    for (std::size_t l = schedule.steps(); l >= 1; --l) {
      const Eigen::MatrixXd x0 = denoiser.predict(x, l);
      const auto r = reverse_step(schedule, l);
      x = r.state * x + r.pred * x0;
      if (r.sigma > 0.0) {
        for (std::size_t j = 0; j < count; ++j) {
          for (Eigen::Index i = 0; i < dim; ++i) {
            x(i, static_cast<Eigen::Index>(j)) += r.sigma * rngs[j].normal();
          }
        }
      }
    }
    out.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)) = x;
  });
  return out;
}

std::vector<RadioMap> to_maps(const Grid& grid, const Eigen::MatrixXd& columns) {
  std::vector<RadioMap> maps;
  maps.reserve(static_cast<std::size_t>(columns.cols()));
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    const auto col = columns.col(j);
    maps.emplace_back(grid, std::vector<double>(col.data(), col.data() + col.size()));
  }
  return maps;
}

Eigen::MatrixXd to_matrix(std::span<const RadioMap> maps) {
  if (maps.empty()) return {};
  const auto dim = static_cast<Eigen::Index>(maps.front().values().size());
  Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(maps.size()));
  for (std::size_t j = 0; j < maps.size(); ++j) {
    const auto v = maps[j].values();
    if (static_cast<Eigen::Index>(v.size()) != dim) throw ConfigError("maps differ in size");
    m.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(v.data(), dim);
  }
  return m;
}

std::vector<RadioMap> conditional_sample(const KrigingModel& model, const MeasurementSet& measurements,
                                         const Grid& grid, const NoiseSchedule& schedule,
                                         std::size_t n, std::uint64_t seed) {
  const auto post = posterior(model, measurements, grid);
  const Eigen::VectorXd sd = post.cov_db2.diagonal().cwiseMax(0.0).cwiseSqrt();
  const auto norm = Normalization::from_moments(post.mean_db, sd);
  const auto denoiser = gaussian_optimal_denoiser(post, norm, schedule);
  return to_maps(grid, norm.denormalize(reverse_sample(denoiser, schedule, n, seed)));
}

}  // namespace rme
