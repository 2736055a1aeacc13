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
#include "rme/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "rme/error.hpp"
#include "rme/linalg.hpp"
#include "rme/parallel.hpp"
#include "rme/random.hpp"

namespace rme {

void KrigingModel::validate() const {
  prior.validate();
  if (!(meas_noise_std_db >= 0.0)) throw ConfigError("kriging: noise std must be >= 0");
}

namespace {

MeasurementSet merge_noiseless_duplicates(const MeasurementSet& in) {
  MeasurementSet out;
  out.reserve(in.size());
  for (const auto& m : in) {
    auto same = std::find_if(out.begin(), out.end(), [&](const Measurement& o) { return o.loc == m.loc; });
    if (same == out.end()) {
      out.push_back(m);
    } else if (std::abs(same->value_dbm - m.value_dbm) > 1e-12 * std::max(1.0, std::abs(m.value_dbm))) {
      throw IllPosedError("conflicting noiseless readings at one location");
    }
  }
  return out;
}

}  // namespace

GaussianPosterior posterior(const KrigingModel& model, const MeasurementSet& measurements,
                            const Grid& grid) {
  model.validate();
  const auto& prior = model.prior;
  const auto cells = grid.cell_centers();
  const auto n = static_cast<Eigen::Index>(cells.size());
  const double var = prior.sigma_sh_db * prior.sigma_sh_db;

  double mu = prior.mean_db;
  if (model.estimate_mean && !measurements.empty()) {
    double s = 0.0;
    for (const auto& m : measurements) s += m.value_dbm;
    mu = s / static_cast<double>(measurements.size());
  }

  GaussianPosterior post{grid, Eigen::VectorXd::Constant(n, mu), gram_matrix(prior, cells)};
  if (measurements.empty() || var == 0.0) return post;

  const MeasurementSet meas =
      model.meas_noise_std_db == 0.0 ? merge_noiseless_duplicates(measurements) : measurements;
  std::vector<Vec3> locs;
  locs.reserve(meas.size());
  Eigen::VectorXd resid(static_cast<Eigen::Index>(meas.size()));
  for (std::size_t i = 0; i < meas.size(); ++i) {
    for (double c : meas[i].loc) {
      if (!std::isfinite(c)) throw DomainError("measurement location must be finite");
    }
    locs.push_back(meas[i].loc);
    resid[static_cast<Eigen::Index>(i)] = meas[i].value_dbm - mu;
  }

  Eigen::MatrixXd k = gram_matrix(prior, locs);
  k.diagonal().array() += model.meas_noise_std_db * model.meas_noise_std_db;
  const auto chol = cholesky_with_jitter(k, var);
  const auto lower = chol.lower.triangularView<Eigen::Lower>();

  // A = L^{-1} K_*, so K_*^T K^{-1} K_* = A^T A.
  const Eigen::MatrixXd a = lower.solve(gram_matrix(prior, locs, cells));
  const Eigen::VectorXd white = lower.solve(resid);
  post.mean_db.noalias() += a.transpose() * white;
  post.cov_db2.noalias() -= a.transpose() * a;
  post.cov_db2 = 0.5 * (post.cov_db2 + post.cov_db2.transpose()).eval();
  for (Eigen::Index i = 0; i < n; ++i) post.cov_db2(i, i) = std::max(post.cov_db2(i, i), 0.0);
  return post;
}

GaussianMapSampler::GaussianMapSampler(GaussianPosterior post) : post_(std::move(post)) {
  const double scale = post_.cov_db2.size() == 0 ? 0.0 : post_.cov_db2.diagonal().maxCoeff();
  factor_ = cholesky_with_jitter(post_.cov_db2, scale).lower;
}

RadioMap GaussianMapSampler::draw(std::uint64_t seed) const {
  Rng rng(seed);
  const Eigen::Index n = post_.mean_db.size();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  const Eigen::VectorXd x = post_.mean_db + factor_.triangularView<Eigen::Lower>() * z;
  return RadioMap(post_.grid, std::vector<double>(x.data(), x.data() + n));
}

std::vector<RadioMap> sample_posterior(const GaussianPosterior& post, std::size_t n,
                                       std::uint64_t seed) {
  if (n == 0) throw ConfigError("sample_posterior needs n >= 1");
  const GaussianMapSampler sampler(post);
  return prior_dataset(sampler, n, seed);
}

double integral_local_functional(const GaussianPosterior& post,
                                 const std::function<double(double)>& phi_dbm, const Vec3& eval_loc,
                                 int n_quad) {
  if (n_quad < 3) throw ConfigError("integral_local_functional needs n_quad >= 3");
  const auto cell = static_cast<Eigen::Index>(post.grid.nearest_cell(eval_loc[0], eval_loc[1]));
  const double mu = post.mean_db[cell];
  const double sd = std::sqrt(std::max(post.cov_db2(cell, cell), 0.0));
  if (sd == 0.0) return phi_dbm(mu);
  const auto rule = gauss_hermite(n_quad);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * phi_dbm(mu + sd * rule.nodes[i]);
  }
  return acc;
}

double integral_local_functional(const GaussianPosterior& post, const Functional& g, int n_quad) {
  g.validate();
  if (!g.is_local()) throw ConfigError("integral form needs a local functional");
  return integral_local_functional(
      post, [&g](double dbm) { return g.local(dbm_to_watts(dbm)); }, g.params.eval_loc, n_quad);
}

RadioMap mean_map(const GaussianPosterior& post) {
  const auto& m = post.mean_db;
  return RadioMap(post.grid, std::vector<double>(m.data(), m.data() + m.size()));
}

RadioMap marginal_std_map(const GaussianPosterior& post) {
  std::vector<double> sd(static_cast<std::size_t>(post.mean_db.size()));
  for (std::size_t i = 0; i < sd.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    sd[i] = std::sqrt(std::max(post.cov_db2(k, k), 0.0));
  }
  return RadioMap(post.grid, std::move(sd));
}

}  // namespace rme
