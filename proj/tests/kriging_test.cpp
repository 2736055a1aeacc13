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
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rme/error.hpp"
#include "rme/functionals.hpp"
#include "rme/kriging.hpp"

namespace {

using rme::Grid;

const rme::GudmundsonPrior kPrior{4.0, 10.0, -60.0};
const Grid kGrid(0, 0, 5.0, 6, 6);

rme::Measurement at_cell(std::size_t i, double v) { return {kGrid.cell_center(i), v}; }

TEST(Posterior, NoDataIsPrior) {
  const auto post = rme::posterior({kPrior, 0.0, false}, {}, kGrid);
  const auto centers = kGrid.cell_centers();
  const auto gram = rme::gram_matrix(kPrior, centers);
  EXPECT_LT((post.cov_db2 - gram).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index i = 0; i < post.mean_db.size(); ++i) EXPECT_EQ(post.mean_db[i], -60.0);
  EXPECT_EQ(rme::mean_map(post), rme::RadioMap(kGrid, -60.0));
}

TEST(Posterior, NoiselessInterpolation) {
  const auto post = rme::posterior({kPrior, 0.0, false}, {at_cell(14, -52.0)}, kGrid);
  EXPECT_NEAR(post.mean_db[14], -52.0, 1e-9);
  EXPECT_NEAR(post.cov_db2(14, 14), 0.0, 1e-8);
  EXPECT_NEAR(rme::marginal_std_map(post)[14], 0.0, 1e-4);
  const auto sd = rme::marginal_std_map(post);
  for (double s : sd.values()) EXPECT_LE(s, 4.0 + 1e-8);
}

TEST(Posterior, FarMeasurementLeavesPriorMean) {
  const rme::Measurement far{{1000.0, 1000.0, 0.0}, -30.0};
  const auto post = rme::posterior({kPrior, 0.0, false}, {far}, kGrid);
  for (Eigen::Index i = 0; i < post.mean_db.size(); ++i) EXPECT_NEAR(post.mean_db[i], -60.0, 1e-6);
}

TEST(Posterior, ConflictingDuplicatesAreIllPosed) {
  EXPECT_THROW(rme::posterior({kPrior, 0.0, false}, {at_cell(3, -50.0), at_cell(3, -40.0)}, kGrid),
               rme::IllPosedError);
  const auto merged =
      rme::posterior({kPrior, 0.0, false}, {at_cell(3, -50.0), at_cell(3, -50.0)}, kGrid);
  EXPECT_NEAR(merged.mean_db[3], -50.0, 1e-9);
  EXPECT_NO_THROW(
      rme::posterior({kPrior, 1.0, false}, {at_cell(3, -50.0), at_cell(3, -40.0)}, kGrid));
}

TEST(Posterior, InterpolatesPriorDraw) {
  const auto truth = rme::sample_gudmundson(kPrior, kGrid, 31);
  rme::MeasurementSet ms;
  for (std::size_t i : {0u, 7u, 13u, 20u, 29u, 35u}) ms.push_back(at_cell(i, truth[i]));
  const auto post = rme::posterior({kPrior, 0.0, false}, ms, kGrid);
  for (const auto& m : ms) {
    const auto i = kGrid.nearest_cell(m.loc[0], m.loc[1]);
    EXPECT_NEAR(post.mean_db[static_cast<Eigen::Index>(i)], m.value_dbm, 1e-7);
    EXPECT_NEAR(post.cov_db2(i, i), 0.0, 1e-7);
  }
  const auto cov = post.cov_db2;
  EXPECT_LT((cov - cov.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GE(cov.diagonal().minCoeff(), 0.0);
}

TEST(Posterior, VarianceNonIncreasingInM) {
  const auto truth = rme::sample_gudmundson(kPrior, kGrid, 5);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  rme::MeasurementSet ms;
  Eigen::VectorXd prev = rme::posterior({kPrior, 0.5, false}, ms, kGrid).cov_db2.diagonal();
  for (int m = 0; m < 15; ++m) {
    const rme::Vec3 loc{u(rng), u(rng), 0.0};
    ms.push_back({loc, rme::value_dbm_at(truth, loc)});
    const Eigen::VectorXd diag = rme::posterior({kPrior, 0.5, false}, ms, kGrid).cov_db2.diagonal();
    EXPECT_TRUE(((diag.array() - prev.array()) <= 1e-9).all());
    prev = diag;
  }
}

TEST(Sampling, ZeroCovarianceReturnsMean) {
  rme::GaussianPosterior post{kGrid, Eigen::VectorXd::Constant(36, -44.0),
                              Eigen::MatrixXd::Zero(36, 36)};
  for (const auto& m : rme::sample_posterior(post, 5, 1)) EXPECT_EQ(m, rme::RadioMap(kGrid, -44.0));
}

TEST(Sampling, MomentsMatchPosterior) {
  const auto post = rme::posterior({kPrior, 0.5, false}, {at_cell(8, -55.0), at_cell(27, -63.0)}, kGrid);
  const std::size_t n = 10'000;
  const auto maps = rme::sample_posterior(post, n, 99);
  Eigen::MatrixXd cols(36, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < 36; ++i) cols(static_cast<Eigen::Index>(i), j) = maps[j][i];
  }
  const Eigen::VectorXd mean = cols.rowwise().mean();
  const Eigen::MatrixXd cov = rme::oracle::sample_covariance(cols);
  for (Eigen::Index i = 0; i < 36; ++i) {
    const double var = post.cov_db2(i, i);
    EXPECT_LE(std::abs(mean[i] - post.mean_db[i]), 3.0 * std::sqrt(var / n) + 1e-12);
    if (var > 0.1) EXPECT_NEAR(cov(i, i) / var, 1.0, 0.1);
  }
  EXPECT_EQ(rme::sample_posterior(post, 3, 4), rme::sample_posterior(post, 3, 4));
}

TEST(IntegralForm, Examples) {
  const auto post = rme::posterior({kPrior, 1.0, false}, {at_cell(10, -50.0)}, kGrid);
  const auto loc = kGrid.cell_center(12);
  EXPECT_NEAR(rme::integral_local_functional(post, [](double v) { return v; }, loc, 8),
              post.mean_db[12], 1e-9);

  rme::GaussianPosterior point{kGrid, Eigen::VectorXd::Constant(36, -60.0),
                               Eigen::MatrixXd::Zero(36, 36)};
  auto cap = [](double dbm) { return rme::capacity(rme::dbm_to_watts(dbm), 1.0, 1e-9); };
  EXPECT_DOUBLE_EQ(rme::integral_local_functional(point, cap, loc, 5), cap(-60.0));
  EXPECT_THROW(rme::integral_local_functional(point, cap, loc, 2), rme::ConfigError);
}

TEST(IntegralForm, MatchesMonteCarlo) {
  rme::GaussianPosterior post{kGrid, Eigen::VectorXd::Constant(36, -60.0),
                              Eigen::MatrixXd::Identity(36, 36) * 4.0};
  auto cap = [](double dbm) { return rme::capacity(rme::dbm_to_watts(dbm), 1.0, 1e-9); };
  const double gh = rme::integral_local_functional(post, cap, kGrid.cell_center(0), 64);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z(-60.0, 2.0);
  const int n = 1'000'000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double v = cap(z(rng));
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_LE(std::abs(gh - mean), 3.0 * se);
}

TEST(IntegralForm, JensenForConcavePhi) {
  const auto post = rme::posterior({kPrior, 1.0, false}, {at_cell(10, -50.0)}, kGrid);
  rme::Functional g{rme::FunctionalTag::capacity, {}};
  g.params.noise_pow_w = 1e-9;
  for (std::size_t i : {0u, 12u, 21u}) {
    g.params.eval_loc = kGrid.cell_center(i);
    const auto k = static_cast<Eigen::Index>(i);
    // Mean power in watts of the log-normal marginal.
    const double c = std::log(10.0) / 10.0;
    const double mean_w =
        rme::dbm_to_watts(post.mean_db[k]) * std::exp(0.5 * c * c * post.cov_db2(k, k));
    EXPECT_LT(rme::integral_local_functional(post, g, 32), g.local(mean_w));
  }
}

}  // namespace
