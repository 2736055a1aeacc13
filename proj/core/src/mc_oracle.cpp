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
#include "rme/mc_oracle.hpp"

#include <algorithm>
#include <numeric>

namespace rme {

double normalize_log_weights(std::vector<double>& log_w) {
  if (log_w.empty()) throw ConfigError("no weights to normalize");
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  for (double& w : log_w) {
    w = std::exp(w - top);
    total += w;
  }
  double sum_sq = 0.0;
  for (double& w : log_w) {
    w /= total;
    sum_sq += w * w;
  }
  return 1.0 / sum_sq;
}

std::vector<double> uniform_weights(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

Estimate weighted_estimate(std::span<const double> values, std::span<const double> weights, double ess) {
  if (values.size() != weights.size() || values.empty()) {
    throw ConfigError("values and weights must be non-empty and equally long");
  }
  // A constant functional returns its value without rounding from the weighted sum.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    return {values.front(), 0.0};
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) mean += weights[i] * values[i];
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double r = values[i] - mean;
    var += weights[i] * r * r;
  }
  return {mean, ess > 0.0 ? std::sqrt(var / ess) : 0.0};
}

RadioMap mmse_map(const PosteriorSampleSet<RadioMap>& set, AveragingDomain domain) {
  if (set.size() == 0) throw ConfigError("empty sample set");
  const auto& grid = set.samples.front().grid();
  std::vector<double> acc(grid.size(), 0.0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& map = set.samples[i];
    if (!(map.grid() == grid)) throw ConfigError("samples live on different grids");
    const double w = set.weights[i];
    const auto v = map.values();
    for (std::size_t k = 0; k < acc.size(); ++k) {
      acc[k] += w * (domain == AveragingDomain::watts ? dbm_to_watts(v[k]) : v[k]);
    }
  }
  if (domain == AveragingDomain::watts) {
    for (double& a : acc) a = watts_to_dbm(a);
  }
  return RadioMap(grid, std::move(acc));
}

std::function<double(double)> mmse_profile(const PosteriorSampleSet<Profile1D>& set,
                                           AveragingDomain domain) {
  if (set.size() == 0) throw ConfigError("empty sample set");
  return [samples = set.samples, weights = set.weights, domain](double x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double p = samples[i].watts(x);
      acc += weights[i] * (domain == AveragingDomain::watts ? p : watts_to_dbm(p));
    }
    return domain == AveragingDomain::watts ? acc : dbm_to_watts(acc);
  };
}

double nonbayes_functional(const PosteriorSampleSet<RadioMap>& set, const Functional& g,
                           AveragingDomain domain) {
  g.validate();
  return g(mmse_map(set, domain));
}

double nonbayes_functional(const PosteriorSampleSet<Profile1D>& set, const Functional& g,
                           AveragingDomain domain) {
  g.validate();
  if (set.size() == 0) throw ConfigError("empty sample set");
  const auto profile = mmse_profile(set, domain);
  if (g.is_local()) return g.local(profile(g.params.eval_loc[0]));

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double alpha = 0.0;
  double d_min = std::numeric_limits<double>::infinity();
  for (const auto& s : set.samples) {
    lo = std::min(lo, s.x_t);
    hi = std::max(hi, s.x_t);
    alpha = std::max(alpha, s.alpha);
    d_min = std::min(d_min, s.d);
  }
  const double reach = std::sqrt(alpha / g.params.threshold_w);
  lo -= reach + 1.0;
  hi += reach + 1.0;
  // Resolve features of width ~d (or ~reach for on-axis transmitters).
  const double feature = d_min > 0.0 ? std::min(d_min, reach) : reach;
  const double h = std::max(feature / 64.0, (hi - lo) / 2e6);
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h));
  return g.evaluate_profile(profile, lo, hi, std::max<std::size_t>(n, 2));
}

}  // namespace rme
