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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rme/error.hpp"
#include "rme/functionals.hpp"
#include "rme/model.hpp"
#include "rme/parallel.hpp"
#include "rme/priors.hpp"
#include "rme/random.hpp"

namespace rme {

/// Weighted realizations standing in for p(map | readings).
template <class Sample>
struct PosteriorSampleSet {
  std::vector<Sample> samples;
  std::vector<double> weights;  ///< sum to 1
  double ess = 0.0;             ///< 1 / sum w^2
  std::size_t draws = 0;        ///< prior draws consumed
  double acceptance_rate = 1.0;
  bool low_ess = false;  ///< ess < 10

  std::size_t size() const noexcept { return samples.size(); }
};

/// Normalizes log-weights in place (max-shifted) and returns 1 / sum w^2.
double normalize_log_weights(std::vector<double>& log_w);

/// Equal weights for \p n samples.
std::vector<double> uniform_weights(std::size_t n);

/// Equal-weight set over already drawn samples.
template <class Sample>
PosteriorSampleSet<Sample> make_uniform_set(std::vector<Sample> samples) {
  if (samples.empty()) throw ConfigError("sample set must not be empty");
  PosteriorSampleSet<Sample> set;
  set.weights = uniform_weights(samples.size());
  set.ess = static_cast<double>(samples.size());
  set.draws = samples.size();
  set.samples = std::move(samples);
  return set;
}

/// Largest |simulated - observed| over the readings, in dB.
template <class Sample>
double max_residual_db(const Sample& s, const MeasurementSet& measurements) {
  double worst = 0.0;
  for (const auto& m : measurements) {
    worst = std::max(worst, std::abs(value_dbm_at(s, m.loc) - m.value_dbm));
  }
  return worst;
}

/// Keeps prior draws whose simulated readings all lie within epsilon_db of
/// the observed ones. Draw i uses derive_seed(seed, i); the first n_target
/// accepted draws in index order are kept.
template <class Sampler>
PosteriorSampleSet<typename Sampler::sample_type> abc_rejection(const Sampler& sampler,
                                                                const MeasurementSet& measurements,
                                                                double epsilon_db, std::size_t n_target,
                                                                std::size_t max_draws, std::uint64_t seed) {
  using T = typename Sampler::sample_type;
  if (!(epsilon_db > 0.0)) throw ConfigError("abc: epsilon must be > 0");
  if (n_target < 1) throw ConfigError("abc: n_target must be >= 1");

  constexpr std::size_t kChunk = 4096;
  std::vector<T> accepted;
  std::size_t used = 0;
  while (accepted.size() < n_target && used < max_draws) {
    const std::size_t count = std::min(kChunk, max_draws - used);
    std::vector<std::optional<T>> slots(count);
    parallel_for(count, [&](std::size_t k) {
      T s = sampler.draw(derive_seed(seed, used + k));
      if (max_residual_db(s, measurements) <= epsilon_db) slots[k].emplace(std::move(s));
    });
    for (std::size_t k = 0; k < count && accepted.size() < n_target; ++k) {
      if (slots[k]) {
        accepted.push_back(std::move(*slots[k]));
        if (accepted.size() == n_target) used += k + 1;
      }
    }
    if (accepted.size() < n_target) used += count;
  }
  if (accepted.empty()) {
    throw AcceptanceStarvation("abc: no draw accepted after " + std::to_string(used) +
                                   " draws (acceptance rate 0); widen epsilon or raise max_draws",
                               used);
  }
  auto set = make_uniform_set(std::move(accepted));
  set.draws = used;
  set.acceptance_rate = static_cast<double>(set.size()) / static_cast<double>(used);
  return set;
}

/// Prior draws weighted by the Gaussian dB likelihood of the readings.
template <class Sampler>
PosteriorSampleSet<typename Sampler::sample_type> importance_posterior(
    const Sampler& sampler, const MeasurementSet& measurements, double noise_std_db, std::size_t n,
    std::uint64_t seed) {
  using T = typename Sampler::sample_type;
  if (!(noise_std_db > 0.0)) throw ConfigError("importance: noise std must be > 0");
  if (n < 1) throw ConfigError("importance: n must be >= 1");

  std::vector<std::optional<T>> slots(n);
  std::vector<double> log_w(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    T s = sampler.draw(derive_seed(seed, i));
    double lw = 0.0;
    for (const auto& m : measurements) {
      const double r = (m.value_dbm - value_dbm_at(s, m.loc)) / noise_std_db;
      lw -= 0.5 * r * r;
    }
    log_w[i] = lw;
    slots[i].emplace(std::move(s));
  });

  PosteriorSampleSet<T> set;
  set.samples.reserve(n);
  for (auto& s : slots) set.samples.push_back(std::move(*s));
  set.ess = normalize_log_weights(log_w);
  set.weights = std::move(log_w);
  set.draws = n;
  set.low_ess = set.ess < 10.0;
  return set;
}

/// Weighted mean and its standard error sqrt(var_w / ess).
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Per-sample functional values in sample order.
template <class Sample>
std::vector<double> functional_values(const PosteriorSampleSet<Sample>& set, const Functional& g) {
  std::vector<double> v(set.size());
  parallel_for(set.size(), [&](std::size_t i) { v[i] = g(set.samples[i]); });
  return v;
}

Estimate weighted_estimate(std::span<const double> values, std::span<const double> weights, double ess);

/// sum_i w_i g(sample_i).
template <class Sample>
Estimate bayes_functional_estimate(const PosteriorSampleSet<Sample>& set, const Functional& g) {
  if (set.size() == 0) throw ConfigError("empty sample set");
  g.validate();
  const auto v = functional_values(set, g);
  return weighted_estimate(v, set.weights, set.ess);
}

template <class Sample>
double bayes_functional(const PosteriorSampleSet<Sample>& set, const Functional& g) {
  return bayes_functional_estimate(set, g).value;
}

/// Domain in which maps are averaged before taking the mean.
enum class AveragingDomain { watts, db };

/// Weighted per-cell mean map.
RadioMap mmse_map(const PosteriorSampleSet<RadioMap>& set,
                  AveragingDomain domain = AveragingDomain::watts);

/// Weighted mean of 1D profiles as a function of x, in watts.
std::function<double(double)> mmse_profile(const PosteriorSampleSet<Profile1D>& set,
                                           AveragingDomain domain = AveragingDomain::watts);

/// g(E[map | readings]).
double nonbayes_functional(const PosteriorSampleSet<RadioMap>& set, const Functional& g,
                           AveragingDomain domain = AveragingDomain::watts);
/// Coverage length of the mean profile is found by a refined scan over
/// [min x_t - R, max x_t + R], R = sqrt(alpha / tau).
double nonbayes_functional(const PosteriorSampleSet<Profile1D>& set, const Functional& g,
                           AveragingDomain domain = AveragingDomain::watts);

}  // namespace rme
