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
#include <benchmark/benchmark.h>

#include "rme/analytic1d.hpp"
#include "rme/diffusion.hpp"
#include "rme/kriging.hpp"
#include "rme/mc_oracle.hpp"

namespace {

rme::MeasurementSet readings(const rme::Grid& grid, std::size_t m) {
  const rme::GudmundsonPrior prior{4.0, 20.0, -60.0};
  const auto truth = rme::sample_gudmundson(prior, grid, 1);
  rme::Rng rng(2);
  std::vector<rme::Vec3> locs(m);
  const double w = grid.spacing() * static_cast<double>(grid.nx());
  for (auto& l : locs) l = {rng.uniform(0.0, w), rng.uniform(0.0, w), 1.0};
  return rme::measure(truth, locs, 1.0, 3);
}

void KrigingPosterior(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const rme::Grid grid(0, 0, 5.0, n, n, 1.0);
  const auto meas = readings(grid, 20);
  const rme::KrigingModel model{{4.0, 20.0, -60.0}, 1.0, false};
  for (auto _ : state) benchmark::DoNotOptimize(rme::posterior(model, meas, grid));
}
BENCHMARK(KrigingPosterior)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

void ReverseSample(benchmark::State& state) {
  const rme::Grid grid(0, 0, 5.0, 8, 8, 1.0);
  const auto post = rme::posterior({{4.0, 20.0, -60.0}, 1.0, false}, readings(grid, 5), grid);
  const auto schedule = rme::linear_schedule(1000, 0.9999, 0.98);
  const auto norm = rme::Normalization::from_moments(post.mean_db, post.cov_db2.diagonal().cwiseSqrt());
  const auto den = rme::gaussian_optimal_denoiser(post, norm, schedule);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rme::reverse_sample(den, schedule, n, 4));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(ReverseSample)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void AbcRejection1D(benchmark::State& state) {
  const double alpha = 1e-4;
  const double tau = 1e-7;
  const rme::Analytic1DSampler sampler({alpha, 2.0, rme::default_x_half_range(alpha, tau)});
  const auto truth = sampler.draw(5);
  const rme::MeasurementSet ms{{{1.0, 0.0, 0.0}, rme::watts_to_dbm(truth.watts(1.0))}};
  for (auto _ : state) benchmark::DoNotOptimize(rme::abc_rejection(sampler, ms, 0.5, 200, 10'000'000, 6));
}
BENCHMARK(AbcRejection1D)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
