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
// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rme/analytic1d.hpp"
#include "rme/bench.hpp"
#include "rme/diffusion.hpp"
#include "rme/io.hpp"
#include "rme/kriging.hpp"
#include "rme/mc_oracle.hpp"

namespace {

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Fixed before any criterion was run; never tuned.
constexpr std::uint64_t kSeed = 20261016;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double uniform(rme::Rng& rng, double lo, double hi) { return rng.uniform(lo, hi); }

// 1. Bayesian coverage length is exact in the 1D scenario.
Outcome analytic_exactness() {
  int within_se = 0;
  int exact = 0;
  double worst_z = 0.0;
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    rme::Rng rng(rme::derive_seed(kSeed, static_cast<std::uint64_t>(i)));
    const double alpha = std::pow(10.0, uniform(rng, -6.0, -3.0));
    const double d = uniform(rng, 0.5, 5.0);
    const double tau = alpha / (d * d) * std::pow(10.0, -uniform(rng, 0.3, 2.5));
    const rme::Analytic1DSampler sampler({alpha, d, rme::default_x_half_range(alpha, tau)});
    const auto truth = sampler.draw(rng.next_u64());
    const double x1 = uniform(rng, -0.1, 0.1) * sampler.prior().x_half_range;
    const rme::MeasurementSet ms{{{x1, 0.0, 0.0}, rme::watts_to_dbm(truth.watts(x1))}};
    const double target = rme::true_coverage_length(alpha, d, tau);

    // Sample form with each sample's length found numerically.
    const auto set = rme::abc_rejection(sampler, ms, 0.5, 200, 5'000'000, rng.next_u64());
    rme::Functional numeric{rme::FunctionalTag::coverage_length_1d, {}};
    numeric.params.threshold_w = tau;
    const double reach = std::sqrt(alpha / tau) + 1.0;
    std::vector<double> values(set.size());
    for (std::size_t k = 0; k < set.size(); ++k) {
      const auto& p = set.samples[k];
      values[k] = numeric.evaluate_profile([&p](double x) { return p.watts(x); }, p.x_t - reach,
                                           p.x_t + reach + 0.37, 4096);
    }
    const auto est = rme::weighted_estimate(values, set.weights, set.ess);
    // Bisection stops at 1e-9 m per edge.
    const double tol = 3.0 * est.se + 4e-9;
    if (std::abs(est.value - target) <= tol) ++within_se;
    worst_z = std::max(worst_z, std::abs(est.value - target) / tol);

    // Near-zero tolerance with the closed-form per-sample length.
    rme::Functional closed = numeric;
    const auto tight = rme::abc_rejection(sampler, ms, 0.01, 10, 20'000'000, rng.next_u64());
    if (rme::bayes_functional(tight, closed) == target) ++exact;
  }
  return {within_se == n && exact == n,
          std::to_string(within_se) + "/100 within 3 SE (worst |err|/tol " + num(worst_z) + "), " +
              std::to_string(exact) + "/100 exact at eps=0.01 dB"};
}

// 2. Closed-form plug-in length against a brute-force scan.
Outcome prop1_equivalence() {
  int agree = 0;
  int cases[3] = {0, 0, 0};
  double worst = 0.0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    rme::Rng rng(rme::derive_seed(kSeed + 2, static_cast<std::uint64_t>(i)));
    rme::AnalyticScenario s;
    s.alpha = std::pow(10.0, uniform(rng, -6.0, -3.0));
    s.d = uniform(rng, 0.1, 10.0);
    s.x1 = uniform(rng, -10.0, 10.0);
    s.m1_w = s.alpha / (s.d * s.d) * std::pow(10.0, -uniform(rng, 0.0, 3.0));
    s.tau_w = s.m1_w;
    const double pmax = rme::p_est_max(s);
    s.tau_w = uniform(rng, 1e-9, 2.0) * pmax;
    ++cases[s.tau_w < s.m1_w ? 0 : (s.tau_w < pmax ? 1 : 2)];
    const double closed = rme::nonbayesian_coverage_length(s);
    const auto prof = rme::posterior_mean_profile(s);
    const double r = prof.delta() + std::sqrt(s.alpha / s.tau_w) + 1.0;
    const double brute = rme::oracle::superlevel_length(prof, s.tau_w, s.x1 - r, s.x1 + r, 400'000);
    const double err = brute > 0.0 ? std::abs(closed - brute) / brute : std::abs(closed);
    worst = std::max(worst, err);
    if (err <= 1e-3) ++agree;
  }
  const bool all_cases = cases[0] > 0 && cases[1] > 0 && cases[2] > 0;
  return {agree == n && all_cases,
          std::to_string(agree) + "/1000 within 1e-3 (worst " + num(worst) + "), cases " +
              std::to_string(cases[0]) + "/" + std::to_string(cases[1]) + "/" + std::to_string(cases[2])};
}

// 3. Some sweep point has a plug-in error above 50 %.
Outcome fig1_claim() {
  const auto cfg = rme::fig1_config_from_json(rme::read_text_file(std::string(RME_CONFIG_DIR) + "/fig1.json"));
  const auto res = rme::run_fig1(cfg);
  int over = 0;
  for (const auto& r : res.rows) over += r.rel_error_pct > 50.0;
  return {res.max_rel_error_pct > 50.0, "max rel. error " + num(res.max_rel_error_pct) + " %, " +
                                            std::to_string(over) + "/" + std::to_string(res.rows.size()) +
                                            " rows above 50 %"};
}

// 4. Jensen gap directions on sampled posteriors.
Outcome jensen() {
  int cap_ok = 0;
  int ber_ok = 0;
  double worst_linear = 0.0;
  int done = 0;
  for (int i = 0; done < 200; ++i) {
    rme::Rng rng(rme::derive_seed(kSeed + 4, static_cast<std::uint64_t>(i)));
    const rme::Grid grid(0, 0, 5.0, 4, 4, 1.0);
    const rme::GudmundsonPrior prior{uniform(rng, 3.0, 8.0), uniform(rng, 10.0, 30.0), -35.0};
    const auto truth = rme::sample_gudmundson(prior, grid, rng.next_u64());
    const auto m = 1 + rng.below(6);
    std::vector<rme::Vec3> locs;
    for (std::size_t k = 0; k < m; ++k) locs.push_back(grid.cell_center(rng.below(grid.size())));
    const auto meas = rme::measure(truth, locs, 1.0, rng.next_u64());
    const auto post = rme::posterior({prior, 1.0, false}, meas, grid);
    const auto set = rme::make_uniform_set(rme::sample_posterior(post, 200, rng.next_u64()));
    const auto cell = rng.below(grid.size());

    rme::Functional cap{rme::FunctionalTag::capacity, {}};
    cap.params.bandwidth_hz = 1e6;
    cap.params.noise_pow_w = rme::dbm_to_watts(-30.0);
    cap.params.eval_loc = grid.cell_center(cell);
    auto ber = cap;
    ber.tag = rme::FunctionalTag::ber_qam;
    ber.params.mc_order = 256;
    auto lin = cap;
    lin.tag = rme::FunctionalTag::power;

    bool degenerate = true;
    for (const auto& s : set.samples) degenerate &= s[cell] == set.samples.front()[cell];
    if (degenerate) continue;
    ++done;
    cap_ok += rme::nonbayes_functional(set, cap) >= rme::bayes_functional(set, cap);
    ber_ok += rme::bayes_functional(set, ber) >= rme::nonbayes_functional(set, ber);
    const double b = rme::bayes_functional(set, lin);
    worst_linear = std::max(worst_linear, std::abs(b - rme::nonbayes_functional(set, lin)) / b);
  }
  return {cap_ok == 200 && ber_ok == 200 && worst_linear < 1e-9,
          "capacity " + std::to_string(cap_ok) + "/200, BER " + std::to_string(ber_ok) +
              "/200, linear rel. gap " + num(worst_linear)};
}

struct GaussianCase {
  rme::Grid grid;
  rme::KrigingModel model;
  rme::GaussianPosterior post;
};

GaussianCase gaussian_case() {
  const rme::Grid grid(0, 0, 5.0, 8, 8, 1.0);
  const rme::KrigingModel model{{4.0, 20.0, -60.0}, 1.0, false};
  const auto truth = rme::sample_gudmundson(model.prior, grid, rme::derive_seed(kSeed, 5));
  const std::vector<rme::Vec3> locs{{7.0, 31.0, 1.0}, {22.5, 12.5, 1.0}, {36.0, 36.0, 1.0}};
  auto post = rme::posterior(model, rme::measure(truth, locs, 1.0, rme::derive_seed(kSeed, 6)), grid);
  return {grid, model, std::move(post)};
}

// 5. Reverse diffusion with the exact denoiser reproduces the Gaussian posterior.
Outcome diffusion_correctness() {
  const auto c = gaussian_case();
  const auto schedule = rme::linear_schedule(1000, 0.9999, 0.98);
  const VectorXd sd = c.post.cov_db2.diagonal().cwiseSqrt();
  const auto norm = rme::Normalization::from_moments(c.post.mean_db, sd);
  const auto den = rme::gaussian_optimal_denoiser(c.post, norm, schedule);
  const std::size_t n = 10'000;
  const MatrixXd rev = norm.denormalize(rme::reverse_sample(den, schedule, n, rme::derive_seed(kSeed, 7)));
  const MatrixXd direct = rme::to_matrix(rme::sample_posterior(c.post, n, rme::derive_seed(kSeed, 8)));

  const VectorXd mean = rev.rowwise().mean();
  int mean_ok = 0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    mean_ok += std::abs(mean[i] - c.post.mean_db[i]) <= 4.0 * std::sqrt(c.post.cov_db2(i, i) / n);
  }
  const double frob = (rme::oracle::sample_covariance(rev) - c.post.cov_db2).norm() / c.post.cov_db2.norm();
  const auto energy = rme::oracle::energy_test(rev.leftCols(2000), direct.leftCols(2000), 200, kSeed);
  return {mean_ok == mean.size() && frob < 0.10 && energy.p_value > 0.01,
          "mean " + std::to_string(mean_ok) + "/64 cells, cov Frobenius err " + num(100 * frob) +
              " %, energy p=" + num(energy.p_value)};
}

// 6. Least-squares affine denoiser converges to the closed form.
Outcome affine_convergence() {
  const auto c = gaussian_case();
  const auto schedule = rme::linear_schedule(1000, 0.9999, 0.98);
  const MatrixXd data = rme::to_matrix(rme::sample_posterior(c.post, 10'000, rme::derive_seed(kSeed, 9)));
  rme::AffineFitOptions opt;
  opt.noise_replicates = 4;
  const auto fitted = rme::fit_affine_denoiser(data, schedule, rme::derive_seed(kSeed, 10), opt);
  const auto oracle = rme::gaussian_optimal_denoiser(c.post, fitted.normalization(), schedule);
  double worst = 0.0;
  std::size_t worst_step = 0;
  for (auto l : fitted.fitted_steps()) {
    const double e = std::max((fitted.gain(l) - oracle.gain(l)).cwiseAbs().maxCoeff(),
                              (fitted.bias(l) - oracle.bias(l)).cwiseAbs().maxCoeff());
    if (e > worst) {
      worst = e;
      worst_step = l;
    }
  }
  return {worst < 0.05, std::to_string(fitted.fitted_steps().size()) + " steps, worst max-entry error " +
                            num(worst) + " (step " + std::to_string(worst_step) + ")"};
}

// 7. Kriging interpolation and variance monotonicity.
Outcome kriging_properties() {
  int interp_ok = 0;
  int mono_ok = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    rme::Rng rng(rme::derive_seed(kSeed + 7, static_cast<std::uint64_t>(i)));
    const rme::Grid grid(0, 0, uniform(rng, 2.0, 8.0), 6, 6);
    const rme::GudmundsonPrior prior{uniform(rng, 2.0, 8.0), uniform(rng, 5.0, 40.0), uniform(rng, -90.0, -40.0)};
    const auto truth = rme::sample_gudmundson(prior, grid, rng.next_u64());
    std::vector<std::size_t> cells(grid.size());
    std::iota(cells.begin(), cells.end(), 0);
    const auto m = 1 + rng.below(15);
    rme::MeasurementSet ms;
    for (std::size_t k = 0; k < m; ++k) {
      std::swap(cells[k], cells[k + rng.below(cells.size() - k)]);
      ms.push_back({grid.cell_center(cells[k]), truth[cells[k]]});
    }
    const auto post = rme::posterior({prior, 0.0, false}, ms, grid);
    double err = 0.0;
    for (std::size_t k = 0; k < m; ++k) err = std::max(err, std::abs(post.mean_db[static_cast<Eigen::Index>(cells[k])] - truth[cells[k]]));
    worst = std::max(worst, err);
    interp_ok += err <= 1e-8;

    const double noise = uniform(rng, 0.0, 2.0);
    rme::MeasurementSet grow;
    VectorXd prev = rme::posterior({prior, noise, false}, grow, grid).cov_db2.diagonal();
    bool mono = true;
    for (int k = 0; k < 12; ++k) {
      const rme::Vec3 loc{uniform(rng, 0.0, 6 * grid.spacing()), uniform(rng, 0.0, 6 * grid.spacing()), 0.0};
      grow.push_back({loc, rme::value_dbm_at(truth, loc)});
      const VectorXd diag = rme::posterior({prior, noise, false}, grow, grid).cov_db2.diagonal();
      mono &= ((diag - prev).array() <= 1e-9).all();
      prev = diag;
    }
    mono_ok += mono;
  }
  return {interp_ok == 100 && mono_ok == 100, "interpolation " + std::to_string(interp_ok) +
                                                  "/100 (worst " + num(worst) + " dB), variance monotone " +
                                                  std::to_string(mono_ok) + "/100"};
}

// 8. Sample spread shrinks as readings accumulate.
Outcome contraction() {
  const rme::Grid grid(0, 0, 5.0, 8, 8, 1.0);
  const rme::KrigingModel model{{4.0, 20.0, -60.0}, 1.0, false};
  const auto schedule = rme::linear_schedule(1000, 0.9999, 0.98);
  const std::vector<std::size_t> ms{1, 5, 20, 100};
  const int trials = 50;
  const std::size_t n = 64;
  std::vector<double> kr(ms.size(), 0.0), df(ms.size(), 0.0);
  auto spread = [](const std::vector<rme::RadioMap>& maps) {
    const MatrixXd x = rme::to_matrix(maps);
    return rme::oracle::sample_covariance(x).diagonal().cwiseSqrt().mean();
  };
  for (int t = 0; t < trials; ++t) {
    const auto base = rme::derive_seed(kSeed + 8, static_cast<std::uint64_t>(t));
    const auto truth = rme::sample_gudmundson(model.prior, grid, rme::derive_seed(base, 0));
    for (std::size_t k = 0; k < ms.size(); ++k) {
      rme::Rng rng(rme::derive_seed(base, 1 + k));
      std::vector<rme::Vec3> locs(ms[k]);
      for (auto& l : locs) l = {uniform(rng, 0.0, 40.0), uniform(rng, 0.0, 40.0), 1.0};
      const auto meas = rme::measure(truth, locs, 1.0, rng.next_u64());
      const auto post = rme::posterior(model, meas, grid);
      kr[k] += spread(rme::sample_posterior(post, n, rng.next_u64())) / trials;
      df[k] += spread(rme::conditional_sample(model, meas, grid, schedule, n, rng.next_u64())) / trials;
    }
  }
  bool ok = true;
  std::string detail = "kriging";
  for (std::size_t k = 0; k < ms.size(); ++k) {
    detail += " " + num(kr[k], 3);
    if (k) ok &= kr[k] < kr[k - 1] && df[k] < df[k - 1];
  }
  detail += " dB; diffusion";
  for (double v : df) detail += " " + num(v, 3);
  return {ok, detail + " dB (M = 1, 5, 20, 100)"};
}

// 9. Sample-form estimator error falls like 1/sqrt(N).
Outcome mc_rate() {
  const auto c = gaussian_case();
  const rme::GaussianMapSampler sampler(c.post);
  rme::Functional g{rme::FunctionalTag::capacity, {}};
  g.params.noise_pow_w = rme::dbm_to_watts(-60.0);
  g.params.eval_loc = c.grid.cell_center(27);
  auto spread = [&](std::size_t n, std::uint64_t base) {
    std::vector<double> est;
    for (std::uint64_t r = 0; r < 50; ++r) {
      est.push_back(rme::bayes_functional(
          rme::make_uniform_set(rme::prior_dataset(sampler, n, rme::derive_seed(base, r))), g));
    }
    return rme::oracle::sample_std(est);
  };
  const double ratio = spread(500, kSeed + 90) / spread(2000, kSeed + 91);
  return {ratio >= 1.6 && ratio <= 2.4, "std(N=500)/std(N=2000) = " + num(ratio)};
}

std::string run_cli(const std::string& args, const std::string& env) {
  const std::string cmd = env + " " + std::string(RME_CLI_PATH) + " " + args + " 2>/dev/null";
  std::string out;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return "popen failed";
  char buf[4096];
  std::size_t k;
  while ((k = std::fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, k);
  const int status = ::pclose(pipe);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) out += "\nexit " + std::to_string(status);
  return out;
}

std::string dir_contents(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += f.filename().string() + "\n" + rme::read_text_file(f);
  return all;
}

// 10. CLI output is bit-identical across reruns and worker counts.
Outcome determinism() {
  const std::string cfg = RME_CONFIG_DIR;
  const auto tmp = fs::temp_directory_path() / "rme_acceptance";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  const std::vector<std::string> envs{"RME_THREADS=1", "RME_THREADS=4", "RME_THREADS=0", "RME_THREADS=1"};
  const std::vector<std::string> runs{
      "bench --config " + cfg + "/bench_capacity.json",
      "bench --config " + cfg + "/bench_gudmundson.json --seed 5",
      "bench --config " + cfg + "/bench_analytic1d.json",
      "bench --config " + cfg + "/bench_los_nlos.json --trials 1",
      "fig1 --config " + cfg + "/fig1.json",
  };
  int identical = 0;
  int total = 0;
  for (const auto& args : runs) {
    ++total;
    std::vector<std::string> outs;
    for (const auto& env : envs) outs.push_back(run_cli(args, env));
    bool same = outs.front().find("exit ") == std::string::npos;
    for (const auto& o : outs) same &= o == outs.front();
    identical += same;
  }
  for (const char* est : {"diffusion", "mc_importance"}) {
    ++total;
    std::vector<std::string> outs;
    for (std::size_t e = 0; e < envs.size(); ++e) {
      const auto dir = tmp / (std::string(est) + std::to_string(e));
      run_cli("generate --config " + cfg + "/bench_gudmundson.json --n 2 --seed 4 --out " + (tmp / "gen").string(),
              envs[e]);
      run_cli("measure --map " + (tmp / "gen" / "map_00000.json").string() + " --m 5 --noise-std-db 1 --seed 6 --out " +
                  (tmp / "meas.json").string(),
              envs[e]);
      const auto log = run_cli("posterior --config " + cfg + "/bench_gudmundson.json --estimator " + est +
                                   " --n 100 --seed 8 --meas " + (tmp / "meas.json").string() + " --out " + dir.string(),
                               envs[e]);
      outs.push_back(log + dir_contents(dir));
    }
    bool same = true;
    for (const auto& o : outs) same &= o == outs.front();
    identical += same;
  }
  return {identical == total, std::to_string(identical) + "/" + std::to_string(total) +
                                  " commands bit-identical over RME_THREADS in {1, 4, auto} and reruns"};
}

struct Criterion {
  const char* id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"C1", "analytic exactness", 60, analytic_exactness},
      {"C2", "closed-form plug-in length vs brute force", 60, prop1_equivalence},
      {"C3", "plug-in error above 50 % on the sweep", 0, fig1_claim},
      {"C4", "Jensen directions", 0, jensen},
      {"C5", "reverse diffusion matches Gaussian posterior", 600, diffusion_correctness},
      {"C6", "affine denoiser converges to closed form", 0, affine_convergence},
      {"C7", "kriging interpolation and variance monotonicity", 0, kriging_properties},
      {"C8", "posterior contraction in M", 0, contraction},
      {"C9", "Monte-Carlo rate", 0, mc_rate},
      {"C10", "CLI determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += "; over the " + num(c.budget_s) + " s budget";
    }
    failed += !o.pass;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << ": " << o.detail << " ("
              << num(secs, 3) << " s)" << std::endl;
  }
  std::cout << (failed ? "ACCEPTANCE FAILED: " : "ACCEPTANCE PASSED: ") << (criteria.size() - failed) << "/"
            << criteria.size() << " criteria" << std::endl;
  return failed ? 1 : 0;
}
