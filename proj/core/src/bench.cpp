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
#include "rme/bench.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "rme/error.hpp"
#include "rme/io.hpp"

namespace rme {

using nlohmann::json;

double pae(double truth, double estimate) {
  if (!(truth > 0.0)) throw DomainError("PAE is undefined for truth <= 0");
  return 100.0 * std::abs(truth - estimate) / truth;
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::analytic1d: return "analytic1d";
    case Scenario::los2d: return "los2d";
    case Scenario::gudmundson: return "gudmundson";
  }
  return "unknown";
}

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::kriging: return "kriging";
    case Estimator::diffusion: return "diffusion";
    case Estimator::mc_rejection: return "mc_rejection";
    case Estimator::mc_importance: return "mc_importance";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (m_list.empty()) throw ConfigError("m_list must not be empty");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
  if (!(meas_noise_std_db >= 0.0)) throw ConfigError("meas_noise_std_db must be >= 0");
  functional.validate();
  kriging.validate();
  linear_schedule(schedule_steps, alpha_first, alpha_last);
  switch (scenario) {
    case Scenario::analytic1d:
      analytic.validate();
      if (functional.tag == FunctionalTag::coverage_area) {
        throw ConfigError("analytic1d uses coverage_length_1d, not coverage_area");
      }
      if (estimator == Estimator::kriging || estimator == Estimator::diffusion) {
        throw ConfigError("analytic1d supports the mc_rejection and mc_importance estimators only");
      }
      break;
    case Scenario::los2d:
      LoS2DSampler(los, grid);
      [[fallthrough]];
    case Scenario::gudmundson:
      gudmundson.validate();
      if (functional.tag == FunctionalTag::coverage_length_1d) {
        throw ConfigError("coverage_length_1d needs the analytic1d scenario");
      }
      break;
  }
  if (estimator == Estimator::mc_importance && !(meas_noise_std_db > 0.0)) {
    throw ConfigError("mc_importance needs meas_noise_std_db > 0");
  }
}

namespace {

template <class E>
E enum_from(const json& j, const char* key, E fallback, std::initializer_list<E> all) {
  if (!j.contains(key)) return fallback;
  const auto name = j.at(key).get<std::string>();
  for (E e : all) {
    if (to_string(e) == name) return e;
  }
  throw ConfigError(std::string("unknown ") + key + " '" + name + "'");
}

}  // namespace

ExperimentConfig experiment_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }
  try {
    ExperimentConfig c;
    c.scenario = enum_from(j, "scenario", c.scenario,
                           {Scenario::analytic1d, Scenario::los2d, Scenario::gudmundson});
    c.estimator = enum_from(j, "estimator", c.estimator,
                            {Estimator::kriging, Estimator::diffusion, Estimator::mc_rejection,
                             Estimator::mc_importance});
    if (j.contains("grid")) c.grid = grid_from_json(j.at("grid").dump());
    if (j.contains("prior")) {
      const auto p = j.at("prior").dump();
      switch (c.scenario) {
        case Scenario::analytic1d: c.analytic = analytic1d_from_json(p); break;
        case Scenario::los2d: c.los = los2d_from_json(p); break;
        case Scenario::gudmundson: c.gudmundson = gudmundson_from_json(p); break;
      }
    }
    c.kriging.prior = c.gudmundson;
    if (j.contains("kriging")) {
      const auto& k = j.at("kriging");
      c.kriging.prior = gudmundson_from_json(k.dump());
      c.kriging.estimate_mean = k.value("estimate_mean", false);
    } else if (c.scenario == Scenario::gudmundson) {
      c.kriging.prior = c.gudmundson;
    }
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      c.schedule_steps = s.value("L", c.schedule_steps);
      c.alpha_first = s.value("alpha_first", c.alpha_first);
      c.alpha_last = s.value("alpha_last", c.alpha_last);
    }
    if (j.contains("functional")) c.functional = functional_from_json(j.at("functional").dump());
    c.m_list = j.value("m_list", c.m_list);
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    c.meas_noise_std_db = j.value("meas_noise_std_db", c.meas_noise_std_db);
    c.kriging.meas_noise_std_db = j.contains("kriging") && j.at("kriging").contains("meas_noise_std_db")
                                      ? j.at("kriging").at("meas_noise_std_db").get<double>()
                                      : c.meas_noise_std_db;
    c.n_samples = j.value("n_samples", c.n_samples);
    c.abc_epsilon_db = j.value("abc_epsilon_db", c.abc_epsilon_db);
    c.abc_max_draws = j.value("abc_max_draws", c.abc_max_draws);
    c.meas_half_range_m = j.value("meas_half_range_m", c.meas_half_range_m);
    if (j.contains("averaging")) {
      const auto a = j.at("averaging").get<std::string>();
      if (a == "watts") {
        c.averaging = AveragingDomain::watts;
      } else if (a == "db") {
        c.averaging = AveragingDomain::db;
      } else {
        throw ConfigError("averaging must be 'watts' or 'db'");
      }
    }
    c.record_timing = j.value("record_timing", c.record_timing);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Seeds within one trial.
enum SeedSlot : std::uint64_t { kTruth = 0, kLocations = 1, kNoise = 2, kEstimator = 3 };

std::vector<Vec3> grid_locations(const Grid& grid, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> cells(grid.size());
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
  std::vector<Vec3> out;
  out.reserve(m);
  if (m <= cells.size()) {
    // Partial Fisher-Yates: distinct cells.
    for (std::size_t i = 0; i < m; ++i) {
      const auto j = i + rng.below(cells.size() - i);
      std::swap(cells[i], cells[j]);
      out.push_back(grid.cell_center(cells[i]));
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) out.push_back(grid.cell_center(rng.below(cells.size())));
  }
  return out;
}

std::vector<Vec3> axis_locations(double half_range, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> out(m);
  for (auto& loc : out) loc = {rng.uniform(-half_range, half_range), 0.0, 0.0};
  return out;
}

struct TrialOutcome {
  double bayes = kNaN;
  double nonbayes = kNaN;
  double truth = kNaN;
  std::string error;
};

template <class Sampler>
PosteriorSampleSet<typename Sampler::sample_type> mc_posterior(const ExperimentConfig& c,
                                                               const Sampler& sampler,
                                                               const MeasurementSet& meas,
                                                               std::uint64_t seed) {
  if (c.estimator == Estimator::mc_rejection) {
    return abc_rejection(sampler, meas, c.abc_epsilon_db, c.n_samples, c.abc_max_draws, seed);
  }
  return importance_posterior(sampler, meas, c.meas_noise_std_db, c.n_samples, seed);
}

template <class Sampler>
TrialOutcome run_grid_trial(const ExperimentConfig& c, const Sampler& sampler, std::size_t m,
                            std::uint64_t trial_seed) {
  TrialOutcome out;
  const RadioMap truth_map = sampler.draw(derive_seed(trial_seed, kTruth));
  out.truth = c.functional(truth_map);
  const auto locs = grid_locations(c.grid, m, derive_seed(trial_seed, kLocations));
  const auto meas = measure(truth_map, locs, c.meas_noise_std_db, derive_seed(trial_seed, kNoise));
  const auto est_seed = derive_seed(trial_seed, kEstimator);

  PosteriorSampleSet<RadioMap> set;
  switch (c.estimator) {
    case Estimator::kriging:
      set = make_uniform_set(sample_posterior(posterior(c.kriging, meas, c.grid), c.n_samples, est_seed));
      break;
    case Estimator::diffusion:
      set = make_uniform_set(conditional_sample(c.kriging, meas, c.grid,
                                                linear_schedule(c.schedule_steps, c.alpha_first, c.alpha_last),
                                                c.n_samples, est_seed));
      break;
    default:
      set = mc_posterior(c, sampler, meas, est_seed);
      break;
  }
  out.bayes = bayes_functional(set, c.functional);
  out.nonbayes = nonbayes_functional(set, c.functional, c.averaging);
  return out;
}

TrialOutcome run_axis_trial(const ExperimentConfig& c, const Analytic1DSampler& sampler, std::size_t m,
                            std::uint64_t trial_seed) {
  TrialOutcome out;
  const Profile1D truth = sampler.draw(derive_seed(trial_seed, kTruth));
  out.truth = c.functional(truth);
  const double half = c.meas_half_range_m > 0.0 ? c.meas_half_range_m : c.analytic.x_half_range / 10.0;
  const auto locs = axis_locations(half, m, derive_seed(trial_seed, kLocations));
  const auto meas = measure([&truth](const Vec3& loc) { return value_dbm_at(truth, loc); }, locs,
                            c.meas_noise_std_db, derive_seed(trial_seed, kNoise));
  const auto set = mc_posterior(c, sampler, meas, derive_seed(trial_seed, kEstimator));
  out.bayes = bayes_functional(set, c.functional);
  out.nonbayes = nonbayes_functional(set, c.functional, c.averaging);
  return out;
}

}  // namespace

std::vector<ResultRow> run_functional_comparison(const ExperimentConfig& config) {
  config.validate();
  const std::size_t tasks = config.m_list.size() * config.trials;
  std::vector<TrialOutcome> outcomes(tasks);
  std::vector<double> wall(tasks, 0.0);

  std::optional<Analytic1DSampler> axis;
  std::optional<LoS2DSampler> los;
  std::optional<GudmundsonSampler> gud;
  switch (config.scenario) {
    case Scenario::analytic1d: axis.emplace(config.analytic); break;
    case Scenario::los2d: los.emplace(config.los, config.grid); break;
    case Scenario::gudmundson: gud.emplace(config.gudmundson, config.grid); break;
  }

  auto trial_seed = [&](std::size_t mi, std::size_t t) {
    return derive_seed(derive_seed(config.seed, config.m_list[mi]), t);
  };

  parallel_for(tasks, [&](std::size_t k) {
    const std::size_t mi = k / config.trials;
    const std::size_t t = k % config.trials;
    const std::size_t m = config.m_list[mi];
    const auto seed = trial_seed(mi, t);
    const auto start = std::chrono::steady_clock::now();
    try {
      if (axis) {
        outcomes[k] = run_axis_trial(config, *axis, m, seed);
      } else if (los) {
        outcomes[k] = run_grid_trial(config, *los, m, seed);
      } else {
        outcomes[k] = run_grid_trial(config, *gud, m, seed);
      }
    } catch (const Error& e) {
      outcomes[k].error = e.what();
    }
    if (config.record_timing) {
      wall[k] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
  });

  std::vector<ResultRow> rows;
  rows.reserve(2 * tasks);
  for (std::size_t k = 0; k < tasks; ++k) {
    const std::size_t mi = k / config.trials;
    const std::size_t t = k % config.trials;
    const auto& o = outcomes[k];
    for (const char* kind : {"bayes", "nonbayes"}) {
      ResultRow r;
      r.scenario = to_string(config.scenario);
      r.estimator = to_string(config.estimator);
      r.functional = to_string(config.functional.tag);
      r.kind = kind;
      r.m = config.m_list[mi];
      r.trial = t;
      r.estimate = r.kind == "bayes" ? o.bayes : o.nonbayes;
      r.truth = o.truth;
      r.pae_pct = (o.truth > 0.0 && std::isfinite(r.estimate)) ? pae(o.truth, r.estimate) : kNaN;
      r.wall_ms = wall[k];
      r.seed = trial_seed(mi, t);
      r.error = o.error;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

void write_results_csv(std::ostream& os, std::span<const ResultRow> rows) {
  os << "# rme-results v1\n";
  os << "scenario,estimator,functional,kind,M,trial,estimate,truth,pae_pct,wall_ms,seed,error\n";
  os << std::setprecision(17);
  auto num = [&os](double v) {
    if (std::isnan(v)) {
      os << "nan";
    } else {
      os << v;
    }
  };
  for (const auto& r : rows) {
    os << r.scenario << ',' << r.estimator << ',' << r.functional << ',' << r.kind << ',' << r.m << ','
       << r.trial << ',';
    num(r.estimate);
    os << ',';
    num(r.truth);
    os << ',';
    num(r.pae_pct);
    os << ',';
    num(r.wall_ms);
    os << ',' << r.seed << ',';
    // Errors never contain commas or quotes that need escaping beyond this.
    std::string e = r.error;
    for (char& ch : e) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    os << e << '\n';
  }
}

Fig1Config fig1_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid fig1 JSON: ") + e.what());
  }
  try {
    Fig1Config c;
    if (j.contains("link")) c.link = link_budget_from_json(j.at("link").dump());
    c.d = j.value("d", c.d);
    c.x_t = j.value("x_t", c.x_t);
    c.x1 = j.value("x1", c.x1);
    if (j.contains("sweep")) {
      const auto s = j.at("sweep").get<std::string>();
      if (s == "tau") {
        c.sweep = SweepVariable::tau;
      } else if (s == "m1") {
        c.sweep = SweepVariable::m1;
      } else {
        throw ConfigError("fig1 sweep must be 'tau' or 'm1'");
      }
    }
    if (j.contains("values_dbm")) {
      for (double v : j.at("values_dbm").get<std::vector<double>>()) c.values.push_back(dbm_to_watts(v));
    }
    c.n_points = j.value("n_points", c.n_points);
    if (j.contains("tau_dbm")) c.tau_w = dbm_to_watts(j.at("tau_dbm").get<double>());
    if (!(c.d > 0.0)) throw ConfigError("fig1 needs d > 0");
    if (c.values.empty() && c.n_points < 1) throw ConfigError("fig1 needs n_points >= 1");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed fig1 config: ") + e.what());
  }
}

Fig1Result run_fig1(const Fig1Config& config) {
  const double alpha = alpha_const(config.link);
  const double peak = alpha / (config.d * config.d);
  std::vector<double> values = config.values;
  if (values.empty()) {
    const std::size_t n = config.n_points;
    const double lo = 1e-3 * peak;
    const double hi = config.sweep == SweepVariable::tau ? 0.999 * peak : peak;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      values.push_back(lo * std::pow(hi / lo, f));
    }
  }
  const Fig1Template tmpl{alpha, config.d, config.x_t, config.x1, config.tau_w};
  Fig1Result out;
  out.rows = fig1_sweep(tmpl, config.sweep, values);
  for (const auto& r : out.rows) {
    if (!std::isnan(r.rel_error_pct)) out.max_rel_error_pct = std::max(out.max_rel_error_pct, r.rel_error_pct);
  }
  return out;
}

}  // namespace rme
