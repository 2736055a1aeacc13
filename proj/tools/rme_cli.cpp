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
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "rme/analytic1d.hpp"
#include "rme/bench.hpp"
#include "rme/diffusion.hpp"
#include "rme/error.hpp"
#include "rme/functionals.hpp"
#include "rme/io.hpp"
#include "rme/kriging.hpp"
#include "rme/mc_oracle.hpp"
#include "rme/priors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string config_text(const std::string& path) { return path.empty() ? "{}" : rme::read_text_file(path); }

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    rme::write_text_file(out, text);
  }
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, const std::string& out_help) {
  cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Base seed (overrides the config)");
  cmd->add_option("--out", c.out, out_help);
}

// generate: prior datasets.
struct GenerateArgs {
  Common common;
  std::size_t n = 10;
};

int run_generate(const GenerateArgs& a) {
  auto cfg = rme::experiment_config_from_json(config_text(a.common.config));
  const auto seed = a.common.seed.value_or(cfg.seed);
  if (a.n == 0) throw rme::ConfigError("--n must be >= 1");
  if (a.common.out.empty()) throw rme::ConfigError("generate needs --out <dir>");
  const json manifest{{"kind", "prior"}, {"scenario", rme::to_string(cfg.scenario)}, {"seed", seed}};
  switch (cfg.scenario) {
    case rme::Scenario::analytic1d: {
      const auto profiles = rme::prior_dataset(rme::Analytic1DSampler(cfg.analytic), a.n, seed);
      json j = manifest;
      j["profiles"] = json::array();
      for (const auto& p : profiles) j["profiles"].push_back({{"alpha", p.alpha}, {"x_t", p.x_t}, {"d", p.d}});
      fs::create_directories(a.common.out);
      rme::write_text_file(fs::path(a.common.out) / "profiles.json", j.dump(2) + "\n");
      break;
    }
    case rme::Scenario::los2d:
      rme::write_map_batch(a.common.out, rme::prior_dataset(rme::LoS2DSampler(cfg.los, cfg.grid), a.n, seed),
                           manifest.dump());
      break;
    case rme::Scenario::gudmundson:
      rme::write_map_batch(a.common.out,
                           rme::prior_dataset(rme::GudmundsonSampler(cfg.gudmundson, cfg.grid), a.n, seed),
                           manifest.dump());
      break;
  }
  return 0;
}

// measure: noisy readings of a map.
struct MeasureArgs {
  Common common;
  std::string map;
  std::string locs;
  std::size_t m = 10;
  double noise_std_db = 0.0;
};

int run_measure(const MeasureArgs& a) {
  const json cfg = json::parse(config_text(a.common.config));
  const auto map = rme::load_radio_map(a.map);
  const std::uint64_t seed = a.common.seed.value_or(cfg.value("seed", std::uint64_t{1}));
  const double noise = cfg.value("noise_std_db", a.noise_std_db);
  std::vector<rme::Vec3> locs;
  if (!a.locs.empty()) {
    for (const auto& m : rme::measurements_from_json(rme::read_text_file(a.locs))) locs.push_back(m.loc);
  } else {
    const std::size_t m = cfg.value("m", a.m);
    const auto& grid = map.grid();
    rme::Rng rng(rme::derive_seed(seed, 0));
    std::vector<std::size_t> cells(grid.size());
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
    if (m > cells.size()) throw rme::ConfigError("--m exceeds the number of grid cells");
    for (std::size_t i = 0; i < m; ++i) {
      std::swap(cells[i], cells[i + rng.below(cells.size() - i)]);
      const auto c = grid.cell_center(cells[i]);
      locs.push_back({c[0], c[1], grid.plane_height()});
    }
  }
  emit(a.common.out, rme::measurements_to_json(rme::measure(map, locs, noise, rme::derive_seed(seed, 1))) + "\n");
  return 0;
}

// posterior: sample sets from any estimator.
struct PosteriorArgs {
  Common common;
  std::string meas;
  std::string estimator;
  std::size_t n = 0;
};

int run_posterior(const PosteriorArgs& a) {
  json raw = json::parse(config_text(a.common.config));
  if (!a.estimator.empty()) raw["estimator"] = a.estimator;
  auto cfg = rme::experiment_config_from_json(raw.dump());
  if (a.n > 0) cfg.n_samples = a.n;
  const auto seed = a.common.seed.value_or(cfg.seed);
  cfg.validate();
  if (a.common.out.empty()) throw rme::ConfigError("posterior needs --out <dir>");
  const auto meas = a.meas.empty() ? rme::MeasurementSet{} : rme::load_measurements(a.meas);
  json manifest{{"kind", "posterior"},
                {"scenario", rme::to_string(cfg.scenario)},
                {"estimator", rme::to_string(cfg.estimator)},
                {"seed", seed},
                {"measurements", a.meas}};

  auto write_set = [&](const rme::PosteriorSampleSet<rme::RadioMap>& set) {
    manifest["weights"] = set.weights;
    manifest["ess"] = set.ess;
    manifest["draws"] = set.draws;
    manifest["acceptance_rate"] = set.acceptance_rate;
    manifest["low_ess"] = set.low_ess;
    rme::write_map_batch(a.common.out, set.samples, manifest.dump());
  };

  if (cfg.scenario == rme::Scenario::analytic1d) {
    const rme::Analytic1DSampler sampler(cfg.analytic);
    const auto set = cfg.estimator == rme::Estimator::mc_rejection
                         ? rme::abc_rejection(sampler, meas, cfg.abc_epsilon_db, cfg.n_samples,
                                              cfg.abc_max_draws, seed)
                         : rme::importance_posterior(sampler, meas, cfg.meas_noise_std_db, cfg.n_samples, seed);
    manifest["weights"] = set.weights;
    manifest["ess"] = set.ess;
    manifest["draws"] = set.draws;
    manifest["acceptance_rate"] = set.acceptance_rate;
    manifest["profiles"] = json::array();
    for (const auto& p : set.samples) {
      manifest["profiles"].push_back({{"alpha", p.alpha}, {"x_t", p.x_t}, {"d", p.d}});
    }
    fs::create_directories(a.common.out);
    rme::write_text_file(fs::path(a.common.out) / "manifest.json", manifest.dump(2) + "\n");
    return 0;
  }

  switch (cfg.estimator) {
    case rme::Estimator::kriging: {
      const auto post = rme::posterior(cfg.kriging, meas, cfg.grid);
      fs::create_directories(a.common.out);
      rme::write_text_file(fs::path(a.common.out) / "posterior.json", rme::posterior_to_json(post) + "\n");
      write_set(rme::make_uniform_set(rme::sample_posterior(post, cfg.n_samples, seed)));
      break;
    }
    case rme::Estimator::diffusion: {
      const auto schedule = rme::linear_schedule(cfg.schedule_steps, cfg.alpha_first, cfg.alpha_last);
      manifest["schedule"] = json::parse(rme::schedule_to_json(cfg.schedule_steps, cfg.alpha_first, cfg.alpha_last));
      write_set(rme::make_uniform_set(
          rme::conditional_sample(cfg.kriging, meas, cfg.grid, schedule, cfg.n_samples, seed)));
      break;
    }
    case rme::Estimator::mc_rejection:
    case rme::Estimator::mc_importance: {
      auto run = [&](const auto& sampler) {
        return cfg.estimator == rme::Estimator::mc_rejection
                   ? rme::abc_rejection(sampler, meas, cfg.abc_epsilon_db, cfg.n_samples, cfg.abc_max_draws, seed)
                   : rme::importance_posterior(sampler, meas, cfg.meas_noise_std_db, cfg.n_samples, seed);
      };
      if (cfg.scenario == rme::Scenario::los2d) {
        write_set(run(rme::LoS2DSampler(cfg.los, cfg.grid)));
      } else {
        write_set(run(rme::GudmundsonSampler(cfg.gudmundson, cfg.grid)));
      }
      break;
    }
  }
  return 0;
}

// functional: evaluate g on a map or a sample set.
struct FunctionalArgs {
  Common common;
  std::string map;
  std::string samples;
  std::optional<std::string> tag;
  std::optional<double> tau_dbm;
  std::optional<double> noise_dbm;
  std::optional<double> signal_dbm;
  std::optional<double> bandwidth_hz;
  std::optional<int> mc_order;
  std::vector<double> eval_loc;
  std::string averaging = "watts";
};

rme::Functional build_functional(const FunctionalArgs& a) {
  json j = json::parse(config_text(a.common.config));
  if (j.contains("functional")) j = j.at("functional");
  if (a.tag) j["tag"] = *a.tag;
  if (a.tau_dbm) j["tau_dbm"] = *a.tau_dbm;
  if (a.noise_dbm) j["noise_dbm"] = *a.noise_dbm;
  if (a.signal_dbm) j["signal_dbm"] = *a.signal_dbm;
  if (a.bandwidth_hz) j["bandwidth_hz"] = *a.bandwidth_hz;
  if (a.mc_order) j["mc_order"] = *a.mc_order;
  if (!a.eval_loc.empty()) j["eval_loc"] = a.eval_loc;
  if (!j.contains("tag")) throw rme::ConfigError("functional needs --tag or a config with \"tag\"");
  auto g = rme::functional_from_json(j.dump());
  g.validate();
  return g;
}

int run_functional(const FunctionalArgs& a) {
  const auto g = build_functional(a);
  if (a.map.empty() == a.samples.empty()) throw rme::ConfigError("give exactly one of --map or --samples");
  std::string text;
  if (!a.map.empty()) {
    text = fmt(g(rme::load_radio_map(a.map))) + "\n";
  } else {
    const json manifest = json::parse(rme::read_text_file(fs::path(a.samples) / "manifest.json"));
    std::vector<rme::RadioMap> maps;
    for (const auto& f : manifest.at("files")) {
      maps.push_back(rme::load_radio_map(fs::path(a.samples) / f.get<std::string>()));
    }
    auto set = rme::make_uniform_set(std::move(maps));
    if (manifest.contains("weights")) {
      set.weights = manifest.at("weights").get<std::vector<double>>();
      if (set.weights.size() != set.size()) throw rme::ConfigError("manifest weights do not match files");
      set.ess = manifest.value("ess", static_cast<double>(set.size()));
    }
    rme::AveragingDomain dom;
    if (a.averaging == "watts") {
      dom = rme::AveragingDomain::watts;
    } else if (a.averaging == "db") {
      dom = rme::AveragingDomain::db;
    } else {
      throw rme::ConfigError("--averaging must be watts or db");
    }
    const auto est = rme::bayes_functional_estimate(set, g);
    const double nb = rme::nonbayes_functional(set, g, dom);
    text = "bayes," + fmt(est.value) + "\nbayes_se," + fmt(est.se) + "\nnonbayes," + fmt(nb) + "\n";
  }
  emit(a.common.out, text);
  return 0;
}

// bench: functional comparison table.
struct BenchArgs {
  Common common;
  std::optional<std::size_t> trials;
};

int run_bench(const BenchArgs& a) {
  auto cfg = rme::experiment_config_from_json(config_text(a.common.config));
  if (a.common.seed) cfg.seed = *a.common.seed;
  if (a.trials) cfg.trials = *a.trials;
  const auto rows = rme::run_functional_comparison(cfg);
  std::ostringstream os;
  rme::write_results_csv(os, rows);
  emit(a.common.out, os.str());
  return 0;
}

// fig1: analytic sweep.
int run_fig1_cmd(const Common& a) {
  const auto cfg = rme::fig1_config_from_json(config_text(a.config));
  const auto res = rme::run_fig1(cfg);
  std::ostringstream os;
  rme::write_fig1_csv(os, res.rows);
  emit(a.out, os.str());
  std::cerr << "max_rel_error_pct " << fmt(res.max_rel_error_pct) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radio map estimation: priors, posteriors, and map functionals"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Draw maps from a prior");
  add_common(gen_cmd, gen.common, "Output directory");
  gen_cmd->add_option("--n", gen.n, "Number of maps");

  MeasureArgs mea;
  auto* mea_cmd = app.add_subcommand("measure", "Take noisy readings of a map");
  add_common(mea_cmd, mea.common, "Measurement JSON (stdout if omitted)");
  mea_cmd->add_option("--map", mea.map, "Map JSON")->required()->check(CLI::ExistingFile);
  mea_cmd->add_option("--locs", mea.locs, "Measurement JSON whose locations are reused")->check(CLI::ExistingFile);
  mea_cmd->add_option("--m", mea.m, "Number of distinct random cells");
  mea_cmd->add_option("--noise-std-db", mea.noise_std_db, "Reading noise std in dB");

  PosteriorArgs pos;
  auto* pos_cmd = app.add_subcommand("posterior", "Sample the posterior given readings");
  add_common(pos_cmd, pos.common, "Output directory");
  pos_cmd->add_option("--meas", pos.meas, "Measurement JSON")->check(CLI::ExistingFile);
  pos_cmd->add_option("--estimator", pos.estimator, "kriging|diffusion|mc_rejection|mc_importance");
  pos_cmd->add_option("--n", pos.n, "Number of samples (overrides the config)");

  FunctionalArgs fun;
  auto* fun_cmd = app.add_subcommand("functional", "Evaluate a functional on a map or sample set");
  add_common(fun_cmd, fun.common, "Output file (stdout if omitted)");
  fun_cmd->add_option("--map", fun.map, "Map JSON")->check(CLI::ExistingFile);
  fun_cmd->add_option("--samples", fun.samples, "Sample directory with manifest.json")->check(CLI::ExistingDirectory);
  fun_cmd->add_option("--tag", fun.tag, "capacity|ber_qam|sinr|outage|coverage_area|power");
  fun_cmd->add_option("--tau-dbm", fun.tau_dbm, "Threshold in dBm");
  fun_cmd->add_option("--noise-dbm", fun.noise_dbm, "Noise power in dBm");
  fun_cmd->add_option("--signal-dbm", fun.signal_dbm, "Signal power in dBm");
  fun_cmd->add_option("--bandwidth-hz", fun.bandwidth_hz, "Bandwidth in Hz");
  fun_cmd->add_option("--mc-order", fun.mc_order, "QAM order");
  fun_cmd->add_option("--eval-loc", fun.eval_loc, "Evaluation location x y [z]")->expected(2, 3)->type_name("X Y [Z]");
  fun_cmd->add_option("--averaging", fun.averaging, "Mean-map domain: watts|db");

  BenchArgs ben;
  auto* ben_cmd = app.add_subcommand("bench", "Compare Bayesian and plug-in estimates");
  add_common(ben_cmd, ben.common, "Results CSV (stdout if omitted)");
  ben_cmd->add_option("--trials", ben.trials, "Trials per measurement count");

  Common fig;
  auto* fig_cmd = app.add_subcommand("fig1", "Coverage-length sweep of the 1D scenario");
  add_common(fig_cmd, fig, "Sweep CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen_cmd) return run_generate(gen);
    if (*mea_cmd) return run_measure(mea);
    if (*pos_cmd) return run_posterior(pos);
    if (*fun_cmd) return run_functional(fun);
    if (*ben_cmd) return run_bench(ben);
    if (*fig_cmd) return run_fig1_cmd(fig);
  } catch (const rme::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const rme::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
