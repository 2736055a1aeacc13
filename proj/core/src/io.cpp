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
#include "rme/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rme/error.hpp"

namespace rme {

using nlohmann::json;

namespace {

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON document: ") + e.what());
  }
}

json grid_json(const Grid& g) {
  return {{"origin", {g.origin_x(), g.origin_y()}},
          {"spacing", g.spacing()},
          {"nx", g.nx()},
          {"ny", g.ny()},
          {"plane_height", g.plane_height()}};
}

Grid grid_of(const json& j) {
  const auto& o = j.at("origin");
  return Grid(o.at(0).get<double>(), o.at(1).get<double>(), j.at("spacing").get<double>(),
              j.at("nx").get<std::size_t>(), j.at("ny").get<std::size_t>(),
              j.value("plane_height", 0.0));
}

Vec3 vec3_of(const json& j) {
  if (!j.is_array() || j.size() < 2 || j.size() > 3) throw ConfigError("location must be [x,y] or [x,y,z]");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.size() == 3 ? j.at(2).get<double>() : 0.0};
}

LinkBudget link_of(const json& j) {
  LinkBudget l;
  l.ptx_dbm = j.value("ptx_dbm", l.ptx_dbm);
  l.gtx_dbi = j.value("gtx_dbi", l.gtx_dbi);
  l.grx_dbi = j.value("grx_dbi", l.grx_dbi);
  l.freq_hz = j.value("freq_hz", l.freq_hz);
  if (!(l.freq_hz > 0.0)) throw ConfigError("link: freq_hz must be > 0");
  return l;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string grid_to_json(const Grid& grid) { return grid_json(grid).dump(); }

Grid grid_from_json(std::string_view text) {
  return guarded([&] { return grid_of(parse(text)); });
}

std::string radio_map_to_json(const RadioMap& map) {
  const auto v = map.values();
  json j{{"grid", grid_json(map.grid())}, {"values_dbm", std::vector<double>(v.begin(), v.end())}};
  return j.dump();
}

RadioMap radio_map_from_json(std::string_view text) {
  return guarded([&] {
    const json j = parse(text);
    return RadioMap(grid_of(j.at("grid")), j.at("values_dbm").get<std::vector<double>>());
  });
}

RadioMap load_radio_map(const std::filesystem::path& path) {
  return radio_map_from_json(read_text_file(path));
}

void save_radio_map(const std::filesystem::path& path, const RadioMap& map) {
  write_text_file(path, radio_map_to_json(map) + "\n");
}

std::string measurements_to_json(const MeasurementSet& set) {
  json j = json::array();
  for (const auto& m : set) j.push_back({{"loc", {m.loc[0], m.loc[1], m.loc[2]}}, {"dbm", m.value_dbm}});
  return j.dump();
}

MeasurementSet measurements_from_json(std::string_view text) {
  return guarded([&] {
    const json j = parse(text);
    if (!j.is_array()) throw ConfigError("measurements must be a JSON list");
    MeasurementSet out;
    for (const auto& e : j) out.push_back({vec3_of(e.at("loc")), e.at("dbm").get<double>()});
    return out;
  });
}

MeasurementSet load_measurements(const std::filesystem::path& path) {
  return measurements_from_json(read_text_file(path));
}

void save_measurements(const std::filesystem::path& path, const MeasurementSet& set) {
  write_text_file(path, measurements_to_json(set) + "\n");
}

std::string posterior_to_json(const GaussianPosterior& post, bool with_covariance) {
  json j{{"grid", grid_json(post.grid)},
         {"mean_db", std::vector<double>(post.mean_db.data(), post.mean_db.data() + post.mean_db.size())}};
  if (with_covariance) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < post.cov_db2.rows(); ++i) {
      const Eigen::VectorXd r = post.cov_db2.row(i).transpose();
      rows.push_back(std::vector<double>(r.data(), r.data() + r.size()));
    }
    j["cov_db2"] = std::move(rows);
  }
  return j.dump();
}

GaussianPosterior posterior_from_json(std::string_view text) {
  return guarded([&] {
    const json j = parse(text);
    Grid grid = grid_of(j.at("grid"));
    const auto mean = j.at("mean_db").get<std::vector<double>>();
    if (mean.size() != grid.size()) throw ConfigError("posterior mean length does not match grid");
    const auto n = static_cast<Eigen::Index>(mean.size());
    GaussianPosterior post{grid, Eigen::Map<const Eigen::VectorXd>(mean.data(), n), Eigen::MatrixXd::Zero(n, n)};
    if (j.contains("cov_db2")) {
      const auto& rows = j.at("cov_db2");
      if (rows.size() != mean.size()) throw ConfigError("posterior covariance has wrong shape");
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto r = rows.at(static_cast<std::size_t>(i)).get<std::vector<double>>();
        if (r.size() != mean.size()) throw ConfigError("posterior covariance has wrong shape");
        post.cov_db2.row(i) = Eigen::Map<const Eigen::RowVectorXd>(r.data(), n);
      }
    }
    return post;
  });
}

std::string schedule_to_json(std::size_t steps, double alpha_first, double alpha_last) {
  return json{{"L", steps}, {"alpha_first", alpha_first}, {"alpha_last", alpha_last}}.dump();
}

NoiseSchedule schedule_from_json(std::string_view text) {
  return guarded([&] {
    const json j = parse(text);
    return linear_schedule(j.value("L", std::size_t{1000}), j.value("alpha_first", 0.9999),
                           j.value("alpha_last", 0.98));
  });
}

Functional functional_from_json(std::string_view text) {
  return guarded([&] {
    const json j = parse(text);
    Functional g;
    g.tag = functional_tag_from_string(j.at("tag").get<std::string>());
    auto& p = g.params;
    p.bandwidth_hz = j.value("bandwidth_hz", p.bandwidth_hz);
    if (j.contains("noise_dbm")) p.noise_pow_w = dbm_to_watts(j.at("noise_dbm").get<double>());
    p.mc_order = j.value("mc_order", p.mc_order);
    if (j.contains("signal_dbm")) p.signal_pow_w = dbm_to_watts(j.at("signal_dbm").get<double>());
    if (j.contains("tau_dbm")) p.threshold_w = dbm_to_watts(j.at("tau_dbm").get<double>());
    if (j.contains("eval_loc")) p.eval_loc = vec3_of(j.at("eval_loc"));
    p.length_step_m = j.value("length_step_m", p.length_step_m);
    g.validate();
    return g;
  });
}

LinkBudget link_budget_from_json(std::string_view text) {
  return guarded([&] { return link_of(parse(text)); });
}

GudmundsonPrior gudmundson_from_json(std::string_view text) {
  return guarded([&] {
    const json j = parse(text);
    GudmundsonPrior p;
    p.sigma_sh_db = j.value("sigma_sh_db", p.sigma_sh_db);
    p.d_corr_m = j.value("d_corr_m", p.d_corr_m);
    p.mean_db = j.value("mean_db", p.mean_db);
    p.validate();
    return p;
  });
}

LoS2DPrior los2d_from_json(std::string_view text) {
  return guarded([&] {
    const json j = parse(text);
    LoS2DPrior p;
    p.width_m = j.value("width_m", p.width_m);
    p.height_m = j.value("height_m", p.height_m);
    p.n_tx = j.value("n_tx", p.n_tx);
    p.tx_height_m = j.value("tx_height_m", p.tx_height_m);
    p.rx_height_m = j.value("rx_height_m", p.rx_height_m);
    if (j.contains("link")) p.link = link_of(j.at("link"));
    p.validate();
    return p;
  });
}

Analytic1DPrior analytic1d_from_json(std::string_view text) {
  return guarded([&] {
    const json j = parse(text);
    Analytic1DPrior p;
    if (j.contains("alpha")) {
      p.alpha = j.at("alpha").get<double>();
    } else {
      p.alpha = alpha_const(j.contains("link") ? link_of(j.at("link")) : LinkBudget{});
    }
    p.d = j.value("d", 2.0);
    if (j.contains("x_half_range")) {
      p.x_half_range = j.at("x_half_range").get<double>();
    } else if (j.contains("tau_dbm")) {
      p.x_half_range = default_x_half_range(p.alpha, dbm_to_watts(j.at("tau_dbm").get<double>()));
    } else {
      throw ConfigError("analytic1d needs x_half_range or tau_dbm");
    }
    p.validate();
    return p;
  });
}

void write_map_batch(const std::filesystem::path& dir, std::span<const RadioMap> maps,
                     std::string_view manifest_json) {
  std::filesystem::create_directories(dir);
  json manifest = parse(manifest_json);
  json files = json::array();
  for (std::size_t i = 0; i < maps.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "map_%05zu.json", i);
    save_radio_map(dir / name, maps[i]);
    files.push_back(name);
  }
  manifest["n"] = maps.size();
  manifest["files"] = std::move(files);
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace rme
