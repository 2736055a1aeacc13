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
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "rme/functionals.hpp"
#include "rme/io.hpp"
#include "rme/priors.hpp"

namespace {

namespace fs = std::filesystem;

const std::string kCli = RME_CLI_PATH;
const std::string kConfigs = RME_CONFIG_DIR;

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + kCli + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rme_cli_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST_F(CliTest, Fig1WritesCsv) {
  const auto r = run("fig1 --config " + kConfigs + "/fig1.json --out " + path("fig1.csv"));
  ASSERT_EQ(r.code, 0);
  const auto text = rme::read_text_file(path("fig1.csv"));
  EXPECT_EQ(text.substr(0, text.find('\n')), "sweep_var,true_len_m,nonbayes_len_m,rel_error_pct");
  EXPECT_EQ(run("fig1 --out " + path("default.csv")).code, 0);
}

TEST_F(CliTest, CoverageAreaOfMap) {
  const rme::Grid grid(0, 0, 5.0, 8, 8);
  const auto map = rme::sample_gudmundson({6.0, 15.0, -36.0}, grid, 4);
  rme::save_radio_map(path("m.json"), map);
  const auto r = run("functional --tag coverage_area --tau-dbm -35 --map " + path("m.json"));
  ASSERT_EQ(r.code, 0);
  EXPECT_DOUBLE_EQ(std::stod(r.out), rme::coverage_area(map, rme::dbm_to_watts(-35.0)));
}

TEST_F(CliTest, NlosThresholdConfigAccepted) {
  const auto r = run("bench --config " + kConfigs + "/bench_los_nlos.json --trials 1");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("los2d,mc_importance,coverage_area,bayes"), std::string::npos);
}

TEST_F(CliTest, BenchIsBitIdenticalAcrossWorkerCounts) {
  const std::string args = "bench --config " + kConfigs + "/bench_gudmundson.json --seed 99";
  const auto a = run(args, "RME_THREADS=1");
  const auto b = run(args, "RME_THREADS=4");
  const auto c = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  EXPECT_NE(a.out, run("bench --config " + kConfigs + "/bench_gudmundson.json --seed 100").out);
}

TEST_F(CliTest, PipelineRoundTrip) {
  const std::string cfg = kConfigs + "/bench_gudmundson.json";
  ASSERT_EQ(run("generate --config " + cfg + " --n 3 --seed 5 --out " + path("prior")).code, 0);
  ASSERT_TRUE(fs::exists(path("prior/map_00002.json")));
  ASSERT_EQ(run("measure --map " + path("prior/map_00000.json") + " --m 6 --noise-std-db 1 --seed 2 --out " +
                path("meas.json"))
                .code,
            0);
  EXPECT_EQ(rme::load_measurements(path("meas.json")).size(), 6u);
  for (const char* est : {"kriging", "diffusion", "mc_importance"}) {
    const std::string out = path(std::string("post_") + est);
    ASSERT_EQ(run("posterior --config " + cfg + " --estimator " + est + " --n 20 --meas " + path("meas.json") +
                  " --seed 3 --out " + out)
                  .code,
              0)
        << est;
    const auto r = run("functional --tag capacity --noise-dbm -30 --eval-loc 12 12 --samples " + out);
    ASSERT_EQ(r.code, 0) << est;
    EXPECT_EQ(r.out.rfind("bayes,", 0), 0u);
  }
  EXPECT_EQ(rme::read_text_file(path("post_kriging/map_00004.json")),
            [&] {
              run("posterior --config " + cfg + " --estimator kriging --n 20 --meas " + path("meas.json") +
                  " --seed 3 --out " + path("again"));
              return rme::read_text_file(path("again/map_00004.json"));
            }());
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("functional --tag nope --tau-dbm -35 --map " + kConfigs + "/fig1.json").code, 2);
  rme::write_text_file(path("bad.json"), "{\"scenario\": \"gudmundson\", \"m_list\": []}");
  EXPECT_EQ(run("bench --config " + path("bad.json")).code, 2);
  rme::write_text_file(path("broken.json"), "{");
  EXPECT_EQ(run("fig1 --config " + path("broken.json")).code, 2);

  // No prior draw can match a reading 200 dB above the mean.
  rme::write_text_file(path("far.json"), R"([{"loc": [2.5, 2.5, 1], "dbm": 140}])");
  rme::write_text_file(path("abc.json"),
                       R"({"scenario": "gudmundson", "estimator": "mc_rejection", "abc_epsilon_db": 0.1,
                           "abc_max_draws": 200, "n_samples": 5,
                           "grid": {"origin": [0, 0], "spacing": 5, "nx": 2, "ny": 2, "plane_height": 1}})");
  EXPECT_EQ(run("posterior --config " + path("abc.json") + " --meas " + path("far.json") + " --out " + path("p")).code,
            3);
}

}  // namespace
