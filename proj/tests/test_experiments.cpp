// Copyright 2026 The hybridsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "hybridsim/experiments.hpp"

namespace hybridsim {
namespace {

namespace fs = std::filesystem;

const char* kSpectrum = R"({
  "experiment": "spectrum",
  "layout": ["qubit", "qubit"],
  "hamiltonian": "sz@0 * sz@1",
  "state": "uniform",
  "beta": 4,
  "t": 5,
  "n_shots": 2000,
  "seed": 7
})";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hybridsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int run(const std::string& experiment, const fs::path& config, const std::string& out,
          std::optional<int> threads = {}, std::optional<std::uint64_t> seed = {}) {
    CliRequest req;
    req.experiment = experiment;
    req.config = config;
    req.out = dir_ / out;
    req.threads = threads;
    req.seed = seed;
    log_.str("");
    return run_cli(req, log_);
  }

  std::string read(const std::string& out, const std::string& file) {
    std::ifstream f(dir_ / out / file, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  }

  fs::path dir_;
  std::ostringstream log_;
};

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(ParseConfig, Spectrum) {
  const ExperimentConfig c = parse_config(kSpectrum);
  EXPECT_EQ(c.experiment, Experiment::Spectrum);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.layout.size(), 2);
  EXPECT_EQ(c.n_shots, 2000);
  EXPECT_EQ(c.cutoff, 128);
  EXPECT_EQ(c.hash(), parse_config(kSpectrum).hash());
  EXPECT_EQ(c.hash().rfind("fnv1a64:", 0), 0u);
}

TEST(ParseConfig, NamesOffendingField) {
  const auto field_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ValidationError& e) {
      return e.field();
    }
    return std::string("none");
  };
  EXPECT_EQ(field_of(R"({"experiment":"spectrum","layout":["qubit"],"hamiltonian":"sz@0",
                         "beta":4,"t":5,"n_shots":10,"cutoff":1})"),
            "cutoff");
  EXPECT_EQ(field_of(R"({"experiment":"spectrum","layout":["qubit"],"hamiltonian":"sz@0",
                         "beta":-1,"t":5,"n_shots":10})"),
            "beta");
  EXPECT_EQ(field_of(R"({"experiment":"spectrum","layout":["qubit"],"hamiltonian":"sz@0",
                         "beta":4,"t":5})"),
            "n_shots");
  EXPECT_EQ(field_of(R"({"experiment":"spectrum","layout":["qubit"],"hamiltonian":"sz@3",
                         "beta":4,"t":5,"n_shots":10})"),
            "hamiltonian");
  EXPECT_EQ(field_of(R"({"experiment":"spectrum","layout":["qubit"],"hamiltonian":"sz@0",
                         "beta":4,"t":5,"n_shots":10,"bogus":1})"),
            "bogus");
  EXPECT_EQ(field_of(R"({"experiment":"closure","layout":["qubit","qumode:1"]})"), "layout[1].cutoff");
  EXPECT_EQ(field_of(R"({"experiment":"qft-demo","cutoff":1})"), "cutoff");
  EXPECT_EQ(field_of(R"({"experiment":"teleport"})"), "experiment");
  EXPECT_EQ(field_of(R"({"experiment":"synth","layout":["qubit","qumode:8"],"target":"sy@0",
                         "angle":0.1,"n_blocks":4})"),
            "target");
  EXPECT_EQ(field_of(R"({"experiment":"synth","layout":["qubit","qubit","qumode:8"],"target":"sy@0",
                         "angle":0.1,"n_blocks":[4,0],
                         "rules":[{"kind":"single_qubit","subsystems":[0,1,2]}]})"),
            "n_blocks[1]");
  EXPECT_EQ(field_of(R"({"experiment":"synth","layout":["qubit","qumode:8"],"target":"sx@0",
                         "angle":0.1,"n_blocks":4,
                         "rules":[{"kind":"derived","a":"sz@0*X@1","b":"sz@0*P@1","direction":"sx@0"}]})"),
            "rules[0]");
}

TEST(ParseConfig, MalformedJsonIsParseError) {
  try {
    parse_config("{\n  \"experiment\": \"spectrum\",\n  \"beta\": ,\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_config(R"({"experiment":"spectrum","layout":["qubit"],"hamiltonian":"sz@0 *",
                                "beta":4,"t":5,"n_shots":10})"),
               ParseError);
}

TEST(ParseConfig, States) {
  const auto base = std::string(R"({"experiment":"trotter-scaling","layout":["qubit","qumode:4"],
                                    "hamiltonian":"sz@0*X@1","t":1,"state":)");
  const ExperimentConfig plus = parse_config(base + "\"plus\"}");
  ASSERT_TRUE(plus.state);
  EXPECT_NEAR(std::abs((*plus.state)(0)), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(std::abs((*plus.state)(4)), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(plus.state->norm(), 1.0, 1e-15);
  const ExperimentConfig basis = parse_config(base + R"({"basis":[1,2]}})");
  EXPECT_EQ(std::abs((*basis.state)(6)), 1.0);
  const ExperimentConfig amps = parse_config(base + R"({"amplitudes":[3,0,0,0,[0,4],0,0,0]}})");
  EXPECT_NEAR(std::abs((*amps.state)(4)), 0.8, 1e-15);
  EXPECT_THROW(parse_config(base + R"({"amplitudes":[1,2]}})"), ValidationError);
  EXPECT_THROW(parse_config(base + R"({"basis":[2,0]}})"), ValidationError);
}

TEST_F(CliTest, SpectrumExample) {
  const fs::path cfg = write_config("spectrum.json", kSpectrum);
  ASSERT_EQ(run("spectrum", cfg, "a"), 0) << log_.str();
  const auto summary = nlohmann::json::parse(read("a", "summary.json"));
  const auto& peaks = summary["result"]["peaks"];
  ASSERT_EQ(peaks.size(), 2u);
  EXPECT_NEAR(peaks[0]["eigenvalue"].get<double>(), -1.0, 0.1);
  EXPECT_NEAR(peaks[1]["eigenvalue"].get<double>(), 1.0, 0.1);
  EXPECT_TRUE(summary["valid"].get<bool>());
  EXPECT_EQ(summary["config"], nlohmann::json::parse(kSpectrum));
  EXPECT_EQ(summary["seed"].get<std::uint64_t>(), 7u);
  for (const char* key : {"version", "config_hash", "leakage", "wall_time_s"}) {
    EXPECT_TRUE(summary.contains(key)) << key;
  }
  const std::string csv = read("a", "samples.csv");
  EXPECT_NE(csv.find(summary["config_hash"].get<std::string>()), std::string::npos);
  EXPECT_NE(csv.find("seed=7"), std::string::npos);
  EXPECT_NE(csv.find("leakage="), std::string::npos);
  EXPECT_NE(csv.find("\nshot,x,eigenvalue_estimate\n"), std::string::npos);
  const std::string curve = read("a", "curve.dat");
  EXPECT_NE(curve.find("wall_time_s="), std::string::npos);
  EXPECT_NE(curve.find("# eigenvalue count\n"), std::string::npos);
}

TEST_F(CliTest, CsvIsByteIdenticalAcrossRunsAndThreads) {
  const fs::path cfg = write_config("spectrum.json", kSpectrum);
  ASSERT_EQ(run("spectrum", cfg, "a", 1), 0);
  ASSERT_EQ(run("spectrum", cfg, "b", 1), 0);
  ASSERT_EQ(run("spectrum", cfg, "c", 3), 0);
  EXPECT_EQ(read("a", "samples.csv"), read("b", "samples.csv"));
  EXPECT_EQ(read("a", "samples.csv"), read("c", "samples.csv"));
  ASSERT_EQ(run("spectrum", cfg, "d", 1, 8), 0);
  EXPECT_NE(read("a", "samples.csv"), read("d", "samples.csv"));
  EXPECT_NE(read("d", "samples.csv").find("seed=8"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
  const fs::path bad_cutoff = write_config("c1.json", R"({"experiment":"spectrum","layout":["qubit"],
      "hamiltonian":"sz@0","beta":4,"t":5,"n_shots":10,"cutoff":1})");
  EXPECT_EQ(run("spectrum", bad_cutoff, "x"), 3);
  EXPECT_NE(log_.str().find("cutoff"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "x" / "summary.json"));

  const fs::path broken = write_config("broken.json", "{\"experiment\": ");
  EXPECT_EQ(run("spectrum", broken, "x"), 2);
  EXPECT_EQ(run("spectrum", dir_ / "missing.json", "x"), 3);
  const fs::path cfg = write_config("spectrum.json", kSpectrum);
  EXPECT_EQ(run("closure", cfg, "x"), 3);
  EXPECT_NE(log_.str().find("experiment"), std::string::npos);

  const fs::path overflow = write_config("overflow.json", R"({"experiment":"spectrum","layout":["qubit"],
      "hamiltonian":"sz@0","beta":4,"t":10,"n_shots":50,"cutoff":32,"seed":1})");
  EXPECT_EQ(run("spectrum", overflow, "o"), 4);
  const auto summary = nlohmann::json::parse(read("o", "summary.json"));
  EXPECT_FALSE(summary["valid"].get<bool>());
  EXPECT_TRUE(fs::exists(dir_ / "o" / "samples.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "o" / "curve.dat"));
}

TEST_F(CliTest, Synth) {
  const fs::path cfg = write_config("synth.json", R"({"experiment":"synth",
      "layout":["qubit","qubit","qumode:16"],
      "rules":[{"kind":"single_qubit","subsystems":[0,1,2]}],
      "target":"sy@0","angle":0.7853981633974483,"n_blocks":[4,16,64],"seed":3})");
  ASSERT_EQ(run("synth", cfg, "s"), 0) << log_.str();
  const auto summary = nlohmann::json::parse(read("s", "summary.json"));
  const auto& plans = summary["result"]["plans"];
  ASSERT_EQ(plans.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LE(plans[i]["logical_error"].get<double>(), plans[i]["predicted_error"].get<double>());
    if (i > 0) {
      EXPECT_LT(plans[i]["logical_error"].get<double>(), plans[i - 1]["logical_error"].get<double>());
    }
  }
  EXPECT_EQ(plans[0]["derivation"][0]["rule"]["direction"], "1 * sy@0");
  EXPECT_DOUBLE_EQ(plans[0]["derivation"][0]["rule"]["scale"].get<double>(), -2.0);
  EXPECT_NEAR(summary["result"]["error_slope"].get<double>(), -0.5, 0.15);
}

TEST_F(CliTest, Closure) {
  const fs::path cfg = write_config("closure.json", R"({"experiment":"closure",
      "layout":["qubit","qumode:32"],"max_new":40,"degree_cap":4,
      "queries":{"identity":"1","sz_x3":"sz@0 * X@1^3","sz":"sz@0"}})");
  ASSERT_EQ(run("closure", cfg, "c", 2), 0) << log_.str();
  const auto summary = nlohmann::json::parse(read("c", "summary.json"));
  for (const auto& q : summary["result"]["queries"]) {
    EXPECT_EQ(q["reached"].get<bool>(), q["name"] != "sz") << q.dump();
  }
  const std::string csv = read("c", "samples.csv");
  EXPECT_NE(csv.find("index,degree,label\n0,1,\"sx@0*X@1\""), std::string::npos);
}

TEST_F(CliTest, QftDemo) {
  const fs::path cfg = write_config("qft.json", R"({"experiment":"qft-demo","cutoff":64})");
  ASSERT_EQ(run("qft-demo", cfg, "q"), 0);
  const auto summary = nlohmann::json::parse(read("q", "summary.json"));
  EXPECT_NEAR(summary["result"]["after_one"]["mean_x"].get<double>(), 0.0, 1e-3);
  EXPECT_NEAR(summary["result"]["after_one"]["mean_p"].get<double>(), -1.0, 1e-3);
  EXPECT_GE(summary["result"]["final_fidelity"].get<double>(), 1.0 - 1e-8);
}

TEST_F(CliTest, TrotterScalingAndRobustness) {
  const fs::path tcfg = write_config("trot.json", R"({"experiment":"trotter-scaling",
      "layout":["qubit","qumode:24"],"hamiltonian":"sz@0 * X@1 + sx@0 * P@1","t":1,
      "steps":[4,8,16,32]})");
  ASSERT_EQ(run("trotter-scaling", tcfg, "t"), 0) << log_.str();
  const auto ts = nlohmann::json::parse(read("t", "summary.json"));
  EXPECT_NEAR(ts["result"]["error_slope"].get<double>(), -1.0, 0.1);

  const fs::path rcfg = write_config("rob.json", R"({"experiment":"robustness","layout":["qubit"],
      "hamiltonian":"sz@0","state":"uniform","beta":4,"t":5,"n_shots":200,"seed":2})");
  ASSERT_EQ(run("robustness", rcfg, "r", 1), 0) << log_.str();
  ASSERT_EQ(run("robustness", rcfg, "r2", 2), 0);
  EXPECT_EQ(read("r", "samples.csv"), read("r2", "samples.csv"));
  const auto rs = nlohmann::json::parse(read("r", "summary.json"));
  EXPECT_GE(rs["result"]["mean_branch_fidelity"].get<double>(), 0.99);
  EXPECT_NE(read("r", "samples.csv").find("\nshot,mid_x,x,eigenvalue_estimate\n"), std::string::npos);
}

}  // namespace
}  // namespace hybridsim
