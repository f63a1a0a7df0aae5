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

// Experiment configurations, runs, and their output artifacts.
//
// A config is a JSON object. Every run yields three artifacts: summary.json,
// samples.csv and curve.dat. The CSV carries no timing so that a fixed
// (config, seed) pair reproduces it byte for byte on any thread count.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hybridsim/expr.hpp"
#include "hybridsim/hilbert.hpp"
#include "hybridsim/spectral.hpp"

namespace hybridsim {

enum class Experiment { Synth, Closure, QftDemo, Spectrum, Robustness, TrotterScaling };

std::string experiment_name(Experiment e);
/// Throws ValidationError("experiment") for an unknown name.
Experiment parse_experiment(std::string_view name);

/// One registry rule family; `kind` is single_qubit, zz, xx or derived.
struct RuleSpec {
  std::string kind;
  std::vector<int> subsystems;  // single_qubit: spin, ancilla, mode; zz: s1, s2, mode; xx: bus, anc, m1, m2
  std::string a, b;             // derived only
  HamiltonianExpr direction;    // derived only
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Spectrum;
  nlohmann::json raw;  // the config as read
  std::uint64_t seed = 0;
  int threads = 1;

  RegisterLayout layout;
  HamiltonianExpr hamiltonian;  // spectrum, robustness, trotter-scaling; target for synth
  std::optional<CVector> state;
  double guard = 0.25;

  // synth
  double angle = 0.0;
  std::vector<int> n_blocks;
  std::vector<RuleSpec> rules;
  bool reset_each_block = true;

  // closure
  std::vector<std::string> seeds;
  int max_new = 64;
  int degree_cap = 4;
  double tolerance = 1e-8;
  std::vector<std::pair<std::string, HamiltonianExpr>> queries;

  // qft-demo
  int cutoff = 64;  // pointer cutoff for spectrum and robustness
  double x0 = 1.0, p0 = 0.0;
  int applications = 4;

  // spectrum, robustness
  double beta = 4.0;
  double t = 1.0;
  int n_shots = 1000;
  Coupling coupling = Coupling::exact();
  double mid_sigma = -1.0;

  // trotter-scaling
  std::vector<int> steps;

  std::string hash() const;
};

/// Parses and fully validates a config. Malformed JSON raises ParseError;
/// a bad or unknown field raises ValidationError naming it.
ExperimentConfig parse_config(std::string_view text, std::optional<Experiment> expected = {});

struct RunResult {
  nlohmann::json summary;
  std::string samples_csv;
  std::string curve;
  double leakage = 0.0;
  bool valid = true;
};

RunResult run_experiment(const ExperimentConfig& config);

/// FNV-1a 64-bit digest.
std::uint64_t fnv1a64(std::string_view bytes);

/// Writes summary.json, samples.csv and curve.dat into `dir`.
void write_outputs(const RunResult& result, const std::filesystem::path& dir);

struct CliRequest {
  std::string experiment;
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::filesystem::path out = ".";
};

/// Full CLI flow; returns 0, 2 (parse), 3 (validation) or 4 (leakage-invalid).
int run_cli(const CliRequest& request, std::ostream& log);

}  // namespace hybridsim
