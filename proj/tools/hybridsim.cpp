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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hybridsim/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hybridsim: hybrid qubit-oscillator simulation experiments"};
  app.set_version_flag("--version", std::string(HYBRIDSIM_VERSION));
  app.require_subcommand(1);

  hybridsim::CliRequest req;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = ".";
  std::string config;

  const char* experiments[][2] = {
      {"synth", "compile a target unitary into primitive pulses"},
      {"closure", "numerically close the Lie algebra of a seed set"},
      {"qft-demo", "continuous-variable Fourier transform of a displaced vacuum"},
      {"spectrum", "eigenvalue sampling with a continuous pointer"},
      {"robustness", "spectrum estimate with an interleaved pointer readout"},
      {"trotter-scaling", "product-formula error against step count"},
  };
  for (const auto& [name, help] : experiments) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads (overrides the config)")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  req.experiment = chosen->get_name();
  req.config = config;
  req.out = out;
  if (chosen->count("--seed") > 0) req.seed = seed;
  if (chosen->count("--threads") > 0) req.threads = threads;
  return hybridsim::run_cli(req, std::cerr);
}
