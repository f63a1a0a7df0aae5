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

// Unitary evolution: exact exponentials, pulse sequences, Trotterization,
// the oscillator Fourier transform and leakage diagnostics.
//
// A pulse (G, sign, d) applies e^{-i sign G d}. Sequences run left to right.
// Evolution never renormalizes; only spin resets (a measurement) do.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hybridsim/expr.hpp"
#include "hybridsim/hilbert.hpp"
#include "hybridsim/interior.hpp"
#include "hybridsim/registry.hpp"
#include "hybridsim/rng.hpp"

namespace hybridsim {

/// e^{-iHt} applied to `state`.
StateVector expm_apply(const CMatrix& h, double t, const StateVector& state);
CVector expm_apply(const CMatrix& h, double t, const CVector& amplitudes);

struct Pulse {
  std::string generator;
  int sign = 1;
  double duration = 0.0;

  bool operator==(const Pulse&) const = default;
};

/// The pulse that resets `spin` to |0>.
Pulse reset_pulse(int spin);
/// Spin index of a reset pulse, or -1.
int reset_target(const Pulse& pulse);

struct PulseSequence {
  std::vector<Pulse> pulses;
  std::vector<std::string> metadata;

  std::size_t size() const { return pulses.size(); }
  bool empty() const { return pulses.empty(); }
  void append(const PulseSequence& other) {
    pulses.insert(pulses.end(), other.pulses.begin(), other.pulses.end());
  }
  bool operator==(const PulseSequence&) const = default;
};

struct EvolutionReport {
  StateVector final_state;
  double leakage = 0.0;
  double norm_drift = 0.0;
};

/// Executes a sequence without resets; ids resolve against `registry`.
EvolutionReport run_sequence(const PulseSequence& seq, const StateVector& state,
                             const GeneratorRegistry& registry);
/// Executes a sequence that may contain resets.
EvolutionReport run_sequence(const PulseSequence& seq, const StateVector& state,
                             const GeneratorRegistry& registry, Rng& rng);
/// Executes a sequence of inline expressions on the state's own layout.
EvolutionReport run_sequence(const PulseSequence& seq, const StateVector& state);

/// Raw amplitude propagation; throws on reset pulses.
CVector propagate(const PulseSequence& seq, const GeneratorRegistry& registry, CVector amplitudes);

/// First-order product formula: n_steps rounds of every term for t / n_steps.
PulseSequence trotter(const HamiltonianExpr& expr, double t, int n_steps);

/// Quarter period of ½(X² + P²) on `mode`: X -> P, P -> -X.
StateVector cv_qft(const StateVector& state, int mode);

/// Probability mass with any qumode in its guard band.
double leakage(const StateVector& state, double guard = kDefaultGuard);
double leakage(const RegisterLayout& layout, const CVector& amplitudes,
               double guard = kDefaultGuard);

/// ⟨ψ|embed(local, targets)|ψ⟩, real part.
double expectation(const StateVector& state, const CMatrix& local, std::initializer_list<int> targets);

/// Measures σz on `spin` and flips it on outcome 1; the state is renormalized.
StateVector reset_spin(const StateVector& state, int spin, Rng& rng);

/// One pulse per line, "<id> <+1|-1> <duration>", metadata as leading "# " lines.
std::string to_text(const PulseSequence& seq);
PulseSequence parse_pulse_sequence(std::string_view text);

}  // namespace hybridsim
