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

#include "hybridsim/evolution.hpp"

#include <cmath>
#include <numbers>

#include "hybridsim/expr_text.hpp"

namespace hybridsim {

CVector expm_apply(const CMatrix& h, double t, const CVector& amplitudes) {
  if (h.rows() != amplitudes.size()) {
    throw ValidationError("hamiltonian", "matrix dimension does not match the state");
  }
  return decompose_hermitian(h).apply(t, amplitudes);
}

StateVector expm_apply(const CMatrix& h, double t, const StateVector& state) {
  return StateVector(state.layout(), expm_apply(h, t, state.amplitudes()));
}

Pulse reset_pulse(int spin) { return Pulse{"reset@" + std::to_string(spin), 1, 0.0}; }

int reset_target(const Pulse& pulse) {
  constexpr std::string_view prefix = "reset@";
  const std::string_view g = pulse.generator;
  if (g.substr(0, prefix.size()) != prefix || g.size() == prefix.size()) return -1;
  int spin = 0;
  for (char c : g.substr(prefix.size())) {
    if (c < '0' || c > '9') return -1;
    spin = spin * 10 + (c - '0');
  }
  return spin;
}

namespace {

CVector apply_pulse(const Pulse& p, const GeneratorRegistry& registry, const CVector& v) {
  if (p.sign != 1 && p.sign != -1) throw ValidationError("sign", "pulse sign must be +1 or -1");
  if (!(p.duration >= 0.0) || !std::isfinite(p.duration)) {
    throw ValidationError("duration", "pulse duration must be finite and >= 0");
  }
  if (p.duration == 0.0) return v;
  return registry.pulse_eigensystem(p.generator)->apply(p.sign * p.duration, v);
}

CVector reset_amplitudes(const RegisterLayout& layout, const CVector& v, int spin, Rng& rng) {
  layout.require_qubit(spin);
  const Index stride = layout.stride(spin);
  double p0 = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (layout.occupation(i, spin) == 0) p0 += std::norm(v(i));
  }
  const double total = v.squaredNorm();
  const bool outcome_one = uniform01(rng) * total >= p0;
  CVector out = CVector::Zero(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    if (layout.occupation(i, spin) != 0) continue;
    out(i) = outcome_one ? v(i + stride) : v(i);
  }
  const double n = out.norm();
  if (!(n > 0.0)) throw Error("reset produced a zero state");
  return out / n;
}

EvolutionReport run_impl(const PulseSequence& seq, const StateVector& state,
                         const GeneratorRegistry& registry, Rng* rng) {
  if (!(state.layout() == registry.layout())) {
    throw ValidationError("state", "state layout " + state.layout().describe() +
                                       " differs from registry layout " +
                                       registry.layout().describe());
  }
  CVector v = state.amplitudes();
  double drift = 0.0;
  double reference = v.norm();
  for (const auto& p : seq.pulses) {
    const int spin = reset_target(p);
    if (spin >= 0) {
      if (rng == nullptr) throw ValidationError("rng", "sequence contains resets; pass an rng");
      drift = std::max(drift, std::abs(v.norm() - reference));
      v = reset_amplitudes(registry.layout(), v, spin, *rng);
      reference = 1.0;
      continue;
    }
    v = apply_pulse(p, registry, v);
  }
  drift = std::max(drift, std::abs(v.norm() - reference));
  StateVector out(state.layout(), std::move(v));
  const double leak = leakage(out, registry.guard());
  return EvolutionReport{std::move(out), leak, drift};
}

}  // namespace

EvolutionReport run_sequence(const PulseSequence& seq, const StateVector& state,
                             const GeneratorRegistry& registry) {
  return run_impl(seq, state, registry, nullptr);
}

EvolutionReport run_sequence(const PulseSequence& seq, const StateVector& state,
                             const GeneratorRegistry& registry, Rng& rng) {
  return run_impl(seq, state, registry, &rng);
}

EvolutionReport run_sequence(const PulseSequence& seq, const StateVector& state) {
  const GeneratorRegistry registry(state.layout());
  return run_impl(seq, state, registry, nullptr);
}

CVector propagate(const PulseSequence& seq, const GeneratorRegistry& registry, CVector v) {
  for (const auto& p : seq.pulses) {
    if (reset_target(p) >= 0) throw ValidationError("pulse", "reset pulses need a state and rng");
    v = apply_pulse(p, registry, v);
  }
  return v;
}

PulseSequence trotter(const HamiltonianExpr& expr, double t, int n_steps) {
  if (n_steps < 1) throw ValidationError("n_steps", "need at least one Trotter step");
  if (expr.empty()) throw ValidationError("hamiltonian", "expression has no terms");
  PulseSequence seq;
  std::vector<Pulse> round;
  for (const auto& term : expr.terms()) {
    const double angle = term.coefficient() * t / n_steps;
    round.push_back(Pulse{to_compact(HamiltonianExpr(term.monomial())), angle < 0 ? -1 : 1,
                          std::abs(angle)});
  }
  for (int k = 0; k < n_steps; ++k) seq.pulses.insert(seq.pulses.end(), round.begin(), round.end());
  seq.metadata.push_back("trotter " + to_string(expr) + " t=" + format_double(t) +
                         " steps=" + std::to_string(n_steps));
  return seq;
}

StateVector cv_qft(const StateVector& state, int mode) {
  const RegisterLayout& layout = state.layout();
  layout.require_qumode(mode);
  const RegisterLayout single({layout.spec(mode)});
  const HamiltonianExpr h = parse_hamiltonian("0.5*X@0^2 + 0.5*P@0^2");
  const CMatrix u = decompose_hermitian(build(h, single)).unitary(std::numbers::pi / 2);
  const int targets[] = {mode};
  return StateVector(layout, apply_local(u, targets, layout, state.amplitudes()));
}

double leakage(const RegisterLayout& layout, const CVector& amplitudes, double guard) {
  std::vector<int> threshold(static_cast<std::size_t>(layout.size()), 0);
  for (int k = 0; k < layout.size(); ++k) {
    const auto& s = layout.spec(k);
    threshold[static_cast<std::size_t>(k)] = s.is_qumode() ? guard_threshold(s.cutoff, guard) : 2;
  }
  double leak = 0.0;
  for (Index i = 0; i < amplitudes.size(); ++i) {
    for (int k = 0; k < layout.size(); ++k) {
      if (layout.occupation(i, k) >= threshold[static_cast<std::size_t>(k)]) {
        leak += std::norm(amplitudes(i));
        break;
      }
    }
  }
  return std::min(1.0, leak);
}

double leakage(const StateVector& state, double guard) {
  return leakage(state.layout(), state.amplitudes(), guard);
}

double expectation(const StateVector& state, const CMatrix& local,
                   std::initializer_list<int> targets) {
  const CVector hv = apply_local(local, std::span<const int>(targets.begin(), targets.size()),
                                 state.layout(), state.amplitudes());
  return state.amplitudes().dot(hv).real();
}

StateVector reset_spin(const StateVector& state, int spin, Rng& rng) {
  return StateVector(state.layout(), reset_amplitudes(state.layout(), state.amplitudes(), spin, rng));
}

}  // namespace hybridsim
