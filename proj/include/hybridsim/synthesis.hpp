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

// Commutator compiler.
//
// The block e^{iBs} e^{iAs} e^{-iBs} e^{-iAs} equals exp(-i (i[A, B]) s²) up to
// O(s³). With i[A, B] = c G (c measured on the interior block), a block with
// s = sqrt(|τ / c|) applies e^{-iGτ}; when cτ < 0 the roles of A and B swap.
// Derived generators are realized recursively, so every emitted pulse is a
// registered primitive or a spin reset.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hybridsim/evolution.hpp"
#include "hybridsim/registry.hpp"

namespace hybridsim {

inline constexpr double kRuleTolerance = 1e-8;

/// A rule whose commutator does not point along the candidate direction.
class RejectedRule : public Error {
 public:
  explicit RejectedRule(DerivationRule rule);
  const DerivationRule& rule() const { return rule_; }

 private:
  DerivationRule rule_;
};

/// Projects i[A, B] onto `candidate` on the registry's interior block.
DerivationRule measure_rule(const GeneratorRegistry& registry, const std::string& a_id,
                            const std::string& b_id, const HamiltonianExpr& candidate);
/// As measure_rule, but throws RejectedRule when the residual exceeds kRuleTolerance.
DerivationRule derive_rule(const GeneratorRegistry& registry, const std::string& a_id,
                           const std::string& b_id, const HamiltonianExpr& candidate);

/// Pulses realizing e^{-iGτ} for a registered or inline generator.
PulseSequence realize(const GeneratorRegistry& registry, const std::string& id, double tau);

/// The four-pulse block for (A, B) at step s, applied order A(+s), B(+s), A(-s), B(-s).
PulseSequence group_commutator(const GeneratorRegistry& registry, const std::string& a_id,
                               const std::string& b_id, double s);

/// Error estimate for realize(id, tau), in operator norm on the interior block.
double predicted_error(const GeneratorRegistry& registry, const std::string& id, double tau);

struct DerivationNode {
  std::string id;
  GeneratorKind kind = GeneratorKind::Primitive;
  std::optional<DerivationRule> rule;
  std::string primitive_id;
  std::vector<int> held_spins;
  std::vector<DerivationNode> children;

  int depth() const;
};

DerivationNode derivation_tree(const GeneratorRegistry& registry, const std::string& id);

struct SynthOptions {
  /// Append resets of the held spins after every block.
  bool reset_each_block = true;
};

struct SynthPlan {
  HamiltonianExpr target;
  double angle = 0.0;
  int n_blocks = 1;
  PulseSequence sequence;
  double predicted_error = 0.0;
  std::vector<DerivationNode> derivation;  // one tree per target term
  std::vector<std::string> generators;     // registry id realizing each term
  std::vector<int> reset_spins;            // spins that must start and stay in |0>
};

/// Compiles e^{-i target angle} into n_blocks first-order rounds over the target terms.
///
/// A term matches a registered generator whose factors are the term's factors
/// plus σz on spins that are otherwise idle; those spins are held in |0>.
SynthPlan synthesize(const HamiltonianExpr& target, double angle, int n_blocks,
                     const GeneratorRegistry& registry, const SynthOptions& options = {});

/// Compression of a reset-free sequence onto the block where every subsystem
/// outside `qubits` is in |0>; rows and columns follow the listed qubit order.
CMatrix logical_unitary(const PulseSequence& seq, const GeneratorRegistry& registry,
                        const std::vector<int>& qubits);
/// min over φ of ‖m - e^{iφ} u‖ in operator norm, with φ = arg tr(u† m).
double phase_aligned_distance(const CMatrix& m, const CMatrix& u);
/// |tr(u† m)|² / d².
double process_fidelity(const CMatrix& m, const CMatrix& u);

/// Every pulse is a primitive or a reset.
bool only_primitive_pulses(const PulseSequence& seq, const GeneratorRegistry& registry);

enum class Quadrature { X, P };

/// Drives X or P on `mode` through σzX or σzP pulses on `spin`, resetting the
/// spin to |0> before every pulse.
StateVector oscillator_drive(const StateVector& state, int mode, Quadrature which, double t,
                             int spin, int steps, Rng& rng);

/// Rules for σz, σx, σy on `spin`, with P on `mode` conditioned on `ancilla`.
void add_single_qubit_rules(GeneratorRegistry& registry, int spin, int ancilla, int mode);
/// σz σz between two spins sharing one mode.
void add_zz_rule(GeneratorRegistry& registry, int spin1, int spin2, int mode);
/// σz X₁ X₂ on `bus`; X₁ X₂ with the bus held in |0>.
void add_xx_rules(GeneratorRegistry& registry, int bus, int ancilla, int mode1, int mode2);

/// Registry with the primitive set for every spin–mode pair of `layout`.
GeneratorRegistry primitive_registry(const RegisterLayout& layout, double guard = kDefaultGuard);

std::string to_json(const SynthPlan& plan, int indent = 2);
std::string to_json(const DerivationRule& rule, int indent = 2);

}  // namespace hybridsim
