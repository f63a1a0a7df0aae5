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

#include "hybridsim/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "hybridsim/expr_text.hpp"
#include "hybridsim/operators.hpp"

namespace hybridsim {

namespace {

constexpr double kErrorFloor = 1e-11;

HamiltonianExpr parse(const std::string& text) { return parse_hamiltonian(text); }

std::string describe_rule(const DerivationRule& r) {
  return "i[" + r.a_id + ", " + r.b_id + "] vs " + to_compact(r.direction) +
         ": residual " + format_double(r.residual);
}

}  // namespace

RejectedRule::RejectedRule(DerivationRule rule)
    : Error("rejected rule " + describe_rule(rule)), rule_(std::move(rule)) {}

DerivationRule measure_rule(const GeneratorRegistry& registry, const std::string& a_id,
                            const std::string& b_id, const HamiltonianExpr& candidate) {
  const auto& idx = registry.interior();
  const CMatrix& a = *registry.matrix(a_id);
  const CMatrix& b = *registry.matrix(b_id);
  const CMatrix c = kI * commutator(a, b);
  const CMatrix g = build(candidate, registry.layout());
  const double gg = hs_inner(g, g, idx);
  if (!(gg > 0.0)) throw ValidationError("candidate", "candidate direction vanishes on the interior block");
  DerivationRule rule;
  rule.a_id = a_id;
  rule.b_id = b_id;
  rule.direction = candidate;
  rule.scale = hs_inner(g, c, idx) / gg;
  const double cn = hs_norm(c, idx);
  rule.residual = cn > 0.0 ? hs_norm(c - rule.scale * g, idx) / cn : 1.0;
  return rule;
}

DerivationRule derive_rule(const GeneratorRegistry& registry, const std::string& a_id,
                           const std::string& b_id, const HamiltonianExpr& candidate) {
  DerivationRule rule = measure_rule(registry, a_id, b_id, candidate);
  if (!(rule.residual <= kRuleTolerance) || rule.scale == 0.0) throw RejectedRule(rule);
  return rule;
}

PulseSequence realize(const GeneratorRegistry& registry, const std::string& id, double tau) {
  PulseSequence seq;
  const int sign = tau < 0 ? -1 : 1;
  if (!registry.contains(id)) {
    registry.resolve(id);
    seq.pulses.push_back(Pulse{id, sign, std::abs(tau)});
    return seq;
  }
  const GeneratorEntry& e = registry.entry(id);
  switch (e.kind) {
    case GeneratorKind::Primitive:
      seq.pulses.push_back(Pulse{id, sign, std::abs(tau)});
      break;
    case GeneratorKind::Conditioned:
      seq.pulses.push_back(Pulse{e.primitive_id, sign, std::abs(tau)});
      break;
    case GeneratorKind::Derived: {
      const DerivationRule& r = *e.rule;
      std::string a = r.a_id;
      std::string b = r.b_id;
      if (tau * r.scale < 0) std::swap(a, b);
      const double s = std::sqrt(std::abs(tau / r.scale));
      seq.append(realize(registry, a, s));
      seq.append(realize(registry, b, s));
      seq.append(realize(registry, a, -s));
      seq.append(realize(registry, b, -s));
      break;
    }
  }
  return seq;
}

PulseSequence group_commutator(const GeneratorRegistry& registry, const std::string& a_id,
                               const std::string& b_id, double s) {
  if (!(s > 0.0)) throw ValidationError("s", "step must be positive");
  registry.entry(a_id);
  registry.entry(b_id);
  PulseSequence seq;
  seq.append(realize(registry, a_id, s));
  seq.append(realize(registry, b_id, s));
  seq.append(realize(registry, a_id, -s));
  seq.append(realize(registry, b_id, -s));
  seq.metadata.push_back("group commutator " + a_id + ", " + b_id + " s=" + format_double(s));
  return seq;
}

namespace {

struct NestedNorms {
  double third = 0.0;   // ‖[B,[B,A]]‖ + ‖[A,[B,A]]‖
  double fourth = 0.0;  // sum of the four next nested brackets
  double inputs = 0.0;  // ‖A‖ + ‖B‖
};

NestedNorms nested_norms(const GeneratorRegistry& registry, const DerivationRule& r) {
  const auto& idx = registry.interior();
  const CMatrix& a = *registry.matrix(r.a_id);
  const CMatrix& b = *registry.matrix(r.b_id);
  const CMatrix ba = commutator(b, a);
  const CMatrix bba = commutator(b, ba);
  const CMatrix aba = commutator(a, ba);
  NestedNorms n;
  n.inputs = spectral_norm(restrict_to(a, idx)) + spectral_norm(restrict_to(b, idx));
  n.third = spectral_norm(restrict_to(bba, idx)) + spectral_norm(restrict_to(aba, idx));
  n.fourth = spectral_norm(restrict_to(commutator(a, aba), idx)) +
             spectral_norm(restrict_to(commutator(b, bba), idx)) +
             spectral_norm(restrict_to(commutator(a, bba), idx)) +
             spectral_norm(restrict_to(commutator(b, aba), idx));
  return n;
}

double block_error(const GeneratorRegistry& registry, const std::string& id, double tau,
                   std::map<std::string, NestedNorms>& cache) {
  if (!registry.contains(id)) return 0.0;
  const GeneratorEntry& e = registry.entry(id);
  if (e.kind != GeneratorKind::Derived) return 0.0;
  const DerivationRule& r = *e.rule;
  auto it = cache.find(id);
  if (it == cache.end()) it = cache.emplace(id, nested_norms(registry, r)).first;
  const double s = std::sqrt(std::abs(tau / r.scale));
  const NestedNorms& n = it->second;
  const double own = 0.5 * n.third * s * s * s + n.fourth * s * s * s * s / 6.0;
  // Inner errors enter only through their commutator with the other factor.
  const double inner =
      block_error(registry, r.a_id, s, cache) + block_error(registry, r.b_id, s, cache);
  return own + 2.0 * s * n.inputs * inner + 2.0 * inner * inner;
}

}  // namespace

double predicted_error(const GeneratorRegistry& registry, const std::string& id, double tau) {
  std::map<std::string, NestedNorms> cache;
  return block_error(registry, id, tau, cache);
}

int DerivationNode::depth() const {
  if (kind != GeneratorKind::Derived) return 0;
  int d = 0;
  for (const auto& c : children) d = std::max(d, c.depth());
  return d + 1;
}

DerivationNode derivation_tree(const GeneratorRegistry& registry, const std::string& id) {
  DerivationNode node;
  node.id = id;
  if (!registry.contains(id)) return node;
  const GeneratorEntry& e = registry.entry(id);
  node.kind = e.kind;
  node.rule = e.rule;
  node.primitive_id = e.primitive_id;
  node.held_spins = e.held_spins;
  if (e.kind == GeneratorKind::Derived) {
    node.children.push_back(derivation_tree(registry, e.rule->a_id));
    node.children.push_back(derivation_tree(registry, e.rule->b_id));
  } else if (e.kind == GeneratorKind::Conditioned) {
    node.children.push_back(derivation_tree(registry, e.primitive_id));
  }
  return node;
}

namespace {

void collect_held(const DerivationNode& node, std::set<int>& out) {
  out.insert(node.held_spins.begin(), node.held_spins.end());
  for (const auto& c : node.children) collect_held(c, out);
}

struct Match {
  std::string id;
  std::vector<int> held;
};

// Finds the registered generator with the fewest extra σz factors.
std::optional<Match> match_term(const HamiltonianTerm& t, const GeneratorRegistry& registry) {
  std::optional<Match> best;
  for (const auto& id : registry.ids()) {
    const GeneratorEntry& e = registry.entry(id);
    if (e.expr.size() != 1) continue;
    const HamiltonianTerm& g = e.expr.terms().front();
    if (g.coefficient() != 1.0) continue;
    std::vector<int> extra;
    bool ok = true;
    std::size_t matched = 0;
    for (const auto& f : g.factors()) {
      const auto it = std::find_if(t.factors().begin(), t.factors().end(),
                                   [&](const Factor& x) { return x.subsystem == f.subsystem; });
      if (it != t.factors().end()) {
        if (!(it->op == f.op)) ok = false;
        ++matched;
      } else if (f.op.tag() == LocalOp::Tag::PauliZ) {
        extra.push_back(f.subsystem);
      } else {
        ok = false;
      }
      if (!ok) break;
    }
    if (!ok || matched != t.factors().size()) continue;
    if (!best || extra.size() < best->held.size()) best = Match{id, extra};
    if (best->held.empty()) break;
  }
  return best;
}

}  // namespace

SynthPlan synthesize(const HamiltonianExpr& target, double angle, int n_blocks,
                     const GeneratorRegistry& registry, const SynthOptions& options) {
  if (n_blocks < 1) throw ValidationError("n_blocks", "need at least one block");
  if (target.empty()) throw ValidationError("target", "target has no terms");
  if (!std::isfinite(angle)) throw ValidationError("angle", "angle must be finite");
  validate(target, registry.layout());

  SynthPlan plan;
  plan.target = target;
  plan.angle = angle;
  plan.n_blocks = n_blocks;
  std::set<int> held;
  std::vector<double> weights;
  for (const auto& t : target.terms()) {
    const auto m = match_term(t.monomial(), registry);
    if (!m) {
      throw ValidationError("target", "no registered generator realizes " +
                                          to_compact(HamiltonianExpr(t)));
    }
    plan.generators.push_back(m->id);
    weights.push_back(t.coefficient());
    held.insert(m->held.begin(), m->held.end());
    plan.derivation.push_back(derivation_tree(registry, m->id));
    collect_held(plan.derivation.back(), held);
  }
  plan.reset_spins.assign(held.begin(), held.end());

  PulseSequence block;
  std::map<std::string, NestedNorms> cache;
  double per_block = 0.0;
  for (std::size_t k = 0; k < plan.generators.size(); ++k) {
    const double tau = weights[k] * angle / n_blocks;
    block.append(realize(registry, plan.generators[k], tau));
    per_block += block_error(registry, plan.generators[k], tau, cache);
  }
  PulseSequence resets;
  if (options.reset_each_block) {
    for (int s : plan.reset_spins) resets.pulses.push_back(reset_pulse(s));
  }
  plan.sequence.append(resets);
  for (int b = 0; b < n_blocks; ++b) {
    plan.sequence.append(block);
    plan.sequence.append(resets);
  }

  double splitting = 0.0;
  if (plan.generators.size() > 1) {
    const auto& idx = registry.interior();
    for (std::size_t i = 0; i < plan.generators.size(); ++i) {
      for (std::size_t j = i + 1; j < plan.generators.size(); ++j) {
        const CMatrix c = commutator(*registry.matrix(plan.generators[i]),
                                     *registry.matrix(plan.generators[j]));
        splitting += std::abs(weights[i] * weights[j]) * spectral_norm(restrict_to(c, idx));
      }
    }
    splitting *= 0.5 * angle * angle / n_blocks;
  }
  plan.predicted_error = n_blocks * per_block + splitting + kErrorFloor;
  plan.sequence.metadata.push_back("target " + to_string(target));
  plan.sequence.metadata.push_back("angle " + format_double(angle) + " blocks " +
                                   std::to_string(n_blocks));
  return plan;
}

CMatrix logical_unitary(const PulseSequence& seq, const GeneratorRegistry& registry,
                        const std::vector<int>& qubits) {
  const RegisterLayout& layout = registry.layout();
  for (int q : qubits) layout.require_qubit(q);
  const auto d = static_cast<Index>(1) << qubits.size();
  std::vector<Index> flat(static_cast<std::size_t>(d));
  for (Index b = 0; b < d; ++b) {
    std::vector<int> occ(static_cast<std::size_t>(layout.size()), 0);
    for (std::size_t k = 0; k < qubits.size(); ++k) {
      occ[static_cast<std::size_t>(qubits[k])] =
          static_cast<int>((b >> (qubits.size() - 1 - k)) & 1);
    }
    flat[static_cast<std::size_t>(b)] = layout.flatten(occ);
  }
  CMatrix m(d, d);
  for (Index c = 0; c < d; ++c) {
    const CVector out =
        propagate(seq, registry, CVector::Unit(layout.total_dim(), flat[static_cast<std::size_t>(c)]));
    for (Index r = 0; r < d; ++r) m(r, c) = out(flat[static_cast<std::size_t>(r)]);
  }
  return m;
}

double phase_aligned_distance(const CMatrix& m, const CMatrix& u) {
  const Complex overlap = (u.adjoint() * m).trace();
  const Complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex(1.0);
  return spectral_norm(m - phase * u);
}

double process_fidelity(const CMatrix& m, const CMatrix& u) {
  const double d = static_cast<double>(u.rows());
  return std::norm((u.adjoint() * m).trace()) / (d * d);
}

bool only_primitive_pulses(const PulseSequence& seq, const GeneratorRegistry& registry) {
  for (const auto& p : seq.pulses) {
    if (reset_target(p) >= 0) continue;
    if (!registry.contains(p.generator)) return false;
    if (registry.entry(p.generator).kind != GeneratorKind::Primitive) return false;
  }
  return true;
}

StateVector oscillator_drive(const StateVector& state, int mode, Quadrature which, double t,
                             int spin, int steps, Rng& rng) {
  const RegisterLayout& layout = state.layout();
  layout.require_qubit(spin);
  layout.require_qumode(mode);
  if (steps < 1) throw ValidationError("steps", "need at least one step");
  if (t == 0.0) return state;
  const RegisterLayout pair({layout.spec(spin), layout.spec(mode)});
  const HamiltonianExpr h(
      term(1.0, {{0, LocalOp::sz()}, {1, which == Quadrature::X ? LocalOp::x() : LocalOp::p()}}));
  const CMatrix u = decompose_hermitian(build(h, pair)).unitary(t / steps);
  const int targets[] = {spin, mode};
  StateVector cur = state;
  for (int k = 0; k < steps; ++k) {
    cur = reset_spin(cur, spin, rng);
    cur = StateVector(layout, apply_local(u, targets, layout, cur.amplitudes()));
  }
  return cur;
}

namespace {

std::string id_of(const std::string& text) { return to_compact(parse(text)); }

std::string at(const std::string& name, int k) { return name + "@" + std::to_string(k); }

void ensure_conditioned_p(GeneratorRegistry& reg, int ancilla, int mode) {
  const std::string p = at("P", mode);
  if (reg.contains(p)) return;
  reg.add_primitive_set(ancilla, mode);
  reg.add_conditioned(parse(p), id_of(at("sz", ancilla) + "*" + p), {ancilla});
}

void ensure_derived(GeneratorRegistry& reg, const std::string& a, const std::string& b,
                    const std::string& direction) {
  const std::string id = id_of(direction);
  if (reg.contains(id)) return;
  reg.add_derived(derive_rule(reg, id_of(a), id_of(b), parse(direction)));
}

}  // namespace

void add_single_qubit_rules(GeneratorRegistry& registry, int spin, int ancilla, int mode) {
  registry.add_primitive_set(spin, mode);
  ensure_conditioned_p(registry, ancilla, mode);
  const std::string p = at("P", mode);
  const std::string x = at("X", mode);
  ensure_derived(registry, p, at("sz", spin) + "*" + x, at("sz", spin));
  ensure_derived(registry, p, at("sx", spin) + "*" + x, at("sx", spin));
  ensure_derived(registry, at("sz", spin), at("sx", spin), at("sy", spin));
}

void add_zz_rule(GeneratorRegistry& registry, int spin1, int spin2, int mode) {
  registry.add_primitive_set(spin1, mode);
  registry.add_primitive_set(spin2, mode);
  ensure_derived(registry, at("sz", spin1) + "*" + at("P", mode),
                 at("sz", spin2) + "*" + at("X", mode), at("sz", spin1) + "*" + at("sz", spin2));
}

void add_xx_rules(GeneratorRegistry& registry, int bus, int ancilla, int mode1, int mode2) {
  registry.add_primitive_set(bus, mode1);
  registry.add_primitive_set(bus, mode2);
  ensure_conditioned_p(registry, ancilla, mode1);
  const std::string x1 = at("X", mode1);
  const std::string x2 = at("X", mode2);
  const std::string sz = at("sz", bus);
  ensure_derived(registry, at("P", mode1), sz + "*" + x1, sz);
  ensure_derived(registry, sz, at("sx", bus) + "*" + x1, at("sy", bus) + "*" + x1);
  ensure_derived(registry, at("sy", bus) + "*" + x1, at("sx", bus) + "*" + x2,
                 sz + "*" + x1 + "*" + x2);
}

GeneratorRegistry primitive_registry(const RegisterLayout& layout, double guard) {
  GeneratorRegistry reg(layout, guard);
  for (int s = 0; s < layout.size(); ++s) {
    if (!layout.spec(s).is_qubit()) continue;
    for (int m = 0; m < layout.size(); ++m) {
      if (layout.spec(m).is_qumode()) reg.add_primitive_set(s, m);
    }
  }
  return reg;
}

namespace {

nlohmann::json rule_json(const DerivationRule& r) {
  return {{"a", r.a_id},
          {"b", r.b_id},
          {"direction", to_string(r.direction)},
          {"scale", r.scale},
          {"residual", r.residual},
          {"accepted", r.residual <= kRuleTolerance}};
}

const char* kind_name(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Primitive: return "primitive";
    case GeneratorKind::Derived: return "derived";
    case GeneratorKind::Conditioned: return "conditioned";
  }
  return "?";
}

nlohmann::json node_json(const DerivationNode& n) {
  nlohmann::json j = {{"id", n.id}, {"kind", kind_name(n.kind)}};
  if (n.rule) j["rule"] = rule_json(*n.rule);
  if (!n.primitive_id.empty()) j["via"] = n.primitive_id;
  if (!n.held_spins.empty()) j["held_spins"] = n.held_spins;
  if (!n.children.empty()) {
    nlohmann::json c = nlohmann::json::array();
    for (const auto& child : n.children) c.push_back(node_json(child));
    j["children"] = std::move(c);
  }
  return j;
}

}  // namespace

std::string to_json(const DerivationRule& rule, int indent) { return rule_json(rule).dump(indent); }

std::string to_json(const SynthPlan& plan, int indent) {
  nlohmann::json tree = nlohmann::json::array();
  for (const auto& d : plan.derivation) tree.push_back(node_json(d));
  nlohmann::json j = {{"target", to_string(plan.target)},
                      {"angle", plan.angle},
                      {"n_blocks", plan.n_blocks},
                      {"pulses", plan.sequence.size()},
                      {"predicted_error", plan.predicted_error},
                      {"generators", plan.generators},
                      {"reset_spins", plan.reset_spins},
                      {"derivation", tree}};
  return j.dump(indent);
}

}  // namespace hybridsim
