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

#include "hybridsim/expr.hpp"

#include <algorithm>
#include <cmath>

#include "hybridsim/expr_text.hpp"
#include "hybridsim/operators.hpp"

namespace hybridsim {

LocalOp LocalOp::x_pow(int n) {
  if (n < 1) throw ValidationError("power", "exponent must be >= 1");
  return n == 1 ? x() : LocalOp(Tag::PositionPow, n);
}

LocalOp LocalOp::p_pow(int n) {
  if (n < 1) throw ValidationError("power", "exponent must be >= 1");
  return n == 1 ? p() : LocalOp(Tag::MomentumPow, n);
}

bool LocalOp::is_pauli() const {
  return tag_ == Tag::PauliX || tag_ == Tag::PauliY || tag_ == Tag::PauliZ;
}

bool LocalOp::is_oscillator() const { return !is_pauli() && tag_ != Tag::Identity; }

std::string LocalOp::name() const {
  switch (tag_) {
    case Tag::PauliX: return "sx";
    case Tag::PauliY: return "sy";
    case Tag::PauliZ: return "sz";
    case Tag::Identity: return "I";
    case Tag::Position:
    case Tag::PositionPow: return "X";
    case Tag::Momentum:
    case Tag::MomentumPow: return "P";
    case Tag::Annihilate: return "a";
    case Tag::Create: return "ad";
  }
  return "?";
}

CMatrix local_matrix(const LocalOp& op, const SubsystemSpec& spec) {
  if (op.is_pauli() && !spec.is_qubit()) {
    throw ValidationError("factor", op.name() + " acts on qubits, not on a qumode");
  }
  if (op.is_oscillator() && !spec.is_qumode()) {
    throw ValidationError("factor", op.name() + " acts on qumodes, not on a qubit");
  }
  const int n = spec.dim();
  switch (op.tag()) {
    case LocalOp::Tag::PauliX: return pauli(PauliAxis::X);
    case LocalOp::Tag::PauliY: return pauli(PauliAxis::Y);
    case LocalOp::Tag::PauliZ: return pauli(PauliAxis::Z);
    case LocalOp::Tag::Identity: return CMatrix::Identity(n, n);
    case LocalOp::Tag::Position: return fock_position(n);
    case LocalOp::Tag::Momentum: return fock_momentum(n);
    case LocalOp::Tag::Annihilate: return annihilation(n);
    case LocalOp::Tag::Create: return creation(n);
    case LocalOp::Tag::PositionPow:
    case LocalOp::Tag::MomentumPow: {
      const CMatrix base =
          op.tag() == LocalOp::Tag::PositionPow ? fock_position(n) : fock_momentum(n);
      CMatrix out = base;
      for (int k = 1; k < op.power(); ++k) out = (out * base).eval();
      return out;
    }
  }
  throw Error("unknown local operator");
}

HamiltonianTerm::HamiltonianTerm(double coefficient, std::vector<Factor> factors)
    : coefficient_(coefficient), factors_(std::move(factors)) {
  if (!std::isfinite(coefficient_) || coefficient_ == 0.0) {
    throw ValidationError("coefficient", "term coefficients must be finite and nonzero");
  }
  std::stable_sort(factors_.begin(), factors_.end(),
                   [](const Factor& a, const Factor& b) { return a.subsystem < b.subsystem; });
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].subsystem < 0) {
      throw ValidationError("factor", "negative subsystem index");
    }
    if (i > 0 && factors_[i].subsystem == factors_[i - 1].subsystem) {
      throw ValidationError("factor", "two factors on subsystem " +
                                          std::to_string(factors_[i].subsystem));
    }
  }
}

HamiltonianTerm HamiltonianTerm::times(const HamiltonianTerm& other) const {
  std::vector<Factor> f = factors_;
  f.insert(f.end(), other.factors_.begin(), other.factors_.end());
  return HamiltonianTerm(coefficient_ * other.coefficient_, std::move(f));
}

HamiltonianExpr HamiltonianExpr::scaled(double factor) const {
  std::vector<HamiltonianTerm> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(t.with_coefficient(t.coefficient() * factor));
  return HamiltonianExpr(std::move(out));
}

int HamiltonianExpr::max_subsystem() const {
  int m = -1;
  for (const auto& t : terms_) {
    for (const auto& f : t.factors()) m = std::max(m, f.subsystem);
  }
  return m;
}

HamiltonianTerm term(double coefficient, std::vector<Factor> factors) {
  return HamiltonianTerm(coefficient, std::move(factors));
}

void validate(const HamiltonianExpr& expr, const RegisterLayout& layout) {
  for (const auto& t : expr.terms()) {
    for (const auto& f : t.factors()) {
      layout.check_index(f.subsystem, "factor");
      const auto& spec = layout.spec(f.subsystem);
      if (f.op.is_pauli() && !spec.is_qubit()) {
        throw ValidationError("factor", f.op.name() + "@" + std::to_string(f.subsystem) +
                                            " targets a qumode");
      }
      if (f.op.is_oscillator() && !spec.is_qumode()) {
        throw ValidationError("factor", f.op.name() + "@" + std::to_string(f.subsystem) +
                                            " targets a qubit");
      }
    }
  }
}

CMatrix build_term(const HamiltonianTerm& t, const RegisterLayout& layout) {
  const Index n = layout.total_dim();
  if (t.factors().empty()) return t.coefficient() * CMatrix::Identity(n, n);
  CMatrix local(1, 1);
  local(0, 0) = t.coefficient();
  std::vector<int> targets;
  bool hermitian = true;
  for (const auto& f : t.factors()) {
    layout.check_index(f.subsystem, "factor");
    local = kron(local, local_matrix(f.op, layout.spec(f.subsystem)));
    targets.push_back(f.subsystem);
    hermitian = hermitian && f.op.is_hermitian();
  }
  if (!hermitian) local = 0.5 * (local + local.adjoint()).eval();
  return embed(local, targets, layout);
}

CMatrix build(const HamiltonianExpr& expr, const RegisterLayout& layout) {
  if (expr.empty()) throw ValidationError("hamiltonian", "expression has no terms");
  validate(expr, layout);
  const Index n = layout.total_dim();
  CMatrix out = CMatrix::Zero(n, n);
  for (const auto& t : expr.terms()) out += build_term(t, layout);
  return out;
}

std::array<HamiltonianExpr, 3> primitive_exprs(int spin, int mode) {
  return {HamiltonianExpr(term(1.0, {{spin, LocalOp::sx()}, {mode, LocalOp::x()}})),
          HamiltonianExpr(term(1.0, {{spin, LocalOp::sz()}, {mode, LocalOp::x()}})),
          HamiltonianExpr(term(1.0, {{spin, LocalOp::sz()}, {mode, LocalOp::p()}}))};
}

std::array<NamedGenerator, 3> primitive_set(const RegisterLayout& layout, int spin, int mode) {
  layout.require_qubit(spin);
  layout.require_qumode(mode);
  std::array<NamedGenerator, 3> out;
  const auto exprs = primitive_exprs(spin, mode);
  for (std::size_t k = 0; k < 3; ++k) {
    out[k] = NamedGenerator{to_compact(exprs[k]), exprs[k], build(exprs[k], layout)};
  }
  return out;
}

}  // namespace hybridsim
