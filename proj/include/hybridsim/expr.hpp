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

// Hamiltonians as real-weighted sums of tensor products of local operators.

#pragma once

#include <array>
#include <string>
#include <vector>

#include "hybridsim/hilbert.hpp"

namespace hybridsim {

class LocalOp {
 public:
  enum class Tag {
    PauliX,
    PauliY,
    PauliZ,
    Identity,
    Position,
    Momentum,
    Annihilate,
    Create,
    PositionPow,
    MomentumPow,
  };

  static LocalOp sx() { return LocalOp(Tag::PauliX); }
  static LocalOp sy() { return LocalOp(Tag::PauliY); }
  static LocalOp sz() { return LocalOp(Tag::PauliZ); }
  static LocalOp identity() { return LocalOp(Tag::Identity); }
  static LocalOp x() { return LocalOp(Tag::Position); }
  static LocalOp p() { return LocalOp(Tag::Momentum); }
  static LocalOp a() { return LocalOp(Tag::Annihilate); }
  static LocalOp ad() { return LocalOp(Tag::Create); }
  /// X^n; n = 1 collapses to Position.
  static LocalOp x_pow(int n);
  static LocalOp p_pow(int n);

  Tag tag() const { return tag_; }
  int power() const { return power_; }
  bool is_pauli() const;
  bool is_oscillator() const;
  bool is_hermitian() const { return tag_ != Tag::Annihilate && tag_ != Tag::Create; }
  /// Grammar name without the power: sx, sy, sz, I, X, P, a, ad.
  std::string name() const;

  bool operator==(const LocalOp&) const = default;

 private:
  explicit LocalOp(Tag tag, int power = 1) : tag_(tag), power_(power) {}
  Tag tag_;
  int power_;
};

/// Matrix of a local operator on one subsystem.
CMatrix local_matrix(const LocalOp& op, const SubsystemSpec& spec);

struct Factor {
  int subsystem;
  LocalOp op;
  bool operator==(const Factor&) const = default;
};

class HamiltonianTerm {
 public:
  /// Factors are sorted by subsystem; two factors on one subsystem are rejected.
  HamiltonianTerm(double coefficient, std::vector<Factor> factors);

  double coefficient() const { return coefficient_; }
  const std::vector<Factor>& factors() const { return factors_; }
  HamiltonianTerm with_coefficient(double c) const { return HamiltonianTerm(c, factors_); }
  /// Same product with unit coefficient.
  HamiltonianTerm monomial() const { return with_coefficient(1.0); }
  /// Product with another term on disjoint subsystems.
  HamiltonianTerm times(const HamiltonianTerm& other) const;

  bool operator==(const HamiltonianTerm&) const = default;

 private:
  double coefficient_;
  std::vector<Factor> factors_;
};

class HamiltonianExpr {
 public:
  HamiltonianExpr() = default;
  explicit HamiltonianExpr(std::vector<HamiltonianTerm> terms) : terms_(std::move(terms)) {}
  HamiltonianExpr(HamiltonianTerm term) : terms_{std::move(term)} {}  // NOLINT

  const std::vector<HamiltonianTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  HamiltonianExpr scaled(double factor) const;
  /// Largest subsystem index referenced, or -1.
  int max_subsystem() const;

  friend HamiltonianExpr operator+(HamiltonianExpr lhs, const HamiltonianExpr& rhs) {
    lhs.terms_.insert(lhs.terms_.end(), rhs.terms_.begin(), rhs.terms_.end());
    return lhs;
  }
  friend HamiltonianExpr operator*(double c, const HamiltonianExpr& e) { return e.scaled(c); }
  bool operator==(const HamiltonianExpr&) const = default;

 private:
  std::vector<HamiltonianTerm> terms_;
};

HamiltonianTerm term(double coefficient, std::vector<Factor> factors);

/// Checks that every factor names a valid, kind-compatible subsystem.
void validate(const HamiltonianExpr& expr, const RegisterLayout& layout);

/// Dense Hermitian matrix of `expr` on `layout`.
///
/// Each term is replaced by its Hermitian part ½(T + T†); this only changes
/// terms containing a or a†, since all other factors are Hermitian and act
/// on distinct subsystems.
CMatrix build(const HamiltonianExpr& expr, const RegisterLayout& layout);
CMatrix build_term(const HamiltonianTerm& term, const RegisterLayout& layout);

/// One of the three coupling Hamiltonians σxX, σzX, σzP between a spin and a mode.
struct NamedGenerator {
  std::string id;
  HamiltonianExpr expr;
  CMatrix matrix;

  CMatrix signed_matrix(int sign) const { return sign >= 0 ? matrix : CMatrix(-matrix); }
};

/// The spin–oscillator primitive set {σxX, σzX, σzP}, in that order.
std::array<NamedGenerator, 3> primitive_set(const RegisterLayout& layout, int spin, int mode);
/// Expressions only; no matrices are built.
std::array<HamiltonianExpr, 3> primitive_exprs(int spin, int mode);

}  // namespace hybridsim
