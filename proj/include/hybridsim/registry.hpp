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

// Named generators and their cached exponentials.
//
// A registry is bound to one layout. Each entry has a stable string id (the
// compact text of its expression) and one of three kinds:
//   primitive    directly executable coupling, e.g. "sz@0*X@2";
//   derived      reached through a commutator rule i[A, B] = scale * G;
//   conditioned  an effective generator realized by a primitive while some
//                spins are held in |0>, e.g. "P@2" via "sz@1*P@2".
// Ids that are not registered are read as inline expressions.

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "hybridsim/expr.hpp"
#include "hybridsim/interior.hpp"

namespace hybridsim {

/// Spectral decomposition H = V diag(values) V† of a Hermitian matrix.
struct Eigensystem {
  RVector values;
  CMatrix vectors;

  /// e^{-iHt} v.
  CVector apply(double t, const CVector& v) const;
  /// e^{-iHt} as a matrix.
  CMatrix unitary(double t) const;
};

/// Throws ValidationError if `h` is not Hermitian within `tolerance`.
Eigensystem decompose_hermitian(const CMatrix& h, double tolerance = 1e-10);

struct DerivationRule {
  std::string a_id;
  std::string b_id;
  HamiltonianExpr direction;
  double scale = 0.0;     // i[A, B] = scale * G on the interior block
  double residual = 1.0;  // relative distance of i[A, B] from the G direction
};

enum class GeneratorKind { Primitive, Derived, Conditioned };

struct GeneratorEntry {
  std::string id;
  GeneratorKind kind = GeneratorKind::Primitive;
  HamiltonianExpr expr;                // effective generator
  std::optional<DerivationRule> rule;  // derived only
  std::string primitive_id;            // conditioned only
  std::vector<int> held_spins;         // conditioned only; spins kept in |0>
};

class GeneratorRegistry {
 public:
  explicit GeneratorRegistry(RegisterLayout layout, double guard = kDefaultGuard);

  const RegisterLayout& layout() const { return layout_; }
  double guard() const { return guard_; }
  const std::vector<Index>& interior() const { return interior_; }

  const GeneratorEntry& add_primitive(const HamiltonianExpr& expr);
  /// Registers σxX, σzX and σzP for one spin–mode pair.
  void add_primitive_set(int spin, int mode);
  const GeneratorEntry& add_derived(DerivationRule rule);
  const GeneratorEntry& add_conditioned(const HamiltonianExpr& effective,
                                        const std::string& primitive_id,
                                        std::vector<int> held_spins);

  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  const GeneratorEntry& entry(const std::string& id) const;
  /// Ids in registration order.
  const std::vector<std::string>& ids() const { return order_; }

  /// Expression a pulse id stands for: a registered entry or an inline expression.
  HamiltonianExpr resolve(const std::string& id) const;
  /// Effective generator matrix.
  std::shared_ptr<const CMatrix> matrix(const std::string& id) const;
  /// Eigensystem of what a pulse with this id physically applies; conditioned
  /// ids execute their primitive.
  std::shared_ptr<const Eigensystem> pulse_eigensystem(const std::string& id) const;

 private:
  const GeneratorEntry& insert(GeneratorEntry e);

  RegisterLayout layout_;
  double guard_;
  std::vector<Index> interior_;
  std::vector<GeneratorEntry> entries_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> order_;

  // Cached values depend only on (id, layout), so copies may share the cache.
  struct Cache {
    std::shared_mutex mutex;
    std::map<std::string, std::shared_ptr<const CMatrix>> matrices;
    std::map<std::string, std::shared_ptr<const Eigensystem>> eigensystems;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

}  // namespace hybridsim
