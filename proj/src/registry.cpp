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

#include "hybridsim/registry.hpp"

#include <mutex>

#include <Eigen/Eigenvalues>

#include "hybridsim/expr_text.hpp"
#include "hybridsim/operators.hpp"

namespace hybridsim {

CVector Eigensystem::apply(double t, const CVector& v) const {
  CVector c = vectors.adjoint() * v;
  for (Index k = 0; k < c.size(); ++k) c(k) *= std::exp(Complex(0.0, -values(k) * t));
  return vectors * c;
}

CMatrix Eigensystem::unitary(double t) const {
  CVector phases(values.size());
  for (Index k = 0; k < values.size(); ++k) phases(k) = std::exp(Complex(0.0, -values(k) * t));
  return vectors * phases.asDiagonal() * vectors.adjoint();
}

Eigensystem decompose_hermitian(const CMatrix& h, double tolerance) {
  if (h.rows() != h.cols()) throw ValidationError("hamiltonian", "matrix is not square");
  const double defect = hermiticity_defect(h);
  if (defect > tolerance) {
    throw ValidationError("hamiltonian", "matrix is not Hermitian (defect " +
                                             format_double(defect) + ")");
  }
  const CMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
  return Eigensystem{es.eigenvalues(), es.eigenvectors()};
}

GeneratorRegistry::GeneratorRegistry(RegisterLayout layout, double guard)
    : layout_(std::move(layout)), guard_(guard), interior_(interior_indices(layout_, guard)) {}

const GeneratorEntry& GeneratorRegistry::insert(GeneratorEntry e) {
  validate(e.expr, layout_);
  if (contains(e.id)) throw ValidationError("generator", "id '" + e.id + "' already registered");
  index_[e.id] = entries_.size();
  order_.push_back(e.id);
  entries_.push_back(std::move(e));
  return entries_.back();
}

const GeneratorEntry& GeneratorRegistry::add_primitive(const HamiltonianExpr& expr) {
  GeneratorEntry e;
  e.id = to_compact(expr);
  e.kind = GeneratorKind::Primitive;
  e.expr = expr;
  return insert(std::move(e));
}

void GeneratorRegistry::add_primitive_set(int spin, int mode) {
  layout_.require_qubit(spin);
  layout_.require_qumode(mode);
  for (const auto& expr : primitive_exprs(spin, mode)) {
    if (!contains(to_compact(expr))) add_primitive(expr);
  }
}

const GeneratorEntry& GeneratorRegistry::add_derived(DerivationRule rule) {
  entry(rule.a_id);
  entry(rule.b_id);
  GeneratorEntry e;
  e.id = to_compact(rule.direction);
  e.kind = GeneratorKind::Derived;
  e.expr = rule.direction;
  e.rule = std::move(rule);
  return insert(std::move(e));
}

const GeneratorEntry& GeneratorRegistry::add_conditioned(const HamiltonianExpr& effective,
                                                         const std::string& primitive_id,
                                                         std::vector<int> held_spins) {
  if (entry(primitive_id).kind != GeneratorKind::Primitive) {
    throw ValidationError("generator", "'" + primitive_id + "' is not a primitive");
  }
  for (int s : held_spins) layout_.require_qubit(s);
  GeneratorEntry e;
  e.id = to_compact(effective);
  e.kind = GeneratorKind::Conditioned;
  e.expr = effective;
  e.primitive_id = primitive_id;
  e.held_spins = std::move(held_spins);
  return insert(std::move(e));
}

const GeneratorEntry& GeneratorRegistry::entry(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError("generator", "unknown generator id '" + id + "'");
  return entries_[it->second];
}

HamiltonianExpr GeneratorRegistry::resolve(const std::string& id) const {
  const auto it = index_.find(id);
  if (it != index_.end()) return entries_[it->second].expr;
  HamiltonianExpr expr;
  try {
    expr = parse_hamiltonian(id);
  } catch (const ParseError& e) {
    throw ValidationError("generator", "unknown generator id '" + id + "' (" + e.what() + ")");
  }
  validate(expr, layout_);
  return expr;
}

std::shared_ptr<const CMatrix> GeneratorRegistry::matrix(const std::string& id) const {
  {
    std::shared_lock lock(cache_->mutex);
    const auto it = cache_->matrices.find(id);
    if (it != cache_->matrices.end()) return it->second;
  }
  auto m = std::make_shared<const CMatrix>(build(resolve(id), layout_));
  std::unique_lock lock(cache_->mutex);
  return cache_->matrices.emplace(id, std::move(m)).first->second;
}

std::shared_ptr<const Eigensystem> GeneratorRegistry::pulse_eigensystem(
    const std::string& id) const {
  std::string key = id;
  const auto it = index_.find(id);
  if (it != index_.end() && entries_[it->second].kind == GeneratorKind::Conditioned) {
    key = entries_[it->second].primitive_id;
  }
  {
    std::shared_lock lock(cache_->mutex);
    const auto found = cache_->eigensystems.find(key);
    if (found != cache_->eigensystems.end()) return found->second;
  }
  auto es = std::make_shared<const Eigensystem>(decompose_hermitian(*matrix(key)));
  std::unique_lock lock(cache_->mutex);
  return cache_->eigensystems.emplace(key, std::move(es)).first->second;
}

}  // namespace hybridsim
