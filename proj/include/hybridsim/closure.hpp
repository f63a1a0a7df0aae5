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

// Numerically generated Lie algebra of a seed set.
//
// Breadth-first right-nested brackets i[seed, b], each orthonormalized
// (Gram–Schmidt, Hilbert–Schmidt product on the interior block) against the
// directions found so far. A bracket of k seeds has degree k.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "hybridsim/registry.hpp"

namespace hybridsim {

using SparseCMatrix = Eigen::SparseMatrix<Complex>;

struct ClosureElement {
  std::string label;
  int degree = 1;
};

class ClosureReport {
 public:
  std::size_t dimension() const { return elements_.size(); }
  const std::vector<ClosureElement>& elements() const { return elements_; }
  int depth_reached() const { return depth_reached_; }
  /// True when a degree produced no new direction.
  bool saturated() const { return saturated_; }

  /// Relative distance of `query` from the span, on the interior block.
  double membership(const HamiltonianExpr& query) const;
  double membership(const CMatrix& query) const;
  /// Same, using only directions of degree <= `degree`.
  double membership(const HamiltonianExpr& query, int degree) const;
  /// Smallest degree at which membership falls to `tol`, or -1.
  int degree_reached(const HamiltonianExpr& query, double tol) const;

  /// Largest |<b_i, b_j> - δ_ij| over the basis.
  double orthogonality_defect() const;

  std::string to_json(const std::vector<std::pair<std::string, HamiltonianExpr>>& queries,
                      double tol, int indent = 2) const;

 private:
  friend ClosureReport close_algebra(const GeneratorRegistry&, const std::vector<std::string>&,
                                     int, int, int);
  double residual(const SparseCMatrix& query_interior, std::size_t count) const;

  RegisterLayout layout_;
  std::vector<Index> interior_;
  SparseCMatrix selector_;
  std::vector<SparseCMatrix> interior_basis_;
  std::vector<ClosureElement> elements_;
  int depth_reached_ = 0;
  bool saturated_ = false;
};

/// Stops after `max_new` directions or at `degree_cap`; candidate brackets of a
/// degree are evaluated on `threads` threads, in a fixed order.
ClosureReport close_algebra(const GeneratorRegistry& registry,
                            const std::vector<std::string>& seed_ids, int max_new,
                            int degree_cap, int threads = 1);

}  // namespace hybridsim
