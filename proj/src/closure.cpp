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

#include "hybridsim/closure.hpp"

#include <cmath>

#include <json.hpp>

#include "hybridsim/expr.hpp"
#include "hybridsim/expr_text.hpp"
#include "hybridsim/rng.hpp"

namespace hybridsim {

namespace {

constexpr double kNewDirection = 1e-6;

double ip(const SparseCMatrix& a, const SparseCMatrix& b) {
  return a.cwiseProduct(b.conjugate()).sum().real();
}

SparseCMatrix to_sparse(const CMatrix& m) {
  SparseCMatrix s = m.sparseView(1.0, 1e-15);
  s.makeCompressed();
  return s;
}

}  // namespace

double ClosureReport::residual(const SparseCMatrix& q, std::size_t count) const {
  const double qn = std::sqrt(ip(q, q));
  if (!(qn > 0.0)) throw ValidationError("query", "query vanishes on the interior block");
  SparseCMatrix r = q;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t k = 0; k < count; ++k) {
      r -= Complex(ip(r, interior_basis_[k]), 0.0) * interior_basis_[k];
    }
  }
  return std::sqrt(std::max(0.0, ip(r, r))) / qn;
}

double ClosureReport::membership(const CMatrix& query) const {
  return residual(to_sparse(selector_ * to_sparse(query) * selector_.transpose()),
                  interior_basis_.size());
}

double ClosureReport::membership(const HamiltonianExpr& query) const {
  return membership(build(query, layout_));
}

double ClosureReport::membership(const HamiltonianExpr& query, int degree) const {
  std::size_t count = 0;
  while (count < elements_.size() && elements_[count].degree <= degree) ++count;
  const CMatrix q = build(query, layout_);
  return residual(to_sparse(selector_ * to_sparse(q) * selector_.transpose()), count);
}

int ClosureReport::degree_reached(const HamiltonianExpr& query, double tol) const {
  const SparseCMatrix q = [&] {
    SparseCMatrix s = selector_ * to_sparse(build(query, layout_)) * selector_.transpose();
    return s;
  }();
  std::size_t count = 0;
  for (int d = 1; d <= depth_reached_; ++d) {
    while (count < elements_.size() && elements_[count].degree <= d) ++count;
    if (residual(q, count) <= tol) return d;
  }
  return -1;
}

double ClosureReport::orthogonality_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < interior_basis_.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double g = ip(interior_basis_[i], interior_basis_[j]) - (i == j ? 1.0 : 0.0);
      worst = std::max(worst, std::abs(g));
    }
  }
  return worst;
}

std::string ClosureReport::to_json(
    const std::vector<std::pair<std::string, HamiltonianExpr>>& queries, double tol,
    int indent) const {
  nlohmann::json basis = nlohmann::json::array();
  for (const auto& e : elements_) basis.push_back({{"label", e.label}, {"degree", e.degree}});
  nlohmann::json q = nlohmann::json::array();
  for (const auto& [name, expr] : queries) {
    const double r = membership(expr);
    q.push_back({{"name", name},
                 {"expr", hybridsim::to_string(expr)},
                 {"residual", r},
                 {"reached", r <= tol},
                 {"degree", degree_reached(expr, tol)}});
  }
  nlohmann::json j = {{"layout", layout_.describe()},
                      {"dimension", elements_.size()},
                      {"depth_reached", depth_reached_},
                      {"saturated", saturated_},
                      {"orthogonality_defect", orthogonality_defect()},
                      {"basis", basis},
                      {"queries", q}};
  return j.dump(indent);
}

ClosureReport close_algebra(const GeneratorRegistry& registry,
                            const std::vector<std::string>& seed_ids, int max_new,
                            int degree_cap, int threads) {
  if (seed_ids.empty()) throw ValidationError("seeds", "need at least one seed");
  if (max_new < 1) throw ValidationError("max_new", "must be >= 1");
  if (degree_cap < 1) throw ValidationError("degree_cap", "must be >= 1");

  ClosureReport report;
  report.layout_ = registry.layout();
  report.interior_ = registry.interior();
  const Index n = registry.layout().total_dim();
  report.selector_.resize(static_cast<Index>(report.interior_.size()), n);
  {
    std::vector<Eigen::Triplet<Complex>> t;
    for (std::size_t k = 0; k < report.interior_.size(); ++k) {
      t.emplace_back(static_cast<Index>(k), report.interior_[k], Complex(1.0, 0.0));
    }
    report.selector_.setFromTriplets(t.begin(), t.end());
  }
  const SparseCMatrix& sel = report.selector_;
  const SparseCMatrix sel_t = sel.transpose();

  std::vector<SparseCMatrix> seeds;
  for (const auto& id : seed_ids) seeds.push_back(to_sparse(*registry.matrix(id)));

  std::vector<SparseCMatrix> full_basis;
  // Orthonormalizes `m` against the basis; returns true if it adds a direction.
  auto add = [&](const SparseCMatrix& m, ClosureElement element) {
    SparseCMatrix r_int = sel * m * sel_t;
    const double n0 = std::sqrt(ip(r_int, r_int));
    if (!(n0 > 0.0)) return false;
    SparseCMatrix r = m;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < full_basis.size(); ++k) {
        const Complex c(ip(r_int, report.interior_basis_[k]), 0.0);
        r_int -= c * report.interior_basis_[k];
        r -= c * full_basis[k];
      }
    }
    const double nr = std::sqrt(std::max(0.0, ip(r_int, r_int)));
    if (!(nr / n0 > kNewDirection)) return false;
    r /= Complex(nr, 0.0);
    r_int /= Complex(nr, 0.0);
    r.prune(Complex(1.0, 0.0), 1e-15);
    r_int.prune(Complex(1.0, 0.0), 1e-15);
    full_basis.push_back(std::move(r));
    report.interior_basis_.push_back(std::move(r_int));
    report.elements_.push_back(std::move(element));
    return true;
  };

  std::vector<std::size_t> level;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (static_cast<int>(full_basis.size()) >= max_new) break;
    if (add(seeds[k], ClosureElement{seed_ids[k], 1})) level.push_back(full_basis.size() - 1);
  }
  report.depth_reached_ = 1;

  for (int degree = 2; degree <= degree_cap; ++degree) {
    if (static_cast<int>(full_basis.size()) >= max_new) break;
    const std::size_t count = seeds.size() * level.size();
    std::vector<SparseCMatrix> candidates(count);
    parallel_for(count, threads, [&](std::size_t i) {
      const SparseCMatrix& s = seeds[i / level.size()];
      const SparseCMatrix& b = full_basis[level[i % level.size()]];
      SparseCMatrix c = SparseCMatrix(s * b) - SparseCMatrix(b * s);
      c *= kI;
      c.prune(Complex(1.0, 0.0), 1e-15);
      candidates[i] = std::move(c);
    });
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < count; ++i) {
      if (static_cast<int>(full_basis.size()) >= max_new) break;
      const std::string label =
          "i[" + seed_ids[i / level.size()] + ", " +
          report.elements_[level[i % level.size()]].label + "]";
      if (add(candidates[i], ClosureElement{label, degree})) next.push_back(full_basis.size() - 1);
    }
    report.depth_reached_ = degree;
    if (next.empty()) {
      report.saturated_ = true;
      break;
    }
    level = std::move(next);
  }
  return report;
}

}  // namespace hybridsim
