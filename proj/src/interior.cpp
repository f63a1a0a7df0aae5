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

#include "hybridsim/interior.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace hybridsim {

int guard_levels(int cutoff, double guard) {
  if (!(guard > 0.0 && guard < 1.0)) {
    throw ValidationError("guard", "guard fraction must lie in (0, 1)");
  }
  const int levels = static_cast<int>(std::floor(guard * cutoff));
  return levels < 1 ? 1 : levels;
}

int guard_threshold(int cutoff, double guard) { return cutoff - guard_levels(cutoff, guard); }

std::vector<Index> interior_indices(const RegisterLayout& layout, double guard) {
  std::vector<int> limit(static_cast<std::size_t>(layout.size()));
  for (int k = 0; k < layout.size(); ++k) {
    const auto& s = layout.spec(k);
    limit[static_cast<std::size_t>(k)] = s.is_qumode() ? guard_threshold(s.cutoff, guard) : 2;
  }
  std::vector<Index> out;
  for (Index i = 0; i < layout.total_dim(); ++i) {
    bool inside = true;
    for (int k = 0; k < layout.size() && inside; ++k) {
      inside = layout.occupation(i, k) < limit[static_cast<std::size_t>(k)];
    }
    if (inside) out.push_back(i);
  }
  return out;
}

CMatrix restrict_to(const CMatrix& m, const std::vector<Index>& indices) {
  return m(indices, indices);
}

double hs_inner(const CMatrix& a, const CMatrix& b, const std::vector<Index>& indices) {
  return restrict_to(a, indices).cwiseProduct(restrict_to(b, indices).conjugate()).sum().real();
}

double hs_norm(const CMatrix& m, const std::vector<Index>& indices) {
  return restrict_to(m, indices).norm();
}

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::BDCSVD<CMatrix>(m).singularValues()(0);
}

}  // namespace hybridsim
