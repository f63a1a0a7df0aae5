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

// The guard band and the interior block.
//
// A qumode with cutoff N and guard fraction g reserves its top
// floor(g*N) levels (at least one) as the guard band. The interior block of a
// layout is spanned by the basis states in which every qumode sits below its
// guard band; operator identities are only asserted there, and population in
// the guard band is reported as leakage.

#pragma once

#include <vector>

#include "hybridsim/hilbert.hpp"

namespace hybridsim {

inline constexpr double kDefaultGuard = 0.25;

int guard_levels(int cutoff, double guard);
/// First Fock level inside the guard band.
int guard_threshold(int cutoff, double guard);

std::vector<Index> interior_indices(const RegisterLayout& layout, double guard = kDefaultGuard);

CMatrix restrict_to(const CMatrix& m, const std::vector<Index>& indices);

/// Re tr(A† B) over the index block.
double hs_inner(const CMatrix& a, const CMatrix& b, const std::vector<Index>& indices);
double hs_norm(const CMatrix& m, const std::vector<Index>& indices);
/// Largest singular value of the restricted block.
double spectral_norm(const CMatrix& m);

}  // namespace hybridsim
