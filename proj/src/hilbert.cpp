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

#include "hybridsim/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace hybridsim {

RegisterLayout::RegisterLayout(std::vector<SubsystemSpec> specs) : specs_(std::move(specs)) {
  if (specs_.empty()) {
    throw ValidationError("layout", "register needs at least one subsystem");
  }
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    auto& s = specs_[i];
    if (s.is_qubit()) {
      s.cutoff = 2;
    } else if (s.cutoff < 2) {
      throw ValidationError("cutoff",
                            "qumode " + std::to_string(i) + " has cutoff " +
                                std::to_string(s.cutoff) + " (need >= 2)");
    }
  }
  strides_.assign(specs_.size(), 1);
  total_dim_ = 1;
  for (int i = static_cast<int>(specs_.size()) - 1; i >= 0; --i) {
    strides_[static_cast<std::size_t>(i)] = total_dim_;
    total_dim_ *= specs_[static_cast<std::size_t>(i)].dim();
  }
}

std::vector<int> RegisterLayout::decompose(Index flat) const {
  std::vector<int> occ(specs_.size());
  for (int i = 0; i < size(); ++i) occ[static_cast<std::size_t>(i)] = occupation(flat, i);
  return occ;
}

Index RegisterLayout::flatten(std::span<const int> occupations) const {
  if (static_cast<int>(occupations.size()) != size()) {
    throw ValidationError("occupations", "expected " + std::to_string(size()) + " entries, got " +
                                             std::to_string(occupations.size()));
  }
  Index flat = 0;
  for (int i = 0; i < size(); ++i) {
    const int n = occupations[static_cast<std::size_t>(i)];
    if (n < 0 || n >= dim(i)) {
      throw ValidationError("occupations", "occupation " + std::to_string(n) +
                                               " out of range for subsystem " +
                                               std::to_string(i));
    }
    flat += n * stride(i);
  }
  return flat;
}

RegisterLayout RegisterLayout::concat(const RegisterLayout& other) const {
  std::vector<SubsystemSpec> specs = specs_;
  specs.insert(specs.end(), other.specs_.begin(), other.specs_.end());
  return RegisterLayout(std::move(specs));
}

void RegisterLayout::check_index(int i, const char* what) const {
  if (i < 0 || i >= size()) {
    throw ValidationError(what, "index " + std::to_string(i) + " outside layout " + describe());
  }
}

void RegisterLayout::require_qubit(int i) const {
  check_index(i);
  if (!spec(i).is_qubit()) {
    throw ValidationError("subsystem", "subsystem " + std::to_string(i) + " is not a qubit");
  }
}

void RegisterLayout::require_qumode(int i) const {
  check_index(i);
  if (!spec(i).is_qumode()) {
    throw ValidationError("subsystem", "subsystem " + std::to_string(i) + " is not a qumode");
  }
}

std::string RegisterLayout::describe() const {
  std::ostringstream os;
  os << '[';
  for (int i = 0; i < size(); ++i) {
    if (i) os << ", ";
    if (spec(i).is_qubit()) {
      os << "Qubit";
    } else {
      os << "Qumode(" << spec(i).cutoff << ')';
    }
  }
  os << ']';
  return os.str();
}

RegisterLayout new_register(std::vector<SubsystemSpec> specs) {
  return RegisterLayout(std::move(specs));
}

StateVector::StateVector(RegisterLayout layout, CVector amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != layout_.total_dim()) {
    throw ValidationError("state", "amplitude count " + std::to_string(amplitudes_.size()) +
                                       " does not match layout dimension " +
                                       std::to_string(layout_.total_dim()));
  }
  const double drift = std::abs(amplitudes_.norm() - 1.0);
  if (!(drift <= kNormTolerance)) {
    throw Error("state norm deviates from 1 by " + std::to_string(drift));
  }
}

StateVector StateVector::normalized(RegisterLayout layout, CVector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error("cannot normalize a zero or non-finite vector");
  amplitudes /= n;
  return StateVector(std::move(layout), std::move(amplitudes));
}

StateVector basis_state(const RegisterLayout& layout, std::span<const int> occupations) {
  CVector amps = CVector::Zero(layout.total_dim());
  amps(layout.flatten(occupations)) = 1.0;
  return StateVector(layout, std::move(amps));
}

StateVector basis_state(const RegisterLayout& layout, std::initializer_list<int> occupations) {
  return basis_state(layout, std::span<const int>(occupations.begin(), occupations.size()));
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  const CVector& x = a.amplitudes();
  const CVector& y = b.amplitudes();
  CVector out(x.size() * y.size());
  for (Index i = 0; i < x.size(); ++i) out.segment(i * y.size(), y.size()) = x(i) * y;
  return StateVector(a.layout().concat(b.layout()), std::move(out));
}

double fidelity(const CVector& a, const CVector& b) {
  if (a.size() != b.size()) throw ValidationError("state", "dimension mismatch in fidelity");
  return std::norm(a.dot(b));
}

double fidelity(const StateVector& a, const StateVector& b) {
  return fidelity(a.amplitudes(), b.amplitudes());
}

namespace {

// Index bookkeeping for a local operator on `targets`.
struct LocalIndexing {
  Index local_dim = 1;
  std::vector<Index> offsets;  // flat offset of each local basis index
  std::vector<Index> local_of;  // local index of every flat index
  std::vector<Index> base_of;   // flat index with target occupations zeroed
};

LocalIndexing make_indexing(std::span<const int> targets, const RegisterLayout& layout) {
  if (targets.empty()) throw ValidationError("targets", "no target subsystems");
  std::vector<int> seen;
  for (int t : targets) {
    layout.check_index(t, "targets");
    if (std::find(seen.begin(), seen.end(), t) != seen.end()) {
      throw ValidationError("targets", "subsystem " + std::to_string(t) + " listed twice");
    }
    seen.push_back(t);
  }
  LocalIndexing ix;
  const std::size_t m = targets.size();
  std::vector<Index> local_strides(m, 1);
  for (int k = static_cast<int>(m) - 1; k >= 0; --k) {
    local_strides[static_cast<std::size_t>(k)] = ix.local_dim;
    ix.local_dim *= layout.dim(targets[static_cast<std::size_t>(k)]);
  }
  ix.offsets.assign(static_cast<std::size_t>(ix.local_dim), 0);
  for (Index b = 0; b < ix.local_dim; ++b) {
    Index off = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const Index occ = (b / local_strides[k]) % layout.dim(targets[k]);
      off += occ * layout.stride(targets[k]);
    }
    ix.offsets[static_cast<std::size_t>(b)] = off;
  }
  const Index n = layout.total_dim();
  ix.local_of.resize(static_cast<std::size_t>(n));
  ix.base_of.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Index local = 0;
    Index base = i;
    for (std::size_t k = 0; k < m; ++k) {
      const Index occ = layout.occupation(i, targets[k]);
      local += occ * local_strides[k];
      base -= occ * layout.stride(targets[k]);
    }
    ix.local_of[static_cast<std::size_t>(i)] = local;
    ix.base_of[static_cast<std::size_t>(i)] = base;
  }
  return ix;
}

}  // namespace

CMatrix embed(const CMatrix& local, std::span<const int> targets, const RegisterLayout& layout) {
  const LocalIndexing ix = make_indexing(targets, layout);
  if (local.rows() != ix.local_dim || local.cols() != ix.local_dim) {
    throw ValidationError("local", "operator is " + std::to_string(local.rows()) + "x" +
                                       std::to_string(local.cols()) + " but targets span " +
                                       std::to_string(ix.local_dim) + " dimensions");
  }
  const Index n = layout.total_dim();
  CMatrix out = CMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const Index row_local = ix.local_of[static_cast<std::size_t>(i)];
    const Index base = ix.base_of[static_cast<std::size_t>(i)];
    for (Index b = 0; b < ix.local_dim; ++b) {
      out(i, base + ix.offsets[static_cast<std::size_t>(b)]) = local(row_local, b);
    }
  }
  return out;
}

CMatrix embed(const CMatrix& local, std::initializer_list<int> targets,
              const RegisterLayout& layout) {
  return embed(local, std::span<const int>(targets.begin(), targets.size()), layout);
}

CVector apply_local(const CMatrix& local, std::span<const int> targets,
                    const RegisterLayout& layout, const CVector& amplitudes) {
  const LocalIndexing ix = make_indexing(targets, layout);
  if (local.rows() != ix.local_dim || local.cols() != ix.local_dim) {
    throw ValidationError("local", "operator dimension does not match targets");
  }
  if (amplitudes.size() != layout.total_dim()) {
    throw ValidationError("state", "amplitude count does not match layout");
  }
  const Index n = layout.total_dim();
  CVector out = CVector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const Index row_local = ix.local_of[static_cast<std::size_t>(i)];
    const Index base = ix.base_of[static_cast<std::size_t>(i)];
    Complex acc = 0.0;
    for (Index b = 0; b < ix.local_dim; ++b) {
      acc += local(row_local, b) * amplitudes(base + ix.offsets[static_cast<std::size_t>(b)]);
    }
    out(i) = acc;
  }
  return out;
}

DensityMatrix::DensityMatrix(CMatrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols()) throw Error("density matrix must be square");
  const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-12) throw Error("density matrix not Hermitian (" + std::to_string(herm) + ")");
  const double tr = rho_.trace().real();
  if (std::abs(tr - 1.0) > 1e-10) throw Error("density matrix trace " + std::to_string(tr));
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) throw Error("density matrix is not positive");
}

DensityMatrix reduced_density(const StateVector& state, std::span<const int> keep) {
  const RegisterLayout& layout = state.layout();
  const LocalIndexing ix = make_indexing(keep, layout);
  // Rest index: rank of base_of among the distinct bases, computed from the
  // non-kept occupations in layout order.
  std::vector<int> rest;
  for (int i = 0; i < layout.size(); ++i) {
    if (std::find(keep.begin(), keep.end(), i) == keep.end()) rest.push_back(i);
  }
  Index rest_dim = 1;
  for (int r : rest) rest_dim *= layout.dim(r);

  CMatrix m = CMatrix::Zero(ix.local_dim, rest_dim);
  const CVector& psi = state.amplitudes();
  for (Index i = 0; i < layout.total_dim(); ++i) {
    Index r_index = 0;
    for (int r : rest) r_index = r_index * layout.dim(r) + layout.occupation(i, r);
    m(ix.local_of[static_cast<std::size_t>(i)], r_index) = psi(i);
  }
  CMatrix rho = m * m.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::move(rho));
}

DensityMatrix reduced_density(const StateVector& state, std::initializer_list<int> keep) {
  return reduced_density(state, std::span<const int>(keep.begin(), keep.size()));
}

}  // namespace hybridsim
