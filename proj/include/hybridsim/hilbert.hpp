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

// Composite Hilbert spaces of qubits and Fock-truncated oscillators.
//
// Tensor ordering: subsystem 0 is the slowest-varying factor. A flat index is
//   i = sum_k occupation[k] * stride[k],  stride[last] = 1,
// so for [Qubit, Qumode(3)] the occupation list (1, 2) sits at 1*3 + 2 = 5.
// Every routine in the library relies on this convention.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "hybridsim/types.hpp"

namespace hybridsim {

enum class SubsystemKind { Qubit, Qumode };

struct SubsystemSpec {
  SubsystemKind kind = SubsystemKind::Qubit;
  int cutoff = 2;  // Fock levels 0..cutoff-1; fixed at 2 for qubits

  static SubsystemSpec qubit() { return {SubsystemKind::Qubit, 2}; }
  static SubsystemSpec qumode(int cutoff) { return {SubsystemKind::Qumode, cutoff}; }

  int dim() const { return kind == SubsystemKind::Qubit ? 2 : cutoff; }
  bool is_qubit() const { return kind == SubsystemKind::Qubit; }
  bool is_qumode() const { return kind == SubsystemKind::Qumode; }
  bool operator==(const SubsystemSpec&) const = default;
};

class RegisterLayout {
 public:
  RegisterLayout() = default;
  explicit RegisterLayout(std::vector<SubsystemSpec> specs);

  int size() const { return static_cast<int>(specs_.size()); }
  Index total_dim() const { return total_dim_; }
  const SubsystemSpec& spec(int i) const { return specs_.at(static_cast<std::size_t>(i)); }
  const std::vector<SubsystemSpec>& specs() const { return specs_; }
  int dim(int i) const { return spec(i).dim(); }
  Index stride(int i) const { return strides_.at(static_cast<std::size_t>(i)); }

  /// Occupation of subsystem `i` in flat basis index `flat`.
  int occupation(Index flat, int i) const {
    return static_cast<int>((flat / stride(i)) % dim(i));
  }
  std::vector<int> decompose(Index flat) const;
  Index flatten(std::span<const int> occupations) const;

  /// Layout with `other` appended after the last subsystem of this one.
  RegisterLayout concat(const RegisterLayout& other) const;

  void check_index(int i, const char* what = "subsystem") const;
  void require_qubit(int i) const;
  void require_qumode(int i) const;

  /// Compact description, e.g. "[Qubit, Qumode(32)]".
  std::string describe() const;

  bool operator==(const RegisterLayout& other) const { return specs_ == other.specs_; }

 private:
  std::vector<SubsystemSpec> specs_;
  std::vector<Index> strides_;
  Index total_dim_ = 0;
};

RegisterLayout new_register(std::vector<SubsystemSpec> specs);

/// Normalized pure state on a layout.
///
/// Construction checks |‖ψ‖ - 1| <= kNormTolerance. Operations that collapse a
/// state go through `normalized()`; unitary evolution never renormalizes, so a
/// norm violation surfaces as an exception instead of being hidden.
class StateVector {
 public:
  static constexpr double kNormTolerance = 1e-9;

  StateVector(RegisterLayout layout, CVector amplitudes);
  static StateVector normalized(RegisterLayout layout, CVector amplitudes);

  const RegisterLayout& layout() const { return layout_; }
  const CVector& amplitudes() const { return amplitudes_; }
  Index dim() const { return amplitudes_.size(); }
  double norm() const { return amplitudes_.norm(); }

 private:
  RegisterLayout layout_;
  CVector amplitudes_;
};

StateVector basis_state(const RegisterLayout& layout, std::span<const int> occupations);
StateVector basis_state(const RegisterLayout& layout, std::initializer_list<int> occupations);

/// Product state; the layout of `b` is appended after the layout of `a`.
StateVector tensor(const StateVector& a, const StateVector& b);

/// |⟨a|b⟩|². Global phase never enters a comparison.
double fidelity(const StateVector& a, const StateVector& b);
double fidelity(const CVector& a, const CVector& b);

/// Operator on the full space acting as `local` on `targets` and identity elsewhere.
///
/// The tensor factors of `local` follow the order of `targets` as listed (first
/// listed is slowest-varying inside `local`); targets need not be adjacent or
/// ascending.
CMatrix embed(const CMatrix& local, std::span<const int> targets, const RegisterLayout& layout);
CMatrix embed(const CMatrix& local, std::initializer_list<int> targets,
              const RegisterLayout& layout);

/// Applies a local operator to a state vector without forming the full matrix.
CVector apply_local(const CMatrix& local, std::span<const int> targets,
                    const RegisterLayout& layout, const CVector& amplitudes);

class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix rho);

  Index dim() const { return rho_.rows(); }
  const CMatrix& matrix() const { return rho_; }
  double trace() const { return rho_.trace().real(); }
  double purity() const { return (rho_ * rho_).trace().real(); }

 private:
  CMatrix rho_;
};

/// Partial trace keeping `keep` (in the listed order) and tracing out the rest.
DensityMatrix reduced_density(const StateVector& state, std::span<const int> keep);
DensityMatrix reduced_density(const StateVector& state, std::initializer_list<int> keep);

}  // namespace hybridsim
