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

// Local operators on a qubit or a Fock-truncated oscillator.
//
// Quadrature convention: X = (a + a†)/√2 and P = (a - a†)/(i√2), so that
// [X, P] = i holds exactly on Fock levels 0..cutoff-2. The truncation puts the
// whole defect of the commutator into the (cutoff-1, cutoff-1) corner, where
// [X, P] = i(1 - cutoff).

#pragma once

#include <cmath>
#include <string>

#include "hybridsim/types.hpp"

namespace hybridsim {

enum class PauliAxis { X, Y, Z };

namespace detail {
inline void require_cutoff(int cutoff) {
  if (cutoff < 2) {
    throw ValidationError("cutoff", "Fock cutoff " + std::to_string(cutoff) + " (need >= 2)");
  }
}
}  // namespace detail

template <typename Scalar = double>
ComplexMatrix<Scalar> annihilation(int cutoff) {
  detail::require_cutoff(cutoff);
  ComplexMatrix<Scalar> a = ComplexMatrix<Scalar>::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<Scalar>(n));
  return a;
}

template <typename Scalar = double>
ComplexMatrix<Scalar> creation(int cutoff) {
  return annihilation<Scalar>(cutoff).adjoint();
}

template <typename Scalar = double>
ComplexMatrix<Scalar> number_operator(int cutoff) {
  detail::require_cutoff(cutoff);
  ComplexMatrix<Scalar> n = ComplexMatrix<Scalar>::Zero(cutoff, cutoff);
  for (int k = 0; k < cutoff; ++k) n(k, k) = static_cast<Scalar>(k);
  return n;
}

/// Truncated position quadrature; tridiagonal with ⟨n|X|n+1⟩ = √(n+1)/√2.
template <typename Scalar = double>
ComplexMatrix<Scalar> fock_position(int cutoff) {
  const ComplexMatrix<Scalar> a = annihilation<Scalar>(cutoff);
  return (a + a.adjoint()) / std::sqrt(static_cast<Scalar>(2));
}

/// Truncated momentum quadrature, P = (a - a†)/(i√2).
template <typename Scalar = double>
ComplexMatrix<Scalar> fock_momentum(int cutoff) {
  const ComplexMatrix<Scalar> a = annihilation<Scalar>(cutoff);
  const std::complex<Scalar> i_sqrt2(0, std::sqrt(static_cast<Scalar>(2)));
  return (a - a.adjoint()) / i_sqrt2;
}

template <typename Scalar = double>
ComplexMatrix<Scalar> pauli(PauliAxis axis) {
  using C = std::complex<Scalar>;
  ComplexMatrix<Scalar> s = ComplexMatrix<Scalar>::Zero(2, 2);
  switch (axis) {
    case PauliAxis::X:
      s(0, 1) = C(1, 0);
      s(1, 0) = C(1, 0);
      break;
    case PauliAxis::Y:
      s(0, 1) = C(0, -1);
      s(1, 0) = C(0, 1);
      break;
    case PauliAxis::Z:
      s(0, 0) = C(1, 0);
      s(1, 1) = C(-1, 0);
      break;
  }
  return s;
}

/// AB - BA.
template <typename DerivedA, typename DerivedB>
typename DerivedA::PlainObject commutator(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw ValidationError("commutator", "operands must be square with equal dimensions");
  }
  typename DerivedA::PlainObject out = a * b;
  out.noalias() -= b * a;
  return out;
}

/// Kronecker product, first operand slowest-varying.
template <typename DerivedA, typename DerivedB>
typename DerivedA::PlainObject kron(const Eigen::MatrixBase<DerivedA>& a,
                                    const Eigen::MatrixBase<DerivedB>& b) {
  typename DerivedA::PlainObject out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace hybridsim
