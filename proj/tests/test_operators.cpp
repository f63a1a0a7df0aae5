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

#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "hybridsim/expr.hpp"
#include "hybridsim/expr_text.hpp"
#include "hybridsim/interior.hpp"
#include "hybridsim/operators.hpp"

namespace hybridsim {
namespace {

const RegisterLayout kQM16({SubsystemSpec::qubit(), SubsystemSpec::qumode(16)});

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

TEST(FockPosition, CutoffTwo) {
  const CMatrix x = fock_position(2);
  EXPECT_NEAR(x(0, 1).real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(x(1, 0).real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(x(0, 0), Complex(0.0));
}

TEST(FockPosition, TridiagonalEntries) {
  const CMatrix x = fock_position(10);
  for (int n = 0; n + 1 < 10; ++n) EXPECT_NEAR(x(n, n + 1).real(), std::sqrt((n + 1) / 2.0), 1e-15);
  EXPECT_EQ(hermiticity_defect(x), 0.0);
  EXPECT_THROW(fock_position(1), ValidationError);
}

TEST(FockMomentum, Basics) {
  const CMatrix p = fock_momentum(12);
  EXPECT_EQ(hermiticity_defect(p), 0.0);
  EXPECT_NEAR((p * p)(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(p.trace()), 0.0, 1e-15);
  EXPECT_THROW(fock_momentum(0), ValidationError);
}

TEST(CanonicalCommutator, HoldsBelowTopLevel) {
  for (int n : {2, 5, 16, 40}) {
    const CMatrix c = commutator(fock_position(n), fock_momentum(n));
    const CMatrix block = c.topLeftCorner(n - 1, n - 1);
    EXPECT_LE(max_abs(block - kI * CMatrix::Identity(n - 1, n - 1)), 1e-12) << n;
    EXPECT_NEAR(c(n - 1, n - 1).imag(), 1.0 - n, 1e-12);
  }
}

TEST(CanonicalCommutator, FloatScalar) {
  const auto x = fock_position<float>(8);
  const auto p = fock_momentum<float>(8);
  const auto c = commutator(x, p);
  EXPECT_NEAR(c(3, 3).imag(), 1.0f, 1e-5f);
}

TEST(Pauli, Identities) {
  const CMatrix x = pauli(PauliAxis::X);
  const CMatrix y = pauli(PauliAxis::Y);
  const CMatrix z = pauli(PauliAxis::Z);
  const CVector up = (CVector(2) << 1.0, 0.0).finished();
  EXPECT_EQ(z * up, up);
  EXPECT_LE(max_abs(commutator(z, x) - 2.0 * kI * y), 1e-15);
  EXPECT_EQ(x * x, CMatrix::Identity(2, 2));
  EXPECT_EQ(y * y, CMatrix::Identity(2, 2));
}

TEST(Commutator, DimensionMismatch) {
  EXPECT_THROW(commutator(CMatrix::Identity(2, 2), CMatrix::Identity(3, 3)), ValidationError);
  const CMatrix a = fock_position(5);
  EXPECT_EQ(max_abs(commutator(a, a)), 0.0);
}

TEST(Commutator, SzPWithSzXIsMinusIOnInterior) {
  const CMatrix zp = build(parse_hamiltonian("sz@0*P@1"), kQM16);
  const CMatrix zx = build(parse_hamiltonian("sz@0*X@1"), kQM16);
  const auto idx = interior_indices(kQM16);
  const CMatrix c = restrict_to(commutator(zp, zx), idx);
  const Index n = static_cast<Index>(idx.size());
  EXPECT_LE(max_abs(c + kI * CMatrix::Identity(n, n)), 1e-12);
}

TEST(Commutator, PWithSxXGivesSx) {
  const CMatrix p = build(parse_hamiltonian("P@1"), kQM16);
  const CMatrix xx = build(parse_hamiltonian("sx@0*X@1"), kQM16);
  const CMatrix sx = build(parse_hamiltonian("sx@0"), kQM16);
  const auto idx = interior_indices(kQM16);
  const CMatrix c = kI * commutator(p, xx);
  const double scale = hs_inner(sx, c, idx) / hs_inner(sx, sx, idx);
  EXPECT_GT(std::abs(scale), 0.5);
  EXPECT_LE(hs_norm(c - scale * sx, idx), 1e-12);
}

TEST(Interior, GuardBand) {
  EXPECT_EQ(guard_levels(32, 0.25), 8);
  EXPECT_EQ(guard_threshold(32, 0.25), 24);
  EXPECT_EQ(guard_levels(2, 0.25), 1);
  EXPECT_THROW(guard_levels(8, 0.0), ValidationError);
  EXPECT_THROW(guard_levels(8, 1.0), ValidationError);
  EXPECT_EQ(interior_indices(kQM16).size(), 24u);
}

TEST(Build, SingleTermIsKronecker) {
  const CMatrix h = build(parse_hamiltonian("1.0*sz@0*P@1"), kQM16);
  EXPECT_LE(max_abs(h - kron(pauli(PauliAxis::Z), fock_momentum(16))), 1e-15);
}

TEST(Build, OscillatorEnergyLevels) {
  const RegisterLayout m({SubsystemSpec::qumode(16)});
  // X² + P² = 2a†a + 1 under [X, P] = i.
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(build(parse_hamiltonian("X@0^2 + P@0^2"), m));
  const Eigen::SelfAdjointEigenSolver<CMatrix> half(
      build(parse_hamiltonian("0.5*X@0^2 + 0.5*P@0^2"), m));
  auto has_level = [](const RVector& ev, double e) {
    return (ev.array() - e).abs().minCoeff() <= 1e-8;
  };
  for (int n = 0; n <= 12; ++n) {
    EXPECT_TRUE(has_level(es.eigenvalues(), 2.0 * n + 1.0)) << n;
    EXPECT_TRUE(has_level(half.eigenvalues(), n + 0.5)) << n;
  }
}

TEST(Build, Errors) {
  EXPECT_THROW(build(HamiltonianExpr(), kQM16), ValidationError);
  EXPECT_THROW(build(parse_hamiltonian("sz@1"), kQM16), ValidationError);
  EXPECT_THROW(build(parse_hamiltonian("X@0"), kQM16), ValidationError);
  EXPECT_THROW(build(parse_hamiltonian("X@2"), kQM16), ValidationError);
  EXPECT_THROW(term(0.0, {{0, LocalOp::sz()}}), ValidationError);
  EXPECT_THROW(term(std::nan(""), {{0, LocalOp::sz()}}), ValidationError);
  EXPECT_THROW(LocalOp::x_pow(0), ValidationError);
}

TEST(Build, HermitianPartOfLadderTerms) {
  const RegisterLayout m({SubsystemSpec::qumode(10)});
  const CMatrix h = build(parse_hamiltonian("a@0"), m);
  EXPECT_LE(hermiticity_defect(h), 0.0);
  EXPECT_LE(max_abs(h - fock_position(10) / std::sqrt(2.0)), 1e-15);
  const CMatrix hy = build(parse_hamiltonian("sy@0*ad@1"), kQM16);
  EXPECT_LE(hermiticity_defect(hy), 1e-15);
}

TEST(Build, Linearity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const RegisterLayout layout({SubsystemSpec::qubit(), SubsystemSpec::qumode(6), SubsystemSpec::qubit()});
  const std::vector<std::string> pool = {"sx@0*X@1", "sz@0*P@1^2", "sy@2*ad@1", "sz@0*sx@2",
                                         "X@1^3",    "I@1*sz@2",   "2.5",        "a@1*sy@0"};
  for (int trial = 0; trial < 20; ++trial) {
    const auto e1 = parse_hamiltonian(pool[static_cast<std::size_t>(trial) % pool.size()] + " + " +
                                      pool[static_cast<std::size_t>(trial * 3 + 1) % pool.size()]);
    const auto e2 = parse_hamiltonian(pool[static_cast<std::size_t>(trial * 5 + 2) % pool.size()]);
    const double a = u(rng);
    const double b = u(rng);
    const CMatrix lhs = build(a * e1 + b * e2, layout);
    const CMatrix rhs = a * build(e1, layout) + b * build(e2, layout);
    EXPECT_LE(max_abs(lhs - rhs), 1e-12);
    EXPECT_LE(hermiticity_defect(lhs), 1e-10);
  }
}

TEST(PrimitiveSet, ThreeHermitianTracelessGenerators) {
  const RegisterLayout layout({SubsystemSpec::qubit(), SubsystemSpec::qumode(8)});
  const auto set = primitive_set(layout, 0, 1);
  ASSERT_EQ(set.size(), 3u);
  EXPECT_EQ(set[0].id, "sx@0*X@1");
  EXPECT_EQ(set[1].id, "sz@0*X@1");
  EXPECT_EQ(set[2].id, "sz@0*P@1");
  const auto idx = interior_indices(layout);
  for (const auto& g : set) {
    EXPECT_LE(hermiticity_defect(g.matrix), 1e-12);
    EXPECT_NEAR(std::abs(restrict_to(g.matrix, idx).trace()), 0.0, 1e-12);
    EXPECT_LE(max_abs(g.signed_matrix(-1) + g.matrix), 0.0);
  }
  const CMatrix oracle = embed(pauli(PauliAxis::Z), {0}, layout) * embed(fock_momentum(8), {1}, layout);
  EXPECT_LE(max_abs(set[2].matrix - oracle), 1e-15);
}

TEST(PrimitiveSet, KindMismatch) {
  const RegisterLayout layout({SubsystemSpec::qubit(), SubsystemSpec::qumode(8)});
  EXPECT_THROW(primitive_set(layout, 1, 0), ValidationError);
  EXPECT_THROW(primitive_set(layout, 0, 0), ValidationError);
}

}  // namespace
}  // namespace hybridsim
