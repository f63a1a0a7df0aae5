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

// Eigenvalue sampling with a continuous pointer.
//
// A pointer mode starts in a position-squeezed Gaussian ∝ e^{-βx²/2}, is
// coupled to the system through H ⊗ P for time t, and is read out in the
// eigenbasis of the truncated X. A branch with eigenvalue E lands near x = E t
// with standard deviation 1/√(2β), so eigenvalues resolve to about 1/(t√β).
// The pointer is always the last subsystem of the joint register.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hybridsim/evolution.hpp"
#include "hybridsim/expr.hpp"
#include "hybridsim/hilbert.hpp"
#include "hybridsim/rng.hpp"

namespace hybridsim {

struct PointerSpec {
  double beta = 1.0;
  int cutoff = 128;
  double t_couple = 1.0;

  void validate() const;
  double resolution() const;
  /// Position spread 1/√(2β) of the unshifted pointer.
  double sigma_x() const;
};

/// Eigenbasis of the truncated position operator; every vector has a positive
/// vacuum component.
class QuadratureBasis {
 public:
  explicit QuadratureBasis(int cutoff);

  int cutoff() const { return static_cast<int>(nodes_.size()); }
  const RVector& nodes() const { return nodes_; }
  /// Column k is the node state |x_k> in the Fock basis.
  const RMatrix& vectors() const { return vectors_; }
  Index nearest(double x) const;

 private:
  RVector nodes_;
  RMatrix vectors_;
};

/// Squeezed vacuum with position amplitudes ∝ e^{-βx²/2}; throws when more
/// than 1e-6 of its norm lies beyond the cutoff.
StateVector prepare_gaussian_pointer(double beta, int cutoff);

struct Coupling {
  enum class Method { Exact, Trotter };
  Method method = Method::Exact;
  int steps = 64;

  static Coupling exact() { return {}; }
  static Coupling trotter(int steps) { return {Method::Trotter, steps}; }
};

/// e^{-i H⊗P t} |system>|pointer>.
StateVector couple_pointer(const StateVector& system, const HamiltonianExpr& h,
                           const StateVector& pointer, double t,
                           const Coupling& coupling = Coupling::exact());
/// The same coupling applied to a joint state whose last subsystem is the pointer.
StateVector couple_pointer(const StateVector& joint, const HamiltonianExpr& h, double t,
                           const Coupling& coupling = Coupling::exact());

/// Born probabilities of the quadrature nodes of `mode`.
RVector position_distribution(const StateVector& state, int mode, const QuadratureBasis& basis);

struct PositionOutcome {
  double x = 0.0;
  Index node = -1;  // -1 for Gaussian readout
  StateVector collapsed;
};

/// Projective readout in the node basis.
PositionOutcome measure_position(const StateVector& state, int mode, Rng& rng);
PositionOutcome measure_position(const StateVector& state, int mode, const QuadratureBasis& basis,
                                 Rng& rng);
/// Gaussian readout of resolution `sigma`: outcome m ~ Σ_k p_k N(x_k, σ²) and
/// Kraus operator ∝ exp(-(X - m)² / (4σ²)).
PositionOutcome measure_position_gaussian(const StateVector& state, int mode,
                                          const QuadratureBasis& basis, double sigma, Rng& rng);

/// tr(Π_E ρ_system): weight of the system part of `joint` in the eigenspace of
/// the system Hamiltonian nearest to `eigenvalue`.
double eigenspace_fidelity(const StateVector& joint, const HamiltonianExpr& h, double eigenvalue);

struct SpectrumPeak {
  double center_x = 0.0;
  double eigenvalue = 0.0;  // center_x / t
  double weight = 0.0;
  std::size_t count = 0;
  double sigma_x = 0.0;
};

/// Splits sorted samples at gaps wider than `gap`.
std::vector<SpectrumPeak> cluster_peaks(std::vector<double> samples, double gap, double t);

struct SpectrumEstimate {
  std::vector<double> samples;
  std::vector<SpectrumPeak> peaks;
  double t_couple = 0.0;
  double beta = 0.0;
  double resolution = 0.0;
  double leakage = 0.0;
  bool valid = true;
  std::string note;
  std::uint64_t seed = 0;

  /// "shot,x,eigenvalue_estimate" rows.
  std::string samples_csv() const;
};

struct SpectrumOptions {
  Coupling coupling = Coupling::exact();
  int threads = 1;
  double guard = kDefaultGuard;
};

/// n_shots independent prepare–couple–measure rounds; shot k draws from
/// substream(seed, k).
SpectrumEstimate estimate_spectrum(const HamiltonianExpr& h, const StateVector& psi,
                                   const PointerSpec& spec, int n_shots, std::uint64_t seed,
                                   const SpectrumOptions& options = {});

struct RobustnessReport {
  SpectrumEstimate unperturbed;
  SpectrumEstimate perturbed;
  std::vector<double> mid_samples;         // first-half readouts
  std::vector<double> branch_means;        // mean x/t of perturbed samples per unperturbed peak
  std::vector<double> peak_shift;          // |branch mean - unperturbed eigenvalue|
  double mid_sigma = 0.0;                  // readout resolution of the interleaved measurement
  double mean_branch_fidelity = 0.0;       // eigenspace weight after the mid readout
  double mean_final_fidelity = 0.0;        // eigenspace weight after the final readout
  double min_final_fidelity = 1.0;
};

/// Splits the coupling into halves with a Gaussian pointer readout between
/// them (resolution `mid_sigma`, 0 for projective; negative selects 1/√(2β)).
RobustnessReport robustness_midmeasure(const HamiltonianExpr& h, const StateVector& psi,
                                       const PointerSpec& spec, int n_shots, std::uint64_t seed,
                                       double mid_sigma = -1.0, const SpectrumOptions& options = {});

}  // namespace hybridsim
