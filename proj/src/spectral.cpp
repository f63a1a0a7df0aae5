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

#include "hybridsim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "hybridsim/expr_text.hpp"
#include "hybridsim/operators.hpp"

namespace hybridsim {

void PointerSpec::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta", "must be finite and > 0");
  if (cutoff < 2) throw ValidationError("cutoff", "pointer cutoff must be >= 2");
  if (!(t_couple > 0.0) || !std::isfinite(t_couple)) {
    throw ValidationError("t", "coupling time must be finite and > 0");
  }
}

double PointerSpec::resolution() const { return 1.0 / (t_couple * std::sqrt(beta)); }

double PointerSpec::sigma_x() const { return 1.0 / std::sqrt(2.0 * beta); }

QuadratureBasis::QuadratureBasis(int cutoff) {
  detail::require_cutoff(cutoff);
  RVector diag = RVector::Zero(cutoff);
  RVector sub(cutoff - 1);
  for (int n = 0; n + 1 < cutoff; ++n) sub(n) = std::sqrt((n + 1) / 2.0);
  Eigen::SelfAdjointEigenSolver<RMatrix> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw Error("quadrature eigendecomposition failed");
  nodes_ = es.eigenvalues();
  vectors_ = es.eigenvectors();
  for (Index k = 0; k < vectors_.cols(); ++k) {
    if (vectors_(0, k) < 0) vectors_.col(k) *= -1.0;
  }
}

Index QuadratureBasis::nearest(double x) const {
  Index best = 0;
  (nodes_.array() - x).abs().minCoeff(&best);
  return best;
}

StateVector prepare_gaussian_pointer(double beta, int cutoff) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta", "must be finite and > 0");
  detail::require_cutoff(cutoff);
  const double r = 0.5 * std::log(beta);
  const double th = std::tanh(r);
  CVector c = CVector::Zero(cutoff);
  double coeff = 1.0 / std::sqrt(std::cosh(r));
  c(0) = coeff;
  for (int n = 0; 2 * n + 2 < cutoff; ++n) {
    coeff *= -th * std::sqrt((2.0 * n + 1) * (2.0 * n + 2)) / (2.0 * (n + 1));
    c(2 * n + 2) = coeff;
  }
  const double loss = 1.0 - c.squaredNorm();
  if (loss > 1e-6) {
    throw ValidationError("cutoff", "cutoff " + std::to_string(cutoff) + " loses " +
                                        format_double(loss) + " of the beta=" +
                                        format_double(beta) + " pointer");
  }
  return StateVector::normalized(RegisterLayout({SubsystemSpec::qumode(cutoff)}), std::move(c));
}

namespace {

struct JointSplit {
  RegisterLayout system;
  int pointer = 0;
  Index sys_dim = 1;
  int cutoff = 0;
};

JointSplit split_joint(const RegisterLayout& joint, const HamiltonianExpr& h) {
  if (joint.size() < 2) throw ValidationError("layout", "joint register needs a system and a pointer");
  JointSplit s;
  s.pointer = joint.size() - 1;
  joint.require_qumode(s.pointer);
  std::vector<SubsystemSpec> specs(joint.specs().begin(), joint.specs().end() - 1);
  s.system = RegisterLayout(std::move(specs));
  s.sys_dim = s.system.total_dim();
  s.cutoff = joint.dim(s.pointer);
  if (h.max_subsystem() >= s.pointer) {
    throw ValidationError("hamiltonian", "H must act on system subsystems only");
  }
  validate(h, s.system);
  return s;
}

using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Eigensystem of the truncated P, memoized per cutoff.
std::shared_ptr<const Eigensystem> momentum_eigensystem(int cutoff) {
  static std::shared_mutex mutex;
  static std::map<int, std::shared_ptr<const Eigensystem>> cache;
  {
    std::shared_lock lock(mutex);
    if (const auto it = cache.find(cutoff); it != cache.end()) return it->second;
  }
  auto es = std::make_shared<const Eigensystem>(decompose_hermitian(fock_momentum(cutoff)));
  std::unique_lock lock(mutex);
  return cache.emplace(cutoff, std::move(es)).first->second;
}

}  // namespace

StateVector couple_pointer(const StateVector& joint, const HamiltonianExpr& h, double t,
                           const Coupling& coupling) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("t", "coupling time must be > 0");
  const JointSplit s = split_joint(joint.layout(), h);
  if (h.empty()) return joint;
  if (coupling.method == Coupling::Method::Trotter) {
    std::vector<HamiltonianTerm> terms;
    const HamiltonianTerm p(1.0, {{s.pointer, LocalOp::p()}});
    for (const auto& term : h.terms()) terms.push_back(term.times(p));
    const GeneratorRegistry registry(joint.layout());
    return run_sequence(trotter(HamiltonianExpr(std::move(terms)), t, coupling.steps), joint,
                        registry)
        .final_state;
  }
  const Eigensystem hs = decompose_hermitian(build(h, s.system));
  const auto ps_ptr = momentum_eigensystem(s.cutoff);
  const Eigensystem& ps = *ps_ptr;
  const RowMatrix m = Eigen::Map<const RowMatrix>(joint.amplitudes().data(), s.sys_dim, s.cutoff);
  RowMatrix m1 = hs.vectors.adjoint() * m * ps.vectors.conjugate();
  for (Index j = 0; j < m1.rows(); ++j) {
    for (Index l = 0; l < m1.cols(); ++l) {
      m1(j, l) *= std::exp(Complex(0.0, -t * hs.values(j) * ps.values(l)));
    }
  }
  const RowMatrix m2 = hs.vectors * m1 * ps.vectors.transpose();
  CVector out = Eigen::Map<const CVector>(m2.data(), m2.size());
  return StateVector(joint.layout(), std::move(out));
}

StateVector couple_pointer(const StateVector& system, const HamiltonianExpr& h,
                           const StateVector& pointer, double t, const Coupling& coupling) {
  if (pointer.layout().size() != 1 || !pointer.layout().spec(0).is_qumode()) {
    throw ValidationError("pointer", "pointer must be a single qumode");
  }
  return couple_pointer(tensor(system, pointer), h, t, coupling);
}

namespace {

CVector to_nodes(const StateVector& state, int mode, const QuadratureBasis& basis) {
  state.layout().require_qumode(mode);
  if (state.layout().dim(mode) != basis.cutoff()) {
    throw ValidationError("cutoff", "quadrature basis does not match the mode cutoff");
  }
  const int targets[] = {mode};
  const CMatrix vt = basis.vectors().transpose().cast<Complex>();
  return apply_local(vt, targets, state.layout(), state.amplitudes());
}

StateVector from_nodes(const RegisterLayout& layout, int mode, const QuadratureBasis& basis,
                       const CVector& node_amps) {
  const int targets[] = {mode};
  const CMatrix v = basis.vectors().cast<Complex>();
  return StateVector::normalized(layout, apply_local(v, targets, layout, node_amps));
}

RVector node_probabilities(const RegisterLayout& layout, int mode, const CVector& node_amps) {
  RVector p = RVector::Zero(layout.dim(mode));
  for (Index i = 0; i < node_amps.size(); ++i) p(layout.occupation(i, mode)) += std::norm(node_amps(i));
  return p;
}

std::vector<double> cumulative(const RVector& p) {
  std::vector<double> cdf(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  for (Index k = 0; k < p.size(); ++k) cdf[static_cast<std::size_t>(k)] = acc += p(k);
  return cdf;
}

}  // namespace

RVector position_distribution(const StateVector& state, int mode, const QuadratureBasis& basis) {
  return node_probabilities(state.layout(), mode, to_nodes(state, mode, basis));
}

PositionOutcome measure_position(const StateVector& state, int mode, const QuadratureBasis& basis,
                                 Rng& rng) {
  CVector amps = to_nodes(state, mode, basis);
  const RVector p = node_probabilities(state.layout(), mode, amps);
  const Index k = static_cast<Index>(sample_cdf(cumulative(p), uniform01(rng)));
  for (Index i = 0; i < amps.size(); ++i) {
    if (state.layout().occupation(i, mode) != k) amps(i) = 0.0;
  }
  return PositionOutcome{basis.nodes()(k), k, from_nodes(state.layout(), mode, basis, amps)};
}

PositionOutcome measure_position(const StateVector& state, int mode, Rng& rng) {
  state.layout().require_qumode(mode);
  return measure_position(state, mode, QuadratureBasis(state.layout().dim(mode)), rng);
}

PositionOutcome measure_position_gaussian(const StateVector& state, int mode,
                                          const QuadratureBasis& basis, double sigma, Rng& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma", "must be >= 0");
  if (sigma == 0.0) return measure_position(state, mode, basis, rng);
  CVector amps = to_nodes(state, mode, basis);
  const RVector p = node_probabilities(state.layout(), mode, amps);
  const Index k = static_cast<Index>(sample_cdf(cumulative(p), uniform01(rng)));
  const double m = basis.nodes()(k) + sigma * standard_normal(rng);
  for (Index i = 0; i < amps.size(); ++i) {
    const double d = basis.nodes()(state.layout().occupation(i, mode)) - m;
    amps(i) *= std::exp(-d * d / (4.0 * sigma * sigma));
  }
  return PositionOutcome{m, -1, from_nodes(state.layout(), mode, basis, amps)};
}

double eigenspace_fidelity(const StateVector& joint, const HamiltonianExpr& h, double eigenvalue) {
  const JointSplit s = split_joint(joint.layout(), h);
  std::vector<int> keep(static_cast<std::size_t>(s.pointer));
  for (int k = 0; k < s.pointer; ++k) keep[static_cast<std::size_t>(k)] = k;
  const DensityMatrix rho = reduced_density(joint, keep);
  const Eigensystem es = decompose_hermitian(build(h, s.system));
  Index nearest = 0;
  (es.values.array() - eigenvalue).abs().minCoeff(&nearest);
  const double target = es.values(nearest);
  double f = 0.0;
  for (Index j = 0; j < es.values.size(); ++j) {
    if (std::abs(es.values(j) - target) > 1e-8 * std::max(1.0, std::abs(target))) continue;
    const CVector v = es.vectors.col(j);
    f += v.dot(rho.matrix() * v).real();
  }
  return f;
}

std::vector<SpectrumPeak> cluster_peaks(std::vector<double> samples, double gap, double t) {
  std::vector<SpectrumPeak> peaks;
  if (samples.empty()) return peaks;
  const double n_total = static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= samples.size(); ++i) {
    if (i < samples.size() && samples[i] - samples[i - 1] <= gap) continue;
    const std::size_t n = i - begin;
    double mean = 0.0;
    for (std::size_t k = begin; k < i; ++k) mean += samples[k];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t k = begin; k < i; ++k) var += (samples[k] - mean) * (samples[k] - mean);
    var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
    peaks.push_back(SpectrumPeak{mean, mean / t, static_cast<double>(n) / n_total, n, std::sqrt(var)});
    begin = i;
  }
  return peaks;
}

std::string SpectrumEstimate::samples_csv() const {
  std::ostringstream os;
  os << "shot,x,eigenvalue_estimate\n";
  for (std::size_t k = 0; k < samples.size(); ++k) {
    os << k << ',' << format_double(samples[k]) << ',' << format_double(samples[k] / t_couple)
       << '\n';
  }
  return os.str();
}

namespace {

void check_validity(SpectrumEstimate& est, const HamiltonianExpr& h, const RegisterLayout& system,
                    const PointerSpec& spec, double guard) {
  std::ostringstream note;
  if (est.leakage > 1e-3) {
    est.valid = false;
    note << "pointer leakage " << format_double(est.leakage) << " exceeds 1e-3; ";
  }
  if (!h.empty()) {
    const Eigensystem es = decompose_hermitian(build(h, system));
    const double e_max = es.values.cwiseAbs().maxCoeff();
    const double reach = std::sqrt(2.0 * guard_threshold(spec.cutoff, guard));
    if (e_max * spec.t_couple + 4.0 * spec.sigma_x() > reach) {
      est.valid = false;
      note << "largest shift " << format_double(e_max * spec.t_couple)
           << " leaves the reliable range |x| < " << format_double(reach)
           << "; use a smaller t or a larger cutoff; ";
    }
  }
  est.note = note.str();
  if (!est.note.empty()) est.note.resize(est.note.size() - 2);
}

}  // namespace

SpectrumEstimate estimate_spectrum(const HamiltonianExpr& h, const StateVector& psi,
                                   const PointerSpec& spec, int n_shots, std::uint64_t seed,
                                   const SpectrumOptions& options) {
  spec.validate();
  if (n_shots < 1) throw ValidationError("n_shots", "need at least one shot");
  const StateVector pointer = prepare_gaussian_pointer(spec.beta, spec.cutoff);
  const StateVector joint = couple_pointer(psi, h, pointer, spec.t_couple, options.coupling);
  const int mode = joint.layout().size() - 1;
  const QuadratureBasis basis(spec.cutoff);
  const std::vector<double> cdf = cumulative(position_distribution(joint, mode, basis));

  SpectrumEstimate est;
  est.seed = seed;
  est.t_couple = spec.t_couple;
  est.beta = spec.beta;
  est.resolution = spec.resolution();
  est.samples.resize(static_cast<std::size_t>(n_shots));
  parallel_for(est.samples.size(), options.threads, [&](std::size_t k) {
    Rng rng = substream(seed, k);
    est.samples[k] = basis.nodes()(static_cast<Index>(sample_cdf(cdf, uniform01(rng))));
  });
  est.peaks = cluster_peaks(est.samples, 3.0 * spec.sigma_x(), spec.t_couple);
  est.leakage = leakage(joint, options.guard);
  check_validity(est, h, psi.layout(), spec, options.guard);
  return est;
}

RobustnessReport robustness_midmeasure(const HamiltonianExpr& h, const StateVector& psi,
                                       const PointerSpec& spec, int n_shots, std::uint64_t seed,
                                       double mid_sigma, const SpectrumOptions& options) {
  RobustnessReport rep;
  rep.unperturbed = estimate_spectrum(h, psi, spec, n_shots, seed, options);
  rep.mid_sigma = mid_sigma < 0 ? spec.sigma_x() : mid_sigma;

  const double half = 0.5 * spec.t_couple;
  const StateVector pointer = prepare_gaussian_pointer(spec.beta, spec.cutoff);
  const StateVector first = couple_pointer(psi, h, pointer, half, options.coupling);
  const int mode = first.layout().size() - 1;
  const QuadratureBasis basis(spec.cutoff);
  const std::uint64_t master = substream_seed(seed, ~std::uint64_t{0});

  const auto n = static_cast<std::size_t>(n_shots);
  std::vector<double> finals(n), mids(n), f_mid(n), f_final(n), leaks(n);
  parallel_for(n, options.threads, [&](std::size_t k) {
    Rng rng = substream(master, k);
    const PositionOutcome mid = measure_position_gaussian(first, mode, basis, rep.mid_sigma, rng);
    mids[k] = mid.x;
    f_mid[k] = h.empty() ? 1.0 : eigenspace_fidelity(mid.collapsed, h, mid.x / half);
    const StateVector second = couple_pointer(mid.collapsed, h, half, options.coupling);
    leaks[k] = leakage(second, options.guard);
    const PositionOutcome last = measure_position(second, mode, basis, rng);
    finals[k] = last.x;
    f_final[k] = h.empty() ? 1.0 : eigenspace_fidelity(last.collapsed, h, last.x / spec.t_couple);
  });

  SpectrumEstimate& est = rep.perturbed;
  est.seed = seed;
  est.t_couple = spec.t_couple;
  est.beta = spec.beta;
  est.resolution = spec.resolution();
  est.samples = finals;
  est.peaks = cluster_peaks(finals, 3.0 * spec.sigma_x(), spec.t_couple);
  est.leakage = *std::max_element(leaks.begin(), leaks.end());
  check_validity(est, h, psi.layout(), spec, options.guard);
  rep.mid_samples = std::move(mids);

  const auto& ref = rep.unperturbed.peaks;
  std::vector<double> sum(ref.size(), 0.0);
  std::vector<std::size_t> cnt(ref.size(), 0);
  for (double x : finals) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < ref.size(); ++j) {
      if (std::abs(x - ref[j].center_x) < std::abs(x - ref[best].center_x)) best = j;
    }
    if (ref.empty()) break;
    sum[best] += x / spec.t_couple;
    ++cnt[best];
  }
  for (std::size_t j = 0; j < ref.size(); ++j) {
    const double mean = cnt[j] ? sum[j] / static_cast<double>(cnt[j]) : std::nan("");
    rep.branch_means.push_back(mean);
    rep.peak_shift.push_back(std::abs(mean - ref[j].eigenvalue));
  }
  double a = 0.0;
  double b = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    a += f_mid[k];
    b += f_final[k];
    rep.min_final_fidelity = std::min(rep.min_final_fidelity, f_final[k]);
  }
  rep.mean_branch_fidelity = a / static_cast<double>(n);
  rep.mean_final_fidelity = b / static_cast<double>(n);
  return rep;
}

}  // namespace hybridsim
