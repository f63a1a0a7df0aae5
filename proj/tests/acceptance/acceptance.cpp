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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hybridsim/closure.hpp"
#include "hybridsim/experiments.hpp"
#include "hybridsim/expr_text.hpp"
#include "hybridsim/operators.hpp"
#include "hybridsim/spectral.hpp"
#include "hybridsim/synthesis.hpp"

namespace {

using namespace hybridsim;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

CMatrix full_unitary(const PulseSequence& seq, const GeneratorRegistry& reg) {
  const Index n = reg.layout().total_dim();
  CMatrix u(n, n);
  for (Index j = 0; j < n; ++j) u.col(j) = propagate(seq, reg, CVector::Unit(n, j));
  return u;
}

StateVector uniform(int n_qubits) {
  const RegisterLayout l(std::vector<SubsystemSpec>(static_cast<std::size_t>(n_qubits), SubsystemSpec::qubit()));
  const Index d = l.total_dim();
  return StateVector(l, CVector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d))));
}

std::string f(const char* fmt, int a, int b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

DerivationRule accept(Outcome& out, const GeneratorRegistry& reg, const std::string& a,
                      const std::string& b, const std::string& g, const std::string& label) {
  try {
    const DerivationRule rule = derive_rule(reg, a, b, parse_hamiltonian(g));
    out.check(rule.residual <= 1e-8, label + " " + num(rule.residual));
    return rule;
  } catch (const RejectedRule& e) {
    out.check(false, label + " rejected " + num(e.rule().residual));
    return e.rule();
  }
}

// Rules for the single-spin family on spin `q`, mode `m`; unregistered ids resolve inline.
void single_spin_rules(Outcome& out, const GeneratorRegistry& reg, int q, int m, const std::string& tag) {
  const auto id = [](const char* pattern, int a, int b) { return f(pattern, a, b); };
  struct Rule {
    std::string a, b, g, name;
  };
  const std::vector<Rule> rules = {
      {id("P@%d", m, 0), id("sx@%d*X@%d", q, m), id("sx@%d", q, 0), "sx"},
      {id("P@%d", m, 0), id("sz@%d*X@%d", q, m), id("sz@%d", q, 0), "sz"},
      {id("sz@%d", q, 0), id("sx@%d", q, 0), id("sy@%d", q, 0), "sy"},
      {id("sz@%d*P@%d", q, m), id("sz@%d*X@%d", q, m), "1", "identity"},
      {id("sz@%d*X@%d", q, m), id("sx@%d*X@%d", q, m), id("sy@%d*X@%d^2", q, m), "syX2"},
      {id("sy@%d*X@%d^2", q, m), id("sx@%d*X@%d", q, m), id("sz@%d*X@%d^3", q, m), "szX3"},
  };
  for (const auto& r : rules) accept(out, reg, r.a, r.b, r.g, tag + " " + r.name);
}

Outcome criterion1() {
  Outcome out;
  {
    const RegisterLayout l({SubsystemSpec::qubit(), SubsystemSpec::qumode(32)});
    const GeneratorRegistry reg = primitive_registry(l);
    single_spin_rules(out, reg, 0, 1, "[Q,M32]");
  }
  {
    const RegisterLayout l({SubsystemSpec::qubit(), SubsystemSpec::qubit(), SubsystemSpec::qumode(32)});
    const GeneratorRegistry reg = primitive_registry(l);
    single_spin_rules(out, reg, 0, 2, "[Q,Q,M32]");
    accept(out, reg, "sz@0*P@2", "sz@1*X@2", "sz@0*sz@1", "[Q,Q,M32] szsz");
  }
  {
    const RegisterLayout l({SubsystemSpec::qubit(), SubsystemSpec::qumode(16), SubsystemSpec::qumode(16)});
    const GeneratorRegistry reg = primitive_registry(l);
    single_spin_rules(out, reg, 0, 1, "[Q,M16,M16]");
    accept(out, reg, "sz@0", "sx@0*X@1", "sy@0*X@1", "[Q,M16,M16] syX1");
    const auto r = accept(out, reg, "sy@0*X@1", "sx@0*X@2", "sz@0*X@1*X@2", "[Q,M16,M16] X1X2");
    out.check(std::abs(r.scale - 2.0) < 1e-8, "X1X2 scale " + num(r.scale));
  }
  return out;
}

Outcome criterion2() {
  Outcome out;
  const std::vector<double> steps = {0.2, 0.1, 0.05, 0.025};
  struct Pair {
    RegisterLayout layout;
    std::string a, b;
  };
  const RegisterLayout qm({SubsystemSpec::qubit(), SubsystemSpec::qumode(32)});
  const RegisterLayout qmm({SubsystemSpec::qubit(), SubsystemSpec::qumode(16), SubsystemSpec::qumode(16)});
  const std::vector<Pair> pairs = {{qm, "sz@0*X@1", "sx@0*X@1"},
                                   {qm, "sz@0*P@1", "sx@0*X@1"},
                                   {qmm, "sx@0*X@1", "sz@0*X@2"},
                                   {qmm, "sx@0*X@1", "sz@0*P@2"}};
  for (const auto& p : pairs) {
    const GeneratorRegistry reg = primitive_registry(p.layout);
    const auto low = interior_indices(p.layout, 0.75);
    const CMatrix c = commutator(*reg.matrix(p.a), *reg.matrix(p.b));
    std::vector<double> errs;
    for (double s : steps) {
      const CMatrix u = full_unitary(group_commutator(reg, p.a, p.b, s), reg);
      CMatrix d = u - decompose_hermitian(kI * c).unitary(s * s);
      errs.push_back(spectral_norm(d(Eigen::all, low)));
    }
    const double k = slope(steps, errs);
    out.check(std::abs(k - 3.0) <= 0.3, "(" + p.a + ", " + p.b + ") slope " + num(k));
  }
  return out;
}

Outcome criterion3() {
  Outcome out;
  const std::vector<int> ns = {4, 16, 64, 256};
  const double theta = std::numbers::pi / 4;
  {
    const RegisterLayout l({SubsystemSpec::qubit(), SubsystemSpec::qubit(), SubsystemSpec::qumode(16)});
    GeneratorRegistry reg(l);
    add_single_qubit_rules(reg, 0, 1, 2);
    const CMatrix exact = decompose_hermitian(pauli(PauliAxis::Y)).unitary(theta);
    std::vector<double> x, e;
    for (int n : ns) {
      const auto plan = synthesize(parse_hamiltonian("sy@0"), theta, n, reg, SynthOptions{false});
      x.push_back(n);
      e.push_back(phase_aligned_distance(logical_unitary(plan.sequence, reg, {0}), exact));
    }
    const double k = slope(x, e);
    out.check(std::abs(k + 0.5) <= 0.15, "sy slope " + num(k) + " (err@256 " + num(e.back()) + ")");
  }
  {
    const RegisterLayout l({SubsystemSpec::qubit(), SubsystemSpec::qubit(), SubsystemSpec::qumode(16)});
    GeneratorRegistry reg(l);
    add_zz_rule(reg, 0, 1, 2);
    const CMatrix zz = kron(pauli(PauliAxis::Z), pauli(PauliAxis::Z));
    const CMatrix exact = decompose_hermitian(zz).unitary(theta);
    std::vector<double> x, e;
    double purity = 0.0;
    for (int n : ns) {
      const auto plan = synthesize(parse_hamiltonian("sz@0*sz@1"), theta, n, reg, SynthOptions{false});
      x.push_back(n);
      e.push_back(phase_aligned_distance(logical_unitary(plan.sequence, reg, {0, 1}), exact));
      if (n == 256) {
        CVector plus = CVector::Zero(l.total_dim());
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) plus(l.flatten(std::vector<int>{a, b, 0})) = 0.5;
        }
        const auto rep = run_sequence(plan.sequence, StateVector(l, plus), reg);
        purity = reduced_density(rep.final_state, {2}).purity();
      }
    }
    const double k = slope(x, e);
    out.check(std::abs(k + 0.5) <= 0.15,
              "szsz slope " + num(k) + " (errors " + num(e.front()) + ".." + num(e.back()) + ")");
    out.check(purity >= 0.99, "bus purity@256 " + num(purity));
  }
  return out;
}

Outcome criterion4() {
  Outcome out;
  struct Case {
    RegisterLayout layout;
    std::vector<std::pair<std::string, std::string>> queries;
  };
  const std::vector<std::pair<std::string, std::string>> single = {
      {"sx", "sx@0"}, {"sz", "sz@0"}, {"sy", "sy@0"}, {"identity", "1"}};
  std::vector<Case> cases;
  {
    auto q = single;
    q.push_back({"syX2", "sy@0*X@1^2"});
    q.push_back({"szX3", "sz@0*X@1^3"});
    cases.push_back({RegisterLayout({SubsystemSpec::qubit(), SubsystemSpec::qumode(32)}), q});
  }
  cases.push_back({RegisterLayout({SubsystemSpec::qubit(), SubsystemSpec::qubit(), SubsystemSpec::qumode(32)}),
                   {{"szsz", "sz@0*sz@1"}}});
  cases.push_back({RegisterLayout({SubsystemSpec::qubit(), SubsystemSpec::qumode(16), SubsystemSpec::qumode(16)}),
                   {{"X1X2", "X@1*X@2"}}});
  for (const auto& c : cases) {
    const GeneratorRegistry reg = primitive_registry(c.layout);
    const ClosureReport rep = close_algebra(reg, reg.ids(), 400, 4);
    for (const auto& [name, text] : c.queries) {
      const double m = rep.membership(parse_hamiltonian(text));
      out.check(m <= 1e-8, c.layout.describe() + " " + name + " " + num(m));
    }
  }
  return out;
}

Outcome criterion5() {
  Outcome out;
  const int cutoff = 64;
  const RegisterLayout l({SubsystemSpec::qumode(cutoff)});
  const CMatrix x = fock_position(cutoff);
  const CMatrix p = fock_momentum(cutoff);
  const StateVector start = expm_apply(p, 1.0, basis_state(l, {0}));
  out.check(std::abs(expectation(start, x, {0}) - 1.0) <= 1e-12, "prepared <X>=1");
  const StateVector once = cv_qft(start, 0);
  const double mx = expectation(once, x, {0});
  const double mp = expectation(once, p, {0});
  out.check(std::abs(mx) <= 1e-3 && std::abs(std::abs(mp) - 1.0) <= 1e-3,
            "(" + num(mx) + ", " + num(mp) + ")");
  StateVector s = start;
  for (int k = 0; k < 4; ++k) s = cv_qft(s, 0);
  const double fid = fidelity(s, start);
  out.check(fid >= 1.0 - 1e-8, "F4 1-" + num(1.0 - fid));
  return out;
}

PointerSpec pointer(double beta, double t, int cutoff = 128) {
  PointerSpec s;
  s.beta = beta;
  s.t_couple = t;
  s.cutoff = cutoff;
  return s;
}

Outcome criterion6() {
  Outcome out;
  const auto h = parse_hamiltonian("sz@0*sz@1");
  const PointerSpec spec = pointer(4.0, 5.0);
  const SpectrumEstimate est = estimate_spectrum(h, uniform(2), spec, 2000, 6);
  out.check(est.peaks.size() == 2, std::to_string(est.peaks.size()) + " peaks");
  if (est.peaks.size() == 2) {
    out.check(std::abs(est.peaks[0].eigenvalue + 1.0) <= 0.1 && std::abs(est.peaks[1].eigenvalue - 1.0) <= 0.1,
              "E " + num(est.peaks[0].eigenvalue) + ", " + num(est.peaks[1].eigenvalue));
    out.check(std::abs(est.peaks[0].weight - 0.5) <= 0.05 && std::abs(est.peaks[1].weight - 0.5) <= 0.05,
              "w " + num(est.peaks[0].weight) + ", " + num(est.peaks[1].weight));
  }
  const StateVector joint = couple_pointer(uniform(2), h, prepare_gaussian_pointer(4.0, 128), 5.0);
  const QuadratureBasis basis(128);
  double min_f = 1.0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    Rng rng = substream(6, k);
    const PositionOutcome o = measure_position(joint, 2, basis, rng);
    min_f = std::min(min_f, eigenspace_fidelity(o.collapsed, h, o.x / 5.0));
  }
  out.check(min_f >= 0.99, "min eigenspace fidelity " + num(min_f));
  return out;
}

double cluster_sigma(double beta, double t) {
  const SpectrumEstimate est =
      estimate_spectrum(parse_hamiltonian("sz@0"), StateVector(RegisterLayout({SubsystemSpec::qubit()}),
                                                                CVector::Unit(2, 0)),
                        pointer(beta, t, 256), 2000, 70);
  return est.peaks.size() == 1 ? est.peaks[0].sigma_x : std::nan("");
}

Outcome criterion7() {
  Outcome out;
  std::vector<double> bs = {1, 4, 16}, sb;
  for (double b : bs) {
    const double s = cluster_sigma(b, 5.0);
    sb.push_back(s);
    const double law = 1.0 / std::sqrt(2.0 * b);
    out.check(std::abs(s / law - 1.0) <= 0.1, "beta " + num(b) + " sigma_x " + num(s) + " vs " + num(law));
  }
  const double kb = slope(bs, sb);
  out.check(std::abs(kb + 0.5) <= 0.05, "beta exponent " + num(kb));
  std::vector<double> ts = {2.5, 5, 10}, st;
  for (double t : ts) {
    const double s = cluster_sigma(4.0, t) / t;
    st.push_back(s);
    const double law = 1.0 / (t * std::sqrt(8.0));
    out.check(std::abs(s / law - 1.0) <= 0.1, "t " + num(t) + " sigma_E " + num(s) + " vs " + num(law));
  }
  const double kt = slope(ts, st);
  out.check(std::abs(kt + 1.0) <= 0.1, "t exponent " + num(kt));
  return out;
}

Outcome criterion8() {
  Outcome out;
  const PointerSpec spec = pointer(4.0, 5.0);
  const RobustnessReport rep = robustness_midmeasure(parse_hamiltonian("sz@0*sz@1"), uniform(2), spec, 2000, 8);
  out.check(rep.perturbed.peaks.size() == rep.unperturbed.peaks.size() && rep.peak_shift.size() == 2,
            std::to_string(rep.perturbed.peaks.size()) + " perturbed peaks");
  for (double s : rep.peak_shift) out.check(s <= spec.resolution(), "shift " + num(s));
  out.check(rep.mean_branch_fidelity >= 0.99, "branch fidelity " + num(rep.mean_branch_fidelity));
  out.check(rep.mean_final_fidelity >= 0.99, "final fidelity " + num(rep.mean_final_fidelity));
  return out;
}

Outcome criterion9() {
  Outcome out;
  const auto h = parse_hamiltonian("sz@0 + sx@0");
  const PointerSpec spec = pointer(4.0, 5.0, 160);
  const StateVector psi(RegisterLayout({SubsystemSpec::qubit()}), CVector::Unit(2, 0));
  SpectrumOptions exact_opts, trotter_opts;
  trotter_opts.coupling = Coupling::trotter(64);
  const SpectrumEstimate a = estimate_spectrum(h, psi, spec, 2000, 9, exact_opts);
  const SpectrumEstimate b = estimate_spectrum(h, psi, spec, 2000, 9, trotter_opts);
  out.check(a.peaks.size() == 2 && b.peaks.size() == 2,
            std::to_string(a.peaks.size()) + "/" + std::to_string(b.peaks.size()) + " peaks");
  for (std::size_t k = 0; k < std::min(a.peaks.size(), b.peaks.size()); ++k) {
    const double d = std::abs(a.peaks[k].eigenvalue - b.peaks[k].eigenvalue);
    out.check(d <= spec.resolution(), "peak " + num(a.peaks[k].eigenvalue) + " vs " +
                                          num(b.peaks[k].eigenvalue));
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion10() {
  Outcome out;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "hybridsim_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> configs = {
      {"spectrum", R"({"layout":["qubit","qubit"],"hamiltonian":"sz@0*sz@1","state":"uniform",
                      "beta":4,"t":5,"n_shots":2000,"seed":7})"},
      {"robustness", R"({"layout":["qubit","qubit"],"hamiltonian":"sz@0*sz@1","state":"uniform",
                        "beta":4,"t":5,"n_shots":300,"seed":7})"},
      {"synth", R"({"layout":["qubit","qubit","qumode:16"],"target":"sy@0","angle":0.785,
                   "n_blocks":[4,16],"rules":[{"kind":"single_qubit","subsystems":[0,1,2]}],"seed":7})"},
      {"closure", R"({"layout":["qubit","qumode:32"],"max_new":30,"degree_cap":4})"},
      {"qft-demo", R"({"cutoff":64})"},
      {"trotter-scaling", R"({"layout":["qubit","qumode:16"],"hamiltonian":"sz@0*X@1 + sx@0*P@1","t":1})"},
  };
  std::ostringstream sink;
  for (const auto& [name, text] : configs) {
    const fs::path cfg = dir / (name + ".json");
    std::ofstream(cfg) << text;
    std::vector<std::string> csvs;
    for (int run = 0; run < 3; ++run) {
      CliRequest req;
      req.experiment = name;
      req.config = cfg;
      req.threads = run == 2 ? 3 : 1;
      req.out = dir / (name + std::to_string(run));
      const int code = run_cli(req, sink);
      if (code != 0) out.check(false, name + " exit " + std::to_string(code));
      csvs.push_back(slurp(req.out / "samples.csv"));
    }
    out.check(!csvs[0].empty() && csvs[0] == csvs[1] && csvs[0] == csvs[2], name + " identical");
  }
  fs::remove_all(dir);
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"commutator identity suite", criterion1},
      {"group-commutator error order", criterion2},
      {"synthesis convergence", criterion3},
      {"Lie closure from the primitive set", criterion4},
      {"CV quantum Fourier transform", criterion5},
      {"spectrum recovery", criterion6},
      {"resolution law", criterion7},
      {"mid-measurement robustness", criterion8},
      {"Trotter pointer coupling", criterion9},
      {"CLI determinism", criterion10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("%s %2zu %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
