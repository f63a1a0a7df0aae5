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

#include "hybridsim/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "hybridsim/closure.hpp"
#include "hybridsim/evolution.hpp"
#include "hybridsim/expr_text.hpp"
#include "hybridsim/interior.hpp"
#include "hybridsim/operators.hpp"
#include "hybridsim/synthesis.hpp"

namespace hybridsim {

using nlohmann::json;

namespace {

constexpr std::pair<Experiment, const char*> kNames[] = {
    {Experiment::Synth, "synth"},           {Experiment::Closure, "closure"},
    {Experiment::QftDemo, "qft-demo"},      {Experiment::Spectrum, "spectrum"},
    {Experiment::Robustness, "robustness"}, {Experiment::TrotterScaling, "trotter-scaling"},
};

std::set<std::string> allowed_keys(Experiment e) {
  std::set<std::string> keys = {"experiment", "seed", "threads", "guard"};
  auto add = [&](std::initializer_list<const char*> more) { keys.insert(more.begin(), more.end()); };
  switch (e) {
    case Experiment::Synth:
      add({"layout", "target", "angle", "n_blocks", "rules", "reset_each_block", "state"});
      break;
    case Experiment::Closure:
      add({"layout", "seeds", "max_new", "degree_cap", "tolerance", "queries"});
      break;
    case Experiment::QftDemo:
      add({"cutoff", "displacement", "applications"});
      break;
    case Experiment::Robustness:
      add({"mid_sigma"});
      [[fallthrough]];
    case Experiment::Spectrum:
      add({"layout", "hamiltonian", "state", "beta", "t", "cutoff", "n_shots", "coupling",
           "trotter_steps"});
      break;
    case Experiment::TrotterScaling:
      add({"layout", "hamiltonian", "state", "t", "steps"});
      break;
  }
  return keys;
}

const json& require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ValidationError(key, "required field is missing");
  return j.at(key);
}

double get_double(const json& v, const std::string& field) {
  if (!v.is_number()) throw ValidationError(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(field, "must be finite");
  return d;
}

int get_int(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ValidationError(field, "expected an integer");
  const auto i = v.get<std::int64_t>();
  if (i < -1'000'000'000 || i > 1'000'000'000) throw ValidationError(field, "out of range");
  return static_cast<int>(i);
}

int get_positive_int(const json& v, const std::string& field) {
  const int i = get_int(v, field);
  if (i < 1) throw ValidationError(field, "must be >= 1");
  return i;
}

std::string get_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ValidationError(field, "expected a string");
  return v.get<std::string>();
}

std::vector<int> get_int_list(const json& v, const std::string& field) {
  std::vector<int> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(get_positive_int(v[i], field + "[" + std::to_string(i) + "]"));
    }
  } else {
    out.push_back(get_positive_int(v, field));
  }
  if (out.empty()) throw ValidationError(field, "list is empty");
  return out;
}

RegisterLayout parse_layout(const json& v) {
  if (!v.is_array() || v.empty()) throw ValidationError("layout", "expected a non-empty array");
  std::vector<SubsystemSpec> specs;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string field = "layout[" + std::to_string(i) + "]";
    const json& s = v[i];
    std::string kind;
    int cutoff = 0;
    if (s.is_string()) {
      const std::string text = s.get<std::string>();
      const auto colon = text.find(':');
      kind = text.substr(0, colon);
      if (colon != std::string::npos) {
        try {
          std::size_t used = 0;
          cutoff = std::stoi(text.substr(colon + 1), &used);
          if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw ValidationError(field + ".cutoff", "bad cutoff in '" + text + "'");
        }
      }
    } else if (s.is_object()) {
      kind = get_string(require(s, "kind"), field + ".kind");
      if (s.contains("cutoff")) cutoff = get_int(s.at("cutoff"), field + ".cutoff");
    } else {
      throw ValidationError(field, "expected \"qubit\", \"qumode:N\" or an object");
    }
    if (kind == "qubit") {
      specs.push_back(SubsystemSpec::qubit());
    } else if (kind == "qumode") {
      if (cutoff < 2) throw ValidationError(field + ".cutoff", "qumode cutoff must be >= 2");
      specs.push_back(SubsystemSpec::qumode(cutoff));
    } else {
      throw ValidationError(field + ".kind", "unknown subsystem kind '" + kind + "'");
    }
  }
  return RegisterLayout(std::move(specs));
}

HamiltonianExpr parse_expr(const json& v, const std::string& field, const RegisterLayout& layout) {
  HamiltonianExpr e = parse_hamiltonian(get_string(v, field));
  if (e.empty()) throw ValidationError(field, "expression has no terms");
  try {
    validate(e, layout);
  } catch (const ValidationError& err) {
    throw ValidationError(field, err.what());
  }
  return e;
}

CVector parse_state(const json& v, const RegisterLayout& layout) {
  const Index dim = layout.total_dim();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "uniform") return CVector::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    if (s == "zero") return CVector::Unit(dim, 0);
    if (s == "plus") {
      // Every qubit in |+>, every qumode in vacuum.
      CVector v = CVector::Zero(dim);
      int n_qubits = 0;
      for (int k = 0; k < layout.size(); ++k) n_qubits += layout.spec(k).is_qubit();
      const double amp = std::pow(2.0, -0.5 * n_qubits);
      for (Index i = 0; i < dim; ++i) {
        bool vacuum = true;
        for (int k = 0; k < layout.size(); ++k) {
          if (layout.spec(k).is_qumode() && layout.occupation(i, k) != 0) vacuum = false;
        }
        if (vacuum) v(i) = amp;
      }
      return v;
    }
    throw ValidationError("state", "unknown state '" + s + "'");
  }
  if (!v.is_object()) throw ValidationError("state", "expected a string or an object");
  if (v.contains("basis")) {
    const json& b = v.at("basis");
    if (!b.is_array()) throw ValidationError("state.basis", "expected an occupation array");
    std::vector<int> occ;
    for (std::size_t i = 0; i < b.size(); ++i) {
      occ.push_back(get_int(b[i], "state.basis[" + std::to_string(i) + "]"));
    }
    try {
      return basis_state(layout, occ).amplitudes();
    } catch (const ValidationError& err) {
      throw ValidationError("state.basis", err.what());
    }
  }
  if (v.contains("amplitudes")) {
    const json& a = v.at("amplitudes");
    if (!a.is_array() || static_cast<Index>(a.size()) != dim) {
      throw ValidationError("state.amplitudes", "expected " + std::to_string(dim) + " entries");
    }
    CVector out(dim);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string f = "state.amplitudes[" + std::to_string(i) + "]";
      if (a[i].is_array()) {
        if (a[i].size() != 2) throw ValidationError(f, "expected [re, im]");
        out(static_cast<Index>(i)) = Complex(get_double(a[i][0], f), get_double(a[i][1], f));
      } else {
        out(static_cast<Index>(i)) = get_double(a[i], f);
      }
    }
    const double n = out.norm();
    if (!(n > 0.0)) throw ValidationError("state.amplitudes", "zero vector");
    return out / n;
  }
  throw ValidationError("state", "expected \"basis\" or \"amplitudes\"");
}

RuleSpec parse_rule(const json& v, const std::string& field, const RegisterLayout& layout) {
  if (!v.is_object()) throw ValidationError(field, "expected an object");
  RuleSpec r;
  r.kind = get_string(require(v, "kind"), field + ".kind");
  std::size_t arity = 0;
  if (r.kind == "single_qubit" || r.kind == "zz") {
    arity = 3;
  } else if (r.kind == "xx") {
    arity = 4;
  } else if (r.kind == "derived") {
    r.a = get_string(require(v, "a"), field + ".a");
    r.b = get_string(require(v, "b"), field + ".b");
    r.direction = parse_expr(require(v, "direction"), field + ".direction", layout);
    return r;
  } else {
    throw ValidationError(field + ".kind", "unknown rule kind '" + r.kind + "'");
  }
  const json& s = require(v, "subsystems");
  if (!s.is_array() || s.size() != arity) {
    throw ValidationError(field + ".subsystems", "expected " + std::to_string(arity) + " indices");
  }
  for (std::size_t i = 0; i < arity; ++i) {
    const int k = get_int(s[i], field + ".subsystems");
    if (k < 0 || k >= layout.size()) throw ValidationError(field + ".subsystems", "index out of range");
    r.subsystems.push_back(k);
  }
  const std::size_t spins = 2;
  for (std::size_t i = 0; i < arity; ++i) {
    const bool want_qubit = i < spins;
    if (layout.spec(r.subsystems[i]).is_qubit() != want_qubit) {
      throw ValidationError(field + ".subsystems",
                            "subsystem " + std::to_string(r.subsystems[i]) + " must be a " +
                                (want_qubit ? "qubit" : "qumode"));
    }
  }
  return r;
}

void apply_rule(GeneratorRegistry& reg, const RuleSpec& r) {
  const auto& s = r.subsystems;
  if (r.kind == "single_qubit") {
    add_single_qubit_rules(reg, s[0], s[1], s[2]);
  } else if (r.kind == "zz") {
    add_zz_rule(reg, s[0], s[1], s[2]);
  } else if (r.kind == "xx") {
    add_xx_rules(reg, s[0], s[1], s[2], s[3]);
  } else {
    reg.add_derived(derive_rule(reg, r.a, r.b, r.direction));
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[v & 0xF];
    v >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0 && y[i] > 0) pts.emplace_back(std::log(x[i]), std::log(y[i]));
  }
  if (pts.size() < 2) return std::nan("");
  double mx = 0, my = 0;
  for (const auto& [a, b] : pts) {
    mx += a;
    my += b;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0, sxx = 0;
  for (const auto& [a, b] : pts) {
    sxy += (a - mx) * (b - my);
    sxx += (a - mx) * (a - mx);
  }
  return sxy / sxx;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json peaks_json(const std::vector<SpectrumPeak>& peaks) {
  json out = json::array();
  for (const auto& p : peaks) {
    out.push_back({{"center_x", p.center_x},
                   {"eigenvalue", p.eigenvalue},
                   {"weight", p.weight},
                   {"count", p.count},
                   {"sigma_x", p.sigma_x}});
  }
  return out;
}

json estimate_json(const SpectrumEstimate& e) {
  return {{"peaks", peaks_json(e.peaks)}, {"t", e.t_couple},         {"beta", e.beta},
          {"resolution", e.resolution},   {"leakage", e.leakage},    {"valid", e.valid},
          {"note", e.note},               {"samples", e.samples.size()}};
}

/// Histogram of `values` with `width`-wide bins anchored at zero.
std::map<long, std::vector<int>> histogram(const std::vector<std::vector<double>>& series,
                                           double width) {
  std::map<long, std::vector<int>> bins;
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (double v : series[s]) {
      auto& row = bins[std::lround(std::floor(v / width))];
      row.resize(series.size(), 0);
      ++row[s];
    }
  }
  return bins;
}

std::string histogram_rows(const std::vector<std::vector<double>>& series, double width) {
  std::ostringstream os;
  for (const auto& [bin, counts] : histogram(series, width)) {
    os << format_double((static_cast<double>(bin) + 0.5) * width);
    for (std::size_t s = 0; s < series.size(); ++s) os << ' ' << (s < counts.size() ? counts[s] : 0);
    os << '\n';
  }
  return os.str();
}

StateVector initial_state(const ExperimentConfig& c) {
  if (c.state) return StateVector(c.layout, *c.state);
  return StateVector(c.layout, CVector::Unit(c.layout.total_dim(), 0));
}

PointerSpec pointer_spec(const ExperimentConfig& c) {
  PointerSpec s;
  s.beta = c.beta;
  s.cutoff = c.cutoff;
  s.t_couple = c.t;
  return s;
}

SpectrumOptions spectrum_options(const ExperimentConfig& c) {
  SpectrumOptions o;
  o.coupling = c.coupling;
  o.threads = c.threads;
  o.guard = c.guard;
  return o;
}

/// Table, curve and result of one experiment; headers are added by the caller.
struct Body {
  std::string table;
  std::string curve_columns;
  std::string curve_rows;
  json result;
  double leakage = 0.0;
  bool valid = true;
};

HamiltonianExpr remap(const HamiltonianExpr& e, const std::vector<int>& order) {
  std::vector<HamiltonianTerm> terms;
  for (const auto& t : e.terms()) {
    std::vector<Factor> f;
    for (const auto& x : t.factors()) {
      const auto it = std::find(order.begin(), order.end(), x.subsystem);
      f.push_back({static_cast<int>(it - order.begin()), x.op});
    }
    terms.emplace_back(t.coefficient(), std::move(f));
  }
  return HamiltonianExpr(std::move(terms));
}

Body run_synth(const ExperimentConfig& c) {
  GeneratorRegistry reg = primitive_registry(c.layout, c.guard);
  for (const auto& r : c.rules) apply_rule(reg, r);

  std::set<int> touched;
  for (const auto& t : c.hamiltonian.terms()) {
    for (const auto& f : t.factors()) touched.insert(f.subsystem);
  }
  const std::vector<int> qubits(touched.begin(), touched.end());
  const bool logical = std::all_of(qubits.begin(), qubits.end(),
                                   [&](int q) { return c.layout.spec(q).is_qubit(); });
  std::optional<CMatrix> exact_logical;
  if (logical) {
    std::vector<SubsystemSpec> specs(qubits.size(), SubsystemSpec::qubit());
    const RegisterLayout ql(specs);
    exact_logical = decompose_hermitian(build(remap(c.hamiltonian, qubits), ql)).unitary(c.angle);
  }
  const StateVector psi = initial_state(c);
  const CVector exact_state =
      decompose_hermitian(build(c.hamiltonian, c.layout)).apply(c.angle, psi.amplitudes());

  Body b;
  std::ostringstream table, curve;
  table << "n_blocks,pulses,predicted_error,logical_error,process_fidelity,state_infidelity,"
           "target_purity,leakage\n";
  std::vector<double> ns, curve_err;
  json plans = json::array();
  for (std::size_t i = 0; i < c.n_blocks.size(); ++i) {
    const int n = c.n_blocks[i];
    const SynthPlan plan = synthesize(c.hamiltonian, c.angle, n, reg, SynthOptions{c.reset_each_block});
    double logical_error = std::nan(""), pf = std::nan("");
    if (exact_logical) {
      const SynthPlan bare = synthesize(c.hamiltonian, c.angle, n, reg, SynthOptions{false});
      const CMatrix m = logical_unitary(bare.sequence, reg, qubits);
      logical_error = phase_aligned_distance(m, *exact_logical);
      pf = process_fidelity(m, *exact_logical);
    }
    Rng rng = substream(c.seed, i);
    const EvolutionReport rep = run_sequence(plan.sequence, psi, reg, rng);
    const double infid = 1.0 - fidelity(rep.final_state.amplitudes(), exact_state);
    const double purity = reduced_density(rep.final_state, qubits).purity();
    b.leakage = std::max(b.leakage, rep.leakage);
    table << n << ',' << plan.sequence.size() << ',' << format_double(plan.predicted_error) << ','
          << (logical ? format_double(logical_error) : "") << ',' << (logical ? format_double(pf) : "")
          << ',' << format_double(infid) << ',' << format_double(purity) << ','
          << format_double(rep.leakage) << '\n';
    const double e = logical ? logical_error : infid;
    curve << n << ' ' << format_double(e) << ' ' << format_double(plan.predicted_error) << '\n';
    ns.push_back(n);
    curve_err.push_back(e);
    json p = json::parse(to_json(plan));
    p["logical_error"] = number_or_null(logical_error);
    p["process_fidelity"] = number_or_null(pf);
    p["state_infidelity"] = infid;
    p["target_purity"] = purity;
    p["leakage"] = rep.leakage;
    plans.push_back(std::move(p));
  }
  b.table = table.str();
  b.curve_columns = logical ? "n_blocks logical_error predicted_error"
                            : "n_blocks state_infidelity predicted_error";
  b.curve_rows = curve.str();
  b.result = {{"plans", plans}, {"error_slope", number_or_null(fit_slope(ns, curve_err))}};
  return b;
}

Body run_closure(const ExperimentConfig& c) {
  const GeneratorRegistry reg = primitive_registry(c.layout, c.guard);
  std::vector<std::string> seeds = c.seeds;
  if (seeds.empty()) seeds = reg.ids();
  const ClosureReport rep = close_algebra(reg, seeds, c.max_new, c.degree_cap, c.threads);
  Body b;
  std::ostringstream table, curve;
  table << "index,degree,label\n";
  std::map<int, std::size_t> per_degree;
  for (std::size_t i = 0; i < rep.elements().size(); ++i) {
    const auto& e = rep.elements()[i];
    table << i << ',' << e.degree << ",\"" << e.label << "\"\n";
    ++per_degree[e.degree];
  }
  std::size_t total = 0;
  for (int d = 1; d <= rep.depth_reached(); ++d) {
    total += per_degree[d];
    curve << d << ' ' << total << '\n';
  }
  b.table = table.str();
  b.curve_columns = "degree dimension";
  b.curve_rows = curve.str();
  b.result = json::parse(rep.to_json(c.queries, c.tolerance));
  b.result["seeds"] = seeds;
  return b;
}

Body run_qft(const ExperimentConfig& c) {
  const RegisterLayout layout({SubsystemSpec::qumode(c.cutoff)});
  const CMatrix x = fock_position(c.cutoff);
  const CMatrix p = fock_momentum(c.cutoff);
  const StateVector vac = basis_state(layout, {0});
  const StateVector start = expm_apply(CMatrix(c.x0 * p - c.p0 * x), 1.0, vac);
  Body b;
  std::ostringstream table, curve;
  table << "step,mean_x,mean_p,fidelity_to_initial,leakage\n";
  StateVector s = start;
  for (int k = 0; k <= c.applications; ++k) {
    if (k > 0) s = cv_qft(s, 0);
    const double mx = expectation(s, x, {0});
    const double mp = expectation(s, p, {0});
    const double f = fidelity(s, start);
    const double lk = leakage(s, c.guard);
    b.leakage = std::max(b.leakage, lk);
    table << k << ',' << format_double(mx) << ',' << format_double(mp) << ',' << format_double(f)
          << ',' << format_double(lk) << '\n';
    curve << k << ' ' << format_double(mx) << ' ' << format_double(mp) << '\n';
    if (k == 1) b.result["after_one"] = {{"mean_x", mx}, {"mean_p", mp}};
    if (k == c.applications) b.result["final_fidelity"] = f;
  }
  b.result["initial"] = {{"mean_x", c.x0}, {"mean_p", c.p0}};
  b.table = table.str();
  b.curve_columns = "step mean_x mean_p";
  b.curve_rows = curve.str();
  return b;
}

Body run_spectrum(const ExperimentConfig& c) {
  const PointerSpec spec = pointer_spec(c);
  const SpectrumEstimate est =
      estimate_spectrum(c.hamiltonian, initial_state(c), spec, c.n_shots, c.seed, spectrum_options(c));
  Body b;
  b.table = est.samples_csv();
  std::vector<double> ev;
  for (double x : est.samples) ev.push_back(x / c.t);
  b.curve_columns = "eigenvalue count";
  b.curve_rows = histogram_rows({ev}, est.resolution / 4.0);
  b.result = estimate_json(est);
  b.leakage = est.leakage;
  b.valid = est.valid;
  return b;
}

Body run_robustness(const ExperimentConfig& c) {
  const PointerSpec spec = pointer_spec(c);
  const RobustnessReport rep = robustness_midmeasure(c.hamiltonian, initial_state(c), spec, c.n_shots,
                                                     c.seed, c.mid_sigma, spectrum_options(c));
  Body b;
  std::ostringstream table;
  table << "shot,mid_x,x,eigenvalue_estimate\n";
  for (std::size_t k = 0; k < rep.perturbed.samples.size(); ++k) {
    table << k << ',' << format_double(rep.mid_samples[k]) << ','
          << format_double(rep.perturbed.samples[k]) << ','
          << format_double(rep.perturbed.samples[k] / c.t) << '\n';
  }
  b.table = table.str();
  std::vector<double> a, p;
  for (double x : rep.unperturbed.samples) a.push_back(x / c.t);
  for (double x : rep.perturbed.samples) p.push_back(x / c.t);
  b.curve_columns = "eigenvalue unperturbed perturbed";
  b.curve_rows = histogram_rows({a, p}, rep.unperturbed.resolution / 4.0);
  b.result = {{"unperturbed", estimate_json(rep.unperturbed)},
              {"perturbed", estimate_json(rep.perturbed)},
              {"branch_means", rep.branch_means},
              {"peak_shift", rep.peak_shift},
              {"mid_sigma", rep.mid_sigma},
              {"mean_branch_fidelity", rep.mean_branch_fidelity},
              {"mean_final_fidelity", rep.mean_final_fidelity},
              {"min_final_fidelity", rep.min_final_fidelity}};
  b.leakage = std::max(rep.unperturbed.leakage, rep.perturbed.leakage);
  b.valid = rep.unperturbed.valid && rep.perturbed.valid;
  return b;
}

Body run_trotter_scaling(const ExperimentConfig& c) {
  const StateVector psi = initial_state(c);
  const CVector exact = decompose_hermitian(build(c.hamiltonian, c.layout)).apply(c.t, psi.amplitudes());
  Body b;
  std::ostringstream table, curve;
  table << "steps,error,infidelity,leakage\n";
  std::vector<double> ns, errs;
  for (int n : c.steps) {
    const EvolutionReport rep = run_sequence(trotter(c.hamiltonian, c.t, n), psi);
    const double err = (rep.final_state.amplitudes() - exact).norm();
    const double infid = 1.0 - fidelity(rep.final_state.amplitudes(), exact);
    b.leakage = std::max(b.leakage, rep.leakage);
    table << n << ',' << format_double(err) << ',' << format_double(infid) << ','
          << format_double(rep.leakage) << '\n';
    curve << n << ' ' << format_double(err) << '\n';
    ns.push_back(n);
    errs.push_back(err);
  }
  b.table = table.str();
  b.curve_columns = "steps error";
  b.curve_rows = curve.str();
  b.result = {{"error_slope", number_or_null(fit_slope(ns, errs))},
              {"final_leakage", b.leakage}};
  return b;
}

}  // namespace

std::string experiment_name(Experiment e) {
  for (const auto& [k, name] : kNames) {
    if (k == e) return name;
  }
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (name == n) return k;
  }
  throw ValidationError("experiment", "unknown experiment '" + std::string(name) + "'");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash() const { return "fnv1a64:" + hex64(fnv1a64(raw.dump())); }

ExperimentConfig parse_config(std::string_view text, std::optional<Experiment> expected) {
  ExperimentConfig c;
  try {
    c.raw = json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports a byte offset; convert it to line and column.
    const std::size_t pos = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n');
    const auto nl = text.rfind('\n', pos == 0 ? 0 : pos - 1);
    const std::size_t col = nl == std::string_view::npos || pos == 0 ? pos + 1 : pos - nl;
    throw ParseError("malformed config JSON", static_cast<int>(line), static_cast<int>(col));
  }
  const json& j = c.raw;
  if (!j.is_object()) throw ValidationError("config", "top level must be an object");

  if (j.contains("experiment")) {
    c.experiment = parse_experiment(get_string(j.at("experiment"), "experiment"));
    if (expected && *expected != c.experiment) {
      throw ValidationError("experiment", "config is for '" + experiment_name(c.experiment) +
                                              "' but '" + experiment_name(*expected) +
                                              "' was requested");
    }
  } else if (expected) {
    c.experiment = *expected;
  } else {
    throw ValidationError("experiment", "required field is missing");
  }
  const auto allowed = allowed_keys(c.experiment);
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ValidationError(key, "unknown field for experiment '" + experiment_name(c.experiment) + "'");
    }
  }

  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ValidationError("seed", "expected a non-negative 64-bit integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("threads")) c.threads = get_positive_int(j.at("threads"), "threads");
  if (j.contains("guard")) {
    c.guard = get_double(j.at("guard"), "guard");
    if (!(c.guard > 0.0 && c.guard < 1.0)) throw ValidationError("guard", "must lie in (0, 1)");
  }

  const auto layout_required = c.experiment != Experiment::QftDemo;
  if (layout_required) c.layout = parse_layout(require(j, "layout"));

  switch (c.experiment) {
    case Experiment::Synth: {
      c.hamiltonian = parse_expr(require(j, "target"), "target", c.layout);
      c.angle = get_double(require(j, "angle"), "angle");
      c.n_blocks = get_int_list(require(j, "n_blocks"), "n_blocks");
      if (j.contains("reset_each_block")) {
        if (!j.at("reset_each_block").is_boolean()) throw ValidationError("reset_each_block", "expected a boolean");
        c.reset_each_block = j.at("reset_each_block").get<bool>();
      }
      if (j.contains("rules")) {
        const json& r = j.at("rules");
        if (!r.is_array()) throw ValidationError("rules", "expected an array");
        for (std::size_t i = 0; i < r.size(); ++i) {
          c.rules.push_back(parse_rule(r[i], "rules[" + std::to_string(i) + "]", c.layout));
        }
      }
      if (j.contains("state")) c.state = parse_state(j.at("state"), c.layout);
      // Registry construction checks rule residuals and target reachability up front.
      GeneratorRegistry reg = primitive_registry(c.layout, c.guard);
      for (std::size_t i = 0; i < c.rules.size(); ++i) {
        try {
          apply_rule(reg, c.rules[i]);
        } catch (const RejectedRule& e) {
          throw ValidationError("rules[" + std::to_string(i) + "]", e.what());
        }
      }
      synthesize(c.hamiltonian, c.angle, 1, reg);
      break;
    }
    case Experiment::Closure: {
      if (j.contains("seeds")) {
        const json& s = j.at("seeds");
        if (!s.is_array() || s.empty()) throw ValidationError("seeds", "expected a non-empty array");
        for (std::size_t i = 0; i < s.size(); ++i) {
          const std::string f = "seeds[" + std::to_string(i) + "]";
          const std::string id = get_string(s[i], f);
          parse_expr(s[i], f, c.layout);
          c.seeds.push_back(id);
        }
      }
      if (j.contains("max_new")) c.max_new = get_positive_int(j.at("max_new"), "max_new");
      if (j.contains("degree_cap")) c.degree_cap = get_positive_int(j.at("degree_cap"), "degree_cap");
      if (j.contains("tolerance")) {
        c.tolerance = get_double(j.at("tolerance"), "tolerance");
        if (!(c.tolerance > 0.0)) throw ValidationError("tolerance", "must be > 0");
      }
      if (j.contains("queries")) {
        const json& q = j.at("queries");
        if (q.is_object()) {
          for (const auto& [name, v] : q.items()) {
            c.queries.emplace_back(name, parse_expr(v, "queries." + name, c.layout));
          }
        } else if (q.is_array()) {
          for (std::size_t i = 0; i < q.size(); ++i) {
            const std::string f = "queries[" + std::to_string(i) + "]";
            c.queries.emplace_back(get_string(q[i], f), parse_expr(q[i], f, c.layout));
          }
        } else {
          throw ValidationError("queries", "expected an object or an array");
        }
      }
      break;
    }
    case Experiment::QftDemo: {
      if (j.contains("cutoff")) c.cutoff = get_int(j.at("cutoff"), "cutoff");
      if (c.cutoff < 2) throw ValidationError("cutoff", "qumode cutoff must be >= 2");
      if (j.contains("displacement")) {
        const json& d = j.at("displacement");
        if (!d.is_array() || d.size() != 2) throw ValidationError("displacement", "expected [x, p]");
        c.x0 = get_double(d[0], "displacement");
        c.p0 = get_double(d[1], "displacement");
      }
      if (j.contains("applications")) {
        c.applications = get_positive_int(j.at("applications"), "applications");
      }
      c.layout = RegisterLayout({SubsystemSpec::qumode(c.cutoff)});
      break;
    }
    case Experiment::Spectrum:
    case Experiment::Robustness: {
      c.hamiltonian = parse_expr(require(j, "hamiltonian"), "hamiltonian", c.layout);
      if (j.contains("state")) c.state = parse_state(j.at("state"), c.layout);
      c.beta = get_double(require(j, "beta"), "beta");
      c.t = get_double(require(j, "t"), "t");
      c.cutoff = j.contains("cutoff") ? get_int(j.at("cutoff"), "cutoff") : 128;
      c.n_shots = get_positive_int(require(j, "n_shots"), "n_shots");
      int steps = 64;
      if (j.contains("trotter_steps")) steps = get_positive_int(j.at("trotter_steps"), "trotter_steps");
      if (j.contains("coupling")) {
        const std::string m = get_string(j.at("coupling"), "coupling");
        if (m == "exact") {
          c.coupling = Coupling::exact();
        } else if (m == "trotter") {
          c.coupling = Coupling::trotter(steps);
        } else {
          throw ValidationError("coupling", "expected \"exact\" or \"trotter\"");
        }
      }
      if (j.contains("mid_sigma")) {
        c.mid_sigma = get_double(j.at("mid_sigma"), "mid_sigma");
        if (c.mid_sigma < 0.0) throw ValidationError("mid_sigma", "must be >= 0");
      }
      pointer_spec(c).validate();
      prepare_gaussian_pointer(c.beta, c.cutoff);
      break;
    }
    case Experiment::TrotterScaling: {
      c.hamiltonian = parse_expr(require(j, "hamiltonian"), "hamiltonian", c.layout);
      if (j.contains("state")) c.state = parse_state(j.at("state"), c.layout);
      c.t = get_double(require(j, "t"), "t");
      c.steps = j.contains("steps") ? get_int_list(j.at("steps"), "steps")
                                    : std::vector<int>{1, 2, 4, 8, 16, 32, 64};
      break;
    }
  }
  return c;
}

RunResult run_experiment(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  Body body;
  switch (c.experiment) {
    case Experiment::Synth: body = run_synth(c); break;
    case Experiment::Closure: body = run_closure(c); break;
    case Experiment::QftDemo: body = run_qft(c); break;
    case Experiment::Spectrum: body = run_spectrum(c); break;
    case Experiment::Robustness: body = run_robustness(c); break;
    case Experiment::TrotterScaling: body = run_trotter_scaling(c); break;
  }
  if (body.leakage > 1e-3) body.valid = false;
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string config_line = "# config " + c.raw.dump() + "\n";
  std::ostringstream stamp;
  stamp << "# hybridsim " << HYBRIDSIM_VERSION << " experiment=" << experiment_name(c.experiment)
        << " config_hash=" << c.hash() << " seed=" << c.seed
        << " leakage=" << format_double(body.leakage) << " valid=" << (body.valid ? "true" : "false");

  RunResult r;
  r.leakage = body.leakage;
  r.valid = body.valid;
  r.samples_csv = stamp.str() + "\n" + config_line + body.table;
  r.curve = stamp.str() + " wall_time_s=" + format_double(wall) + "\n" + config_line + "# " +
            body.curve_columns + "\n" + body.curve_rows;
  r.summary = {{"tool", "hybridsim"},
               {"version", HYBRIDSIM_VERSION},
               {"experiment", experiment_name(c.experiment)},
               {"config", c.raw},
               {"config_hash", c.hash()},
               {"seed", c.seed},
               {"leakage", body.leakage},
               {"valid", body.valid},
               {"wall_time_s", wall},
               {"result", body.result}};
  return r;
}

void write_outputs(const RunResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("out", "cannot create " + dir.string() + ": " + ec.message());
  const auto write = [&](const char* name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary);
    f << content;
    if (!f) throw ValidationError("out", "cannot write " + (dir / name).string());
  };
  write("summary.json", result.summary.dump(2) + "\n");
  write("samples.csv", result.samples_csv);
  write("curve.dat", result.curve);
}

int run_cli(const CliRequest& req, std::ostream& log) {
  try {
    const Experiment e = parse_experiment(req.experiment);
    std::ifstream in(req.config, std::ios::binary);
    if (!in) throw ValidationError("config", "cannot read " + req.config.string());
    std::stringstream buf;
    buf << in.rdbuf();
    ExperimentConfig c = parse_config(buf.str(), e);
    if (req.seed) c.seed = *req.seed;
    if (req.threads) {
      if (*req.threads < 1) throw ValidationError("threads", "must be >= 1");
      c.threads = *req.threads;
    }
    const RunResult r = run_experiment(c);
    write_outputs(r, req.out);
    if (!r.valid) {
      log << "result invalid: leakage " << format_double(r.leakage) << "\n";
      return 4;
    }
    return 0;
  } catch (const ParseError& err) {
    log << "parse error: " << err.what() << "\n";
    return 2;
  } catch (const ValidationError& err) {
    log << "invalid " << err.field() << ": " << err.what() << "\n";
    return 3;
  } catch (const Error& err) {
    log << "error: " << err.what() << "\n";
    return 3;
  }
}

}  // namespace hybridsim
