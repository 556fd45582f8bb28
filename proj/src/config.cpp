#include "nlh/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "nlh/errors.hpp"

namespace nlh {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string nearest(const std::string& word, const std::vector<std::string>& options) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& o : options) {
    const std::size_t d = edit_distance(word, o);
    if (d < best_d) {
      best_d = d;
      best = o;
    }
  }
  return best;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Value codecs. parse returns an error message or nothing.
using Error = std::optional<std::string>;

Error parse_value(const std::string& s, double& out) {
  std::size_t used = 0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    return "expected a number, got '" + s + "'";
  }
  if (used != s.size() || !std::isfinite(out)) return "expected a finite number, got '" + s + "'";
  return std::nullopt;
}

Error parse_value(const std::string& s, int& out) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    return "expected an integer, got '" + s + "'";
  }
  if (used != s.size() || v < -2147483647L || v > 2147483647L) {
    return "expected an integer, got '" + s + "'";
  }
  out = static_cast<int>(v);
  return std::nullopt;
}

Error parse_value(const std::string& s, std::string& out) {
  out = s;
  return std::nullopt;
}

Error parse_value(const std::string& s, bool& out) {
  if (s == "true" || s == "yes" || s == "1") {
    out = true;
  } else if (s == "false" || s == "no" || s == "0") {
    out = false;
  } else {
    return "expected true or false, got '" + s + "'";
  }
  return std::nullopt;
}

Error parse_value(const std::string& s, std::optional<double>& out) {
  if (s == "auto") {
    out.reset();
    return std::nullopt;
  }
  double v = 0.0;
  if (auto e = parse_value(s, v)) return std::string(*e) + " or 'auto'";
  out = v;
  return std::nullopt;
}

// Comma list, or start:step:stop inclusive of stop within 1e-9 steps.
Error parse_value(const std::string& s, std::vector<double>& out) {
  out.clear();
  if (std::count(s.begin(), s.end(), ':') == 2) {
    const auto a = s.find(':'), b = s.find(':', a + 1);
    double start = 0, step = 0, stop = 0;
    if (auto e = parse_value(trim(s.substr(0, a)), start)) return e;
    if (auto e = parse_value(trim(s.substr(a + 1, b - a - 1)), step)) return e;
    if (auto e = parse_value(trim(s.substr(b + 1)), stop)) return e;
    if (!(step > 0.0) || stop < start) return "range needs step > 0 and stop >= start";
    const long count = std::lround(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100000) return "range has too many points";
    for (long j = 0; j < count; ++j) out.push_back(start + j * step);
    return std::nullopt;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    if (auto e = parse_value(trim(item), v)) return e;
    out.push_back(v);
  }
  if (out.empty()) return "expected a non-empty list";
  return std::nullopt;
}

Error parse_value(const std::string& s, std::vector<int>& out) {
  out.clear();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    if (auto e = parse_value(trim(item), v)) return e;
    out.push_back(v);
  }
  if (out.empty()) return "expected a non-empty list";
  return std::nullopt;
}

std::string emit_value(double v) { return fmt(v); }
std::string emit_value(int v) { return std::to_string(v); }
std::string emit_value(const std::string& v) { return v; }
std::string emit_value(bool v) { return v ? "true" : "false"; }
std::string emit_value(const std::optional<double>& v) { return v ? fmt(*v) : "auto"; }
std::string emit_value(const std::vector<double>& v) {
  std::string s;
  for (std::size_t j = 0; j < v.size(); ++j) s += (j ? "," : "") + fmt(v[j]);
  return s;
}
std::string emit_value(const std::vector<int>& v) {
  std::string s;
  for (std::size_t j = 0; j < v.size(); ++j) s += (j ? "," : "") + std::to_string(v[j]);
  return s;
}

struct Key {
  std::string section;
  std::string name;
  std::function<Error(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class S, class T>
Key bind_key(std::string section, std::string name, S RunConfig::*sec, T S::*field) {
  return Key{std::move(section), std::move(name),
             [sec, field](RunConfig& c, const std::string& v) { return parse_value(v, c.*sec.*field); },
             [sec, field](const RunConfig& c) { return emit_value(c.*sec.*field); }};
}

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = [] {
    using R = RunConfig;
    std::vector<Key> k;
    k.push_back(bind_key("kernel", "family", &R::kernel, &KernelSection::family));
    k.push_back(bind_key("kernel", "sigma", &R::kernel, &KernelSection::sigma));
    k.push_back(bind_key("kernel", "slope", &R::kernel, &KernelSection::slope));
    k.push_back(bind_key("kernel", "table", &R::kernel, &KernelSection::table));
    k.push_back(bind_key("kernel", "image_budget", &R::kernel, &KernelSection::image_budget));
    k.push_back(bind_key("kernel", "audit_points", &R::kernel, &KernelSection::audit_points));
    k.push_back(bind_key("kernel", "drift_tol", &R::kernel, &KernelSection::drift_tol));
    k.push_back(bind_key("coefficient_a", "profile", &R::coefficient_a, &CoefficientSection::profile));
    k.push_back(bind_key("coefficient_a", "scale", &R::coefficient_a, &CoefficientSection::scale));
    k.push_back(bind_key("hamiltonian", "model", &R::hamiltonian, &HamiltonianSection::model));
    k.push_back(bind_key("hamiltonian", "m", &R::hamiltonian, &HamiltonianSection::m));
    k.push_back(bind_key("hamiltonian", "b", &R::hamiltonian, &HamiltonianSection::b));
    k.push_back(bind_key("hamiltonian", "b_scale", &R::hamiltonian, &HamiltonianSection::b_scale));
    k.push_back(bind_key("hamiltonian", "f", &R::hamiltonian, &HamiltonianSection::f));
    k.push_back(bind_key("hamiltonian", "f_scale", &R::hamiltonian, &HamiltonianSection::f_scale));
    k.push_back(bind_key("hamiltonian", "b0", &R::hamiltonian, &HamiltonianSection::b0));
    k.push_back(bind_key("hamiltonian", "C0", &R::hamiltonian, &HamiltonianSection::C0));
    k.push_back(bind_key("hamiltonian", "L", &R::hamiltonian, &HamiltonianSection::L));
    k.push_back(bind_key("hamiltonian", "p_max", &R::hamiltonian, &HamiltonianSection::p_max));
    k.push_back(bind_key("hamiltonian", "samples", &R::hamiltonian, &HamiltonianSection::samples));
    k.push_back(bind_key("hamiltonian", "flux", &R::hamiltonian, &HamiltonianSection::flux));
    k.push_back(bind_key("hamiltonian", "lf_theta", &R::hamiltonian, &HamiltonianSection::lf_theta));
    k.push_back(bind_key("grid", "problem", &R::grid, &GridSection::problem));
    k.push_back(bind_key("grid", "n", &R::grid, &GridSection::n));
    k.push_back(bind_key("grid", "T", &R::grid, &GridSection::T));
    k.push_back(bind_key("grid", "cfl_safety", &R::grid, &GridSection::cfl_safety));
    k.push_back(bind_key("grid", "records", &R::grid, &GridSection::records));
    k.push_back(bind_key("grid", "u0", &R::grid, &GridSection::u0));
    k.push_back(bind_key("grid", "u0_scale", &R::grid, &GridSection::u0_scale));
    k.push_back(bind_key("grid", "k", &R::grid, &GridSection::k));
    k.push_back(bind_key("cell", "method", &R::cell, &CellSection::method));
    k.push_back(bind_key("cell", "x", &R::cell, &CellSection::x));
    k.push_back(bind_key("cell", "p", &R::cell, &CellSection::p));
    k.push_back(bind_key("cell", "l", &R::cell, &CellSection::l));
    k.push_back(bind_key("cell", "n", &R::cell, &CellSection::n));
    k.push_back(bind_key("cell", "delta_min", &R::cell, &CellSection::delta_min));
    k.push_back(bind_key("cell", "delta_max", &R::cell, &CellSection::delta_max));
    k.push_back(bind_key("cell", "tol", &R::cell, &CellSection::tol));
    k.push_back(bind_key("cell", "T_max", &R::cell, &CellSection::T_max));
    k.push_back(bind_key("cell", "x_axis", &R::cell, &CellSection::x_axis));
    k.push_back(bind_key("cell", "p_axis", &R::cell, &CellSection::p_axis));
    k.push_back(bind_key("cell", "l_axis", &R::cell, &CellSection::l_axis));
    k.push_back(bind_key("cell", "table", &R::cell, &CellSection::table));
    k.push_back(bind_key("sweep", "k_list", &R::sweep, &SweepSection::k_list));
    k.push_back(bind_key("sweep", "n_coarse", &R::sweep, &SweepSection::n_coarse));
    k.push_back(bind_key("sweep", "points_per_period", &R::sweep, &SweepSection::points_per_period));
    k.push_back(bind_key("sweep", "corrector", &R::sweep, &SweepSection::corrector));
    k.push_back(bind_key("output", "dir", &R::output, &OutputSection::dir));
    k.push_back(bind_key("output", "prefix", &R::output, &OutputSection::prefix));
    return k;
  }();
  return keys;
}

std::vector<std::string> sections() {
  std::vector<std::string> out;
  for (const auto& k : registry()) {
    if (std::find(out.begin(), out.end(), k.section) == out.end()) out.push_back(k.section);
  }
  return out;
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options) {
    if (v == o) return true;
  }
  return false;
}

bool increasing(const std::vector<double>& v) {
  if (v.empty()) return false;
  for (std::size_t j = 1; j < v.size(); ++j) {
    if (!(v[j] > v[j - 1])) return false;
  }
  return true;
}

void validate(const RunConfig& c, bool run_audits, std::vector<std::string>& errors) {
  auto fail = [&](const std::string& key, const std::string& msg) { errors.push_back(key + ": " + msg); };
  const auto& k = c.kernel;
  if (!one_of(k.family, {"constant", "tilt", "quadratic_tilt", "log_tilt", "table"})) {
    fail("kernel.family", "unknown family '" + k.family + "'");
  }
  if (!(k.sigma > 0.0 && k.sigma < 2.0)) fail("kernel.sigma", "must lie in (0, 2)");
  if (k.family == "table" && k.table.empty()) fail("kernel.table", "required for the table family");
  if (k.image_budget < 1) fail("kernel.image_budget", "must be at least 1");
  if (k.audit_points < 64) fail("kernel.audit_points", "must be at least 64");
  if (!(k.drift_tol > 0.0)) fail("kernel.drift_tol", "must be positive");

  try {
    const Profile a = Profile::parse(c.coefficient_a.profile, c.coefficient_a.scale);
    if (!(a.inf() > 0.0)) fail("coefficient_a", "profile times scale must be positive");
  } catch (const DomainError& e) {
    fail("coefficient_a.profile", e.what());
  }

  const auto& h = c.hamiltonian;
  if (h.model != "power") fail("hamiltonian.model", "only the power model is built in");
  if (!(h.m > 1.0)) fail("hamiltonian.m", "must exceed 1");
  try {
    const Profile b = Profile::parse(h.b, h.b_scale);
    if (!(b.inf() > 0.0)) fail("hamiltonian.b", "coefficient b times b_scale must be positive");
  } catch (const DomainError& e) {
    fail("hamiltonian.b", e.what());
  }
  try {
    Profile::parse(h.f, h.f_scale);
  } catch (const DomainError& e) {
    fail("hamiltonian.f", e.what());
  }
  if (h.b0 && !(*h.b0 > 0.0)) fail("hamiltonian.b0", "must be positive");
  if (h.C0 && !(*h.C0 >= 0.0)) fail("hamiltonian.C0", "must be nonnegative");
  if (h.L && !(*h.L > 0.0)) fail("hamiltonian.L", "must be positive");
  if (!(h.p_max > 0.0)) fail("hamiltonian.p_max", "must be positive");
  if (h.samples < 4) fail("hamiltonian.samples", "must be at least 4");
  if (!one_of(h.flux, {"godunov", "lax_friedrichs"})) fail("hamiltonian.flux", "godunov or lax_friedrichs");
  if (!(h.lf_theta >= 0.0)) fail("hamiltonian.lf_theta", "must be nonnegative");

  const auto& g = c.grid;
  if (!one_of(g.problem, {"oscillating", "effective"})) fail("grid.problem", "oscillating or effective");
  if (g.n < 8) fail("grid.n", "must be at least 8");
  if (!(g.T > 0.0)) fail("grid.T", "must be positive");
  if (!(g.cfl_safety > 0.0 && g.cfl_safety <= 1.0)) fail("grid.cfl_safety", "must lie in (0, 1]");
  if (g.records < 1) fail("grid.records", "must be at least 1");
  if (!one_of(g.u0, {"sin", "cos", "constant"})) fail("grid.u0", "sin, cos or constant");
  if (g.k < 1) fail("grid.k", "must be a positive integer (eps = 1/k)");
  if (g.problem == "oscillating" && g.k >= 1 && g.n < 16 * g.k) {
    fail("grid.n", "needs at least 16 nodes per fast period (16 k)");
  }

  const auto& cl = c.cell;
  if (!one_of(cl.method, {"discount", "longtime", "formula"})) fail("cell.method", "discount, longtime or formula");
  if (cl.method == "formula" && !(k.sigma > 1.0)) fail("cell.method", "formula needs kernel.sigma > 1");
  if (cl.n < 8) fail("cell.n", "must be at least 8");
  if (!(cl.delta_min > 0.0 && cl.delta_max >= cl.delta_min)) fail("cell.delta_min", "need 0 < delta_min <= delta_max");
  if (!(cl.tol > 0.0)) fail("cell.tol", "must be positive");
  if (!(cl.T_max > 0.0)) fail("cell.T_max", "must be positive");
  if (!increasing(cl.x_axis)) fail("cell.x_axis", "must be strictly increasing");
  if (!increasing(cl.p_axis)) fail("cell.p_axis", "must be strictly increasing");
  if (!increasing(cl.l_axis)) fail("cell.l_axis", "must be strictly increasing");

  const auto& s = c.sweep;
  bool ks_ok = !s.k_list.empty();
  for (std::size_t j = 0; j < s.k_list.size(); ++j) {
    if (s.k_list[j] < 1 || (j > 0 && s.k_list[j] <= s.k_list[j - 1])) ks_ok = false;
  }
  if (!ks_ok) fail("sweep.k_list", "must be strictly increasing positive integers");
  if (s.n_coarse < 8) fail("sweep.n_coarse", "must be at least 8");
  if (s.points_per_period < 16) fail("sweep.points_per_period", "must be at least 16");
  if (ks_ok && s.n_coarse >= 8) {
    for (int kk : s.k_list) {
      if ((s.points_per_period * kk) % s.n_coarse != 0) {
        fail("sweep.n_coarse", "must divide points_per_period * k for every k");
        break;
      }
    }
  }
  if (c.output.prefix.empty()) fail("output.prefix", "must not be empty");

  if (run_audits && errors.empty() && k.sigma == 1.0) {
    try {
      const KernelSpec spec = build_kernel(c);
      const AuditGrid grid{64, 256, k.audit_points, 8.0};
      const EllipticityAudit audit = audit_ellipticity(build_coefficient(c), spec, grid);
      if (audit.dini_checked && !audit.dini.finite) {
        fail("kernel.family", "sigma = 1 nonsymmetric kernel fails the modulus integrability audit "
                              "(audit_ellipticity)");
      }
    } catch (const std::exception& e) {
      fail("kernel", e.what());
    }
  }
}

}  // namespace

ConfigResult parse_config_text(const std::string& text, bool run_audits) {
  ConfigResult res;
  std::set<std::string> seen;
  const auto secs = sections();
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      res.errors.push_back(where + "expected 'section.key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      res.errors.push_back(where + "key '" + key + "' lacks a section (nearest section: " +
                           nearest(key, secs) + ")");
      continue;
    }
    const std::string section = key.substr(0, dot), name = key.substr(dot + 1);
    if (std::find(secs.begin(), secs.end(), section) == secs.end()) {
      res.errors.push_back(where + "unknown key '" + key + "' (nearest section: " +
                           nearest(section, secs) + ")");
      continue;
    }
    const Key* match = nullptr;
    std::vector<std::string> names;
    for (const auto& k : registry()) {
      if (k.section != section) continue;
      names.push_back(k.name);
      if (k.name == name) match = &k;
    }
    if (!match) {
      res.errors.push_back(where + "unknown key '" + key + "' in section " + section +
                           " (nearest key: " + section + "." + nearest(name, names) + ")");
      continue;
    }
    if (!seen.insert(key).second) {
      res.errors.push_back(where + "duplicate key '" + key + "'");
      continue;
    }
    if (auto e = match->set(res.config, value)) res.errors.push_back(where + key + ": " + *e);
  }
  if (res.errors.empty()) validate(res.config, run_audits, res.errors);
  return res;
}

ConfigResult parse_config(const std::string& path, bool run_audits) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), run_audits);
}

std::string emit_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : registry()) out += k.section + "." + k.name + " = " + k.get(config) + "\n";
  return out;
}

std::vector<std::string> config_echo(const RunConfig& config) {
  std::vector<std::string> lines;
  for (const auto& k : registry()) lines.push_back(k.section + "." + k.name + " = " + k.get(config));
  return lines;
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& k : registry()) out.push_back(k.section + "." + k.name);
  return out;
}

KernelSpec build_kernel(const RunConfig& c) {
  const auto& k = c.kernel;
  if (k.family == "constant") return constant_kernel(k.sigma);
  if (k.family == "tilt") return tilt_kernel(k.sigma, k.slope);
  if (k.family == "quadratic_tilt") return quadratic_tilt_kernel(k.sigma, k.slope);
  if (k.family == "log_tilt") return log_tilt_kernel(k.sigma, k.slope);
  if (k.family == "table") return load_kernel_csv(k.sigma, k.table);
  throw DomainError("unknown kernel family '" + k.family + "'");
}

Coefficient build_coefficient(const RunConfig& c) {
  const Profile a = Profile::parse(c.coefficient_a.profile, c.coefficient_a.scale);
  return [a](double x, double y) { return a(x, y); };
}

HamiltonianSpec build_hamiltonian(const RunConfig& c) {
  const auto& h = c.hamiltonian;
  HamiltonianSpec spec = power_model(Profile::parse(h.b, h.b_scale), Profile::parse(h.f, h.f_scale), h.m);
  if (h.b0) spec.b0 = *h.b0;
  if (h.C0) spec.C0 = *h.C0;
  if (h.L) spec.L = *h.L;
  return spec;
}

std::function<double(double)> build_u0_function(const RunConfig& c) {
  const double s = c.grid.u0_scale;
  const std::string kind = c.grid.u0;
  if (kind == "sin") return [s](double x) { return s * std::sin(2.0 * std::numbers::pi * x); };
  if (kind == "cos") return [s](double x) { return s * std::cos(2.0 * std::numbers::pi * x); };
  if (kind == "constant") return [s](double) { return s; };
  throw DomainError("unknown initial datum '" + kind + "'");
}

GridFunction build_u0(const RunConfig& c, int n) { return GridFunction::sample(n, build_u0_function(c)); }

CellModel build_cell_model(const RunConfig& c) {
  return CellModel{build_coefficient(c), build_hamiltonian(c), c.kernel.sigma};
}

CellConfig build_cell_config(const RunConfig& c) {
  CellConfig cc;
  cc.n = c.cell.n;
  cc.delta_min = c.cell.delta_min;
  cc.delta_max = c.cell.delta_max;
  cc.tol = c.cell.tol;
  cc.image_budget = c.kernel.image_budget;
  return cc;
}

SolverConfig build_solver_config(const RunConfig& c) {
  SolverConfig s;
  s.n = c.grid.n;
  s.cfl_safety = c.grid.cfl_safety;
  s.flux = c.hamiltonian.flux == "godunov" ? FluxKind::godunov : FluxKind::lax_friedrichs;
  s.lf_theta = c.hamiltonian.lf_theta;
  s.records = c.grid.records;
  s.image_budget = c.kernel.image_budget;
  return s;
}

EffectiveAxes build_axes(const RunConfig& c) {
  EffectiveAxes ax;
  ax.x = c.cell.x_axis;
  ax.p = c.cell.p_axis;
  ax.l = c.cell.l_axis;
  return ax;
}

}  // namespace nlh
