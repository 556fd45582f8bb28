#include "nlh/effective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "nlh/parallel.hpp"

namespace nlh {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Periodic trapezoid rule: spectrally accurate for smooth 1-periodic integrands.
template <class F>
double torus_mean(F&& f, int samples) {
  double s = 0.0;
  for (int j = 0; j < samples; ++j) s += f(static_cast<double>(j) / samples);
  return s / samples;
}

struct Bracket {
  std::size_t lo = 0;
  double w = 0.0;  // weight of lo + 1
};

Bracket locate(const std::vector<double>& axis, double v, const char* name) {
  constexpr double slack = 1e-12;
  if (axis.size() == 1) {
    if (std::abs(v - axis[0]) > slack * (1.0 + std::abs(v))) {
      throw RangeError(std::string("query outside the tabulated ") + name + " range");
    }
    return {0, 0.0};
  }
  if (v < axis.front() - slack || v > axis.back() + slack) {
    throw RangeError(std::string("query outside the tabulated ") + name + " range");
  }
  v = std::clamp(v, axis.front(), axis.back());
  auto it = std::upper_bound(axis.begin(), axis.end(), v);
  std::size_t hi = std::min<std::size_t>(it - axis.begin(), axis.size() - 1);
  std::size_t lo = hi - 1;
  return {lo, (v - axis[lo]) / (axis[hi] - axis[lo])};
}

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) throw DomainError(std::string("axis ") + name + " is empty");
  for (std::size_t j = 0; j < axis.size(); ++j) {
    if (!std::isfinite(axis[j])) throw DomainError(std::string("axis ") + name + " is not finite");
    if (j > 0 && !(axis[j] > axis[j - 1])) {
      throw DomainError(std::string("axis ") + name + " must be strictly increasing");
    }
  }
}

}  // namespace

double explicit_formula_above_one(const Coefficient& a, const HamiltonianSpec& h, double x,
                                  double p, double l, int samples) {
  if (samples < 8) throw DomainError("formula quadrature needs at least 8 samples");
  double inv = 0.0, weighted = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double y = static_cast<double>(j) / samples;
    const double ay = a(x, y);
    if (!(ay > 0.0)) throw DomainError("coefficient a must be positive");
    inv += 1.0 / ay;
    weighted += h(x, y, p) / ay;
  }
  inv /= samples;
  weighted /= samples;
  return (weighted - l) / inv;
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::discount: return "discount";
    case Provenance::longtime: return "longtime";
    case Provenance::formula: return "formula";
  }
  return "unknown";
}

Provenance parse_provenance(const std::string& s) {
  if (s == "discount") return Provenance::discount;
  if (s == "longtime") return Provenance::longtime;
  if (s == "formula") return Provenance::formula;
  throw DomainError("unknown provenance '" + s + "'");
}

int EffectiveTable::failed_nodes() const {
  return static_cast<int>(std::count(converged.begin(), converged.end(), false));
}

EffectiveTable tabulate(const CellModel& model, const EffectiveAxes& axes,
                        const TabulateOptions& opts) {
  check_axis(axes.x, "x");
  check_axis(axes.p, "p");
  check_axis(axes.l, "l");
  const Regime regime = regime_of(model.sigma);
  if (opts.source == Provenance::formula && regime != Regime::above_one) {
    throw DomainError("the closed-form effective Hamiltonian needs sigma > 1");
  }

  EffectiveTable t;
  t.axes = axes;
  const std::size_t count = axes.x.size() * axes.p.size() * axes.l.size();
  t.values.assign(count, kNaN);
  t.errors.assign(count, kNaN);
  t.provenance.assign(count, opts.source);
  t.converged.assign(count, false);
  std::vector<char> ok(count, 0);

  parallel_for(static_cast<int>(count), opts.threads, [&](int node) {
    const std::size_t il = node % axes.l.size();
    const std::size_t ip = (node / axes.l.size()) % axes.p.size();
    const std::size_t ix = node / (axes.l.size() * axes.p.size());
    CellParams params;
    params.x = axes.x[ix];
    params.p = axes.p[ip];
    params.l = axes.l[il];
    params.regime = regime;
    params.drift_b = opts.drift_b;
    try {
      switch (opts.source) {
        case Provenance::formula:
          t.values[node] = explicit_formula_above_one(model.a, model.H, params.x, params.p, params.l);
          t.errors[node] = 0.0;
          break;
        case Provenance::discount: {
          const CellSolution sol = solve_cell(model, params, opts.cell);
          t.values[node] = sol.H_bar;
          t.errors[node] = sol.spread;
          break;
        }
        case Provenance::longtime: {
          const LongTimeEstimate est = long_time_average(model, params, opts.T_max, opts.cell);
          t.values[node] = est.H_bar;
          t.errors[node] = est.error;
          break;
        }
      }
      ok[node] = 1;
    } catch (const NumericalError&) {
      t.values[node] = kNaN;
      t.errors[node] = kNaN;
    }
  });
  for (std::size_t j = 0; j < count; ++j) t.converged[j] = ok[j] != 0;
  return t;
}

double query(const EffectiveTable& table, double x, double p, double l) {
  const auto& ax = table.axes;
  // A single x node makes the table x-independent.
  const Bracket bx = ax.x.size() == 1 ? Bracket{0, 0.0} : locate(ax.x, x, "x");
  const Bracket bp = locate(ax.p, p, "p");
  const Bracket bl = locate(ax.l, l, "l");
  double acc = 0.0;
  for (int cx = 0; cx < 2; ++cx) {
    const double wx = cx ? bx.w : 1.0 - bx.w;
    if (wx == 0.0) continue;
    for (int cp = 0; cp < 2; ++cp) {
      const double wp = cp ? bp.w : 1.0 - bp.w;
      if (wp == 0.0) continue;
      for (int cl = 0; cl < 2; ++cl) {
        const double wl = cl ? bl.w : 1.0 - bl.w;
        if (wl == 0.0) continue;
        const std::size_t k = table.index(bx.lo + cx, bp.lo + cp, bl.lo + cl);
        if (!table.converged[k]) throw NumericalError("query touches an unconverged table node");
        acc += wx * wp * wl * table.values[k];
      }
    }
  }
  return acc;
}

PropertyAudit audit_properties(const EffectiveTable& table, const PropertyClaims& claims) {
  const auto& ax = table.axes;
  const double m = claims.m;
  PropertyAudit r;
  r.structure_n = m - 1.0;
  auto growth = [&](double p, double l) { return 1.0 + std::abs(l) + std::pow(std::abs(p), m); };
  auto usable = [&](std::size_t k) { return static_cast<bool>(table.converged[k]); };

  for (std::size_t ix = 0; ix < ax.x.size(); ++ix) {
    for (std::size_t ip = 0; ip < ax.p.size(); ++ip) {
      for (std::size_t il = 0; il < ax.l.size(); ++il) {
        const std::size_t k = table.index(ix, ip, il);
        if (!usable(k)) continue;
        const double v = table.values[k];
        const double p = ax.p[ip], l = ax.l[il];

        const double slack = v + claims.a_sup * std::abs(l) + claims.C - claims.b0 * std::pow(std::abs(p), m);
        if (ix == 0 && ip == 0 && il == 0) r.worst_coercivity_slack = slack;
        r.worst_coercivity_slack = std::min(r.worst_coercivity_slack, slack);
        if (slack < -1e-12) ++r.coercivity_violations;

        if (il + 1 < ax.l.size() && usable(table.index(ix, ip, il + 1))) {
          const double d = table.values[table.index(ix, ip, il + 1)] - v;
          r.worst_l_increase = std::max(r.worst_l_increase, d);
          if (d > 1e-8) ++r.monotonicity_violations;
          r.C_l = std::max(r.C_l, std::abs(d) / (ax.l[il + 1] - l));
        }
        if (ip + 1 < ax.p.size() && usable(table.index(ix, ip + 1, il))) {
          const double d = table.values[table.index(ix, ip + 1, il)] - v;
          const double g = std::max(growth(p, l), growth(ax.p[ip + 1], l));
          r.C_p = std::max(r.C_p, std::abs(d) / ((ax.p[ip + 1] - p) * std::pow(g, m - 1.0)));
        }
        if (ix + 1 < ax.x.size() && usable(table.index(ix + 1, ip, il))) {
          const double d = table.values[table.index(ix + 1, ip, il)] - v;
          r.C_x = std::max(r.C_x, std::abs(d) / ((ax.x[ix + 1] - ax.x[ix]) * std::pow(growth(p, l), m)));
        }
      }
    }
  }
  r.C_continuity = std::max({r.C_l, r.C_x, r.C_p});
  r.pass = r.monotonicity_violations == 0 && r.coercivity_violations == 0;
  return r;
}

CsvTable table_to_csv(const EffectiveTable& table, const std::vector<std::string>& comments) {
  CsvTable out;
  out.comments = comments;
  out.header = {"x", "p", "l", "H_bar", "err", "provenance"};
  const auto& ax = table.axes;
  for (std::size_t ix = 0; ix < ax.x.size(); ++ix) {
    for (std::size_t ip = 0; ip < ax.p.size(); ++ip) {
      for (std::size_t il = 0; il < ax.l.size(); ++il) {
        const std::size_t k = table.index(ix, ip, il);
        out.rows.push_back({ax.x[ix], ax.p[ip], ax.l[il], table.values[k], table.errors[k],
                            to_string(table.provenance[k])});
      }
    }
  }
  return out;
}

void save_table_csv(const EffectiveTable& table, const std::string& path,
                    const std::vector<std::string>& comments) {
  write_csv(path, table_to_csv(table, comments));
}

EffectiveTable load_table_csv(const std::string& path) {
  const CsvText csv = read_csv(path);
  const int cx = csv.column("x"), cp = csv.column("p"), cl = csv.column("l");
  const int cv = csv.column("H_bar"), ce = csv.column("err"), cs = csv.column("provenance");
  std::set<double> xs, ps, ls;
  for (const auto& row : csv.rows) {
    xs.insert(parse_double(row[cx]));
    ps.insert(parse_double(row[cp]));
    ls.insert(parse_double(row[cl]));
  }
  EffectiveTable t;
  t.axes.x.assign(xs.begin(), xs.end());
  t.axes.p.assign(ps.begin(), ps.end());
  t.axes.l.assign(ls.begin(), ls.end());
  const std::size_t count = xs.size() * ps.size() * ls.size();
  if (csv.rows.size() != count) throw IoError("table in " + path + " is not a full tensor grid");
  t.values.assign(count, kNaN);
  t.errors.assign(count, kNaN);
  t.provenance.assign(count, Provenance::discount);
  t.converged.assign(count, false);
  std::vector<bool> seen(count, false);
  auto pos = [](const std::vector<double>& axis, double v) {
    return static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), v) - axis.begin());
  };
  for (const auto& row : csv.rows) {
    const std::size_t k = t.index(pos(t.axes.x, parse_double(row[cx])), pos(t.axes.p, parse_double(row[cp])),
                                  pos(t.axes.l, parse_double(row[cl])));
    if (seen[k]) throw IoError("duplicate table node in " + path);
    seen[k] = true;
    t.values[k] = parse_double(row[cv]);
    t.errors[k] = parse_double(row[ce]);
    try {
      t.provenance[k] = parse_provenance(row[cs]);
    } catch (const DomainError& e) {
      throw IoError(e.what());
    }
    t.converged[k] = std::isfinite(t.values[k]);
  }
  return t;
}

TableHamiltonian::TableHamiltonian(EffectiveTable table) : table_(std::move(table)) {
  const auto& ax = table_.axes;
  if (ax.p.size() < 2 || ax.l.size() < 2) {
    throw DomainError("a table driving the solver needs at least two p and two l nodes");
  }
  for (std::size_t ix = 0; ix < ax.x.size(); ++ix) {
    for (std::size_t ip = 0; ip < ax.p.size(); ++ip) {
      for (std::size_t il = 0; il < ax.l.size(); ++il) {
        const double v = table_.values[table_.index(ix, ip, il)];
        if (il + 1 < ax.l.size()) {
          const double d = table_.values[table_.index(ix, ip, il + 1)] - v;
          if (std::isfinite(d)) l_slope_ = std::max(l_slope_, std::abs(d) / (ax.l[il + 1] - ax.l[il]));
        }
        if (ip + 1 < ax.p.size()) {
          const double d = table_.values[table_.index(ix, ip + 1, il)] - v;
          if (std::isfinite(d)) p_slope_ = std::max(p_slope_, std::abs(d) / (ax.p[ip + 1] - ax.p[ip]));
        }
      }
    }
  }
}

FormulaHamiltonian::FormulaHamiltonian(Coefficient a, HamiltonianSpec h, int samples)
    : a_(std::move(a)), h_(std::move(h)), samples_(samples) {
  if (samples_ < 8) throw DomainError("formula quadrature needs at least 8 samples");
  model_ = h_.coefficient_b.has_value() && h_.source_f.has_value();
  // Sampled over x with a margin; exact when nothing depends on x.
  const bool x_dep = h_.depends_on_x() || [&] {
    for (int j = 0; j < 16; ++j) {
      if (a_(j / 16.0, 0.3) != a_(0.0, 0.3)) return true;
    }
    return false;
  }();
  const int nx = x_dep ? 256 : 1;
  double A_max = 0.0, slope_max = 0.0;
  for (int i = 0; i < nx; ++i) {
    const Moments mo = moments(static_cast<double>(i) / nx);
    A_max = std::max(A_max, mo.A);
    slope_max = std::max(slope_max, mo.A * mo.beta);
  }
  const double margin = x_dep ? 1.05 : 1.0;
  l_slope_ = A_max * margin;
  p_scale_ = slope_max * margin;
}

FormulaHamiltonian::Moments FormulaHamiltonian::moments(double x) const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(x);
    if (it != cache_.end()) return it->second;
  }
  Moments mo;
  double inv = 0.0, beta = 0.0, phi = 0.0;
  for (int j = 0; j < samples_; ++j) {
    const double y = static_cast<double>(j) / samples_;
    const double ay = a_(x, y);
    if (!(ay > 0.0)) throw DomainError("coefficient a must be positive");
    inv += 1.0 / ay;
    if (model_) {
      beta += (*h_.coefficient_b)(x, y) / ay;
      phi += (*h_.source_f)(x, y) / ay;
    }
  }
  mo.A = samples_ / inv;
  mo.beta = beta / samples_;
  mo.phi = phi / samples_;
  std::lock_guard<std::mutex> lock(cache_mutex_);
  cache_.emplace(x, mo);
  return mo;
}

double FormulaHamiltonian::value(double x, double p, double l) const {
  if (!model_) return explicit_formula_above_one(a_, h_, x, p, l, samples_);
  const Moments mo = moments(x);
  return mo.A * (mo.beta * std::pow(std::abs(p), h_.m) - mo.phi - l);
}

double FormulaHamiltonian::p_slope_bound(double R) const {
  // |dHbar/dp| = A |int H_p / a| <= sup |H_p|.
  if (!model_) return h_.slope_bound(R);
  return p_scale_ * h_.m * std::pow(std::max(R, 0.0), h_.m - 1.0);
}

std::optional<double> FormulaHamiltonian::argmin_p(double, double) const {
  if (model_) return 0.0;
  return std::nullopt;
}

}  // namespace nlh
