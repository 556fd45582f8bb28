#include "nlh/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nlh/errors.hpp"
#include "nlh/nonlocal.hpp"

namespace nlh {

namespace {

double fractional_part(long num, long den) {
  return static_cast<double>(((num % den) + den) % den) / static_cast<double>(den);
}

// Slope bounds on a geometric ladder R_j = 2^{j/4}; rounds R up so the cached value dominates.
class SlopeLadder {
 public:
  explicit SlopeLadder(std::function<double(double)> bound) : bound_(std::move(bound)) {}
  double operator()(double R) {
    const int j = static_cast<int>(std::ceil(4.0 * std::log2(std::max(R, 1e-3))));
    auto it = cache_.find(j);
    if (it != cache_.end()) return it->second;
    const double v = bound_(std::exp2(j / 4.0));
    cache_.emplace(j, v);
    return v;
  }

 private:
  std::function<double(double)> bound_;
  std::map<int, double> cache_;
};

struct GradientRange {
  double R = 0.0;  // max |D^{+-} u|
};

GradientRange gradient_range(const GridFunction& u) {
  const int n = u.size();
  GradientRange g;
  for (int i = 0; i < n; ++i) g.R = std::max(g.R, std::abs(u.at(i + 1) - u[i]) * n);
  return g;
}

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

// Everything the explicit step needs about one problem on one grid.
class Stepper {
 public:
  Stepper(const ParabolicProblem& problem, const SolverConfig& cfg)
      : problem_(problem), cfg_(cfg), n_(cfg.n) {
    if (problem.u0.size() != n_) throw DomainError("u0 must be sampled on the solver grid");
    table_ = periodized_weights(problem.kernel, n_, cfg.image_budget);
    diag_ = table_.diagonal();
    x_.resize(n_);
    for (int i = 0; i < n_; ++i) x_[i] = static_cast<double>(i) / n_;

    if (const auto* osc = std::get_if<OscillatingSource>(&problem.source)) {
      const long k = osc->k;
      y_.resize(n_);
      a_.resize(n_);
      for (int i = 0; i < n_; ++i) {
        y_[i] = fractional_part(k * i, n_);
        a_[i] = osc->a(x_[i], y_[i]);
        if (!(a_[i] > 0.0)) throw DomainError("coefficient a must be positive on the grid");
      }
      coupling_ = *std::max_element(a_.begin(), a_.end());
      const HamiltonianSpec& H = osc->H;
      godunov_ = cfg.flux == FluxKind::godunov;
      if (godunov_ && !H.argmin_p) {
        throw DomainError("godunov flux needs a known minimizer; use lax_friedrichs");
      }
      if (godunov_) {
        qstar_.resize(n_);
        for (int i = 0; i < n_; ++i) {
          qstar_[i] = H.argmin_p(x_[i], y_[i]);
          qstar_max_ = std::max(qstar_max_, std::abs(qstar_[i]));
        }
      }
      slope_ = std::make_unique<SlopeLadder>([H](double R) { return H.slope_bound(R); });
    } else {
      const auto& eff = std::get<EffectiveSource>(problem.source);
      if (!eff.Hbar) throw DomainError("effective problem without a Hamiltonian");
      coupling_ = eff.Hbar->l_slope_bound();
      godunov_ = cfg.flux == FluxKind::godunov && eff.Hbar->argmin_p(0.0, 0.0).has_value();
      auto hb = eff.Hbar;
      slope_ = std::make_unique<SlopeLadder>([hb](double R) { return hb->p_slope_bound(R); });
    }
  }

  // Viscosity / CFL slope for gradients bounded by R. Nondecreasing along a run for LF.
  double theta(double R) {
    double t = (*slope_)(std::max(R, qstar_max_));
    if (!godunov_) {
      t = std::max({t, cfg_.lf_theta, lf_floor_});
      lf_floor_ = t;
    }
    return t;
  }

  double theta_preview(double R) const {
    double t = (*slope_)(std::max(R, qstar_max_));
    if (!godunov_) t = std::max(t, cfg_.lf_theta);
    return t;
  }

  double cfl_dt(double theta) const {
    return cfg_.cfl_safety / (coupling_ * diag_ + theta * n_);
  }

  // rhs_i with u^{n+1} = u^n + dt rhs.
  void rhs(const GridFunction& u, double theta, std::vector<double>& out) const {
    out.resize(n_);
    const double* v = u.values().data();
    if (const auto* osc = std::get_if<OscillatingSource>(&problem_.source)) {
      const HamiltonianSpec& H = osc->H;
      for (int i = 0; i < n_; ++i) {
        const double qm = (v[i] - v[(i - 1 + n_) % n_]) * n_;
        const double qp = (v[(i + 1) % n_] - v[i]) * n_;
        const double xi = x_[i], yi = y_[i];
        auto g = [&](double q) { return H.eval(xi, yi, q); };
        auto dg = [&](double q) { return H.slope(xi, yi, q); };
        const double hval = godunov_ ? godunov_flux(g, dg, qstar_[i], qm, qp).value
                                     : lax_friedrichs_flux(g, dg, theta, qm, qp).value;
        out[i] = a_[i] * eval_operator_at(u, table_, i) - hval;
      }
    } else {
      const auto& hb = *std::get<EffectiveSource>(problem_.source).Hbar;
      for (int i = 0; i < n_; ++i) {
        const double qm = (v[i] - v[(i - 1 + n_) % n_]) * n_;
        const double qp = (v[(i + 1) % n_] - v[i]) * n_;
        const double l = eval_operator_at(u, table_, i);
        const double xi = x_[i];
        auto g = [&](double q) { return hb.value(xi, q, l); };
        auto dg = [&](double q) {
          const double s = 1e-6 * (1.0 + std::abs(q));
          return (hb.value(xi, q + s, l) - hb.value(xi, q - s, l)) / (2.0 * s);
        };
        double hval;
        if (godunov_) {
          hval = godunov_flux(g, dg, *hb.argmin_p(xi, l), qm, qp).value;
        } else {
          hval = lax_friedrichs_flux(g, dg, theta, qm, qp).value;
        }
        out[i] = -hval;
      }
    }
  }

  // sup |a I_h u| and sup |numerical Hamiltonian| at u; the effective kind folds both into the second.
  std::pair<double, double> rate_parts(const GridFunction& u, double theta) const {
    std::vector<double> r;
    rhs(u, theta, r);
    if (!problem_.oscillating()) return {0.0, sup_abs(r)};
    double nl = 0.0, ham = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double li = a_[i] * eval_operator_at(u, table_, i);
      nl = std::max(nl, std::abs(li));
      ham = std::max(ham, std::abs(li - r[i]));
    }
    return {nl, ham};
  }

  bool godunov() const { return godunov_; }
  double coupling() const { return coupling_; }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }
  const std::vector<double>& qstar() const { return qstar_; }

 private:
  const ParabolicProblem& problem_;
  const SolverConfig& cfg_;
  int n_;
  QuadratureTable table_;
  double diag_ = 0.0;
  double coupling_ = 0.0;
  bool godunov_ = false;
  double lf_floor_ = 0.0;
  double qstar_max_ = 0.0;
  std::vector<double> x_, y_, a_, qstar_;
  std::unique_ptr<SlopeLadder> slope_;
};

double h_at_zero(const ParabolicProblem& problem) {
  const int n = problem.u0.size();
  double s = 0.0;
  if (const auto* osc = std::get_if<OscillatingSource>(&problem.source)) {
    constexpr int ny = 256;
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / n;
      s = std::max(s, std::abs(osc->H(x, fractional_part(static_cast<long>(osc->k) * i, n), 0.0)));
      for (int j = 0; j < ny; ++j) s = std::max(s, std::abs(osc->H(x, double(j) / ny, 0.0)));
    }
  } else {
    const auto& hb = *std::get<EffectiveSource>(problem.source).Hbar;
    for (int i = 0; i < n; ++i) s = std::max(s, std::abs(hb.value(double(i) / n, 0.0, 0.0)));
  }
  return s;
}

void validate(const ParabolicProblem& problem, const SolverConfig& cfg) {
  if (!(problem.T > 0.0)) throw DomainError("horizon T must be positive");
  if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0)) throw DomainError("cfl_safety must lie in (0, 1]");
  if (cfg.records < 1) throw DomainError("records must be at least 1");
  if (cfg.n < 8) throw DomainError("grid needs at least 8 nodes");
  for (double v : problem.u0.values()) {
    if (!std::isfinite(v)) throw DomainError("u0 must be finite");
  }
  if (const auto* osc = std::get_if<OscillatingSource>(&problem.source)) {
    if (osc->k < 1) throw DomainError("oscillating runs need eps = 1/k with k a positive integer");
    if (cfg.n < 16 * osc->k) throw DomainError("grid must carry at least 16 nodes per fast period");
    if (!osc->H.eval || !osc->a) throw DomainError("oscillating problem is missing a or H");
  }
}

}  // namespace

double ParabolicProblem::eps() const {
  if (const auto* osc = std::get_if<OscillatingSource>(&source)) return 1.0 / osc->k;
  return 0.0;
}

Trajectory solve(const ParabolicProblem& problem, const SolverConfig& cfg) {
  validate(problem, cfg);
  Stepper stepper(problem, cfg);

  Trajectory traj;
  traj.h_at_zero = h_at_zero(problem);
  GridFunction u = problem.u0;
  std::vector<double> r;

  {
    const double th = stepper.theta(gradient_range(u).R);
    stepper.rhs(u, th, r);
    traj.times.push_back(0.0);
    traj.snapshots.push_back(u);
    traj.sup_norm_track.push_back(u.sup_norm());
    traj.residual_track.push_back(sup_abs(r));
  }

  double t = 0.0;
  traj.dt_min = problem.T;
  traj.dt_max = 0.0;
  for (int rec = 1; rec <= cfg.records; ++rec) {
    const double target = problem.T * rec / cfg.records;
    double residual = 0.0;
    while (t < target * (1.0 - 1e-14)) {
      if (traj.steps >= cfg.max_steps) throw NumericalError("step budget exhausted", traj.steps);
      const double th = stepper.theta(gradient_range(u).R);
      const double limit = stepper.cfl_dt(th);
      double dt = limit;
      if (cfg.dt_override > 0.0) {
        if (cfg.dt_override > limit * (1.0 + 1e-12)) {
          throw DomainError("manual time step violates the CFL bound");
        }
        dt = cfg.dt_override;
      }
      bool last = false;
      if (t + dt >= target * (1.0 - 1e-14)) {
        dt = target - t;
        last = true;
      }
      stepper.rhs(u, th, r);
      auto& v = u.values();
      for (int i = 0; i < cfg.n; ++i) {
        v[i] += dt * r[i];
        if (!std::isfinite(v[i])) throw NumericalError("non-finite value in time stepping", traj.steps);
      }
      residual = sup_abs(r);
      t = last ? target : t + dt;
      ++traj.steps;
      if (!last || dt > 0.0) {
        traj.dt_min = std::min(traj.dt_min, dt);
        traj.dt_max = std::max(traj.dt_max, dt);
      }
    }
    traj.times.push_back(target);
    traj.snapshots.push_back(u);
    traj.sup_norm_track.push_back(u.sup_norm());
    traj.residual_track.push_back(residual);
  }
  return traj;
}

double max_bound(const ParabolicProblem& problem, double t) {
  return problem.u0.sup_norm() + h_at_zero(problem) * t;
}

GridFunction mollify(const GridFunction& u, double radius) {
  if (!(radius > 0.0 && radius <= 1.0)) throw DomainError("mollification radius must lie in (0, 1]");
  const int n = u.size();
  const int reach = std::min(static_cast<int>(std::ceil(radius * n)) - 1, n / 2);
  std::vector<double> w;
  for (int j = -reach; j <= reach; ++j) {
    const double s = j / (radius * n);
    w.push_back(std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0);
  }
  double total = 0.0;
  for (double x : w) total += x;
  GridFunction out(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = -reach; j <= reach; ++j) acc += w[j + reach] * u.at(i + j);
    out[i] = acc / total;
  }
  return out;
}

double sampled_modulus(const GridFunction& u, double radius) {
  const int n = u.size();
  const int reach = std::min(static_cast<int>(std::floor(radius * n + 1e-9)), n / 2);
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j <= reach; ++j) best = std::max(best, std::abs(u.at(i + j) - u[i]));
  }
  return best;
}

GridFunction Barrier::lower(double t) const {
  GridFunction g = u0h;
  g += -(omega0 + C_h * t);
  return g;
}

GridFunction Barrier::upper(double t) const {
  GridFunction g = u0h;
  g += omega0 + C_h * t;
  return g;
}

Barrier barrier_bounds(const ParabolicProblem& problem, const SolverConfig& cfg, double radius) {
  validate(problem, cfg);
  Stepper stepper(problem, cfg);
  Barrier b;
  b.radius = radius;
  b.u0h = mollify(problem.u0, radius);
  b.omega0 = sampled_modulus(problem.u0, radius);
  const double G = gradient_range(b.u0h).R;
  // LF viscosity of the run is fixed by u0, not by u0h.
  const double theta = stepper.theta_preview(std::max(G, gradient_range(problem.u0).R));
  auto [nl, ham] = stepper.rate_parts(b.u0h, theta);
  if (const auto* osc = std::get_if<OscillatingSource>(&problem.source)) {
    double q = G;
    for (double qs : stepper.qstar()) q = std::max(q, std::abs(qs));
    AuditBudget budget;
    budget.p_max = std::max(budget.p_max, q);
    double grown = growth_bound(osc->H, budget) * (1.0 + std::pow(q, osc->H.m));
    if (!stepper.godunov()) grown += theta * G;
    ham = std::max(ham, grown);
  }
  b.nonlocal_part = nl;
  b.hamiltonian_part = ham;
  b.C_h = nl + ham;
  return b;
}

std::vector<LayerPoint> initial_layer_modulus(const Trajectory& traj, const GridFunction& u0) {
  std::vector<LayerPoint> out;
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    out.push_back({traj.times[j], (traj.snapshots[j] - u0).sup_norm()});
  }
  return out;
}

namespace {

double layer_alpha(const ParabolicProblem& problem) {
  if (const auto* osc = std::get_if<OscillatingSource>(&problem.source)) return std::max(2.0, osc->H.m);
  return 2.0;
}

}  // namespace

double initial_layer_bound(const ParabolicProblem& problem, const SolverConfig& cfg, double t) {
  if (!(t > 0.0)) return 0.0;
  const double alpha = layer_alpha(problem);
  const double radius = std::min(1.0, std::pow(t, 1.0 / (2.0 * alpha)));
  const Barrier b = barrier_bounds(problem, cfg, radius);
  return 2.0 * b.omega0 + b.C_h * t;
}

double layer_constant_C3(const ParabolicProblem& problem, const SolverConfig& cfg,
                         const std::vector<double>& radii) {
  const double alpha = layer_alpha(problem);
  double c3 = 0.0;
  for (double r : radii) c3 = std::max(c3, barrier_bounds(problem, cfg, r).C_h * std::pow(r, alpha));
  return c3;
}

SupConvolution sup_convolution_time(const std::vector<std::vector<double>>& u,
                                    const std::vector<double>& times, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  const std::size_t nt = times.size();
  for (std::size_t k = 1; k < nt; ++k) {
    if (!(times[k] > times[k - 1])) throw DomainError("times must be strictly increasing");
  }
  SupConvolution out;
  for (const auto& row : u) {
    if (row.size() != nt) throw DomainError("each row needs one value per time");
    for (double v : row) out.sup_u = std::max(out.sup_u, std::abs(v));
  }
  out.bound = 4.0 * out.sup_u / std::sqrt(gamma);

  // Upper envelope of lines (2 s / gamma) t + u(s) - s^2 / gamma; slopes increase with s.
  std::vector<std::size_t> hull;
  auto intercept = [&](const std::vector<double>& row, std::size_t k) {
    return row[k] - times[k] * times[k] / gamma;
  };
  for (const auto& row : u) {
    hull.clear();
    for (std::size_t k = 0; k < nt; ++k) {
      while (hull.size() >= 2) {
        const std::size_t a = hull[hull.size() - 2], b = hull.back();
        // b is dominated when lines a and k cross no later than a and b.
        const double lhs = (intercept(row, a) - intercept(row, k)) * (times[b] - times[a]);
        const double rhs = (intercept(row, a) - intercept(row, b)) * (times[k] - times[a]);
        if (lhs <= rhs) hull.pop_back(); else break;
      }
      hull.push_back(k);
    }
    std::vector<double> vals(nt);
    std::size_t ptr = 0;
    for (std::size_t q = 0; q < nt; ++q) {
      const double t = times[q];
      auto val = [&](std::size_t k) {
        const double d = times[k] - t;
        return row[k] - d * d / gamma;
      };
      while (ptr + 1 < hull.size() && val(hull[ptr + 1]) >= val(hull[ptr])) ++ptr;
      vals[q] = std::max(val(hull[ptr]), row[q]);
    }
    double lip = 0.0;
    for (std::size_t q = 1; q < nt; ++q) {
      lip = std::max(lip, std::abs(vals[q] - vals[q - 1]) / (times[q] - times[q - 1]));
    }
    out.values.push_back(std::move(vals));
    out.lipschitz.push_back(lip);
  }
  return out;
}

std::vector<std::vector<double>> space_time(const Trajectory& traj) {
  if (traj.snapshots.empty()) return {};
  const int n = traj.snapshots.front().size();
  std::vector<std::vector<double>> m(n, std::vector<double>(traj.snapshots.size()));
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    for (int i = 0; i < n; ++i) m[i][k] = traj.snapshots[k][i];
  }
  return m;
}

double holder_exponent_alpha0(double n, double sigma, double m) {
  if (!(n > 0.0)) throw DomainError("structure exponent n must be positive");
  if (!(m > 1.0)) throw DomainError("exponent m must exceed 1");
  if (!(sigma > 0.0 && sigma <= 1.0)) throw DomainError("order sigma must lie in (0, 1]");
  const double growth_branch = 1.0 - 1.0 / (n * m);
  double second;
  if (sigma == 1.0) {
    second = 1.5 - 0.5 * std::sqrt(1.0 + 2.0 / n);
  } else {
    const double kappa = 4.0 * sigma / (1.0 - sigma);
    const double d = 2.0 - sigma;
    second = (2.0 + sigma - std::sqrt(d * d + 8.0 / (n * (2.0 + kappa)))) / 2.0;
  }
  return std::max({growth_branch, second, 0.0});
}

}  // namespace nlh
