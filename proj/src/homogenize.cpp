#include "nlh/homogenize.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "nlh/errors.hpp"
#include "nlh/nonlocal.hpp"
#include "nlh/parallel.hpp"

namespace nlh {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SolverConfig solver_config(const SweepConfig& cfg, int n) {
  SolverConfig s;
  s.n = n;
  s.cfl_safety = cfg.cfl_safety;
  s.flux = cfg.flux;
  s.records = cfg.records;
  s.image_budget = cfg.image_budget;
  return s;
}

}  // namespace

double corrector_exponent(double sigma) { return std::max(1.0, sigma); }

SweepReport run_sweep(const SweepProblem& problem, const SweepConfig& cfg) {
  if (cfg.k_list.empty()) throw DomainError("sweep needs at least one eps");
  for (std::size_t j = 0; j < cfg.k_list.size(); ++j) {
    if (cfg.k_list[j] < 1) throw DomainError("eps must be 1/k with k a positive integer");
    if (j > 0 && !(cfg.k_list[j] > cfg.k_list[j - 1])) throw DomainError("eps must strictly decrease");
  }
  if (!problem.Hbar) throw DomainError("sweep needs an effective Hamiltonian");
  if (cfg.points_per_period < 16) throw DomainError("points_per_period must be at least 16");
  if (cfg.n_coarse < 8) throw DomainError("coarse grid needs at least 8 nodes");
  for (int k : cfg.k_list) {
    if ((cfg.points_per_period * k) % cfg.n_coarse != 0) {
      throw DomainError("coarse grid must divide every fine grid");
    }
  }

  SweepReport report;
  report.entries.resize(cfg.k_list.size());
  for (int r = 0; r <= cfg.records; ++r) report.times.push_back(problem.T * r / cfg.records);

  parallel_for(static_cast<int>(cfg.k_list.size()), cfg.threads, [&](int j) {
    SweepEntry& e = report.entries[j];
    const auto start = std::chrono::steady_clock::now();
    e.k = cfg.k_list[j];
    e.eps = 1.0 / e.k;
    e.n = cfg.points_per_period * e.k;
    try {
      const SolverConfig scfg = solver_config(cfg, e.n);
      const GridFunction u0 = GridFunction::sample(e.n, problem.u0);

      ParabolicProblem osc;
      osc.source = OscillatingSource{e.k, problem.model.a, problem.model.H};
      osc.kernel = problem.kernel;
      osc.u0 = u0;
      osc.T = problem.T;
      const Trajectory ue = solve(osc, scfg);

      ParabolicProblem eff;
      eff.source = EffectiveSource{problem.Hbar};
      eff.kernel = problem.kernel;
      eff.u0 = u0;
      eff.T = problem.T;
      const Trajectory ub = solve(eff, scfg);

      const int stride = e.n / cfg.n_coarse;
      for (std::size_t r = 0; r < ue.times.size(); ++r) {
        double err = 0.0;
        for (int c = 0; c < cfg.n_coarse; ++c) {
          err = std::max(err, std::abs(ue.snapshots[r][c * stride] - ub.snapshots[r][c * stride]));
        }
        e.error = std::max(e.error, err);
        if (r + 1 == ue.times.size()) e.final_gap = err;
      }
      e.dt = ue.dt_max;
      e.initial_layer = initial_layer_modulus(ue, u0);
      e.corrector_residual = kNaN;
      if (cfg.corrector) {
        e.corrector_residual =
            corrector_reconstruction(ue.snapshots.back(), ub.snapshots.back(), problem, e.eps, cfg)
                .sup_residual;
      }
    } catch (const std::exception& ex) {
      // Per-eps failures are recorded; the sweep continues.
      e.ok = false;
      e.failure = ex.what();
      e.error = kNaN;
      e.final_gap = kNaN;
      e.corrector_residual = kNaN;
    }
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  for (std::size_t j = 0; j < report.entries.size(); ++j) {
    auto& e = report.entries[j];
    if (j == 0) {
      e.rate = kNaN;
      continue;
    }
    const auto& prev = report.entries[j - 1];
    e.rate = std::log(prev.error / e.error) / std::log(prev.eps / e.eps);
  }
  return report;
}

CorrectorReport corrector_reconstruction(const GridFunction& u_eps, const GridFunction& u_bar,
                                         const SweepProblem& problem, double eps,
                                         const SweepConfig& cfg) {
  if (u_eps.size() != u_bar.size()) throw DomainError("u_eps and u_bar must share a grid");
  const long k = std::lround(1.0 / eps);
  if (k < 1 || std::abs(k * eps - 1.0) > 1e-12) throw DomainError("eps must be 1/k");
  const int n = u_eps.size();
  if (n % cfg.n_coarse != 0) throw DomainError("coarse grid must divide the fine grid");
  if (!problem.Hbar) throw DomainError("corrector needs an effective Hamiltonian");

  const double sigma = problem.model.sigma;
  const Regime regime = regime_of(sigma);
  const QuadratureTable table = periodized_weights(problem.kernel, n, cfg.image_budget);
  const int stride = n / cfg.n_coarse;
  const int nc = cfg.cell.n;

  CorrectorReport rep;
  rep.exponent = corrector_exponent(sigma);
  const double scale = std::pow(eps, rep.exponent);
  rep.x.resize(cfg.n_coarse);
  rep.residual.resize(cfg.n_coarse);
  rep.gap.resize(cfg.n_coarse);

  parallel_for(cfg.n_coarse, cfg.threads, [&](int c) {
    const int i = c * stride;
    const double x = static_cast<double>(i) / n;
    const double p = (u_bar.at(i + 1) - u_bar.at(i - 1)) * n / 2.0;
    const double l = eval_operator_at(u_bar, table, i);

    GridFunction psi;
    if (regime == Regime::above_one) {
      const double hbar = problem.Hbar->value(x, p, l);
      GridFunction f(nc);
      for (int j = 0; j < nc; ++j) {
        const double y = static_cast<double>(j) / nc;
        f[j] = (hbar - problem.model.H(x, y, p)) / problem.model.a(x, y) + l;
      }
      // Remove the quadrature-level mean so the solvability condition holds exactly.
      f += -f.mean();
      psi = spectral_cell_above_one(f, sigma);
    } else {
      CellParams params;
      params.x = x;
      params.p = p;
      params.l = l;
      params.regime = regime;
      params.drift_b = problem.drift_b;
      psi = solve_cell(problem.model, params, cfg.cell).psi;
    }
    // The additive constant of the corrector is free; use the zero-mean representative.
    psi += -psi.mean();

    const double y = static_cast<double>((k * i) % n) / n;
    const double psi_y = regime == Regime::above_one ? TrigInterpolant(psi).value(y)
                                                     : psi.interpolate(y);
    rep.x[c] = x;
    rep.gap[c] = u_eps[i] - u_bar[i];
    rep.residual[c] = rep.gap[c] - scale * psi_y;
  });
  for (int c = 0; c < cfg.n_coarse; ++c) {
    rep.sup_gap = std::max(rep.sup_gap, std::abs(rep.gap[c]));
    rep.sup_residual = std::max(rep.sup_residual, std::abs(rep.residual[c]));
  }
  return rep;
}

RateFit convergence_rates(const std::vector<double>& eps, const std::vector<double>& errors) {
  if (eps.size() != errors.size()) throw DomainError("eps and errors differ in length");
  if (eps.size() < 3) throw DomainError("rate fit needs at least 3 sweep points");
  const std::size_t n = eps.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(eps[j] > 0.0) || !(errors[j] > 0.0)) throw DomainError("rate fit needs positive data");
    const double lx = std::log(eps[j]), ly = std::log(errors[j]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icept = (sy - slope * sx) / n;
  double ss = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = std::log(errors[j]) - (icept + slope * std::log(eps[j]));
    ss += d * d;
  }
  return {slope, std::sqrt(ss / n)};
}

RateFit convergence_rates(const SweepReport& report) {
  std::vector<double> eps, err;
  for (const auto& e : report.entries) {
    if (!e.ok) continue;
    eps.push_back(e.eps);
    err.push_back(e.error);
  }
  return convergence_rates(eps, err);
}

}  // namespace nlh
