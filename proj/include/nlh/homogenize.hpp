#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nlh/cell.hpp"
#include "nlh/kernels.hpp"
#include "nlh/parabolic.hpp"

namespace nlh {

struct SweepProblem {
  CellModel model;  // a(x, y), H(x, y, p), sigma
  KernelSpec kernel;
  std::function<double(double)> u0;
  double T = 0.2;
  /// Formula for sigma > 1 or a table for sigma <= 1.
  std::shared_ptr<const EffectiveHamiltonian> Hbar;
  /// Drift entering the equal_one cell problems of the corrector.
  double drift_b = 0.0;
};

struct SweepConfig {
  std::vector<int> k_list{4, 8, 16};  // eps = 1 / k
  int points_per_period = 32;          // fine grid n = points_per_period * k
  int n_coarse = 64;
  int records = 10;
  double cfl_safety = 0.9;
  FluxKind flux = FluxKind::godunov;
  int image_budget = 8;
  int threads = 1;
  bool corrector = true;
  CellConfig cell;
};

struct SweepEntry {
  double eps = 0.0;
  int k = 0;
  int n = 0;
  double dt = 0.0;
  double error = 0.0;            // max over record times and coarse nodes of |u^eps - ubar|
  double final_gap = 0.0;        // same at the final time only
  double rate = 0.0;             // against the previous entry; NaN for the first
  double corrector_residual = 0.0;
  double seconds = 0.0;
  bool ok = true;
  std::string failure;
  std::vector<LayerPoint> initial_layer;
};

struct SweepReport {
  std::vector<SweepEntry> entries;
  std::vector<double> times;
};

SweepReport run_sweep(const SweepProblem& problem, const SweepConfig& cfg);

struct CorrectorReport {
  std::vector<double> x;
  std::vector<double> residual;      // u^eps - ubar - eps^{max(1, sigma)} psi(x / eps)
  std::vector<double> gap;           // u^eps - ubar
  double sup_residual = 0.0;
  double sup_gap = 0.0;
  double exponent = 0.0;
};

/// Corrector exponent max(1, sigma).
double corrector_exponent(double sigma);

/// Corrector at each coarse node from the cell problem frozen at (x, Dubar, Iubar);
/// u_eps and u_bar share the fine grid.
CorrectorReport corrector_reconstruction(const GridFunction& u_eps, const GridFunction& u_bar,
                                         const SweepProblem& problem, double eps,
                                         const SweepConfig& cfg);

struct RateFit {
  double rate = 0.0;
  double residual = 0.0;  // root-mean-square deviation in log e
};

RateFit convergence_rates(const std::vector<double>& eps, const std::vector<double>& errors);
RateFit convergence_rates(const SweepReport& report);

}  // namespace nlh
