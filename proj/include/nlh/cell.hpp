#pragma once

#include <string>
#include <vector>

#include "nlh/errors.hpp"
#include "nlh/grid_function.hpp"
#include "nlh/hamiltonians.hpp"
#include "nlh/parabolic.hpp"
#include "nlh/profile.hpp"

namespace nlh {

enum class Regime { below_one, equal_one, above_one };

Regime regime_of(double sigma);
std::string to_string(Regime r);

/// Frozen slow data of one cell problem.
struct CellParams {
  double x = 0.0;
  double p = 0.0;
  double l = 0.0;
  Regime regime = Regime::above_one;
  /// Drift from the kernel asymmetry; only read in the equal_one regime.
  double drift_b = 0.0;
};

/// Fast-variable data: coefficient a(x, y), Hamiltonian H(x, y, p), kernel order.
struct CellModel {
  Coefficient a;
  HamiltonianSpec H;
  double sigma = 1.5;
};

struct CellConfig {
  int n = 256;
  double delta_max = 0.1;
  double delta_min = 1e-3;
  /// Sup-norm residual target of each stationary solve.
  double tol = 1e-9;
  int max_newton = 60;
  int max_pseudo_steps = 4000;
  int image_budget = 8;
};

/// delta_max 2^{-k} while above delta_min, then delta_min.
std::vector<double> discount_ladder(double delta_max, double delta_min);

struct DeltaTrace {
  double delta = 0.0;
  double sup = 0.0;  // sup of -delta psi^delta
  double inf = 0.0;  // inf of -delta psi^delta
  int iterations = 0;
  double residual = 0.0;
};

struct RegularityReport {
  double scale_psi = 0.0;       // delta |psi^delta|_inf
  double oscillation = 0.0;
  double lipschitz = 0.0;       // nearest-neighbor difference quotient
  double flap_sup = 0.0;        // sup |(-Delta)^{1/2} psi|
  std::vector<double> holder_gammas;
  std::vector<double> holder_quotients;

  double ratio_psi1 = 0.0;
  double ratio_osc = 0.0;
  double ratio_lip = 0.0;
  double ratio_flap = 0.0;
  bool pass = true;
};

struct CellSolution {
  GridFunction psi;  // psi(0) = 0
  double H_bar = 0.0;
  double spread = 0.0;
  std::vector<DeltaTrace> delta_trace;
  std::vector<double> residual_history;
  bool converged = false;
  RegularityReport regularity;
};

/// Stationary solve that missed its residual target; carries the residual history.
class CellConvergenceError : public NumericalError {
 public:
  CellConvergenceError(const std::string& what, std::vector<double> history)
      : NumericalError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

CellSolution vanishing_discount_sweep(const CellModel& model, const CellParams& params,
                                      const std::vector<double>& deltas, const CellConfig& cfg);
/// Sweep over discount_ladder(cfg.delta_max, cfg.delta_min).
CellSolution solve_cell(const CellModel& model, const CellParams& params, const CellConfig& cfg);

struct LongTimeEstimate {
  double H_bar = 0.0;
  double error = 0.0;
  double T = 0.0;
  int steps = 0;
};

/// v_t + F(v) = 0 from v = 0 by implicit Euler; estimate -mean v(T) / T.
LongTimeEstimate long_time_average(const CellModel& model, const CellParams& params, double T_max,
                                   const CellConfig& cfg, int steps = 200);

/// Solves (-Delta)^{sigma/2} psi = f for zero-mean f, sigma > 1; psi(0) = 0.
GridFunction spectral_cell_above_one(const GridFunction& f, double sigma);

RegularityReport regularity_audit(const CellSolution& sol, const CellParams& params,
                                  const CellModel& model);

struct RegularitySweep {
  std::vector<double> p_values;
  std::vector<RegularityReport> reports;
  bool psi1_growing = false;
  bool osc_growing = false;
  bool lip_growing = false;
  bool flap_growing = false;
};

/// Solves at each p (other parameters fixed) and flags ratios whose last value exceeds the
/// first by more than growth_tol relative.
RegularitySweep regularity_sweep(const CellModel& model, CellParams params,
                                 const std::vector<double>& p_values, const CellConfig& cfg,
                                 double growth_tol = 0.1);

}  // namespace nlh
