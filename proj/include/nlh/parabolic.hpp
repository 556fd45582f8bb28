#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nlh/grid_function.hpp"
#include "nlh/hamiltonians.hpp"
#include "nlh/kernels.hpp"
#include "nlh/profile.hpp"

namespace nlh {

enum class FluxKind { godunov, lax_friedrichs };

/// Source of Hbar(x, p, l) for the homogenized equation u_t + Hbar(x, Du, Iu) = 0.
class EffectiveHamiltonian {
 public:
  virtual ~EffectiveHamiltonian() = default;
  virtual double value(double x, double p, double l) const = 0;
  /// sup |dHbar/dl|.
  virtual double l_slope_bound() const = 0;
  /// sup |dHbar/dp| over |p| <= R.
  virtual double p_slope_bound(double R) const = 0;
  /// Minimizer in p when Hbar(x, ., l) is convex with a known minimizer.
  virtual std::optional<double> argmin_p(double, double) const { return std::nullopt; }
  virtual std::string provenance() const = 0;
};

struct OscillatingSource {
  int k = 1;  // eps = 1 / k
  Coefficient a;
  HamiltonianSpec H;
};

struct EffectiveSource {
  std::shared_ptr<const EffectiveHamiltonian> Hbar;
};

struct ParabolicProblem {
  std::variant<OscillatingSource, EffectiveSource> source;
  KernelSpec kernel;
  GridFunction u0;
  double T = 0.2;

  bool oscillating() const { return std::holds_alternative<OscillatingSource>(source); }
  double eps() const;
};

struct SolverConfig {
  int n = 256;
  double cfl_safety = 0.9;
  FluxKind flux = FluxKind::godunov;
  /// Lower bound for the Lax-Friedrichs viscosity; the sampled slope bound is used if larger.
  double lf_theta = 0.0;
  /// Number of equally spaced output times in (0, T].
  int records = 20;
  int image_budget = 8;
  long max_steps = 20'000'000;
  /// Manual time step; rejected if it violates the CFL bound.
  double dt_override = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<GridFunction> snapshots;
  std::vector<double> sup_norm_track;
  /// max |u^{n+1} - u^n| / dt at the step closing each record interval.
  std::vector<double> residual_track;
  long steps = 0;
  double dt_min = 0.0;
  double dt_max = 0.0;
  /// sup |H(., ., 0)| (or |Hbar(., 0, 0)|) entering the maximum bound.
  double h_at_zero = 0.0;
};

Trajectory solve(const ParabolicProblem& problem, const SolverConfig& cfg);

/// Maximum-bound right side |u0|_inf + |H(., ., 0)|_inf t.
double max_bound(const ParabolicProblem& problem, double t);

GridFunction mollify(const GridFunction& u, double radius);
/// max |u(x) - u(x')| over nodes with |x - x'| <= radius.
double sampled_modulus(const GridFunction& u, double radius);

struct Barrier {
  double radius = 0.0;
  GridFunction u0h;
  double omega0 = 0.0;
  /// Growth rate of the envelopes; bounds the scheme's update of u0h per unit time.
  double C_h = 0.0;
  double nonlocal_part = 0.0;
  double hamiltonian_part = 0.0;

  GridFunction lower(double t) const;
  GridFunction upper(double t) const;
};

Barrier barrier_bounds(const ParabolicProblem& problem, const SolverConfig& cfg, double radius);

struct LayerPoint {
  double t = 0.0;
  double value = 0.0;
};

std::vector<LayerPoint> initial_layer_modulus(const Trajectory& traj, const GridFunction& u0);

/// Envelope bound 2 omega0(h_t) + C(h_t) t at h_t = t^{1/(2 alpha)}, alpha = max(2, m).
double initial_layer_bound(const ParabolicProblem& problem, const SolverConfig& cfg, double t);
/// max over radii of C(h) h^alpha.
double layer_constant_C3(const ParabolicProblem& problem, const SolverConfig& cfg,
                         const std::vector<double>& radii);

struct SupConvolution {
  std::vector<std::vector<double>> values;  // [x][t]
  std::vector<double> lipschitz;            // per x
  double sup_u = 0.0;
  double bound = 0.0;                       // 4 |u|_inf / sqrt(gamma)
};

/// ubar(x, t) = max_s { u(x, s) - (s - t)^2 / gamma } over the grid times s.
SupConvolution sup_convolution_time(const std::vector<std::vector<double>>& u,
                                    const std::vector<double>& times, double gamma);

/// Snapshot matrix [x][t] of a trajectory.
std::vector<std::vector<double>> space_time(const Trajectory& traj);

double holder_exponent_alpha0(double n, double sigma, double m);

}  // namespace nlh
