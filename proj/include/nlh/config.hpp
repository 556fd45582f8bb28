#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlh/cell.hpp"
#include "nlh/effective.hpp"
#include "nlh/grid_function.hpp"
#include "nlh/hamiltonians.hpp"
#include "nlh/homogenize.hpp"
#include "nlh/kernels.hpp"
#include "nlh/parabolic.hpp"

namespace nlh {

struct KernelSection {
  std::string family = "constant";  // constant | tilt | quadratic_tilt | log_tilt | table
  double sigma = 1.5;
  double slope = 1.0;
  std::string table;  // CSV (z, kbar) for the table family
  int image_budget = 8;
  int audit_points = 4096;  // samples per unit length in the kernel audits
  double drift_tol = 1e-10;

  bool operator==(const KernelSection&) const = default;
};

struct CoefficientSection {
  std::string profile = "two_plus_cos_y";
  double scale = 1.0;

  bool operator==(const CoefficientSection&) const = default;
};

struct HamiltonianSection {
  std::string model = "power";
  double m = 2.0;
  std::string b = "constant";
  double b_scale = 1.0;
  std::string f = "cos_y";
  double f_scale = 1.0;
  /// Claims; unset means derived from the model.
  std::optional<double> b0;
  std::optional<double> C0;
  std::optional<double> L;
  double p_max = 10.0;
  int samples = 64;
  std::string flux = "godunov";  // godunov | lax_friedrichs
  double lf_theta = 0.0;

  bool operator==(const HamiltonianSection&) const = default;
};

struct GridSection {
  std::string problem = "oscillating";  // oscillating | effective
  int n = 256;
  double T = 0.2;
  double cfl_safety = 0.9;
  int records = 20;
  std::string u0 = "sin";  // sin | cos | constant
  double u0_scale = 1.0;
  int k = 4;

  bool operator==(const GridSection&) const = default;
};

struct CellSection {
  std::string method = "discount";  // discount | longtime | formula
  double x = 0.0;
  double p = 1.0;
  double l = 0.0;
  int n = 256;
  double delta_min = 1e-3;
  double delta_max = 0.1;
  double tol = 1e-9;
  double T_max = 100.0;
  std::vector<double> x_axis{0.0};
  std::vector<double> p_axis{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  std::vector<double> l_axis{-1.0, -0.5, 0.0, 0.5, 1.0};
  std::string table;  // effective table CSV consumed by solve / homogenize

  bool operator==(const CellSection&) const = default;
};

struct SweepSection {
  std::vector<int> k_list{4, 8, 16};
  int n_coarse = 64;
  int points_per_period = 32;
  bool corrector = true;

  bool operator==(const SweepSection&) const = default;
};

struct OutputSection {
  std::string dir = ".";
  std::string prefix = "nlhomog";

  bool operator==(const OutputSection&) const = default;
};

struct RunConfig {
  KernelSection kernel;
  CoefficientSection coefficient_a;
  HamiltonianSection hamiltonian;
  GridSection grid;
  CellSection cell;
  SweepSection sweep;
  OutputSection output;

  bool operator==(const RunConfig&) const = default;
};

struct ConfigResult {
  RunConfig config;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

/// Parses `section.key = value` lines; '#' starts a comment. Collects every error.
/// With run_audits, a sigma = 1 nonsymmetric kernel must pass the modulus audit.
ConfigResult parse_config_text(const std::string& text, bool run_audits = true);
/// Throws IoError when the file cannot be read.
ConfigResult parse_config(const std::string& path, bool run_audits = true);

/// Every key with its value; parse_config_text(emit_config(c)).config == c.
std::string emit_config(const RunConfig& config);
/// emit_config split into lines, for CSV comment headers.
std::vector<std::string> config_echo(const RunConfig& config);

std::vector<std::string> known_keys();

KernelSpec build_kernel(const RunConfig& c);
Coefficient build_coefficient(const RunConfig& c);
HamiltonianSpec build_hamiltonian(const RunConfig& c);
GridFunction build_u0(const RunConfig& c, int n);
std::function<double(double)> build_u0_function(const RunConfig& c);
CellModel build_cell_model(const RunConfig& c);
CellConfig build_cell_config(const RunConfig& c);
SolverConfig build_solver_config(const RunConfig& c);
EffectiveAxes build_axes(const RunConfig& c);

}  // namespace nlh
