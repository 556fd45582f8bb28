#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nlh/profile.hpp"

namespace nlh {

/// Interaction kernel K(z) = kbar(z) |z|^{-1-sigma} on the real line.
struct KernelSpec {
  double sigma = 1.0;
  std::function<double(double)> kbar;
  /// Hint only; audit_ellipticity checks it against samples.
  bool symmetric = true;
  std::string name;

  /// The gradient compensator on |z| < 1 is part of the operator iff sigma >= 1.
  bool compensated() const { return sigma >= 1.0; }
  std::string cutoff_note() const;
  double density(double z) const;
};

/// Constant C with multiplier (2 pi |k|)^sigma on the unit torus for kbar = C.
double normalizing_constant(int dim, double sigma);

KernelSpec constant_kernel(double sigma);
/// kbar = C (1 + slope z) on |z| <= 1, C outside.
KernelSpec tilt_kernel(double sigma, double slope);
/// kbar = C (1 + slope z|z|) on |z| <= 1, C outside.
KernelSpec quadratic_tilt_kernel(double sigma, double slope);
/// kbar = C (1 + slope sign(z) / (1 + |log|z||)) on 0 < |z| <= 1; continuous at 0
/// but with a non-integrable modulus integral.
KernelSpec log_tilt_kernel(double sigma, double slope);
/// Piecewise-linear interpolation of (z, kbar) samples, held constant beyond the ends.
KernelSpec tabulated_kernel(double sigma, std::vector<double> z, std::vector<double> kbar);
KernelSpec load_kernel_csv(double sigma, const std::string& path);

/// sup_{|z| <= t} |kbar(z) - kbar(0)| over samples_per_unit points per unit length
/// (at least 64 per call), endpoints included. Nondecreasing in t.
double modulus_omega_bar(const KernelSpec& k, double t, int samples_per_unit = 4096);

struct ModulusIntegral {
  double value = 0.0;
  bool finite = false;
  double last_increment = 0.0;
  int panels = 0;
};

/// Dyadic-panel estimate of the integral of omega_bar(r)/r over (0, 1).
ModulusIntegral modulus_integral(const KernelSpec& k, int samples_per_unit = 4096,
                                 double tol = 1e-9, int max_panels = 60);

struct EllipticityAudit {
  bool pass = true;
  double a0 = 0.0;
  double a_min = 0.0;
  double a_max = 0.0;
  double kbar_zero = 0.0;
  double kbar_sup = 0.0;
  double normalization_gap = 0.0;
  bool symmetric_verified = true;
  bool dini_checked = false;
  ModulusIntegral dini;
  std::vector<std::string> failures;
  double witness_x = 0.0;
  double witness_y = 0.0;
  double witness_z = 0.0;
};

struct AuditGrid {
  int nx = 64;
  int ny = 256;
  int samples_per_unit = 4096;
  double kernel_range = 8.0;
};

EllipticityAudit audit_ellipticity(const Coefficient& a, const KernelSpec& k,
                                   const AuditGrid& grid = {});

struct DriftVector {
  double b = 0.0;
  std::vector<double> rho_sequence;
  bool converged = false;
  double residual = 0.0;
};

/// Integral of (kbar(z) - kbar(-z)) / z over (0, 1) as rho -> 0 along rho = 2^{-j}.
DriftVector drift_vector(const KernelSpec& k, double tol = 1e-10, int max_panels = 64);

/// Offset weights of the monotone quadrature operator on an n-node periodic grid:
///   (I_h u)_i = sum_r weights[r] (u_{i+r} - u_i) - compensator * (upwind D u)_i.
struct QuadratureTable {
  int n = 0;
  double sigma = 1.0;
  int image_budget = 0;
  std::vector<double> weights;
  /// Discrete counterpart of the integral of z K(z) over |z| < 1; zero when sigma < 1.
  double compensator = 0.0;
  /// Sum of the offset weights.
  double tail_mass = 0.0;
  /// Kernel mass beyond image_budget periods, spread uniformly over offsets.
  double far_mass = 0.0;

  /// Diagonal magnitude of the discrete operator, used by the CFL bound.
  double diagonal() const;
};

QuadratureTable periodized_weights(const KernelSpec& k, int n, int image_budget = 8,
                                   bool with_compensator = true);

}  // namespace nlh
