#pragma once

#include "nlh/grid_function.hpp"
#include "nlh/kernels.hpp"

namespace nlh {

// Quadratic model phi(x + z) = value + slope z + curvature z^2 / 2 around a node.
struct LocalModel {
  double value = 0.0;
  double slope = 0.0;
  double curvature = 0.0;
};

struct LocalizedSplit {
  double delta = 0.0;
  double inner = 0.0;
  double outer = 0.0;
  double gradient_used = 0.0;
};

GridFunction eval_operator(const GridFunction& u, const KernelSpec& k,
                           const QuadratureTable& table);

// Single-node value of the quadrature operator.
double eval_operator_at(const GridFunction& u, const QuadratureTable& table, int i);

// Inner part integrates the local model over |z| < delta; outer part integrates the
// piecewise-linear interpolant of u over |z| > delta with compensator slope p.
LocalizedSplit eval_localized(const GridFunction& u, const LocalModel& phi, double p, int node,
                              double delta, const KernelSpec& k, const QuadratureTable& table);

// Fourier multiplier (2 pi |k|)^sigma; n must be a power of two.
GridFunction spectral_flap(const GridFunction& u, double sigma);

// Trigonometric interpolant of a grid function, evaluated off-grid.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const GridFunction& u, double drop_below = 1e-14);
  double value(double y) const;
  double derivative(double y) const;
  double mean() const { return mean_; }
  int modes() const { return static_cast<int>(freq_.size()); }

 private:
  double mean_ = 0.0;
  std::vector<int> freq_;
  std::vector<double> cos_coef_;
  std::vector<double> sin_coef_;
};

struct RemainderJ {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

// Integral of delta_{1/eps}(psi, x/eps, xi) (kbar(eps xi) - kbar(0)) |xi|^{-1-sigma} over xi.
RemainderJ corrector_remainder_J(const GridFunction& psi, const KernelSpec& k, double eps,
                                 double x, double tol = 1e-11);

}  // namespace nlh
