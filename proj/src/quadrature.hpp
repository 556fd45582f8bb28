#pragma once

// Thin wrappers over Boost.Math quadrature shared by the kernel, operator and cell code.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace nlh::quad {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

// Fixed 10-point Gauss-Legendre; for integrands smooth on [a, b].
template <class F>
double fixed(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
}

template <class F>
Estimate adaptive(F&& f, double a, double b, double tol = 1e-12, unsigned depth = 20) {
  Estimate e;
  e.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, depth, tol,
                                                                        &e.error);
  return e;
}

// Integral of z^power * f(z) over (0, h] for power > -1. The substitution
// z = h u^{1/(power+1)} absorbs the endpoint singularity.
template <class F>
double origin_power(F&& f, double power, double h, double tol = 1e-13) {
  const double q = 1.0 / (power + 1.0);
  auto g = [&](double u) { return f(h * std::pow(u, q)); };
  return std::pow(h, power + 1.0) * q * adaptive(g, 0.0, 1.0, tol).value;
}

// Integral of f(z) z^{-1-sigma} over [Z, infinity) via t = z^{-sigma}.
template <class F>
double power_tail(F&& f, double sigma, double Z, double tol = 1e-13) {
  const double top = std::pow(Z, -sigma);
  auto g = [&](double t) { return f(std::pow(t, -1.0 / sigma)); };
  return adaptive(g, 0.0, top, tol).value / sigma;
}

}  // namespace nlh::quad
