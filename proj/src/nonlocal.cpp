#include "nlh/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "nlh/errors.hpp"
#include "fft.hpp"
#include "quadrature.hpp"

namespace nlh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_table(const GridFunction& u, const QuadratureTable& table) {
  if (table.n != u.size()) throw DomainError("quadrature table built for a different grid size");
}

}  // namespace

double eval_operator_at(const GridFunction& u, const QuadratureTable& table, int i) {
  const int n = u.size();
  const double* v = u.values().data();
  const double* w = table.weights.data();
  const double ui = v[i];
  double acc = 0.0;
  int r = 1;
  for (int j = i + 1; j < n; ++j, ++r) acc += w[r] * (v[j] - ui);
  for (int j = 0; j < i; ++j, ++r) acc += w[r] * (v[j] - ui);
  const double c = table.compensator;
  if (c > 0.0) {
    acc -= c * (ui - v[(i - 1 + n) % n]) * n;
  } else if (c < 0.0) {
    acc -= c * (v[(i + 1) % n] - ui) * n;
  }
  return acc;
}

GridFunction eval_operator(const GridFunction& u, const KernelSpec& k,
                           const QuadratureTable& table) {
  check_table(u, table);
  if (table.sigma != k.sigma) throw DomainError("quadrature table built for a different order");
  GridFunction out(u.size());
  for (int i = 0; i < u.size(); ++i) out[i] = eval_operator_at(u, table, i);
  return out;
}

LocalizedSplit eval_localized(const GridFunction& u, const LocalModel& phi, double p, int node,
                              double delta, const KernelSpec& k, const QuadratureTable& table) {
  check_table(u, table);
  const int n = u.size();
  const double h = 1.0 / n;
  if (!(delta < 0.5)) throw DomainError("splitting radius must be below 1/2");
  if (delta < h * (1.0 - 1e-12)) throw DomainError("splitting radius below one grid cell");
  if (node < 0 || node >= n) throw DomainError("node index out of range");

  LocalizedSplit s;
  s.delta = delta;
  s.gradient_used = p;
  const double s1 = 1.0 - k.sigma;
  const double second_moment = quad::origin_power(
      [&](double z) { return k.kbar(z) + k.kbar(-z); }, s1, delta);
  s.inner = 0.5 * phi.curvature * second_moment;

  const double ui = u[node];
  const long cells = static_cast<long>(table.image_budget) * n;
  double comp_side[2] = {0.0, 0.0};
  double outer = 0.0;
  double far = 0.0;
  for (int side : {1, -1}) {
    auto dens = [&](double z) { return k.kbar(side * z) * std::pow(z, -1.0 - k.sigma); };
    const long c0 = static_cast<long>(std::floor(delta / h));
    for (long c = c0; c < cells; ++c) {
      const double lo = c * h;
      const double hi = lo + h;
      const double a = std::max(lo, delta);
      if (a >= hi) continue;
      const double wl = quad::fixed([&](double z) { return dens(z) * (hi - z) / h; }, a, hi);
      const double wr = quad::fixed([&](double z) { return dens(z) * (z - lo) / h; }, a, hi);
      outer += wl * (u.at(node + side * c) - ui) + wr * (u.at(node + side * (c + 1)) - ui);
      if (k.compensated() && hi <= 1.0 + 1e-12) {
        comp_side[side > 0 ? 0 : 1] += quad::fixed([&](double z) { return z * dens(z); }, a, hi);
      }
    }
    far += quad::power_tail([&](double z) { return k.kbar(side * z); }, k.sigma,
                            static_cast<double>(table.image_budget));
  }
  outer += far * (u.mean() - ui);
  outer -= p * (comp_side[0] - comp_side[1]);
  s.outer = outer;
  return s;
}

GridFunction spectral_flap(const GridFunction& u, double sigma) {
  if (!u.is_power_of_two()) throw DomainError("spectral path needs a power-of-two grid");
  const int n = u.size();
  auto spec = fft::forward(u.values());
  spec[0] = 0.0;
  for (int m = 1; m <= n / 2; ++m) spec[m] *= std::pow(kTwoPi * m, sigma);
  return GridFunction(fft::inverse(std::move(spec), n));
}

TrigInterpolant::TrigInterpolant(const GridFunction& u, double drop_below) {
  const int n = u.size();
  auto spec = fft::forward(u.values());
  mean_ = spec[0].real() / n;
  double biggest = 0.0;
  for (int m = 1; m <= n / 2; ++m) biggest = std::max(biggest, std::abs(spec[m]));
  for (int m = 1; m <= n / 2; ++m) {
    if (std::abs(spec[m]) <= drop_below * biggest) continue;
    const double factor = (2 * m == n) ? 1.0 / n : 2.0 / n;
    freq_.push_back(m);
    cos_coef_.push_back(factor * spec[m].real());
    sin_coef_.push_back(-factor * spec[m].imag());
  }
}

double TrigInterpolant::value(double y) const {
  double v = mean_;
  for (std::size_t j = 0; j < freq_.size(); ++j) {
    const double arg = kTwoPi * freq_[j] * y;
    v += cos_coef_[j] * std::cos(arg) + sin_coef_[j] * std::sin(arg);
  }
  return v;
}

double TrigInterpolant::derivative(double y) const {
  double v = 0.0;
  for (std::size_t j = 0; j < freq_.size(); ++j) {
    const double om = kTwoPi * freq_[j];
    v += om * (-cos_coef_[j] * std::sin(om * y) + sin_coef_[j] * std::cos(om * y));
  }
  return v;
}

RemainderJ corrector_remainder_J(const GridFunction& psi, const KernelSpec& k, double eps,
                                 double x, double tol) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  const TrigInterpolant tp(psi);
  const double y = x / eps;
  const double py = tp.value(y);
  const double dpy = tp.derivative(y);
  const double R = 1.0 / eps;
  const double k0 = k.kbar(0.0);
  const bool comp = k.compensated();

  auto integrand = [&](double xi) {
    const double lin = (comp && xi < R) ? dpy * xi : 0.0;
    const double plus = (tp.value(y + xi) - py - lin) * (k.kbar(eps * xi) - k0);
    const double minus = (tp.value(y - xi) - py + lin) * (k.kbar(-eps * xi) - k0);
    return (plus + minus) * std::pow(xi, -1.0 - k.sigma);
  };

  std::vector<double> breaks;
  for (int j = 60; j >= 0; --j) {
    const double b = std::ldexp(1.0, -j);
    if (b < R) breaks.push_back(b);
  }
  for (double m = 2.0; m < R; m += 1.0) breaks.push_back(m);
  breaks.push_back(R);
  const double R2 = 2.0 * R + 64.0;
  for (double m = std::floor(R) + 1.0; m < R2; m += 1.0) breaks.push_back(m);
  breaks.push_back(R2);

  RemainderJ out;
  out.value = quad::adaptive(integrand, 0.0, breaks.front(), tol, 8).value;
  for (std::size_t j = 1; j < breaks.size(); ++j) {
    if (breaks[j] <= breaks[j - 1]) continue;
    const auto e = quad::adaptive(integrand, breaks[j - 1], breaks[j], tol, 10);
    out.value += e.value;
    out.error += e.error;
  }
  // Beyond R2 the periodic factor is replaced by its mean.
  double tail = 0.0;
  for (int side : {1, -1}) {
    tail += std::pow(eps, k.sigma) *
            quad::power_tail([&](double z) { return k.kbar(side * z) - k0; }, k.sigma, eps * R2);
  }
  out.value += (tp.mean() - py) * tail;
  out.converged = std::isfinite(out.value) && out.error <= 1e3 * tol * (1.0 + std::abs(out.value));
  return out;
}

}  // namespace nlh
