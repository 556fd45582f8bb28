#include "nlh/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlh/errors.hpp"
#include "quadrature.hpp"

namespace nlh {

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0 && sigma < 2.0)) throw DomainError("kernel order sigma must lie in (0, 2)");
}

// Returns C for |z| > 1 and C * (1 + bump(z)) inside.
KernelSpec bounded_perturbation(double sigma, std::string name,
                                std::function<double(double)> bump) {
  check_sigma(sigma);
  const double c = normalizing_constant(1, sigma);
  KernelSpec k;
  k.sigma = sigma;
  k.symmetric = false;
  k.name = std::move(name);
  k.kbar = [c, bump = std::move(bump)](double z) {
    return std::abs(z) <= 1.0 ? c * (1.0 + bump(z)) : c;
  };
  return k;
}

}  // namespace

std::string KernelSpec::cutoff_note() const {
  return compensated() ? "compensator on |z|<1 active (sigma >= 1)"
                       : "compensator dropped (sigma < 1)";
}

double KernelSpec::density(double z) const {
  return kbar(z) * std::pow(std::abs(z), -1.0 - sigma);
}

double normalizing_constant(int dim, double sigma) {
  check_sigma(sigma);
  if (dim < 1) throw DomainError("dimension must be positive");
  const double nd = dim;
  return sigma * std::pow(2.0, sigma - 1.0) * std::tgamma(0.5 * (nd + sigma)) /
         (std::pow(std::numbers::pi, 0.5 * nd) * std::tgamma(1.0 - 0.5 * sigma));
}

KernelSpec constant_kernel(double sigma) {
  check_sigma(sigma);
  const double c = normalizing_constant(1, sigma);
  KernelSpec k;
  k.sigma = sigma;
  k.symmetric = true;
  k.name = "constant";
  k.kbar = [c](double) { return c; };
  return k;
}

KernelSpec tilt_kernel(double sigma, double slope) {
  return bounded_perturbation(sigma, "tilt", [slope](double z) { return slope * z; });
}

KernelSpec quadratic_tilt_kernel(double sigma, double slope) {
  return bounded_perturbation(sigma, "quadratic_tilt",
                              [slope](double z) { return slope * z * std::abs(z); });
}

KernelSpec log_tilt_kernel(double sigma, double slope) {
  return bounded_perturbation(sigma, "log_tilt", [slope](double z) {
    if (z == 0.0) return 0.0;
    const double s = z > 0 ? 1.0 : -1.0;
    return slope * s / (1.0 + std::abs(std::log(std::abs(z))));
  });
}

KernelSpec tabulated_kernel(double sigma, std::vector<double> z, std::vector<double> kb) {
  check_sigma(sigma);
  if (z.size() != kb.size() || z.size() < 2) {
    throw DomainError("tabulated kernel needs at least two (z, kbar) pairs");
  }
  std::vector<std::size_t> order(z.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return z[a] < z[b]; });
  std::vector<double> zs, ks;
  for (auto i : order) {
    if (!std::isfinite(z[i]) || !std::isfinite(kb[i])) throw DomainError("non-finite kernel sample");
    if (!zs.empty() && z[i] == zs.back()) throw DomainError("duplicate z in kernel table");
    zs.push_back(z[i]);
    ks.push_back(kb[i]);
  }
  bool sym = true;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (std::abs(zs[i] + zs[zs.size() - 1 - i]) > 1e-14 || ks[i] != ks[ks.size() - 1 - i]) {
      sym = false;
    }
  }
  KernelSpec k;
  k.sigma = sigma;
  k.symmetric = sym;
  k.name = "table";
  k.kbar = [zs = std::move(zs), ks = std::move(ks)](double x) {
    if (x <= zs.front()) return ks.front();
    if (x >= zs.back()) return ks.back();
    auto it = std::upper_bound(zs.begin(), zs.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - zs.begin());
    const double t = (x - zs[j - 1]) / (zs[j] - zs[j - 1]);
    return (1.0 - t) * ks[j - 1] + t * ks[j];
  };
  return k;
}

KernelSpec load_kernel_csv(double sigma, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel table '" + path + "'");
  std::vector<double> z, kb;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double a = 0, b = 0;
    if (!(ss >> a >> b)) {
      if (z.empty()) continue;  // header row
      throw IoError(path + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    z.push_back(a);
    kb.push_back(b);
  }
  return tabulated_kernel(sigma, std::move(z), std::move(kb));
}

double modulus_omega_bar(const KernelSpec& k, double t, int samples_per_unit) {
  if (!(t > 0.0)) throw DomainError("modulus radius must be positive");
  const long m = std::max<long>(64, static_cast<long>(std::ceil(samples_per_unit * t)));
  const double k0 = k.kbar(0.0);
  double w = 0.0;
  for (long j = 1; j <= m; ++j) {
    const double z = t * static_cast<double>(j) / static_cast<double>(m);
    w = std::max({w, std::abs(k.kbar(z) - k0), std::abs(k.kbar(-z) - k0)});
  }
  return w;
}

ModulusIntegral modulus_integral(const KernelSpec& k, int samples_per_unit, double tol,
                                 int max_panels) {
  ModulusIntegral out;
  int small_in_a_row = 0;
  for (int j = 0; j < max_panels; ++j) {
    const double hi = std::ldexp(1.0, -j);
    const double lo = 0.5 * hi;
    auto f = [&](double r) { return modulus_omega_bar(k, r, samples_per_unit) / r; };
    const double inc = quad::adaptive(f, lo, hi, 1e-8, 6).value;
    out.value += inc;
    out.last_increment = inc;
    out.panels = j + 1;
    small_in_a_row = inc < tol ? small_in_a_row + 1 : 0;
    if (small_in_a_row >= 2) {
      out.finite = true;
      break;
    }
  }
  return out;
}

EllipticityAudit audit_ellipticity(const Coefficient& a, const KernelSpec& k,
                                   const AuditGrid& grid) {
  EllipticityAudit rep;
  rep.a_min = std::numeric_limits<double>::infinity();
  rep.a_max = -rep.a_min;
  for (int i = 0; i < grid.nx; ++i) {
    const double x = static_cast<double>(i) / grid.nx;
    for (int j = 0; j < grid.ny; ++j) {
      const double y = static_cast<double>(j) / grid.ny;
      const double v = a(x, y);
      if (!std::isfinite(v) || v < rep.a_min) {
        rep.witness_x = x;
        rep.witness_y = y;
      }
      if (!std::isfinite(v)) {
        rep.a_min = -std::numeric_limits<double>::infinity();
        continue;
      }
      rep.a_min = std::min(rep.a_min, v);
      rep.a_max = std::max(rep.a_max, v);
    }
  }
  if (!(rep.a_min > 0.0)) {
    rep.pass = false;
    rep.failures.push_back("coefficient a is not positive at the witness point");
  } else {
    rep.a0 = std::min(rep.a_min, 1.0 / rep.a_max);
  }

  check_sigma(k.sigma);
  rep.kbar_zero = k.kbar(0.0);
  const long m = static_cast<long>(std::ceil(grid.kernel_range * grid.samples_per_unit));
  double asym = 0.0;
  double scale = std::abs(rep.kbar_zero);
  for (long j = 0; j <= m; ++j) {
    const double z = grid.kernel_range * static_cast<double>(j) / static_cast<double>(m);
    const double kp = k.kbar(z);
    const double km = k.kbar(-z);
    if (!std::isfinite(kp) || !std::isfinite(km)) {
      rep.pass = false;
      rep.witness_z = z;
      rep.failures.push_back("kbar is not finite at the witness z");
      break;
    }
    rep.kbar_sup = std::max({rep.kbar_sup, std::abs(kp), std::abs(km)});
    scale = std::max(scale, std::abs(kp));
    if (std::abs(kp - km) > asym) {
      asym = std::abs(kp - km);
      if (!k.symmetric) rep.witness_z = z;
    }
  }
  rep.symmetric_verified = asym <= 1e-14 * std::max(scale, 1.0);
  if (k.symmetric && !rep.symmetric_verified) {
    rep.pass = false;
    rep.failures.push_back("kernel declared symmetric but kbar(z) != kbar(-z) at the witness z");
  }
  if (!(rep.kbar_zero > 0.0)) {
    rep.pass = false;
    rep.witness_z = 0.0;
    rep.failures.push_back("kbar(0) must be positive");
  } else {
    const double c = normalizing_constant(1, k.sigma);
    rep.normalization_gap = std::abs(rep.kbar_zero - c) / c;
    if (rep.normalization_gap > 1e-6) {
      rep.pass = false;
      rep.failures.push_back("kbar(0) differs from the normalizing constant");
    }
  }
  if (k.sigma == 1.0 && !rep.symmetric_verified) {
    rep.dini_checked = true;
    rep.dini = modulus_integral(k, grid.samples_per_unit);
    if (!rep.dini.finite) {
      rep.pass = false;
      rep.failures.push_back("integral of omega_bar(r)/r over (0,1) does not converge");
    }
  }
  return rep;
}

DriftVector drift_vector(const KernelSpec& k, double tol, int max_panels) {
  if (k.sigma != 1.0) throw DomainError("drift vector is defined for sigma = 1 only");
  DriftVector d;
  auto f = [&](double z) { return (k.kbar(z) - k.kbar(-z)) / z; };
  for (int j = 0; j < max_panels; ++j) {
    const double hi = std::ldexp(1.0, -j);
    const double lo = 0.5 * hi;
    const double inc = quad::adaptive(f, lo, hi, 1e-12, 8).value;
    d.b += inc;
    d.rho_sequence.push_back(lo);
    d.residual = std::abs(inc);
    if (d.residual < tol) {
      d.converged = true;
      break;
    }
  }
  return d;
}

double QuadratureTable::diagonal() const { return tail_mass + std::abs(compensator) * n; }

QuadratureTable periodized_weights(const KernelSpec& k, int n, int image_budget,
                                   bool with_compensator) {
  check_sigma(k.sigma);
  if (n < 8) throw DomainError("quadrature table needs n >= 8");
  if (image_budget < 1) throw DomainError("image_budget must be at least 1");
  QuadratureTable t;
  t.n = n;
  t.sigma = k.sigma;
  t.image_budget = image_budget;
  t.weights.assign(n, 0.0);

  const double h = 1.0 / n;
  const double s1 = 1.0 - k.sigma;
  const long cells = static_cast<long>(image_budget) * n;
  double comp_side[2] = {0.0, 0.0};

  for (int side : {1, -1}) {
    auto kb = [&](double z) { return k.kbar(side * z); };
    auto zz_density = [&](double z) { return kb(z) * std::pow(z, s1); };  // z^2 K(side z)

    // Moments of the hat functions against z^2 K; the origin hat is folded into
    // offset 1, which pairs D(z)/z^2 at 0 with the second difference at h.
    std::vector<double> mom(cells + 1, 0.0);
    mom[0] = quad::origin_power([&](double z) { return kb(z) * (1.0 - z / h); }, s1, h);
    mom[1] = quad::origin_power([&](double z) { return kb(z) * (z / h); }, s1, h);
    for (long c = 1; c < cells; ++c) {
      const double lo = c * h;
      const double hi = lo + h;
      mom[c] += quad::fixed([&](double z) { return zz_density(z) * (hi - z) / h; }, lo, hi);
      mom[c + 1] += quad::fixed([&](double z) { return zz_density(z) * (z - lo) / h; }, lo, hi);
    }
    for (long j = 1; j <= cells; ++j) {
      const double zj = j * h;
      double wj = mom[j] / (zj * zj);
      if (j == 1) wj += mom[0] / (h * h);
      long r = (side * j) % n;
      if (r < 0) r += n;
      t.weights[r] += wj;
      if (j < n) comp_side[side > 0 ? 0 : 1] += wj * zj;
      if (j == n) comp_side[side > 0 ? 0 : 1] += 0.5 * wj * zj;
    }
    t.far_mass += quad::power_tail(kb, k.sigma, static_cast<double>(image_budget));
  }

  for (int r = 1; r < n; ++r) t.weights[r] += t.far_mass / n;
  t.weights[0] = 0.0;
  for (int r = 1; r < n; ++r) t.tail_mass += t.weights[r];
  t.compensator =
      (with_compensator && k.compensated()) ? comp_side[0] - comp_side[1] : 0.0;
  return t;
}

}  // namespace nlh
