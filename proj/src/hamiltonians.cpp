#include "nlh/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <numbers>

#include "nlh/errors.hpp"

namespace nlh {

namespace {

std::vector<double> symmetric_grid(double R, int count) {
  std::vector<double> v(count);
  for (int j = 0; j < count; ++j) v[j] = -R + 2.0 * R * j / (count - 1);
  return v;
}

}  // namespace

double HamiltonianSpec::slope(double x, double y, double p) const {
  if (dp) return dp(x, y, p);
  const double d = 1e-6 * (1.0 + std::abs(p));
  return (eval(x, y, p + d) - eval(x, y, p - d)) / (2.0 * d);
}

double HamiltonianSpec::slope_bound(double R) const {
  if (coefficient_b) return m * coefficient_b->sup() * std::pow(R, m - 1.0);
  double s = 0.0;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 32; ++j) {
      for (double p : symmetric_grid(R, 65)) {
        s = std::max(s, std::abs(slope(i / 8.0, j / 32.0, p)));
      }
    }
  }
  return 1.05 * s;
}

bool HamiltonianSpec::depends_on_x() const {
  if (coefficient_b && source_f) return coefficient_b->depends_on_x() || source_f->depends_on_x();
  for (double y : {0.0, 0.21, 0.5, 0.77}) {
    for (double p : {-1.0, 0.0, 0.7, 2.0}) {
      const double ref = eval(0.0, y, p);
      for (double x : {0.13, 0.25, 0.5, 0.81}) {
        if (eval(x, y, p) != ref) return true;
      }
    }
  }
  return false;
}

HamiltonianSpec power_model(const Profile& b, const Profile& f, double m) {
  if (!(m > 1.0)) throw DomainError("superlinearity exponent m must exceed 1");
  if (!(b.inf() > 0.0)) throw DomainError("coefficient b of the power model must be positive");
  HamiltonianSpec h;
  h.m = m;
  h.coefficient_b = b;
  h.source_f = f;
  h.eval = [b, f, m](double x, double y, double p) {
    return b(x, y) * std::pow(std::abs(p), m) - f(x, y);
  };
  h.dp = [b, m](double x, double y, double p) {
    const double s = p > 0 ? 1.0 : (p < 0 ? -1.0 : 0.0);
    return s * b(x, y) * m * std::pow(std::abs(p), m - 1.0);
  };
  h.argmin_p = [](double, double) { return 0.0; };
  h.b0 = (m - 1.0) * b.inf();
  h.C0 = f.sup_abs();
  const double space = 2.0 * std::numbers::pi * std::numbers::sqrt2 *
                       std::max(b.depends_on_y() ? std::abs(b.scale) : 0.0,
                                f.depends_on_y() ? std::abs(f.scale) : 0.0);
  h.L = std::max(space, m * b.sup());
  h.modulus_scale = h.L;
  h.name = "b_pow_m_minus_f(b=" + b.name() + ", f=" + f.name() + ")";
  return h;
}

double superlinearity_slack(const HamiltonianSpec& h, double x, double y, double p, double mu) {
  return mu * h(x, y, p / mu) - h(x, y, p) -
         (1.0 - mu) * (h.b0 * std::pow(std::abs(p), h.m) - h.C0);
}

SuperlinearityAudit audit_superlinearity(const HamiltonianSpec& h, const AuditBudget& budget) {
  SuperlinearityAudit rep;
  rep.worst_slack = std::numeric_limits<double>::infinity();
  const auto ps = symmetric_grid(budget.p_max, budget.n_p);
  for (int ix = 0; ix < budget.n_x; ++ix) {
    const double x = static_cast<double>(ix) / budget.n_x;
    for (int iy = 0; iy < budget.n_y; ++iy) {
      const double y = static_cast<double>(iy) / budget.n_y;
      for (double p : ps) {
        for (int im = 0; im < budget.n_mu; ++im) {
          const double mu = static_cast<double>(im + 1) / (budget.n_mu + 1);
          const double s = superlinearity_slack(h, x, y, p, mu);
          if (s < rep.worst_slack) {
            rep.worst_slack = s;
            rep.witness_x = x;
            rep.witness_y = y;
            rep.witness_p = p;
            rep.witness_mu = mu;
          }
        }
      }
    }
  }
  rep.pass = rep.worst_slack >= -1e-12 * (1.0 + std::pow(budget.p_max, h.m));
  return rep;
}

RegularityAudit audit_regularity(const HamiltonianSpec& h, const AuditBudget& budget,
                                 std::vector<double> radii) {
  RegularityAudit rep;
  const double d = 1e-5;
  for (double R : radii) {
    RegularityAtRadius r;
    r.R = R;
    const double xs = 1.0 + std::pow(R, h.m);
    const double ps_scale = 1.0 + std::pow(R, h.m - 1.0);
    for (int ix = 0; ix < budget.n_x; ++ix) {
      const double x = static_cast<double>(ix) / budget.n_x;
      for (int iy = 0; iy < budget.n_y; ++iy) {
        const double y = static_cast<double>(iy) / budget.n_y;
        for (double p : symmetric_grid(R - d, budget.n_p)) {
          const double base = h(x, y, p);
          const double lx = std::abs(h(x + d, y, p) - base) / (d * xs);
          const double ly = std::abs(h(x, y + d, p) - base) / (d * xs);
          const double lp = std::abs(h(x, y, p + d) - base) / (d * ps_scale);
          r.L_x = std::max(r.L_x, lx);
          r.L_y = std::max(r.L_y, ly);
          if (lp > r.L_p) r.L_p = lp;
          const double worst = std::max({lx, ly, lp});
          if (worst > rep.L) {
            rep.L = worst;
            rep.witness_x = x;
            rep.witness_y = y;
            rep.witness_p = p;
          }
        }
      }
    }
    rep.radii.push_back(r);
  }
  rep.within_claim = rep.L <= h.L * (1.0 + 1e-6);
  return rep;
}

double growth_bound(const HamiltonianSpec& h, const AuditBudget& budget) {
  double c = 0.0;
  auto ps = symmetric_grid(budget.p_max, budget.n_p | 1);
  for (int ix = 0; ix < budget.n_x; ++ix) {
    for (int iy = 0; iy < budget.n_y; ++iy) {
      for (double p : ps) {
        const double x = static_cast<double>(ix) / budget.n_x;
        const double y = static_cast<double>(iy) / budget.n_y;
        c = std::max(c, std::abs(h(x, y, p)) / (1.0 + std::pow(std::abs(p), h.m)));
      }
    }
  }
  return c;
}

CoercivityCertificate coercivity_constants(double m, double b0, double C0, double C_grow,
                                           double K_small) {
  if (!(m > 1.0)) throw DomainError("coercivity constants need m > 1");
  CoercivityCertificate c;
  c.c_m = 0.5 / (std::pow(0.25, 1.0 - m) - 1.0);
  c.C_m = 0.75 / (std::pow(0.5, 1.0 - m) - 1.0);
  c.C_tilde = 0.5 * b0 * c.c_m;
  // For |p| > 2: H >= b0 c_m |p|^m - B |p| + C0; half of the leading term is kept.
  const double B = b0 * c.C_m + C_grow + C0;
  const double r_star = std::pow(B / (m * c.C_tilde), 1.0 / (m - 1.0));
  const double r = std::max(r_star, c.valid_above);
  const double deficit = c.C_tilde - C0 + B * r - c.C_tilde * std::pow(r, m);
  c.K = std::max({K_small, deficit, 0.0});
  return c;
}

std::pair<Rational, Rational> coercivity_rationals(int m) {
  if (m < 2 || m > 30) throw DomainError("exact coercivity fractions need integer m in [2, 30]");
  auto reduce = [](long num, long den) {
    const long g = std::gcd(num, den);
    return Rational{num / g, den / g};
  };
  const long four = 1L << (2 * (m - 1));
  const long two = 1L << (m - 1);
  return {reduce(1, 2 * (four - 1)), reduce(3, 4 * (two - 1))};
}

double small_gradient_offset(const HamiltonianSpec& h, double C_tilde,
                             const AuditBudget& budget) {
  double k = 0.0;
  for (int ix = 0; ix < budget.n_x; ++ix) {
    for (int iy = 0; iy < budget.n_y; ++iy) {
      for (double p : symmetric_grid(2.0, budget.n_p | 1)) {
        const double x = static_cast<double>(ix) / budget.n_x;
        const double y = static_cast<double>(iy) / budget.n_y;
        k = std::max(k, C_tilde * (std::pow(std::abs(p), h.m) + 1.0) - h(x, y, p));
      }
    }
  }
  return k;
}

double lipschitz_constant(const Coefficient& a, int n) {
  double L = 0.0;
  const double d = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = i * d, y = j * d;
      const double base = a(x, y);
      L = std::max({L, std::abs(a(x + d, y) - base) / d, std::abs(a(x, y + d) - base) / d});
    }
  }
  return L;
}

}  // namespace nlh
