#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlh/profile.hpp"

namespace nlh {

struct HamiltonianSpec {
  std::function<double(double, double, double)> eval;
  /// Optional exact dH/dp; finite differences otherwise.
  std::function<double(double, double, double)> dp;
  /// Optional minimizer in p of a convex H(x, y, .); enables the Godunov flux.
  std::function<double(double, double)> argmin_p;

  double m = 2.0;
  double b0 = 1.0;
  double C0 = 1.0;
  double L = 1.0;
  double modulus_scale = 1.0;
  bool periodic_in_y = true;
  std::string name;

  /// Built-in model data when H = b |p|^m - f.
  std::optional<Profile> coefficient_b;
  std::optional<Profile> source_f;

  double operator()(double x, double y, double p) const { return eval(x, y, p); }
  double slope(double x, double y, double p) const;
  /// sup |dH/dp| over |p| <= R, all (x, y); exact for the model, sampled otherwise.
  double slope_bound(double R) const;
  bool depends_on_x() const;
};

/// H(x, y, p) = b(x, y) |p|^m - f(x, y) with claims b0 = (m - 1) inf b, C0 = sup |f|.
HamiltonianSpec power_model(const Profile& b, const Profile& f, double m);

struct AuditBudget {
  double p_max = 10.0;
  int n_mu = 64;
  int n_p = 64;
  int n_y = 64;
  int n_x = 8;
};

struct SuperlinearityAudit {
  double worst_slack = 0.0;
  bool pass = true;
  double witness_x = 0.0, witness_y = 0.0, witness_p = 0.0, witness_mu = 0.0;
};

/// mu H(x, y, p / mu) - H(x, y, p) - (1 - mu)(b0 |p|^m - C0).
double superlinearity_slack(const HamiltonianSpec& h, double x, double y, double p, double mu);
SuperlinearityAudit audit_superlinearity(const HamiltonianSpec& h, const AuditBudget& budget = {});

struct RegularityAtRadius {
  double R = 0.0;
  double L_x = 0.0;
  double L_y = 0.0;
  double L_p = 0.0;
};

struct RegularityAudit {
  std::vector<RegularityAtRadius> radii;
  double L = 0.0;
  bool within_claim = true;
  double witness_x = 0.0, witness_y = 0.0, witness_p = 0.0;
};

RegularityAudit audit_regularity(const HamiltonianSpec& h, const AuditBudget& budget = {},
                                 std::vector<double> radii = {1.0, 2.0, 5.0, 10.0});

/// Smallest C with |H| <= C (1 + |p|^m) on the sample.
double growth_bound(const HamiltonianSpec& h, const AuditBudget& budget = {});

struct CoercivityCertificate {
  double c_m = 0.0;
  double C_m = 0.0;
  double C_tilde = 0.0;
  double K = 0.0;
  double valid_above = 2.0;
};

CoercivityCertificate coercivity_constants(double m, double b0, double C0, double C_grow,
                                           double K_small);

struct Rational {
  long num = 0;
  long den = 1;
};

/// c_m = 1 / (2 (4^{m-1} - 1)) and C_m = 3 / (4 (2^{m-1} - 1)) in lowest terms, integer m in [2, 30].
std::pair<Rational, Rational> coercivity_rationals(int m);

/// Additive constant making H >= C_tilde (|p|^m + 1) - K on |p| <= 2 over the sample.
double small_gradient_offset(const HamiltonianSpec& h, double C_tilde,
                             const AuditBudget& budget = {});

/// Lipschitz constant of a coefficient on an n x n sample.
double lipschitz_constant(const Coefficient& a, int n = 256);

struct FluxValue {
  double value = 0.0;
  double d_minus = 0.0;
  double d_plus = 0.0;
};

/// Godunov flux of a convex G with minimizer q_star, evaluated at backward/forward
/// differences (qm, qp). Nondecreasing in qm, nonincreasing in qp.
template <class G, class DG>
FluxValue godunov_flux(G&& g, DG&& dg, double q_star, double qm, double qp) {
  const double a = qm > q_star ? qm : q_star;
  const double b = qp < q_star ? qp : q_star;
  const double ga = g(a);
  const double gb = g(b);
  FluxValue f;
  if (ga >= gb) {
    f.value = ga;
    f.d_minus = qm > q_star ? dg(qm) : 0.0;
  } else {
    f.value = gb;
    f.d_plus = qp < q_star ? dg(qp) : 0.0;
  }
  return f;
}

/// Lax-Friedrichs flux; monotone when theta >= sup |G'| on the range of (qm + qp) / 2.
template <class G, class DG>
FluxValue lax_friedrichs_flux(G&& g, DG&& dg, double theta, double qm, double qp) {
  const double mid = 0.5 * (qm + qp);
  const double d = dg(mid);
  return FluxValue{g(mid) - 0.5 * theta * (qp - qm), 0.5 * (d + theta), 0.5 * (d - theta)};
}

}  // namespace nlh
