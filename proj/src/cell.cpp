#include "nlh/cell.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "nlh/kernels.hpp"
#include "nlh/nonlocal.hpp"

namespace nlh {

Regime regime_of(double sigma) {
  if (!(sigma > 0.0 && sigma < 2.0)) throw DomainError("kernel order must lie in (0, 2)");
  if (sigma < 1.0) return Regime::below_one;
  if (sigma == 1.0) return Regime::equal_one;
  return Regime::above_one;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::below_one: return "below_one";
    case Regime::equal_one: return "equal_one";
    case Regime::above_one: return "above_one";
  }
  return "unknown";
}

std::vector<double> discount_ladder(double delta_max, double delta_min) {
  if (!(delta_min > 0.0) || !(delta_max >= delta_min)) {
    throw DomainError("discount ladder needs 0 < delta_min <= delta_max");
  }
  std::vector<double> out;
  for (double d = delta_max; d > delta_min * (1.0 + 1e-12); d *= 0.5) out.push_back(d);
  out.push_back(delta_min);
  return out;
}

namespace {

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

// Stationary operator F of the cell problem; delta phi + F(phi) = source is solved around it.
// F only sees differences of phi, so a constant shift of phi leaves it unchanged.
class CellOperator {
 public:
  CellOperator(const CellModel& model, const CellParams& params, const CellConfig& cfg)
      : model_(model), params_(params), n_(cfg.n) {
    if (n_ < 8) throw DomainError("cell grid needs at least 8 nodes");
    if (!model.a || !model.H.eval) throw DomainError("cell model is missing a or H");
    if (regime_of(model.sigma) != params.regime) {
      throw DomainError("cell regime inconsistent with the kernel order");
    }
    y_.resize(n_);
    a_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      y_[i] = static_cast<double>(i) / n_;
      a_[i] = model.a(params.x, y_[i]);
      if (!(a_[i] > 0.0)) throw DomainError("coefficient a must be positive");
    }
    if (params.regime != Regime::below_one) {
      table_ = periodized_weights(constant_kernel(model.sigma), n_, cfg.image_budget);
    }
    if (params.regime == Regime::above_one) {
      frozen_h_.resize(n_);
      for (int i = 0; i < n_; ++i) frozen_h_[i] = model.H(params.x, y_[i], params.p);
    } else {
      godunov_ = static_cast<bool>(model.H.argmin_p);
      if (godunov_) {
        qstar_.resize(n_);
        for (int i = 0; i < n_; ++i) qstar_[i] = model.H.argmin_p(params.x, y_[i]) - params.p;
      }
    }
  }

  int size() const { return n_; }
  bool dense() const { return params_.regime != Regime::below_one; }
  bool local() const { return params_.regime == Regime::below_one; }

  // Raises the Lax-Friedrichs viscosity to cover the gradients of phi; true if it changed.
  bool cover_gradients(const std::vector<double>& phi) {
    if (godunov_ || params_.regime == Regime::above_one) return false;
    double R = 0.0;
    for (int i = 0; i < n_; ++i) R = std::max(R, std::abs(phi[(i + 1) % n_] - phi[i]) * n_);
    const double radius = std::abs(params_.p) + R;
    if (radius <= theta_radius_) return false;
    theta_radius_ = std::max(2.0 * radius, 1.0);
    theta_ = model_.H.slope_bound(theta_radius_);
    return true;
  }

  FluxValue flux(const std::vector<double>& phi, int i) const {
    const double qm = (phi[i] - phi[(i - 1 + n_) % n_]) * n_;
    const double qp = (phi[(i + 1) % n_] - phi[i]) * n_;
    const double x = params_.x, y = y_[i], p = params_.p;
    const HamiltonianSpec& H = model_.H;
    auto g = [&](double q) { return H.eval(x, y, p + q); };
    auto dg = [&](double q) { return H.slope(x, y, p + q); };
    return godunov_ ? godunov_flux(g, dg, qstar_[i], qm, qp)
                    : lax_friedrichs_flux(g, dg, theta_, qm, qp);
  }

  std::vector<double> apply(const std::vector<double>& phi) const {
    std::vector<double> F(n_);
    const GridFunction u(phi);
    const double b = params_.drift_b;
    for (int i = 0; i < n_; ++i) {
      double v = -a_[i] * params_.l;
      switch (params_.regime) {
        case Regime::above_one:
          v += -a_[i] * eval_operator_at(u, table_, i) + frozen_h_[i];
          break;
        case Regime::equal_one:
          v += -a_[i] * eval_operator_at(u, table_, i) + a_[i] * b * upwind(phi, i) +
               flux(phi, i).value;
          break;
        case Regime::below_one:
          v += flux(phi, i).value;
          break;
      }
      F[i] = v;
    }
    return F;
  }

  // d/dphi of F, filled into a dense matrix.
  void jacobian(const std::vector<double>& phi, Eigen::MatrixXd& J) const {
    J.setZero(n_, n_);
    if (params_.regime != Regime::below_one) {
      const auto& w = table_.weights;
      for (int i = 0; i < n_; ++i) {
        for (int r = 1; r < n_; ++r) {
          J(i, (i + r) % n_) -= a_[i] * w[r];
          J(i, i) += a_[i] * w[r];
        }
      }
    }
    if (params_.regime == Regime::equal_one) {
      const double b = params_.drift_b;
      for (int i = 0; i < n_; ++i) {
        const double c = a_[i] * b * n_;
        if (b > 0.0) {
          J(i, i) += c;
          J(i, (i - 1 + n_) % n_) -= c;
        } else if (b < 0.0) {
          J(i, (i + 1) % n_) += c;
          J(i, i) -= c;
        }
      }
    }
    if (params_.regime != Regime::above_one) {
      for (int i = 0; i < n_; ++i) add_flux_row(phi, i, [&](int r, int c, double v) { J(r, c) += v; });
    }
  }

  void jacobian(const std::vector<double>& phi, std::vector<Eigen::Triplet<double>>& entries) const {
    entries.clear();
    for (int i = 0; i < n_; ++i) {
      add_flux_row(phi, i, [&](int r, int c, double v) { entries.emplace_back(r, c, v); });
    }
  }

  // Diagonal scale of F for the pseudo-time step.
  double stiffness() const {
    double s = 0.0;
    for (double a : a_) s = std::max(s, a);
    s *= table_.n ? table_.diagonal() : 0.0;
    return s + theta_ * n_ + std::abs(params_.drift_b) * n_;
  }

 private:
  double upwind(const std::vector<double>& phi, int i) const {
    const double b = params_.drift_b;
    if (b > 0.0) return (phi[i] - phi[(i - 1 + n_) % n_]) * n_;
    if (b < 0.0) return (phi[(i + 1) % n_] - phi[i]) * n_;
    return 0.0;
  }

  template <class Add>
  void add_flux_row(const std::vector<double>& phi, int i, Add&& add) const {
    const FluxValue f = flux(phi, i);
    const int im = (i - 1 + n_) % n_, ip = (i + 1) % n_;
    add(i, i, (f.d_minus - f.d_plus) * n_);
    add(i, im, -f.d_minus * n_);
    add(i, ip, f.d_plus * n_);
  }

  const CellModel& model_;
  CellParams params_;
  int n_;
  std::vector<double> y_, a_, frozen_h_, qstar_;
  QuadratureTable table_;
  bool godunov_ = false;
  double theta_ = 0.0;
  double theta_radius_ = 0.0;
};

struct StationaryResult {
  int iterations = 0;
  double residual = 0.0;
  bool ok = false;
};

std::vector<double> residual_of(const CellOperator& op, double delta, const std::vector<double>& src,
                                const std::vector<double>& phi) {
  std::vector<double> G = op.apply(phi);
  for (std::size_t i = 0; i < G.size(); ++i) G[i] += delta * phi[i] - src[i];
  return G;
}

// Solves (J + shift I) step = -G.
std::vector<double> linear_step(const CellOperator& op, const std::vector<double>& phi,
                                const std::vector<double>& G, double shift) {
  const int n = op.size();
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = -G[i];
  Eigen::VectorXd x;
  if (op.dense()) {
    Eigen::MatrixXd J;
    op.jacobian(phi, J);
    J.diagonal().array() += shift;
    x = J.partialPivLu().solve(rhs);
  } else {
    std::vector<Eigen::Triplet<double>> entries;
    op.jacobian(phi, entries);
    for (int i = 0; i < n; ++i) entries.emplace_back(i, i, shift);
    Eigen::SparseMatrix<double> J(n, n);
    J.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw NumericalError("singular cell Jacobian");
    x = lu.solve(rhs);
  }
  return std::vector<double>(x.data(), x.data() + n);
}

// Newton with backtracking, then pseudo-transient continuation from the best iterate.
StationaryResult solve_stationary(CellOperator& op, double delta, const std::vector<double>& src,
                                  std::vector<double>& phi, const CellConfig& cfg,
                                  std::vector<double>& history) {
  StationaryResult res;
  op.cover_gradients(phi);
  std::vector<double> G = residual_of(op, delta, src, phi);
  double norm = sup_abs(G);
  history.push_back(norm);

  bool stalled = false;
  for (int it = 0; it < cfg.max_newton && norm >= cfg.tol; ++it) {
    const std::vector<double> step = linear_step(op, phi, G, delta);
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls, lambda *= 0.5) {
      std::vector<double> trial(phi);
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += lambda * step[i];
      if (op.cover_gradients(trial)) {
        G = residual_of(op, delta, src, phi);
        norm = sup_abs(G);
        accepted = true;  // viscosity changed; restart from phi with the new operator
        break;
      }
      std::vector<double> Gt = residual_of(op, delta, src, trial);
      const double nt = sup_abs(Gt);
      // F is convex with an M-matrix Jacobian, so a full step lands on G >= 0 and the
      // undamped iteration decreases monotonically from there (policy iteration).
      const bool one_sided = lambda == 1.0 && std::isfinite(nt) &&
                             *std::min_element(Gt.begin(), Gt.end()) >= -cfg.tol;
      if (nt < (1.0 - 1e-4 * lambda) * norm || (one_sided && nt < 1e3 * (1.0 + norm))) {
        phi.swap(trial);
        G.swap(Gt);
        norm = nt;
        accepted = true;
        break;
      }
    }
    ++res.iterations;
    history.push_back(norm);
    if (!accepted) {
      stalled = true;
      break;
    }
  }

  if (norm >= cfg.tol && (stalled || res.iterations >= cfg.max_newton)) {
    // Implicit pseudo-time steps with a growing step size.
    double tau = 1.0 / (1.0 + op.stiffness());
    for (int it = 0; it < cfg.max_pseudo_steps && norm >= cfg.tol; ++it) {
      const std::vector<double> step = linear_step(op, phi, G, delta + 1.0 / tau);
      std::vector<double> trial(phi);
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += step[i];
      op.cover_gradients(trial);
      std::vector<double> Gt = residual_of(op, delta, src, trial);
      const double nt = sup_abs(Gt);
      ++res.iterations;
      if (std::isfinite(nt) && nt < 2.0 * norm) {
        tau *= std::clamp(norm / std::max(nt, 1e-300), 0.5, 4.0);
        tau = std::min(tau, 1e14);
        phi.swap(trial);
        G.swap(Gt);
        norm = nt;
      } else {
        tau *= 0.25;
      }
      history.push_back(norm);
    }
  }
  res.residual = norm;
  res.ok = norm < cfg.tol;
  return res;
}

}  // namespace

CellSolution vanishing_discount_sweep(const CellModel& model, const CellParams& params,
                                      const std::vector<double>& deltas, const CellConfig& cfg) {
  if (deltas.empty()) throw DomainError("discount list is empty");
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    if (!(deltas[j] > 0.0)) throw DomainError("discounts must be positive");
    if (j > 0 && !(deltas[j] < deltas[j - 1])) throw DomainError("discounts must decrease");
  }
  CellOperator op(model, params, cfg);
  const int n = op.size();

  // phi = psi + shift / delta, so -delta psi = shift - delta phi with phi of unit size.
  std::vector<double> phi(n, 0.0);
  double shift = 0.0;
  {
    const std::vector<double> F0 = op.apply(phi);
    for (double v : F0) shift += v;
    shift /= n;
  }

  CellSolution sol;
  for (double delta : deltas) {
    const std::vector<double> src(n, shift);
    const StationaryResult r = solve_stationary(op, delta, src, phi, cfg, sol.residual_history);
    if (!r.ok) {
      throw CellConvergenceError("cell problem did not reach its residual target at delta = " +
                                     std::to_string(delta) + " (residual " +
                                     std::to_string(r.residual) + ")",
                                 sol.residual_history);
    }
    DeltaTrace tr;
    tr.delta = delta;
    tr.iterations = r.iterations;
    tr.residual = r.residual;
    const auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
    tr.sup = shift - delta * *lo;
    tr.inf = shift - delta * *hi;
    sol.delta_trace.push_back(tr);

    // Re-center on the new midpoint so the next phi stays of unit size.
    const double mid = 0.5 * (tr.sup + tr.inf);
    const double phi_mid = (shift - mid) / delta;
    for (double& v : phi) v -= phi_mid;
    shift = mid;
  }
  const DeltaTrace& last = sol.delta_trace.back();
  sol.H_bar = 0.5 * (last.sup + last.inf);
  sol.spread = last.sup - last.inf;
  const double base = phi[0];
  for (double& v : phi) v -= base;
  sol.psi = GridFunction(phi);
  sol.converged = true;
  sol.regularity = regularity_audit(sol, params, model);
  return sol;
}

CellSolution solve_cell(const CellModel& model, const CellParams& params, const CellConfig& cfg) {
  return vanishing_discount_sweep(model, params, discount_ladder(cfg.delta_max, cfg.delta_min), cfg);
}

LongTimeEstimate long_time_average(const CellModel& model, const CellParams& params, double T_max,
                                   const CellConfig& cfg, int steps) {
  if (!(T_max > 0.0) || steps < 10) throw DomainError("long-time run needs T_max > 0 and >= 10 steps");
  CellOperator op(model, params, cfg);
  const int n = op.size();
  const double tau = T_max / steps;
  // v = w + offset with w of unit size; F ignores the offset.
  std::vector<double> w(n, 0.0);
  double offset = 0.0;
  std::vector<double> history;
  const int decade = steps / 10;
  double est_decade = 0.0;
  for (int k = 1; k <= steps; ++k) {
    double m = 0.0;
    for (double v : w) m += v;
    m /= n;
    offset += m;
    std::vector<double> src(n);
    for (int i = 0; i < n; ++i) {
      w[i] -= m;
      src[i] = w[i] / tau;
    }
    history.clear();
    const StationaryResult r = solve_stationary(op, 1.0 / tau, src, w, cfg, history);
    if (!r.ok) throw CellConvergenceError("implicit step did not converge", history);
    if (k == decade) {
      double mean = offset;
      for (double v : w) mean += v / n;
      est_decade = -mean / (k * tau);
    }
  }
  double mean = offset;
  for (double v : w) mean += v / n;
  LongTimeEstimate out;
  out.T = T_max;
  out.steps = steps;
  out.H_bar = -mean / T_max;
  out.error = std::abs(out.H_bar - est_decade);
  return out;
}

GridFunction spectral_cell_above_one(const GridFunction& f, double sigma) {
  if (!(sigma > 1.0 && sigma < 2.0)) throw DomainError("spectral cell solve needs sigma in (1, 2)");
  if (std::abs(f.mean()) > 1e-12 * std::max(f.sup_norm(), 1e-300)) {
    throw DomainError("right side has nonzero mean; Fredholm condition fails");
  }
  const int n = f.size();
  auto spec = fft::forward(f.values());
  spec[0] = 0.0;
  for (int m = 1; m <= n / 2; ++m) spec[m] /= std::pow(2.0 * std::numbers::pi * m, sigma);
  GridFunction psi(fft::inverse(std::move(spec), n));
  psi += -psi[0];
  return psi;
}

RegularityReport regularity_audit(const CellSolution& sol, const CellParams& params,
                                  const CellModel& model) {
  RegularityReport rep;
  const GridFunction& psi = sol.psi;
  const int n = psi.size();
  if (!sol.delta_trace.empty()) {
    const auto& last = sol.delta_trace.back();
    rep.scale_psi = std::max(std::abs(last.sup), std::abs(last.inf));
  }
  rep.oscillation = psi.oscillation();
  for (int i = 0; i < n; ++i) rep.lipschitz = std::max(rep.lipschitz, std::abs(psi.at(i + 1) - psi[i]) * n);
  const QuadratureTable half = periodized_weights(constant_kernel(1.0), n);
  for (int i = 0; i < n; ++i) rep.flap_sup = std::max(rep.flap_sup, std::abs(eval_operator_at(psi, half, i)));

  rep.holder_gammas = {0.25, 0.5, 0.75};
  for (double g : rep.holder_gammas) {
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int d = 1; d <= n / 2; ++d) {
        q = std::max(q, std::abs(psi.at(i + d) - psi[i]) / std::pow(static_cast<double>(d) / n, g));
      }
    }
    rep.holder_quotients.push_back(q);
  }

  const double m = model.H.m;
  const double growth = 1.0 + std::abs(params.l) + std::pow(std::abs(params.p), m);
  rep.ratio_psi1 = rep.scale_psi / growth;
  rep.ratio_osc = rep.oscillation / (1.0 + std::abs(params.p) + std::pow(std::abs(params.l), 1.0 / m));
  rep.ratio_lip = rep.lipschitz / growth;
  rep.ratio_flap = rep.flap_sup / std::pow(growth, m);
  rep.pass = std::isfinite(rep.ratio_psi1) && std::isfinite(rep.ratio_osc) &&
             std::isfinite(rep.ratio_lip) && std::isfinite(rep.ratio_flap);
  return rep;
}

RegularitySweep regularity_sweep(const CellModel& model, CellParams params,
                                 const std::vector<double>& p_values, const CellConfig& cfg,
                                 double growth_tol) {
  RegularitySweep out;
  out.p_values = p_values;
  for (double p : p_values) {
    params.p = p;
    out.reports.push_back(solve_cell(model, params, cfg).regularity);
  }
  if (out.reports.size() >= 2) {
    const auto& a = out.reports.front();
    const auto& b = out.reports.back();
    auto grows = [&](double first, double last) { return last > first * (1.0 + growth_tol) + 1e-12; };
    out.psi1_growing = grows(a.ratio_psi1, b.ratio_psi1);
    out.osc_growing = grows(a.ratio_osc, b.ratio_osc);
    out.lip_growing = grows(a.ratio_lip, b.ratio_lip);
    out.flap_growing = grows(a.ratio_flap, b.ratio_flap);
  }
  return out;
}

}  // namespace nlh
