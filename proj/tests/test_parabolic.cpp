#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "nlh/errors.hpp"
#include "nlh/parabolic.hpp"

namespace {

using namespace nlh;
constexpr double kTwoPi = 2 * std::numbers::pi;

Coefficient two_plus_cos() {
  return [](double, double y) { return 2 + std::cos(kTwoPi * y); };
}

HamiltonianSpec model(double m = 2.0, double f_scale = 1.0) {
  return power_model(Profile::parse("constant"), Profile::parse("cos_y", f_scale), m);
}

ParabolicProblem oscillating(int k, int n, const std::function<double(double)>& u0,
                             HamiltonianSpec h = model(), double sigma = 1.5, double T = 0.1) {
  ParabolicProblem p;
  p.source = OscillatingSource{k, two_plus_cos(), std::move(h)};
  p.kernel = constant_kernel(sigma);
  p.u0 = GridFunction::sample(n, u0);
  p.T = T;
  return p;
}

SolverConfig config(int n, FluxKind flux = FluxKind::godunov, int records = 5) {
  SolverConfig c;
  c.n = n;
  c.flux = flux;
  c.records = records;
  return c;
}

// Hbar(x, p, l) = -l, i.e. u_t = I u.
class LinearDiffusion : public EffectiveHamiltonian {
 public:
  double value(double, double, double l) const override { return -l; }
  double l_slope_bound() const override { return 1.0; }
  double p_slope_bound(double) const override { return 0.0; }
  std::optional<double> argmin_p(double, double) const override { return 0.0; }
  std::string provenance() const override { return "test"; }
};

// Random smooth periodic datum: a short random trigonometric sum.
struct TrigDatum {
  double c0 = 0.0;
  std::vector<double> a, b;
  double operator()(double x) const {
    double v = c0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      v += a[j] * std::cos(kTwoPi * (j + 1) * x) + b[j] * std::sin(kTwoPi * (j + 1) * x);
    }
    return v;
  }
};

TrigDatum random_datum(std::mt19937& gen, int modes = 3) {
  std::uniform_real_distribution<double> c(-0.5, 0.5);
  TrigDatum d;
  d.c0 = c(gen);
  for (int j = 0; j < modes; ++j) {
    d.a.push_back(c(gen) / (j + 1));
    d.b.push_back(c(gen) / (j + 1));
  }
  return d;
}

TEST(Solve, ConstantDataGrowsAtSourceRate) {
  // H = |p|^2 - 0.7 and u0 = 1.25 give u = 1.25 + 0.7 t exactly.
  const auto h = power_model(Profile::parse("constant"), Profile::parse("constant", 0.7), 2.0);
  const auto p = oscillating(2, 64, [](double) { return 1.25; }, h, 1.5, 0.3);
  const auto traj = solve(p, config(64));
  ASSERT_EQ(traj.times.size(), 6u);
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    for (int i = 0; i < 64; ++i) EXPECT_NEAR(traj.snapshots[r][i], 1.25 + 0.7 * traj.times[r], 1e-13);
  }
}

TEST(Solve, RecordTimesAreHit) {
  const auto traj = solve(oscillating(2, 64, [](double x) { return std::sin(kTwoPi * x); }), config(64, FluxKind::godunov, 4));
  for (int r = 0; r <= 4; ++r) EXPECT_DOUBLE_EQ(traj.times[r], 0.1 * r / 4);
  EXPECT_GT(traj.steps, 4);
  EXPECT_LE(traj.dt_min, traj.dt_max);
}

TEST(Solve, LinearDiffusionDecaysAtSymbolRate) {
  ParabolicProblem p;
  p.source = EffectiveSource{std::make_shared<LinearDiffusion>()};
  p.kernel = constant_kernel(1.5);
  p.u0 = GridFunction::sample(256, [](double x) { return std::cos(kTwoPi * x); });
  p.T = 0.05;
  const auto traj = solve(p, config(256));
  const double decay = std::exp(-std::pow(kTwoPi, 1.5) * p.T);
  for (int i = 0; i < 256; ++i) {
    EXPECT_NEAR(traj.snapshots.back()[i], decay * p.u0[i], 1e-2);
  }
}

// Property: sup |u(t)| <= |u0| + |H(., ., 0)| t over random data and both fluxes.
TEST(Solve, MaximumBoundOnRandomRuns) {
  std::mt19937 gen(43);
  for (int trial = 0; trial < 6; ++trial) {
    const auto d = random_datum(gen);
    const auto flux = trial % 2 ? FluxKind::lax_friedrichs : FluxKind::godunov;
    const double sigma = trial % 3 == 0 ? 0.5 : (trial % 3 == 1 ? 1.0 : 1.5);
    const auto p = oscillating(4, 128, d, model(), sigma, 0.1);
    const auto traj = solve(p, config(128, flux));
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
      EXPECT_LE(traj.sup_norm_track[r], max_bound(p, traj.times[r]) + 1e-8) << trial;
    }
  }
}

// Property: ordered data stay ordered (discrete comparison).
TEST(Solve, ComparisonOnRandomOrderedPairs) {
  std::mt19937 gen(47);
  std::uniform_real_distribution<double> gap(0.0, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto lo = random_datum(gen);
    auto bump = random_datum(gen, 2);
    const double lift = gap(gen) + 0.8;  // keeps the bump positive
    bump.c0 = 0.0;
    auto hi = [&](double x) { return lo(x) + lift + 0.5 * bump(x); };
    const auto flux = trial % 2 ? FluxKind::lax_friedrichs : FluxKind::godunov;
    const auto pl = oscillating(4, 128, lo, model(), 1.5, 0.1);
    const auto ph = oscillating(4, 128, hi, model(), 1.5, 0.1);
    for (int i = 0; i < 128; ++i) ASSERT_LE(pl.u0[i], ph.u0[i]);
    const auto tl = solve(pl, config(128, flux));
    const auto th = solve(ph, config(128, flux));
    for (std::size_t r = 0; r < tl.times.size(); ++r) {
      for (int i = 0; i < 128; ++i) EXPECT_LE(tl.snapshots[r][i], th.snapshots[r][i] + 1e-12);
    }
  }
}

TEST(Solve, ConstantShiftCommutes) {
  auto base = [](double x) { return std::sin(kTwoPi * x) + 0.3 * std::cos(2 * kTwoPi * x); };
  const auto a = solve(oscillating(4, 128, base), config(128));
  const auto b = solve(oscillating(4, 128, [&](double x) { return base(x) + 2.0; }), config(128));
  ASSERT_EQ(a.steps, b.steps);
  for (int i = 0; i < 128; ++i) EXPECT_NEAR(b.snapshots.back()[i] - a.snapshots.back()[i], 2.0, 1e-12);
}

TEST(Solve, ValidationErrors) {
  auto sinx = [](double x) { return std::sin(kTwoPi * x); };
  auto p = oscillating(4, 128, sinx);
  auto c = config(128);
  c.cfl_safety = 1.5;
  EXPECT_THROW(solve(p, c), DomainError);
  EXPECT_THROW(solve(oscillating(16, 128, sinx), config(128)), DomainError);
  p.T = 0.0;
  EXPECT_THROW(solve(p, config(128)), DomainError);
  auto no_min = model();
  no_min.argmin_p = nullptr;
  EXPECT_THROW(solve(oscillating(4, 128, sinx, no_min), config(128)), DomainError);
  EXPECT_NO_THROW(solve(oscillating(4, 128, sinx, no_min), config(128, FluxKind::lax_friedrichs)));
}

TEST(Solve, ManualStepIsCheckedAgainstCfl) {
  auto p = oscillating(4, 128, [](double x) { return std::sin(kTwoPi * x); });
  auto c = config(128);
  c.dt_override = 1.0;
  EXPECT_THROW(solve(p, c), DomainError);
  const auto ref = solve(p, config(128));
  c.dt_override = 0.5 * ref.dt_min;
  const auto traj = solve(p, c);
  EXPECT_GE(traj.steps, ref.steps);
}

TEST(Solve, StepBudgetRaisesNumericalError) {
  auto c = config(128);
  c.max_steps = 3;
  EXPECT_THROW(solve(oscillating(4, 128, [](double x) { return std::sin(kTwoPi * x); }), c),
               NumericalError);
}

TEST(Barrier, SolutionStaysInsideEnvelopes) {
  auto u0 = [](double x) { return std::sin(kTwoPi * x) + 0.5 * std::abs(std::sin(3 * std::numbers::pi * x)); };
  for (auto flux : {FluxKind::godunov, FluxKind::lax_friedrichs}) {
    const auto p = oscillating(4, 128, u0);
    const auto c = config(128, flux, 10);
    const auto traj = solve(p, c);
    const auto b = barrier_bounds(p, c, 0.05);
    EXPECT_GT(b.omega0, 0.0);
    EXPECT_DOUBLE_EQ(b.C_h, b.nonlocal_part + b.hamiltonian_part);
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
      const auto lo = b.lower(traj.times[r]);
      const auto hi = b.upper(traj.times[r]);
      for (int i = 0; i < 128; ++i) {
        EXPECT_GE(traj.snapshots[r][i], lo[i] - 1e-12);
        EXPECT_LE(traj.snapshots[r][i], hi[i] + 1e-12);
      }
    }
  }
}

TEST(InitialLayer, ModulusBelowBound) {
  const auto p = oscillating(4, 128, [](double x) { return std::cos(kTwoPi * x); });
  const auto c = config(128, FluxKind::godunov, 8);
  const auto traj = solve(p, c);
  const auto layer = initial_layer_modulus(traj, p.u0);
  EXPECT_DOUBLE_EQ(layer.front().value, 0.0);
  for (std::size_t j = 1; j < layer.size(); ++j) {
    EXPECT_LE(layer[j].value, initial_layer_bound(p, c, layer[j].t)) << layer[j].t;
  }
  EXPECT_GT(layer_constant_C3(p, c, {0.05, 0.1, 0.2}), 0.0);
}

TEST(Mollify, PreservesConstantsAndMean) {
  const auto c = mollify(GridFunction(64, 1.5), 0.1);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(c[i], 1.5, 1e-14);
  const auto u = GridFunction::sample(128, [](double x) { return std::sin(kTwoPi * x); });
  const auto m = mollify(u, 0.1);
  EXPECT_NEAR(m.mean(), u.mean(), 1e-14);
  EXPECT_LE(m.sup_norm(), u.sup_norm());
  EXPECT_THROW(mollify(u, 0.0), DomainError);
}

TEST(Modulus, SineHalfPeriod) {
  const auto u = GridFunction::sample(128, [](double x) { return std::sin(kTwoPi * x); });
  EXPECT_NEAR(sampled_modulus(u, 0.5), 2.0, 1e-12);
  // Neighbour differences peak at half-node offsets: 2 sin(pi/n) cos(pi/n).
  EXPECT_NEAR(sampled_modulus(u, 1.0 / 128), std::sin(kTwoPi / 128), 1e-12);
}

// Brute-force oracle: maximize over every grid time directly.
std::vector<std::vector<double>> brute_sup_convolution(const std::vector<std::vector<double>>& u,
                                                       const std::vector<double>& t, double gamma) {
  std::vector<std::vector<double>> out;
  for (const auto& row : u) {
    std::vector<double> v(t.size());
    for (std::size_t q = 0; q < t.size(); ++q) {
      double best = -1e300;
      for (std::size_t s = 0; s < t.size(); ++s) {
        const double d = t[s] - t[q];
        best = std::max(best, row[s] - d * d / gamma);
      }
      v[q] = best;
    }
    out.push_back(v);
  }
  return out;
}

TEST(SupConvolution, MatchesBruteForceOnTentProfile) {
  std::vector<double> t;
  for (int k = 0; k <= 40; ++k) t.push_back(k / 40.0);
  std::vector<std::vector<double>> u{std::vector<double>(t.size())};
  for (std::size_t k = 0; k < t.size(); ++k) u[0][k] = -std::abs(t[k] - 0.5);
  for (double gamma : {0.01, 0.1, 1.0}) {
    const auto sc = sup_convolution_time(u, t, gamma);
    const auto oracle = brute_sup_convolution(u, t, gamma);
    for (std::size_t q = 0; q < t.size(); ++q) EXPECT_EQ(sc.values[0][q], oracle[0][q]) << gamma;
  }
}

// Property on random rows and random nonuniform times.
TEST(SupConvolution, MatchesBruteForceOnRandomData) {
  std::mt19937 gen(53);
  std::uniform_real_distribution<double> v(-1.0, 1.0), dt(0.001, 0.05), g(0.001, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> t{0.0};
    for (int k = 0; k < 30; ++k) t.push_back(t.back() + dt(gen));
    std::vector<std::vector<double>> u(5, std::vector<double>(t.size()));
    for (auto& row : u) for (auto& x : row) x = v(gen);
    const double gamma = g(gen);
    const auto sc = sup_convolution_time(u, t, gamma);
    const auto oracle = brute_sup_convolution(u, t, gamma);
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (std::size_t q = 0; q < t.size(); ++q) {
        EXPECT_EQ(sc.values[i][q], oracle[i][q]);
        EXPECT_GE(sc.values[i][q], u[i][q]);
      }
    }
  }
}

TEST(SupConvolution, LipschitzWithinBoundOnSolverOutput) {
  const auto p = oscillating(4, 128, [](double x) { return std::cos(kTwoPi * x); });
  const auto traj = solve(p, config(128, FluxKind::godunov, 20));
  const auto st = space_time(traj);
  ASSERT_EQ(st.size(), 128u);
  for (double gamma : {1e-3, 1e-2, 1e-1}) {
    const auto sc = sup_convolution_time(st, traj.times, gamma);
    EXPECT_DOUBLE_EQ(sc.bound, 4 * sc.sup_u / std::sqrt(gamma));
    for (std::size_t i = 0; i < st.size(); ++i) {
      EXPECT_LE(sc.lipschitz[i], sc.bound);
      for (std::size_t q = 0; q < traj.times.size(); ++q) EXPECT_GE(sc.values[i][q], st[i][q]);
    }
  }
}

TEST(SupConvolution, RejectsBadInput) {
  EXPECT_THROW(sup_convolution_time({{0.0, 1.0}}, {0.0, 1.0}, 0.0), DomainError);
  EXPECT_THROW(sup_convolution_time({{0.0, 1.0}}, {1.0, 1.0}, 1.0), DomainError);
  EXPECT_THROW(sup_convolution_time({{0.0}}, {0.0, 1.0}, 1.0), DomainError);
}

TEST(HolderExponent, ClosedForms) {
  EXPECT_NEAR(holder_exponent_alpha0(1, 1, 2), 1.5 - 0.5 * std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(holder_exponent_alpha0(1, 1, 2), 0.63397, 1e-5);
  EXPECT_NEAR(holder_exponent_alpha0(2, 1, 2), 0.79289, 1e-5);
  EXPECT_THROW(holder_exponent_alpha0(0, 1, 2), DomainError);
  EXPECT_THROW(holder_exponent_alpha0(1, 1.5, 2), DomainError);
  EXPECT_THROW(holder_exponent_alpha0(1, 1, 1), DomainError);
}

// Property: the exponent lies in [0, 1) and increases with the structure exponent.
TEST(HolderExponent, MonotoneInStructureExponent) {
  std::mt19937 gen(59);
  std::uniform_real_distribution<double> s(0.05, 1.0), nn(0.1, 5.0), mm(1.1, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double sigma = s(gen), m = mm(gen), a = nn(gen), b = a + nn(gen);
    const double lo = holder_exponent_alpha0(a, sigma, m), hi = holder_exponent_alpha0(b, sigma, m);
    EXPECT_GE(lo, 0.0);
    EXPECT_LT(hi, 1.0);
    EXPECT_LE(lo, hi + 1e-15);
  }
}

}  // namespace
