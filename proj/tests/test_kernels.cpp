#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "nlh/errors.hpp"
#include "nlh/kernels.hpp"
#include "nlh/nonlocal.hpp"

namespace {

using namespace nlh;
constexpr double kPi = std::numbers::pi;

// Integral of (1 - cos w) w^{-1-s} over (0, inf), independent of the Gamma-function route:
// Taylor series on (0, w0), composite Simpson per period on (w0, W), power tail beyond W.
double cosine_moment(double s) {
  const double w0 = 0.5;
  // 1 - cos w = sum_{k>=1} (-1)^{k+1} w^{2k} / (2k)!
  double inner = 0.0, fact = 1.0;
  for (int k = 1; k <= 8; ++k) {
    fact *= (2 * k - 1) * (2 * k);
    const double sign = k % 2 ? 1.0 : -1.0;
    inner += sign * std::pow(w0, 2 * k - s) / ((2 * k - s) * fact);
  }
  auto f = [s](double w) { return (1 - std::cos(w)) * std::pow(w, -1 - s); };
  const double W = 2 * kPi * 4000;
  const long panels = 4000L * 400;
  const double h = (W - w0) / panels;
  double acc = f(w0) + f(W);
  for (long j = 1; j < panels; ++j) acc += f(w0 + j * h) * (j % 2 ? 4 : 2);
  const double middle = acc * h / 3;
  // Beyond W the cosine part averages out to O(W^{-1-s}).
  const double tail = std::pow(W, -s) / s;
  return inner + middle + tail;
}

TEST(NormalizingConstant, MatchesCosineMomentOracle) {
  for (double s : {0.5, 1.0, 1.5}) {
    const double oracle = 1.0 / (2.0 * cosine_moment(s));
    EXPECT_NEAR(normalizing_constant(1, s), oracle, 2e-5 * oracle) << "sigma=" << s;
  }
}

TEST(NormalizingConstant, FrozenValues) {
  EXPECT_NEAR(normalizing_constant(1, 1.0), 1.0 / kPi, 1e-14);
  EXPECT_NEAR(normalizing_constant(1, 1.5), 0.29920671, 1e-8);
}

TEST(NormalizingConstant, RejectsOrderOutsideOpenInterval) {
  EXPECT_THROW(normalizing_constant(1, 0.0), DomainError);
  EXPECT_THROW(normalizing_constant(1, 2.0), DomainError);
  EXPECT_THROW(normalizing_constant(0, 1.0), DomainError);
  EXPECT_THROW(constant_kernel(-0.5), DomainError);
}

TEST(Kernel, CompensatorActivatesFromOrderOne) {
  EXPECT_FALSE(constant_kernel(0.5).compensated());
  EXPECT_TRUE(constant_kernel(1.0).compensated());
  EXPECT_NE(constant_kernel(0.5).cutoff_note(), constant_kernel(1.5).cutoff_note());
}

TEST(Kernel, TiltIsConstantOutsideUnitBall) {
  const auto k = tilt_kernel(1.0, 0.5);
  const double c = normalizing_constant(1, 1.0);
  EXPECT_DOUBLE_EQ(k.kbar(3.0), c);
  EXPECT_DOUBLE_EQ(k.kbar(-1.5), c);
  EXPECT_DOUBLE_EQ(k.kbar(0.5), c * 1.25);
  EXPECT_DOUBLE_EQ(k.density(2.0), c * std::pow(2.0, -2.0));
}

TEST(Drift, TiltGivesOneOverPi) {
  const auto d = drift_vector(tilt_kernel(1.0, 0.5));
  EXPECT_TRUE(d.converged);
  EXPECT_NEAR(d.b, 1.0 / kPi, 1e-6);
}

TEST(Drift, QuadraticTiltGivesOneOverTwoPi) {
  EXPECT_NEAR(drift_vector(quadratic_tilt_kernel(1.0, 0.5)).b, 1.0 / (2 * kPi), 1e-6);
}

TEST(Drift, SymmetricKernelHasNoDrift) {
  EXPECT_LE(std::abs(drift_vector(constant_kernel(1.0)).b), 1e-12);
}

TEST(Drift, RhoSequenceIsDyadic) {
  const auto d = drift_vector(tilt_kernel(1.0, 1.0));
  ASSERT_GE(d.rho_sequence.size(), 2u);
  for (std::size_t j = 1; j < d.rho_sequence.size(); ++j) {
    EXPECT_DOUBLE_EQ(d.rho_sequence[j], 0.5 * d.rho_sequence[j - 1]);
  }
}

TEST(Drift, OnlyDefinedAtOrderOne) {
  EXPECT_THROW(drift_vector(tilt_kernel(1.5, 1.0)), DomainError);
}

// Property: the drift is linear in the tilt slope and odd under reflection.
TEST(Drift, LinearInSlopeOnRandomSlopes) {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> slope(-0.9, 0.9);
  for (int trial = 0; trial < 10; ++trial) {
    const double s = slope(gen);
    EXPECT_NEAR(drift_vector(tilt_kernel(1.0, s)).b, 2.0 * s / kPi, 1e-8);
  }
}

TEST(Modulus, TiltIsLinearNearOrigin) {
  const auto k = tilt_kernel(1.0, 0.5);
  const double c = normalizing_constant(1, 1.0);
  for (double t : {0.01, 0.1, 0.5, 1.0}) EXPECT_NEAR(modulus_omega_bar(k, t), c * 0.5 * t, 1e-12);
  EXPECT_THROW(modulus_omega_bar(k, 0.0), DomainError);
}

TEST(Modulus, NondecreasingOnRandomRadii) {
  const auto k = log_tilt_kernel(1.0, 0.5);
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> r(1e-4, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    double a = r(gen), b = r(gen);
    if (a > b) std::swap(a, b);
    EXPECT_LE(modulus_omega_bar(k, a), modulus_omega_bar(k, b) + 1e-15);
  }
}

TEST(Modulus, DiniIntegralFiniteForTiltInfiniteForLogTilt) {
  const double c = normalizing_constant(1, 1.0);
  const auto finite = modulus_integral(tilt_kernel(1.0, 0.5));
  EXPECT_TRUE(finite.finite);
  EXPECT_NEAR(finite.value, 0.5 * c, 1e-6);
  const auto diverging = modulus_integral(log_tilt_kernel(1.0, 0.5), 1024, 1e-9, 40);
  EXPECT_FALSE(diverging.finite);
}

TEST(Audit, PositiveCoefficientAndConstantKernelPass) {
  const Coefficient a = [](double, double y) { return 2 + std::cos(2 * kPi * y); };
  const auto rep = audit_ellipticity(a, constant_kernel(1.5));
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.a_min, 1.0, 1e-12);
  EXPECT_NEAR(rep.a_max, 3.0, 1e-12);
  EXPECT_NEAR(rep.a0, 1.0 / 3.0, 1e-12);
  EXPECT_TRUE(rep.symmetric_verified);
}

TEST(Audit, VanishingCoefficientReportsWitness) {
  const Coefficient a = [](double, double y) { return 1 + std::cos(2 * kPi * y); };
  const auto rep = audit_ellipticity(a, constant_kernel(1.5));
  EXPECT_FALSE(rep.pass);
  EXPECT_NEAR(rep.witness_y, 0.5, 1e-12);
}

TEST(Audit, OrderOneLogTiltFailsModulusCheck) {
  const Coefficient a = [](double, double) { return 1.0; };
  AuditGrid grid;
  grid.samples_per_unit = 1024;
  const auto bad = audit_ellipticity(a, log_tilt_kernel(1.0, 0.5), grid);
  EXPECT_TRUE(bad.dini_checked);
  EXPECT_FALSE(bad.pass);
  const auto good = audit_ellipticity(a, tilt_kernel(1.0, 0.5), grid);
  EXPECT_TRUE(good.dini_checked);
  EXPECT_TRUE(good.pass);
}

TEST(Audit, FalseSymmetryClaimIsCaught) {
  auto k = tilt_kernel(1.5, 0.5);
  k.symmetric = true;
  const auto rep = audit_ellipticity([](double, double) { return 1.0; }, k);
  EXPECT_FALSE(rep.pass);
  EXPECT_FALSE(rep.symmetric_verified);
}

TEST(Audit, WrongNormalizationFails) {
  auto k = constant_kernel(1.5);
  k.kbar = [](double) { return 1.0; };
  EXPECT_FALSE(audit_ellipticity([](double, double) { return 1.0; }, k).pass);
}

TEST(Tabulated, InterpolatesAndDetectsSymmetry) {
  const double c = normalizing_constant(1, 1.5);
  const auto k = tabulated_kernel(1.5, {1, -1, 0}, {c, c, c});
  EXPECT_TRUE(k.symmetric);
  EXPECT_DOUBLE_EQ(k.kbar(0.3), c);
  EXPECT_DOUBLE_EQ(k.kbar(7.0), c);
  const auto t = tabulated_kernel(1.0, {-1, 1}, {0.0, 2.0});
  EXPECT_FALSE(t.symmetric);
  EXPECT_DOUBLE_EQ(t.kbar(0.0), 1.0);
  EXPECT_THROW(tabulated_kernel(1.0, {0.0}, {1.0}), DomainError);
  EXPECT_THROW(tabulated_kernel(1.0, {0.0, 0.0}, {1.0, 1.0}), DomainError);
}

TEST(Tabulated, CsvLoadAndMissingFile) {
  const auto dir = std::filesystem::temp_directory_path() / "nlh_kernel_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "k.csv").string();
  {
    std::ofstream out(path);
    out << "# tilt\nz,kbar\n-1,0.5\n0,1\n1,1.5\n";
  }
  const auto k = load_kernel_csv(1.0, path);
  EXPECT_DOUBLE_EQ(k.kbar(0.5), 1.25);
  EXPECT_THROW(load_kernel_csv(1.0, (dir / "absent.csv").string()), IoError);
}

double eigen_error(double sigma, int n) {
  const auto k = constant_kernel(sigma);
  const auto table = periodized_weights(k, n);
  const auto u = GridFunction::sample(n, [](double y) { return std::cos(2 * kPi * y); });
  const auto iu = eval_operator(u, k, table);
  const double lambda = std::pow(2 * kPi, sigma);
  double err = 0.0;
  for (int j = 0; j < n; ++j) err = std::max(err, std::abs(iu[j] + lambda * u[j]));
  return err / lambda;
}

TEST(Weights, EigenfunctionIdentityAtAllOrders) {
  for (double s : {0.5, 1.0, 1.5}) EXPECT_LE(eigen_error(s, 512), 2e-2) << "sigma=" << s;
}

TEST(Weights, EigenfunctionErrorShrinksWithRefinement) {
  for (double s : {0.5, 1.5}) EXPECT_LT(eigen_error(s, 512), eigen_error(s, 128)) << s;
}

TEST(Weights, NonnegativeAndSymmetricCompensatorVanishes) {
  for (double s : {0.5, 1.0, 1.5}) {
    const auto t = periodized_weights(constant_kernel(s), 64);
    for (int r = 1; r < t.n; ++r) EXPECT_GE(t.weights[r], 0.0);
    EXPECT_EQ(t.weights[0], 0.0);
    EXPECT_EQ(t.compensator, 0.0);
    EXPECT_NEAR(t.weights[1], t.weights[63], 1e-12 * t.weights[1]);
  }
}

TEST(Weights, TailMassScalesLikeHToMinusSigma) {
  for (double s : {0.5, 1.5}) {
    const double m1 = periodized_weights(constant_kernel(s), 128).tail_mass;
    const double m2 = periodized_weights(constant_kernel(s), 256).tail_mass;
    EXPECT_NEAR(m2 / m1, std::pow(2.0, s), 0.05 * std::pow(2.0, s));
  }
}

TEST(Weights, TiltedKernelHasCompensatorOnlyAboveOrderOne) {
  EXPECT_NE(periodized_weights(tilt_kernel(1.0, 0.5), 64).compensator, 0.0);
  EXPECT_EQ(periodized_weights(tilt_kernel(0.5, 0.5), 64).compensator, 0.0);
  EXPECT_EQ(periodized_weights(tilt_kernel(1.5, 0.5), 64, 8, false).compensator, 0.0);
}

TEST(Weights, DiagonalCountsCompensator) {
  const auto t = periodized_weights(tilt_kernel(1.5, 0.5), 64);
  EXPECT_DOUBLE_EQ(t.diagonal(), t.tail_mass + std::abs(t.compensator) * 64);
}

TEST(Weights, RejectsBadSizes) {
  EXPECT_THROW(periodized_weights(constant_kernel(1.0), 4), DomainError);
  EXPECT_THROW(periodized_weights(constant_kernel(1.0), 64, 0), DomainError);
}

}  // namespace
