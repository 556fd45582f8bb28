#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "nlh/effective.hpp"
#include "nlh/errors.hpp"

namespace {

using namespace nlh;
constexpr double kTwoPi = 2 * std::numbers::pi;

HamiltonianSpec quadratic_minus_cos() {
  return power_model(Profile::parse("constant"), Profile::parse("cos_y"), 2.0);
}

Coefficient two_plus_cos() {
  return [](double, double y) { return 2 + std::cos(kTwoPi * y); };
}

std::filesystem::path scratch_dir() {
  const auto d = std::filesystem::temp_directory_path() / "nlh_effective_test";
  std::filesystem::create_directories(d);
  return d;
}

// Synthetic table from a closed-form function on the given axes.
template <class F>
EffectiveTable synthetic(const EffectiveAxes& axes, F&& f) {
  EffectiveTable t;
  t.axes = axes;
  for (double x : axes.x) {
    for (double p : axes.p) {
      for (double l : axes.l) {
        t.values.push_back(f(x, p, l));
        t.errors.push_back(0.0);
        t.provenance.push_back(Provenance::formula);
        t.converged.push_back(true);
      }
    }
  }
  return t;
}

TEST(Formula, ClassicalIntegralsGiveClosedForm) {
  const double r3 = std::sqrt(3.0);
  const auto h = quadratic_minus_cos();
  EXPECT_NEAR(explicit_formula_above_one(two_plus_cos(), h, 0, 1, 0), 3 - r3, 1e-12);
  EXPECT_NEAR(explicit_formula_above_one(two_plus_cos(), h, 0, 1, 1), 3 - 2 * r3, 1e-12);
  EXPECT_THROW(explicit_formula_above_one(two_plus_cos(), h, 0, 1, 0, 4), DomainError);
}

TEST(Formula, ConstantCoefficientReducesToMeanMinusShift) {
  const auto h = quadratic_minus_cos();
  const Coefficient a = [](double, double) { return 1.7; };
  // int (p^2 - cos) dy = p^2.
  for (double p : {0.0, 0.6, 1.3}) {
    for (double l : {-1.0, 0.5}) {
      EXPECT_NEAR(explicit_formula_above_one(a, h, 0.2, p, l), p * p - 1.7 * l, 1e-13);
    }
  }
}

// Property: the cached model path agrees with the generic quadrature path at random points.
TEST(Formula, ModelCacheMatchesGenericPath) {
  const auto h = power_model(Profile::parse("two_plus_cos_y", 0.5), Profile::parse("cos_x_cos_y"), 1.7);
  const Coefficient a = [](double x, double y) { return 2 + std::sin(kTwoPi * x) * std::cos(kTwoPi * y); };
  const FormulaHamiltonian fh(a, h);
  auto generic = h;
  generic.coefficient_b.reset();
  generic.source_f.reset();
  const FormulaHamiltonian gh(a, generic);
  EXPECT_FALSE(gh.argmin_p(0, 0).has_value());
  EXPECT_DOUBLE_EQ(*fh.argmin_p(0, 0), 0.0);
  std::mt19937 gen(67);
  std::uniform_real_distribution<double> u(0, 1), pp(-2, 2), ll(-1, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const double x = u(gen), p = pp(gen), l = ll(gen);
    EXPECT_NEAR(fh.value(x, p, l), gh.value(x, p, l), 1e-12);
    EXPECT_NEAR(fh.value(x, p, l), explicit_formula_above_one(a, h, x, p, l), 1e-12);
  }
  EXPECT_EQ(fh.provenance(), "formula");
}

TEST(Formula, SlopeBoundsDominateFiniteDifferences) {
  const FormulaHamiltonian fh(two_plus_cos(), quadratic_minus_cos());
  EXPECT_NEAR(fh.l_slope_bound(), std::sqrt(3.0), 1e-12);
  for (double R : {0.5, 1.0, 2.0}) {
    const double d = 1e-6;
    const double fd = std::abs(fh.value(0, R, 0) - fh.value(0, R - d, 0)) / d;
    EXPECT_GE(fh.p_slope_bound(R), fd * (1 - 1e-5));
  }
}

TEST(Provenance, RoundTrip) {
  for (auto p : {Provenance::discount, Provenance::longtime, Provenance::formula}) {
    EXPECT_EQ(parse_provenance(to_string(p)), p);
  }
  EXPECT_THROW(parse_provenance("guess"), DomainError);
}

TEST(Tabulate, DiscountAgreesWithFormulaAboveOne) {
  EffectiveAxes axes;
  axes.p = {0.0, 1.0};
  axes.l = {-1.0, 0.0, 1.0};
  const CellModel model{two_plus_cos(), quadratic_minus_cos(), 1.5};
  TabulateOptions opts;
  const auto t = tabulate(model, axes, opts);
  opts.source = Provenance::formula;
  const auto f = tabulate(model, axes, opts);
  EXPECT_EQ(t.failed_nodes(), 0);
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_NEAR(t.values[k], f.values[k], std::max(t.errors[k], 1e-4)) << k;
    EXPECT_EQ(f.errors[k], 0.0);
  }
  EXPECT_EQ(audit_properties(t, {}).monotonicity_violations, 0);
}

TEST(Tabulate, FormulaRejectedAtOrderOneAndBelow) {
  TabulateOptions opts;
  opts.source = Provenance::formula;
  const CellModel model{two_plus_cos(), quadratic_minus_cos(), 1.0};
  EXPECT_THROW(tabulate(model, EffectiveAxes{}, opts), DomainError);
}

TEST(Tabulate, RejectsBadAxes) {
  EffectiveAxes axes;
  axes.p = {1.0, 0.5};
  const CellModel model{two_plus_cos(), quadratic_minus_cos(), 1.5};
  EXPECT_THROW(tabulate(model, axes, TabulateOptions{}), DomainError);
  axes.p = {};
  EXPECT_THROW(tabulate(model, axes, TabulateOptions{}), DomainError);
}

TEST(Tabulate, FailedNodesAreMarked) {
  EffectiveAxes axes;
  axes.p = {0.5, 1.0};
  axes.l = {0.0};
  TabulateOptions opts;
  opts.cell.tol = 1e-30;
  opts.cell.max_newton = 2;
  opts.cell.max_pseudo_steps = 2;
  const auto t = tabulate({two_plus_cos(), quadratic_minus_cos(), 1.5}, axes, opts);
  EXPECT_EQ(t.failed_nodes(), 2);
  EXPECT_TRUE(std::isnan(t.values[0]));
  EXPECT_THROW(query(t, 0, 0.7, 0), NumericalError);
}

TEST(Tabulate, ThreadCountDoesNotChangeValues) {
  EffectiveAxes axes;
  axes.p = {0.0, 0.5, 1.0};
  axes.l = {-0.5, 0.5};
  const CellModel model{[](double, double) { return 1.0; }, quadratic_minus_cos(), 0.5};
  TabulateOptions one;
  TabulateOptions two = one;
  two.threads = 2;
  const auto a = tabulate(model, axes, one);
  const auto b = tabulate(model, axes, two);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a.values[k], b.values[k]);
}

// Property: multilinear interpolation reproduces functions affine in each variable.
TEST(Query, ReproducesMultiaffineFunctionsAtRandomPoints) {
  EffectiveAxes axes;
  axes.x = {0.0, 0.3, 1.0};
  axes.p = {-1.0, 0.0, 0.5, 2.0};
  axes.l = {-1.0, 1.0};
  auto f = [](double x, double p, double l) { return 1 + 2 * x - p + 0.5 * l + x * p * l; };
  const auto t = synthetic(axes, f);
  std::mt19937 gen(71);
  std::uniform_real_distribution<double> ux(0, 1), up(-1, 2), ul(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = ux(gen), p = up(gen), l = ul(gen);
    EXPECT_NEAR(query(t, x, p, l), f(x, p, l), 1e-12);
  }
  EXPECT_DOUBLE_EQ(query(t, 0.3, 0.5, 1.0), f(0.3, 0.5, 1.0));
}

TEST(Query, OutsideHullThrowsRangeError) {
  EffectiveAxes axes;
  axes.p = {0.0, 1.0};
  axes.l = {0.0, 1.0};
  const auto t = synthetic(axes, [](double, double p, double l) { return p - l; });
  EXPECT_THROW(query(t, 0, 1.5, 0.5), RangeError);
  EXPECT_THROW(query(t, 0, 0.5, -0.1), RangeError);
  // One x node: the table holds for every x.
  EXPECT_DOUBLE_EQ(query(t, 0.77, 0.5, 0.5), 0.0);
}

TEST(Audit, CountsMonotonicityAndCoercivityViolations) {
  EffectiveAxes axes;
  axes.p = {0.0, 1.0, 2.0};
  axes.l = {-1.0, 0.0, 1.0};
  const auto good = synthetic(axes, [](double, double p, double l) { return p * p - l; });
  const auto ra = audit_properties(good, {0.5, 0.0, 1.0, 2.0});
  EXPECT_TRUE(ra.pass);
  EXPECT_NEAR(ra.C_l, 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(ra.structure_n, 1.0);
  const auto bad = synthetic(axes, [](double, double p, double l) { return p * p + 0.1 * l; });
  const auto rb = audit_properties(bad, {0.5, 0.0, 1.0, 2.0});
  EXPECT_FALSE(rb.pass);
  EXPECT_EQ(rb.monotonicity_violations, 6);
  EXPECT_NEAR(rb.worst_l_increase, 0.1, 1e-14);
  const auto rc = audit_properties(good, {3.0, 0.0, 1.0, 2.0});
  EXPECT_GT(rc.coercivity_violations, 0);
  EXPECT_LT(rc.worst_coercivity_slack, 0.0);
}

TEST(Csv, RoundTripIsExact) {
  EffectiveAxes axes;
  axes.x = {0.0, 0.5};
  axes.p = {0.0, 1.0 / 3.0, 1.0};
  axes.l = {-1.0, 0.1};
  auto t = synthetic(axes, [](double x, double p, double l) { return std::exp(x) * p - std::sqrt(2.0) * l; });
  t.converged[3] = false;
  t.values[3] = std::numeric_limits<double>::quiet_NaN();
  const auto path = (scratch_dir() / "table.csv").string();
  save_table_csv(t, path, {"roundtrip"});
  const auto back = load_table_csv(path);
  EXPECT_EQ(back.axes.x, t.axes.x);
  EXPECT_EQ(back.axes.p, t.axes.p);
  EXPECT_EQ(back.axes.l, t.axes.l);
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k == 3) {
      EXPECT_FALSE(back.converged[k]);
      continue;
    }
    EXPECT_EQ(back.values[k], t.values[k]);
    EXPECT_EQ(back.provenance[k], Provenance::formula);
  }
  EXPECT_EQ(to_csv_string(table_to_csv(back, {"roundtrip"})), to_csv_string(table_to_csv(t, {"roundtrip"})));
}

TEST(Csv, IncompleteGridAndMissingFile) {
  const auto path = (scratch_dir() / "partial.csv").string();
  {
    std::ofstream out(path);
    out << "x,p,l,H_bar,err,provenance\n0,0,0,1,0,formula\n0,1,1,1,0,formula\n";
  }
  EXPECT_THROW(load_table_csv(path), IoError);
  EXPECT_THROW(load_table_csv((scratch_dir() / "absent.csv").string()), IoError);
}

TEST(TableHamiltonian, SlopesFromNodeDifferences) {
  EffectiveAxes axes;
  axes.p = {0.0, 1.0, 2.0};
  axes.l = {-1.0, 1.0};
  const TableHamiltonian th(synthetic(axes, [](double, double p, double l) { return p * p - 0.5 * l; }));
  EXPECT_DOUBLE_EQ(th.l_slope_bound(), 0.5);
  EXPECT_DOUBLE_EQ(th.p_slope_bound(10.0), 3.0);
  EXPECT_DOUBLE_EQ(th.value(0, 1.5, 0), 2.5);
  EXPECT_FALSE(th.argmin_p(0, 0).has_value());
  axes.l = {0.0};
  EXPECT_THROW(TableHamiltonian(synthetic(axes, [](double, double p, double) { return p; })), DomainError);
}

}  // namespace
