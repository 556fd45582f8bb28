#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nlh/cell.hpp"
#include "nlh/csv.hpp"
#include "nlh/parabolic.hpp"

namespace nlh {

/// Hbar = A(x) (int H(x, y, p) / a(x, y) dy - l), A(x) = 1 / int 1 / a(x, y) dy.
double explicit_formula_above_one(const Coefficient& a, const HamiltonianSpec& h, double x,
                                  double p, double l, int samples = 1024);

enum class Provenance { discount, longtime, formula };

std::string to_string(Provenance p);
Provenance parse_provenance(const std::string& s);

struct EffectiveAxes {
  std::vector<double> x{0.0};
  std::vector<double> p{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  std::vector<double> l{-1.0, -0.5, 0.0, 0.5, 1.0};
};

/// Samples of Hbar on a tensor grid; index order (x, p, l) with l fastest.
/// A single x node means the table is x-independent.
struct EffectiveTable {
  EffectiveAxes axes;
  std::vector<double> values;
  std::vector<double> errors;
  std::vector<Provenance> provenance;
  std::vector<bool> converged;

  std::size_t index(std::size_t ix, std::size_t ip, std::size_t il) const {
    return (ix * axes.p.size() + ip) * axes.l.size() + il;
  }
  std::size_t size() const { return values.size(); }
  int failed_nodes() const;
};

struct TabulateOptions {
  Provenance source = Provenance::discount;
  CellConfig cell;
  /// Drift for the equal_one regime.
  double drift_b = 0.0;
  double T_max = 100.0;
  int threads = 1;
};

/// Fills every node; a node whose cell solve fails is marked unconverged with a NaN value.
EffectiveTable tabulate(const CellModel& model, const EffectiveAxes& axes,
                        const TabulateOptions& opts);

/// Multilinear interpolation; throws RangeError outside the hull.
double query(const EffectiveTable& table, double x, double p, double l);

struct PropertyClaims {
  double b0 = 0.0;
  double C = 0.0;
  double a_sup = 1.0;
  double m = 2.0;
};

struct PropertyAudit {
  int monotonicity_violations = 0;
  double worst_l_increase = 0.0;
  int coercivity_violations = 0;
  double worst_coercivity_slack = 0.0;
  /// Smallest constants with |dHbar| <= C_l |dl|, C_x |dx| g^m, C_p |dp| g^{m-1}, g = 1 + |l| + |p|^m.
  double C_l = 0.0;
  double C_x = 0.0;
  double C_p = 0.0;
  double C_continuity = 0.0;
  /// Structure exponent for the comparison condition in the equal_one regime.
  double structure_n = 0.0;
  bool pass = true;
};

PropertyAudit audit_properties(const EffectiveTable& table, const PropertyClaims& claims);

CsvTable table_to_csv(const EffectiveTable& table, const std::vector<std::string>& comments = {});
void save_table_csv(const EffectiveTable& table, const std::string& path,
                    const std::vector<std::string>& comments = {});
EffectiveTable load_table_csv(const std::string& path);

/// Table-backed Hbar; slopes are the largest node differences, exact for the interpolant.
class TableHamiltonian : public EffectiveHamiltonian {
 public:
  explicit TableHamiltonian(EffectiveTable table);
  double value(double x, double p, double l) const override { return query(table_, x, p, l); }
  double l_slope_bound() const override { return l_slope_; }
  double p_slope_bound(double) const override { return p_slope_; }
  std::string provenance() const override { return "table"; }
  const EffectiveTable& table() const { return table_; }

 private:
  EffectiveTable table_;
  double l_slope_ = 0.0;
  double p_slope_ = 0.0;
};

/// Closed-form Hbar for sigma > 1. For the power model the y-integrals are cached per x,
/// giving Hbar = A(x) (beta(x) |p|^m - phi(x) - l) with minimizer p = 0.
class FormulaHamiltonian : public EffectiveHamiltonian {
 public:
  FormulaHamiltonian(Coefficient a, HamiltonianSpec h, int samples = 1024);
  double value(double x, double p, double l) const override;
  double l_slope_bound() const override { return l_slope_; }
  double p_slope_bound(double R) const override;
  std::optional<double> argmin_p(double, double) const override;
  std::string provenance() const override { return "formula"; }

 private:
  struct Moments {
    double A = 0.0;
    double beta = 0.0;
    double phi = 0.0;
  };
  Moments moments(double x) const;

  Coefficient a_;
  HamiltonianSpec h_;
  int samples_;
  bool model_ = false;
  double l_slope_ = 0.0;
  double p_scale_ = 0.0;
  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<double, Moments> cache_;
};

}  // namespace nlh
