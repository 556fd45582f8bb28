#pragma once

#include <functional>
#include <vector>

namespace nlh {

// Periodic samples on the unit torus at nodes j/n.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(int n, double fill = 0.0);
  explicit GridFunction(std::vector<double> values);

  static GridFunction sample(int n, const std::function<double(double)>& f);

  int size() const { return static_cast<int>(values_.size()); }
  double spacing() const { return 1.0 / size(); }
  double node(int j) const { return static_cast<double>(j) / size(); }

  double& operator[](int j) { return values_[j]; }
  double operator[](int j) const { return values_[j]; }
  // Periodic access for any integer index.
  double at(long j) const;

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double mean() const;
  double min() const;
  double max() const;
  double sup_norm() const;
  double oscillation() const { return max() - min(); }

  // v[j] = u[j + s], exact rotation by s nodes.
  GridFunction shifted(long s) const;
  // Piecewise-linear periodic interpolation.
  double interpolate(double x) const;

  GridFunction& operator+=(double c);
  GridFunction& operator-=(const GridFunction& other);

  bool is_power_of_two() const;

 private:
  std::vector<double> values_;
};

GridFunction operator-(GridFunction a, const GridFunction& b);

}  // namespace nlh
