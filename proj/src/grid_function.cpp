#include "nlh/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nlh/errors.hpp"

namespace nlh {

namespace {

void validate(const std::vector<double>& v) {
  if (v.size() < 8) throw DomainError("GridFunction needs at least 8 nodes");
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError("GridFunction values must be finite");
  }
}

}  // namespace

GridFunction::GridFunction(int n, double fill) : values_(n < 0 ? 0 : n, fill) { validate(values_); }

GridFunction::GridFunction(std::vector<double> values) : values_(std::move(values)) {
  validate(values_);
}

GridFunction GridFunction::sample(int n, const std::function<double(double)>& f) {
  std::vector<double> v(n < 0 ? 0 : n);
  for (int j = 0; j < n; ++j) v[j] = f(static_cast<double>(j) / n);
  return GridFunction(std::move(v));
}

double GridFunction::at(long j) const {
  const long n = size();
  long r = j % n;
  if (r < 0) r += n;
  return values_[r];
}

double GridFunction::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / size();
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

double GridFunction::sup_norm() const {
  double s = 0.0;
  for (double x : values_) s = std::max(s, std::abs(x));
  return s;
}

GridFunction GridFunction::shifted(long s) const {
  std::vector<double> v(values_.size());
  for (int j = 0; j < size(); ++j) v[j] = at(j + s);
  return GridFunction(std::move(v));
}

double GridFunction::interpolate(double x) const {
  const int n = size();
  double t = (x - std::floor(x)) * n;
  long j = static_cast<long>(std::floor(t));
  double frac = t - j;
  return (1.0 - frac) * at(j) + frac * at(j + 1);
}

GridFunction& GridFunction::operator+=(double c) {
  for (double& x : values_) x += c;
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  if (other.size() != size()) throw DomainError("GridFunction size mismatch");
  for (int j = 0; j < size(); ++j) values_[j] -= other.values_[j];
  return *this;
}

bool GridFunction::is_power_of_two() const {
  const int n = size();
  return n > 0 && (n & (n - 1)) == 0;
}

GridFunction operator-(GridFunction a, const GridFunction& b) {
  a -= b;
  return a;
}

}  // namespace nlh
