#pragma once

#include <functional>
#include <string>

namespace nlh {

// A periodic coefficient f(x, y) from the built-in family, times a scale.
struct Profile {
  enum class Kind { constant, two_plus_cos_y, cos_y, cos_x_cos_y };

  Kind kind = Kind::constant;
  double scale = 1.0;

  double operator()(double x, double y) const;
  bool depends_on_x() const { return kind == Kind::cos_x_cos_y; }
  bool depends_on_y() const { return kind != Kind::constant; }
  double sup_abs() const;
  double inf() const;
  double sup() const;

  std::string name() const;
  static Profile parse(const std::string& name, double scale = 1.0);
};

std::string to_string(Profile::Kind kind);

using Coefficient = std::function<double(double, double)>;

}  // namespace nlh
