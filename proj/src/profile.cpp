#include "nlh/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nlh/errors.hpp"

namespace nlh {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double Profile::operator()(double x, double y) const {
  switch (kind) {
    case Kind::constant:
      return scale;
    case Kind::two_plus_cos_y:
      return scale * (2.0 + std::cos(kTwoPi * y));
    case Kind::cos_y:
      return scale * std::cos(kTwoPi * y);
    case Kind::cos_x_cos_y:
      return scale * std::cos(kTwoPi * x) * std::cos(kTwoPi * y);
  }
  return 0.0;
}

double Profile::sup() const {
  switch (kind) {
    case Kind::constant:
      return scale;
    case Kind::two_plus_cos_y:
      return scale >= 0 ? 3.0 * scale : scale;
    default:
      return std::abs(scale);
  }
}

double Profile::inf() const {
  switch (kind) {
    case Kind::constant:
      return scale;
    case Kind::two_plus_cos_y:
      return scale >= 0 ? scale : 3.0 * scale;
    default:
      return -std::abs(scale);
  }
}

double Profile::sup_abs() const { return std::max(std::abs(sup()), std::abs(inf())); }

std::string to_string(Profile::Kind kind) {
  switch (kind) {
    case Profile::Kind::constant:
      return "constant";
    case Profile::Kind::two_plus_cos_y:
      return "two_plus_cos_y";
    case Profile::Kind::cos_y:
      return "cos_y";
    case Profile::Kind::cos_x_cos_y:
      return "cos_x_cos_y";
  }
  return "?";
}

std::string Profile::name() const { return to_string(kind); }

Profile Profile::parse(const std::string& name, double scale) {
  for (Kind k : {Kind::constant, Kind::two_plus_cos_y, Kind::cos_y, Kind::cos_x_cos_y}) {
    if (to_string(k) == name) return Profile{k, scale};
  }
  throw DomainError("unknown profile '" + name +
                    "' (expected constant, two_plus_cos_y, cos_y, cos_x_cos_y)");
}

}  // namespace nlh
