#include "cqe/special.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cqe {

double k0_sinh(double x) {
  if (!(x > 0.0)) throw std::domain_error("k0_sinh requires x > 0");
  if (x <= 30.0) return std::cyl_bessel_k(0.0, x) * std::sinh(x);
  // K0(x) ~ sqrt(pi / 2x) e^-x (1 - 1/8x + 9/128x^2 - 225/3072x^3 ...),
  // sinh(x) = e^x (1 - e^-2x) / 2.
  double series = 1.0;
  double term = 1.0;
  for (int k = 1; k < 12; ++k) {
    double a = 2.0 * k - 1.0;
    term *= -(a * a) / (8.0 * k * x);
    series += term;
  }
  return 0.5 * std::sqrt(std::numbers::pi / (2.0 * x)) * series * (-std::expm1(-2.0 * x));
}

double thermal_factor(double x) {
  if (x > 0.0) return 2.0 / (-std::expm1(-2.0 * x));
  if (x < 0.0) return 2.0 * std::exp(2.0 * x) / (-std::expm1(2.0 * x));
  throw std::domain_error("thermal_factor is singular at zero frequency");
}

}  // namespace cqe
