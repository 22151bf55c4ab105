#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Core>

namespace stheat {

inline constexpr double euler_gamma = 0.57721566490153286060651209;

/// Exponent threshold beyond which exp(-x) underflows all kernel quantities.
inline constexpr double kernel_exp_cutoff = 700.0;

/// Exponential integral E1(x) = int_x^inf exp(-s)/s ds for x > 0.
///
/// Power series below 1.5, modified Lentz continued fraction above;
/// relative accuracy ~1e-15 across the range.
inline double exp_integral_e1(double x) {
  if (!(x > 0.0)) throw std::domain_error("exp_integral_e1: requires x > 0");
  if (x > kernel_exp_cutoff) return 0.0;
  if (x < 1.5) {
    // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k <= 60; ++k) {
      term *= -x / k;
      const double add = -term / k;
      sum += add;
      if (std::abs(add) < 1e-18 * (std::abs(sum) + 1e-30)) break;
    }
    return -euler_gamma - std::log(x) + sum;
  }
  // E1(x) = exp(-x) / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...))), modified Lentz.
  const double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k <= 200; ++k) {
    const double a = -static_cast<double>(k) * k;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x);
}

/// Heat kernel G(t,x) in d = 2: (4 pi t)^{-1} exp(-|x|^2/(4t)) for t > 0, else 0.
inline double heat_kernel(double t, const Eigen::Vector2d& x) {
  if (!(t > 0.0)) return 0.0;
  const double e = x.squaredNorm() / (4.0 * t);
  if (e > kernel_exp_cutoff) return 0.0;
  return std::exp(-e) / (4.0 * M_PI * t);
}

/// Spatial gradient of the heat kernel, nabla_x G = -G(t,x) x / (2t).
inline Eigen::Vector2d heat_kernel_gradient(double t, const Eigen::Vector2d& x) {
  if (!(t > 0.0)) return Eigen::Vector2d::Zero();
  return -heat_kernel(t, x) / (2.0 * t) * x;
}

}  // namespace stheat
