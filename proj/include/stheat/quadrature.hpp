#pragma once

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace stheat {

/// Nodes and weights of a 1D rule on [0,1].
struct QuadRule1D {
  std::vector<double> x;
  std::vector<double> w;

  std::size_t size() const { return x.size(); }
};

namespace detail {

// Legendre P_n and P_n' at t in [-1,1] via the three-term recurrence.
inline std::pair<double, double> legendre(int n, double t) {
  double p0 = 1.0, p1 = t;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (t * p1 - p0) / (t * t - 1.0);
  return {p1, dp};
}

inline QuadRule1D make_gauss_legendre(int n) {
  QuadRule1D rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, Newton refinement.
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, t);
      const double dt = p / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    const auto [p, dp] = legendre(n, t);
    (void)p;
    // Map from [-1,1] to [0,1].
    rule.x[i] = 0.5 * (1.0 + t);
    rule.w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
  return rule;
}

}  // namespace detail

/// Gauss-Legendre rule with n points on [0,1], exact for degree 2n-1. Cached.
inline const QuadRule1D& gauss_legendre(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: order out of range");
  static std::map<int, QuadRule1D> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::make_gauss_legendre(n)).first;
  return it->second;
}

/// Rule on the reference triangle (0,0),(1,0),(0,1); weights sum to 1/2.
struct QuadRuleTri {
  std::vector<std::array<double, 2>> x;
  std::vector<double> w;

  std::size_t size() const { return x.size(); }
};

/// Duffy-collapsed tensor Gauss rule with n*n points on the reference triangle.
inline const QuadRuleTri& triangle_rule(int n) {
  if (n < 1 || n > 32) throw std::invalid_argument("triangle_rule: order out of range");
  static std::map<int, QuadRuleTri> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) {
    const QuadRule1D& gl = gauss_legendre(n);
    QuadRuleTri rule;
    rule.x.reserve(n * n);
    rule.w.reserve(n * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double xi = gl.x[i];
        const double eta = gl.x[j];
        rule.x.push_back({xi, eta * (1.0 - xi)});
        rule.w.push_back(gl.w[i] * gl.w[j] * (1.0 - xi));
      }
    }
    it = cache.emplace(n, std::move(rule)).first;
  }
  return it->second;
}

/// Composite Gauss rule on [0,1] geometrically graded toward 0, for integrands
/// with an endpoint (log- or 1/r-type integrable) singularity at 0.
inline QuadRule1D graded_rule(double grading, int levels, int pts_per_level) {
  if (!(grading > 0.0 && grading < 1.0)) throw std::invalid_argument("graded_rule: grading in (0,1)");
  if (levels < 1 || pts_per_level < 1) throw std::invalid_argument("graded_rule: bad sizes");
  const QuadRule1D& gl = gauss_legendre(pts_per_level);
  QuadRule1D rule;
  double hi = 1.0;
  for (int lvl = 0; lvl < levels; ++lvl) {
    const double lo = (lvl + 1 == levels) ? 0.0 : hi * grading;
    for (std::size_t q = 0; q < gl.size(); ++q) {
      rule.x.push_back(lo + (hi - lo) * gl.x[q]);
      rule.w.push_back((hi - lo) * gl.w[q]);
    }
    hi = lo;
  }
  return rule;
}

}  // namespace stheat
