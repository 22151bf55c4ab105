#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "stheat/special_functions.hpp"

namespace stheat {

/// Exact double time integrals of the heat-kernel factors over a test interval
/// [a,b] and a trial interval [c,d] at fixed squared spatial distance r2:
///
///   v_const  = int_a^b int_c^d G(t-s, r)                        ds dt
///   k_const  = int_a^b int_c^d G(t-s, r) / (2(t-s))             ds dt
///   k_linear = int_a^b int_c^d G(t-s, r) / (2(t-s)) (s-c)/(d-c) ds dt
///
/// v_const feeds single-layer entries; k_const/k_linear carry the scalar part
/// of grad_y G . n_y = (x-y).n_y G/(2(t-s)) against constant and hat-in-time
/// trial weights.
struct PanelTimeIntegrals {
  double v_const = 0.0;
  double k_const = 0.0;
  double k_linear = 0.0;
};

namespace detail {

// Antiderivative stack for the closed-form branch. With z = c2/tau:
//   h(tau)   = E1(z)/(4 pi)                      : int_0^tau G
//   H(tau)   = ((tau+c2) E1(z) - tau e^-z)/(4 pi): second antiderivative
//   hk(tau)  = e^-z/(8 pi c2)                    : int_0^tau G/(2 s) ds
//   HK(tau)  = (tau e^-z - c2 E1(z))/(8 pi c2)   : second antiderivative
//   M1(tau)  = H(tau)/2                          : int int s G(s)/(2 s)
//   M01(tau) = int_0^tau s hk(s) ds = (tau^2 e^-z/(2 c2) - tau e^-z/2 + c2 E1(z)/2)/(8 pi)
// HKr / M01R are HK / M01 with the pure tau/(8 pi c2) resp. tau^2/(16 pi c2)
// parts removed; those parts cancel identically in the interval combinations
// below and would otherwise amplify roundoff by 1/c2 as r -> 0.
class HeatPrimitives {
 public:
  struct Vals {
    double tau, z, E, X, em;
  };

  explicit HeatPrimitives(double c2) : c2_(c2) { assert(c2 > 0.0); }

  Vals at(double tau) const {
    assert(tau > 0.0);
    Vals v;
    v.tau = tau;
    v.z = c2_ / tau;
    v.E = (v.z > kernel_exp_cutoff) ? 0.0 : exp_integral_e1(v.z);
    v.X = std::exp(-v.z);
    v.em = std::expm1(-v.z);
    return v;
  }

  double H(const Vals& v) const { return ((v.tau + c2_) * v.E - v.tau * v.X) / (4.0 * M_PI); }
  double M1(const Vals& v) const { return 0.5 * H(v); }
  double HK(const Vals& v) const { return (v.tau * v.X - c2_ * v.E) / (8.0 * M_PI * c2_); }
  double HKr(const Vals& v) const { return (v.em / v.z - v.E) / (8.0 * M_PI); }
  double M01R(const Vals& v) const {
    return (0.5 * v.tau * v.em / v.z - 0.5 * v.tau * v.X + 0.5 * c2_ * v.E) / (8.0 * M_PI);
  }
  double c2() const { return c2_; }

 private:
  double c2_;
};

// Elementary antiderivatives used by the separated-interval series branch.

// Second antiderivative of tau^p.
inline double poly_phi2(int p, double tau) {
  if (p == -1) return tau * (std::log(tau) - 1.0);
  if (p == -2) return -std::log(tau);
  return std::pow(tau, p + 2) / (static_cast<double>(p + 1) * (p + 2));
}

// T2(p) = int_A^B int_0^D (t-s)^p ds dt for separated intervals (A > D).
inline double series_T2(int p, double A, double B, double D) {
  return poly_phi2(p, B) - poly_phi2(p, A) - poly_phi2(p, B - D) + poly_phi2(p, A - D);
}

// Ts(p) = int_A^B int_0^D s (t-s)^p ds dt for separated intervals.
inline double series_Ts(int p, double A, double B, double D) {
  // TPsi = int tau Psi(tau) dtau with Psi = int tau^p; Psi2 = int Psi;
  // Chi2 = int int tau^{p+1}. Only p <= -2 occurs here.
  auto TPsi = [p](double tau) {
    if (p == -2) return -tau;
    if (p == -3) return -0.5 * std::log(tau);
    return std::pow(tau, p + 3) / (static_cast<double>(p + 1) * (p + 3));
  };
  auto Psi2 = [p](double tau) {
    if (p == -2) return -std::log(tau);
    return std::pow(tau, p + 2) / (static_cast<double>(p + 1) * (p + 2));
  };
  auto Chi2 = [p](double tau) {
    if (p == -2) return tau * (std::log(tau) - 1.0);
    if (p == -3) return -std::log(tau);
    return std::pow(tau, p + 3) / (static_cast<double>(p + 2) * (p + 3));
  };
  const double g = A - D;
  return TPsi(B) - TPsi(A) - TPsi(B - D) + TPsi(g) - D * (Psi2(B - D) - Psi2(g)) -
         Chi2(B) + Chi2(A) + Chi2(B - D) - Chi2(g);
}

// Trial [0,D], test [A,B] with gap A-D > 0. Expansion of exp(-c2/tau) of the
// double integral in powers of c2; every term is elementary. Valid and fast
// for c2 below half the gap.
inline PanelTimeIntegrals moments_separated_series(double c2, double A, double B, double D) {
  PanelTimeIntegrals m;
  double factor = 1.0;  // (-c2)^j / j!
  double v = 0.0, k0 = 0.0, k1 = 0.0;
  for (int j = 0; j < 120; ++j) {
    if (j > 0) factor *= -c2 / j;
    const double tv = factor * series_T2(-1 - j, A, B, D);
    const double tk0 = factor * series_T2(-2 - j, A, B, D);
    const double tk1 = factor * series_Ts(-2 - j, A, B, D);
    v += tv;
    k0 += tk0;
    k1 += tk1;
    const double scale = std::abs(v) + std::abs(k0) + std::abs(k1) + 1e-300;
    if (j > 2 && std::abs(tv) + std::abs(tk0) + std::abs(tk1) < 1e-17 * scale) break;
  }
  m.v_const = v / (4.0 * M_PI);
  m.k_const = k0 / (8.0 * M_PI);
  m.k_linear = k1 / (8.0 * M_PI * D);
  return m;
}

// Identical intervals of length L (test == trial after the time shift).
inline PanelTimeIntegrals moments_identical(double c2, double L) {
  const HeatPrimitives f(c2);
  const auto vL = f.at(L);
  PanelTimeIntegrals m;
  m.v_const = f.H(vL);
  m.k_const = f.HK(vL);
  // k_linear = (L X/(2 c2) + X/2 - (1 + c2/(2L)) E1(z))/(8 pi).
  m.k_linear = (0.5 * L * vL.X / c2 + 0.5 * vL.X - (1.0 + 0.5 * c2 / L) * vL.E) / (8.0 * M_PI);
  return m;
}

// Trial [0,D], test [D,B] sharing the single time point D.
inline PanelTimeIntegrals moments_adjacent(double c2, double D, double B) {
  const HeatPrimitives f(c2);
  const double L1 = B - D;
  const auto vB = f.at(B);
  const auto vD = f.at(D);
  const auto vL = f.at(L1);
  PanelTimeIntegrals m;
  m.v_const = f.H(vB) - f.H(vD) - f.H(vL);
  m.k_const = f.HKr(vB) - f.HKr(vD) - f.HKr(vL);
  const double J0 = f.M01R(vB) - f.M01R(vD) - f.M01R(vL) - D * f.HKr(vL) - f.M1(vB) +
                    f.M1(vD) + f.M1(vL);
  m.k_linear = J0 / D;
  return m;
}

// Trial [0,D], test [A,B] with gap A-D > 0, closed-form branch.
inline PanelTimeIntegrals moments_separated_closed(double c2, double A, double B, double D) {
  const HeatPrimitives f(c2);
  const auto vB = f.at(B);
  const auto vA = f.at(A);
  const auto vBD = f.at(B - D);
  const auto vg = f.at(A - D);
  PanelTimeIntegrals m;
  m.v_const = f.H(vB) - f.H(vA) - f.H(vBD) + f.H(vg);
  m.k_const = f.HKr(vB) - f.HKr(vA) - f.HKr(vBD) + f.HKr(vg);
  const double J0 = -D * (f.HKr(vBD) - f.HKr(vg)) + f.M01R(vB) - f.M01R(vA) - f.M01R(vBD) +
                    f.M01R(vg) - f.M1(vB) + f.M1(vA) + f.M1(vBD) - f.M1(vg);
  m.k_linear = J0 / D;
  return m;
}

inline PanelTimeIntegrals moments_shifted(double c2, double A, double B, double D);

// Partial overlap: split into identical/adjacent/separated pieces. The
// k_linear weight s/D is recombined from the pieces' local affine weights.
inline PanelTimeIntegrals moments_overlap_split(double c2, double A, double B, double D) {
  PanelTimeIntegrals m;
  if (B > D) {
    const PanelTimeIntegrals tail = moments_shifted(c2, D, B, D);
    m.v_const += tail.v_const;
    m.k_const += tail.k_const;
    m.k_linear += tail.k_linear;
    B = D;
    if (!(B > A)) return m;
  }
  // Now A < B <= D. Trial piece [A,B] against test [A,B]: identical after shift.
  {
    const double L = B - A;
    const PanelTimeIntegrals p = moments_identical(c2, L);
    m.v_const += p.v_const;
    m.k_const += p.k_const;
    // s/D = A/D + (L/D) (s-A)/L on the piece.
    m.k_linear += (A / D) * p.k_const + (L / D) * p.k_linear;
  }
  // Trial piece [0,A] against test [A,B]: adjacent.
  if (A > 0.0) {
    const PanelTimeIntegrals p = moments_adjacent(c2, A, B);
    m.v_const += p.v_const;
    m.k_const += p.k_const;
    // s/D = (A/D) (s/A) on the piece.
    m.k_linear += (A / D) * p.k_linear;
  }
  return m;
}

inline PanelTimeIntegrals moments_shifted(double c2, double A, double B, double D) {
  // Underflow guard: the largest time lag carries the smallest exponent.
  if (c2 / B > kernel_exp_cutoff) return {};
  if (A == 0.0 && B == D) return moments_identical(c2, D);
  if (A == D) return moments_adjacent(c2, D, B);
  if (A > D) {
    if (c2 < 0.5 * (A - D)) return moments_separated_series(c2, A, B, D);
    return moments_separated_closed(c2, A, B, D);
  }
  return moments_overlap_split(c2, A, B, D);
}

}  // namespace detail

/// Moments of the heat kernel over test interval [a,b] x trial interval [c,d].
/// Exact in time up to E1 evaluations; causality gives exact zeros whenever
/// b <= c. For r2 == 0 only fully separated intervals are admissible; touching
/// or overlapping intervals at r2 == 0 belong to the singular quadrature path.
inline PanelTimeIntegrals panel_time_integrals(double r2, double a, double b, double c,
                                               double d) {
  if (!(a < b) || !(c < d)) throw std::invalid_argument("panel_time_integrals: empty interval");
  if (r2 < 0.0) throw std::invalid_argument("panel_time_integrals: negative r2");
  // Shift so the trial interval starts at 0; clip the acausal part of the test.
  double A = a - c;
  double B = b - c;
  const double D = d - c;
  if (B <= 0.0) return {};
  A = std::max(A, 0.0);
  // Snap to aligned configurations; breakpoints from uniform grids agree only
  // up to roundoff, and a spurious tiny gap would poison the branch selection.
  const double tol = 1e-12 * std::max({std::abs(A), std::abs(B), D});
  if (std::abs(A) < tol) A = 0.0;
  if (std::abs(A - D) < tol) A = D;
  if (std::abs(B - D) < tol) B = D;
  if (r2 == 0.0) {
    if (A > D) {
      PanelTimeIntegrals m;
      m.v_const = detail::series_T2(-1, A, B, D) / (4.0 * M_PI);
      m.k_const = detail::series_T2(-2, A, B, D) / (8.0 * M_PI);
      m.k_linear = detail::series_Ts(-2, A, B, D) / (8.0 * M_PI * D);
      return m;
    }
    throw std::invalid_argument(
        "panel_time_integrals: r2 == 0 with touching/overlapping time intervals is singular; "
        "route through the graded spatial quadrature path");
  }
  return detail::moments_shifted(0.25 * r2, A, B, D);
}

/// int_c^d G(t - s, r) ds, the single-layer potential time integral.
inline double single_layer_time_integral(double r2, double t, double c, double d) {
  if (!(c < d)) throw std::invalid_argument("single_layer_time_integral: empty interval");
  if (!(r2 > 0.0)) throw std::invalid_argument("single_layer_time_integral: requires r2 > 0");
  const double ta = t - c;
  if (ta <= 0.0) return 0.0;
  const double c2 = 0.25 * r2;
  if (c2 / ta > kernel_exp_cutoff) return 0.0;
  double value = exp_integral_e1(c2 / ta);
  const double tb = t - d;
  if (tb > 0.0 && c2 / tb <= kernel_exp_cutoff) value -= exp_integral_e1(c2 / tb);
  return value / (4.0 * M_PI);
}

/// Time integrals of G(t-s, r)/(2(t-s)) against the constant weight and the
/// affine weight (s-c)/(d-c); the scalar factors of the double-layer potential.
struct DoubleLayerTimeIntegrals {
  double w_const = 0.0;
  double w_linear = 0.0;
};

inline DoubleLayerTimeIntegrals double_layer_time_integrals(double r2, double t, double c,
                                                            double d) {
  if (!(c < d)) throw std::invalid_argument("double_layer_time_integrals: empty interval");
  if (!(r2 > 0.0)) throw std::invalid_argument("double_layer_time_integrals: requires r2 > 0");
  DoubleLayerTimeIntegrals out;
  const double D = d - c;
  const double ta = t - c;  // largest time lag
  if (ta <= 0.0) return out;
  const double c2 = 0.25 * r2;
  if (c2 / ta > kernel_exp_cutoff) return out;
  const double ema = std::expm1(-c2 / ta);
  const double m1a = exp_integral_e1(c2 / ta) / (8.0 * M_PI);
  double hk_diff, m1_diff;
  const double tb = ta - D;  // smallest time lag
  if (tb > 0.0) {
    const double zb = c2 / tb;
    hk_diff = (ema - std::expm1(-zb)) / (8.0 * M_PI * c2);
    m1_diff = m1a - ((zb > kernel_exp_cutoff) ? 0.0 : exp_integral_e1(zb) / (8.0 * M_PI));
  } else {
    hk_diff = (1.0 + ema) / (8.0 * M_PI * c2);
    m1_diff = m1a;
  }
  out.w_const = hk_diff;
  out.w_linear = (ta * hk_diff - m1_diff) / D;
  return out;
}

}  // namespace stheat
