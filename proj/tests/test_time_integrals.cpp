#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stheat/time_integrals.hpp"
#include "support/oracles.hpp"

using namespace stheat;

namespace {

void check_against_oracle(double r2, double a, double b, double c, double d, double rel) {
  const PanelTimeIntegrals got = panel_time_integrals(r2, a, b, c, d);
  const PanelTimeIntegrals ref = oracle::time_moments(r2, a, b, c, d, 1e-12);
  const double scale = std::abs(ref.v_const) + std::abs(ref.k_const) + std::abs(ref.k_linear);
  INFO("r2=" << r2 << " test=[" << a << "," << b << "] trial=[" << c << "," << d << "]");
  CHECK_THAT(got.v_const, Catch::Matchers::WithinAbs(ref.v_const, rel * scale));
  CHECK_THAT(got.k_const, Catch::Matchers::WithinAbs(ref.k_const, rel * scale));
  CHECK_THAT(got.k_linear, Catch::Matchers::WithinAbs(ref.k_linear, rel * scale));
}

}  // namespace

TEST_CASE("causality gives exact zero moments", "[moments]") {
  for (double r2 : {0.5, 2.0}) {
    const PanelTimeIntegrals m = panel_time_integrals(r2, 1.0, 2.0, 2.0, 3.0);
    CHECK(m.v_const == 0.0);
    CHECK(m.k_const == 0.0);
    CHECK(m.k_linear == 0.0);
    const PanelTimeIntegrals m2 = panel_time_integrals(r2, 0.2, 0.4, 0.5, 0.9);
    CHECK(m2.v_const == 0.0);
  }
}

TEST_CASE("identical-interval moment matches the quadrature oracle", "[moments]") {
  // Spec anchor: r2 = 1 on [0,1]^2 to 1e-10.
  const PanelTimeIntegrals got = panel_time_integrals(1.0, 0.0, 1.0, 0.0, 1.0);
  const PanelTimeIntegrals ref = oracle::time_moments(1.0, 0.0, 1.0, 0.0, 1.0, 1e-12);
  CHECK_THAT(got.v_const, Catch::Matchers::WithinRel(ref.v_const, 1e-10));
  CHECK_THAT(got.k_const, Catch::Matchers::WithinRel(ref.k_const, 1e-10));
  CHECK_THAT(got.k_linear, Catch::Matchers::WithinRel(ref.k_linear, 1e-10));
}

TEST_CASE("moments are invariant under time shifts", "[moments]") {
  const double r2 = 0.3;
  const PanelTimeIntegrals base = panel_time_integrals(r2, 2.0 / 3.0, 1.0, 1.0 / 3.0, 2.0 / 3.0);
  for (double shift : {0.25, 1.0, 7.5}) {
    const PanelTimeIntegrals moved = panel_time_integrals(
        r2, 2.0 / 3.0 + shift, 1.0 + shift, 1.0 / 3.0 + shift, 2.0 / 3.0 + shift);
    CHECK_THAT(moved.v_const, Catch::Matchers::WithinRel(base.v_const, 1e-13));
    CHECK_THAT(moved.k_const, Catch::Matchers::WithinRel(base.k_const, 1e-13));
    CHECK_THAT(moved.k_linear, Catch::Matchers::WithinRel(base.k_linear, 1e-13));
  }
}

TEST_CASE("every analytic branch matches the quadrature oracle", "[moments]") {
  // h mimics the uniform slab lengths 1/(2^l - 1).
  for (double h : {1.0 / 3.0, 1.0 / 7.0}) {
    for (int k : {0, 1, 2, 3, 6}) {
      if ((k + 1) * h > 1.0 + 1e-12) continue;
      const double a = k * h, b = (k + 1) * h;
      for (double r2 : {1e-8, 1e-5, 1e-3, 0.04, 0.25, 1.0, 4.0}) {
        // Singular pairs at r2 = 0 are excluded; tiny r2 with touching
        // intervals is the worst case for the stabilized formulas.
        check_against_oracle(r2, a, b, 0.0, h, 2e-9);
      }
    }
  }
}

TEST_CASE("partial-overlap splitting matches the quadrature oracle", "[moments]") {
  check_against_oracle(0.2, 0.3, 1.1, 0.0, 1.0, 1e-9);
  check_against_oracle(0.2, 0.0, 0.4, 0.0, 1.0, 1e-9);
  check_against_oracle(0.05, 0.5, 0.8, 0.2, 1.2, 1e-9);
  check_against_oracle(1.5, -0.5, 0.8, 0.0, 1.0, 1e-9);
}

TEST_CASE("series and closed-form branches agree at the crossover", "[moments]") {
  // Separated intervals, gap g = 1: the dispatch switches at c2 = 0.5 g.
  const double a = 2.0, b = 3.0, c = 0.0, d = 1.0;
  for (double c2 : {0.49, 0.4999, 0.5001, 0.51}) {
    const double r2 = 4.0 * c2;
    const PanelTimeIntegrals lo = panel_time_integrals(r2 * (1.0 - 1e-9), a, b, c, d);
    const PanelTimeIntegrals hi = panel_time_integrals(r2 * (1.0 + 1e-9), a, b, c, d);
    CHECK_THAT(lo.v_const, Catch::Matchers::WithinRel(hi.v_const, 1e-7));
    CHECK_THAT(lo.k_const, Catch::Matchers::WithinRel(hi.k_const, 1e-7));
    CHECK_THAT(lo.k_linear, Catch::Matchers::WithinRel(hi.k_linear, 1e-7));
  }
}

TEST_CASE("r2 = 0 is exact for separated intervals and rejected for touching", "[moments]") {
  const PanelTimeIntegrals got = panel_time_integrals(0.0, 2.0, 3.0, 0.0, 1.0);
  const PanelTimeIntegrals ref = oracle::time_moments(0.0, 2.0, 3.0, 0.0, 1.0, 1e-12);
  CHECK_THAT(got.v_const, Catch::Matchers::WithinRel(ref.v_const, 1e-12));
  CHECK_THAT(got.k_const, Catch::Matchers::WithinRel(ref.k_const, 1e-12));
  CHECK_THAT(got.k_linear, Catch::Matchers::WithinRel(ref.k_linear, 1e-12));
  CHECK_THROWS_AS(panel_time_integrals(0.0, 0.0, 1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(panel_time_integrals(0.0, 1.0, 2.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("underflow guard returns exact zeros", "[moments]") {
  const PanelTimeIntegrals m = panel_time_integrals(1e7, 0.0, 1.0, 0.0, 1.0);
  CHECK(m.v_const == 0.0);
  CHECK(m.k_const == 0.0);
  CHECK(m.k_linear == 0.0);
}

TEST_CASE("potential time integrals match the oracle", "[moments]") {
  for (double r2 : {1e-4, 0.1, 1.0}) {
    for (double t : {0.05, 0.3, 0.9, 1.4}) {
      const double c = 0.25, d = 0.5;
      const double ref_v =
          oracle::time_integral(r2, t, c, d, [](double) { return 1.0; }, 1e-13);
      CHECK_THAT(single_layer_time_integral(r2, t, c, d),
                 Catch::Matchers::WithinAbs(ref_v, 1e-11 * (std::abs(ref_v) + 1.0)));
      const DoubleLayerTimeIntegrals got = double_layer_time_integrals(r2, t, c, d);
      const double ref0 = oracle::time_integral(
          r2, t, c, d, [&](double s) { return 0.5 / (t - s); }, 1e-13);
      const double ref1 = oracle::time_integral(
          r2, t, c, d, [&](double s) { return 0.5 / (t - s) * (s - c) / (d - c); }, 1e-13);
      const double scale = std::abs(ref0) + std::abs(ref1) + 1e-12;
      CHECK_THAT(got.w_const, Catch::Matchers::WithinAbs(ref0, 1e-10 * scale));
      CHECK_THAT(got.w_linear, Catch::Matchers::WithinAbs(ref1, 1e-10 * scale));
    }
  }
  CHECK(single_layer_time_integral(0.5, 0.1, 0.25, 0.5) == 0.0);
  CHECK(double_layer_time_integrals(0.5, 0.1, 0.25, 0.5).w_const == 0.0);
}
