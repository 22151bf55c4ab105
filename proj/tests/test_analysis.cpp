#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stheat/analysis.hpp"

using namespace stheat;

namespace {

// Heat-equation residual dt u - div(A grad u) - f by central differences.
double pde_residual(const ManufacturedCase& c, double t, const Eigen::Vector2d& x) {
  const double h = 1e-5;
  const double dt = (c.u(t + h, x) - c.u(t - h, x)) / (2.0 * h);
  double lap = 0.0;
  for (int i = 0; i < 2; ++i) {
    Eigen::Vector2d dp = x, dm = x;
    dp[i] += h;
    dm[i] -= h;
    lap += (c.u(t, dp) - 2.0 * c.u(t, x) + c.u(t, dm)) / (h * h);
  }
  return dt - lap - c.data.f(t, x);
}

}  // namespace

TEST_CASE("manufactured cases satisfy the transmission problem", "[analysis]") {
  for (const char* name : {"ex1", "ex3"}) {
    const ManufacturedCase c = make_case(name);
    for (const auto& pt :
         {std::pair{0.4, Eigen::Vector2d(0.3, 0.7)}, std::pair{0.8, Eigen::Vector2d(0.6, 0.2)}}) {
      CHECK_THAT(pde_residual(c, pt.first, pt.second), Catch::Matchers::WithinAbs(0.0, 1e-5));
    }
  }
  const ManufacturedCase ex3 = make_case("ex3");
  CHECK(ex3.data.f(0.3, Eigen::Vector2d(0.2, 0.8)) == -1.0);
  CHECK(ex3.data.u0(Eigen::Vector2d(0.4, 0.9)) == 0.4 * 0.4);

  // ex1: u0 = G(0, x - x_ext) vanishes away from the source point.
  const ManufacturedCase ex1 = make_case("ex1");
  CHECK(ex1.data.u0(Eigen::Vector2d(0.3, 0.3)) == 0.0);

  // Jump data consistency: u_D = u - u_ext, phi_N = (grad u - grad u_ext) . n.
  const ManufacturedCase ex2 = make_case("ex2");
  const Eigen::Vector2d xb(0.4, 0.0);
  const Eigen::Vector2d n(0.0, -1.0);
  const double t = 0.6;
  CHECK_THAT(ex2.data.uD(t, xb),
             Catch::Matchers::WithinRel(-heat_kernel(t, xb - Eigen::Vector2d(0.5, 0.5)), 1e-13));
  CHECK_THROWS_AS(make_case("ex9"), std::invalid_argument);
}

TEST_CASE("ex1 Neumann datum spot value matches finite differences", "[analysis]") {
  const ManufacturedCase ex1 = make_case("ex1");
  const double t = 0.5;
  const Eigen::Vector2d x(0.0, 0.0);
  const Eigen::Vector2d n(0.0, -1.0);
  const Eigen::Vector2d xs(-0.5, -0.5);
  const double h = 1e-6;
  Eigen::Vector2d grad_fd;
  for (int i = 0; i < 2; ++i) {
    Eigen::Vector2d dp = x, dm = x;
    dp[i] += h;
    dm[i] -= h;
    grad_fd[i] = (heat_kernel(t, dp - xs) - heat_kernel(t, dm - xs)) / (2.0 * h);
  }
  const double expected = grad_fd.dot(n);
  CHECK_THAT(ex1.data.phiN(t, x, n), Catch::Matchers::WithinAbs(expected, 1e-8));
  // Closed form: 0.5 * G(0.5, (0.5, 0.5)).
  CHECK_THAT(ex1.data.phiN(t, x, n),
             Catch::Matchers::WithinRel(0.5 * heat_kernel(0.5, Eigen::Vector2d(0.5, 0.5)), 1e-12));
}

TEST_CASE("error norms of the zero field against ex3", "[analysis]") {
  const SpaceTimeMesh mesh = build_unit_square_mesh(2);
  const DofMap dofs = make_dof_map(mesh);
  const ManufacturedCase ex3 = make_case("ex3");
  SolutionField zero(mesh, dofs);
  const ErrorRow row = error_norms(zero, ex3);
  // || x1^2 + t ||^2 = 1/5 + 1/3 + 1/3 = 13/15.
  CHECK_THAT(row.l2_sq, Catch::Matchers::WithinRel(13.0 / 15.0, 1e-10));
  // || grad u ||^2 = int 4 x1^2 = 4/3; || sigma ||^2 the same; || f ||^2 = 1.
  CHECK_THAT(row.h1_sq, Catch::Matchers::WithinRel(4.0 / 3.0, 1e-10));
  CHECK_THAT(row.sigma_sq, Catch::Matchers::WithinRel(4.0 / 3.0, 1e-10));
  CHECK_THAT(row.div_sq, Catch::Matchers::WithinRel(1.0, 1e-10));

  const ManufacturedCase ex4 = make_case("ex4");
  CHECK_THROWS_AS(error_norms(zero, ex4), std::invalid_argument);
}

TEST_CASE("rate fitting recovers synthetic slopes", "[analysis]") {
  std::vector<double> nh = {64, 512, 4096};
  std::vector<double> y1, y2;
  for (double n : nh) {
    y1.push_back(std::pow(n, -2.0 / 3.0));
    y2.push_back(3.0 * std::pow(n, -4.0 / 3.0));
  }
  CHECK_THAT(fit_rate(nh, y1), Catch::Matchers::WithinAbs(-2.0 / 3.0, 1e-12));
  CHECK_THAT(fit_rate(nh, y2), Catch::Matchers::WithinAbs(-4.0 / 3.0, 1e-12));
  CHECK_THROWS_AS(fit_rate({64}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate(nh, {1.0, 0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("interpolant errors decrease monotonically under refinement", "[analysis]") {
  const ManufacturedCase ex1 = make_case("ex1");
  ErrorRow prev{1e30, 1e30, 1e30, 1e30};
  for (int level : {2, 3, 4}) {
    const SpaceTimeMesh mesh = build_unit_square_mesh(level);
    const DofMap dofs = make_dof_map(mesh);
    const SolutionField f = interpolate_case(mesh, dofs, ex1);
    const ErrorRow row = error_norms(f, ex1);
    CHECK(row.div_sq < prev.div_sq);
    CHECK(row.l2_sq < prev.l2_sq);
    CHECK(row.h1_sq < prev.h1_sq);
    CHECK(row.sigma_sq < prev.sigma_sq);
    prev = row;
  }
}

TEST_CASE("exterior evaluation guards and zero case", "[analysis]") {
  const SpaceTimeMesh mesh = build_unit_square_mesh(2);
  const DofMap dofs = make_dof_map(mesh);
  const ManufacturedCase ex4 = make_case("ex4");  // zero boundary data
  SolutionField zero(mesh, dofs);
  CHECK(eval_exterior(zero, ex4.data, 0.5, Eigen::Vector2d(2.0, 2.0)) == 0.0);
  CHECK_THROWS_AS(eval_exterior(zero, ex4.data, 0.5, Eigen::Vector2d(0.5, 0.5)),
                  std::domain_error);
}
