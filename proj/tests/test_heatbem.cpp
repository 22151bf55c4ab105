#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "stheat/heatbem.hpp"
#include "stheat/mesh.hpp"
#include "support/oracles.hpp"

using namespace stheat;

TEST_CASE("V has exact causality zero blocks and is Toeplitz in time", "[heatbem]") {
  const SpaceTimeMesh mesh = build_unit_square_mesh(2);
  BemConfig cfg;
  cfg.replicate_time_blocks = false;
  const BemMatrices bem = assemble_bem(mesh, cfg);
  const int nb = mesh.space.num_boundary_edges();
  const int nbv = mesh.space.num_boundary_vertices();
  const int slabs = mesh.time.num_slabs();
  for (int m = 0; m < slabs; ++m)
    for (int n = m + 1; n < slabs; ++n)
      CHECK(bem.V.block(m * nb, n * nb, nb, nb).cwiseAbs().maxCoeff() == 0.0);
  const double vmax = bem.V.cwiseAbs().maxCoeff();
  for (int m = 0; m + 1 < slabs; ++m)
    for (int n = 0; n <= m; ++n) {
      const Eigen::MatrixXd diff = bem.V.block(m * nb, n * nb, nb, nb) -
                                   bem.V.block((m + 1) * nb, (n + 1) * nb, nb, nb);
      CHECK(diff.cwiseAbs().maxCoeff() <= 1e-13 * vmax);
    }
  // K shares the shift structure for interior time-node columns.
  const double kmax = bem.K.cwiseAbs().maxCoeff();
  for (int m = 0; m + 1 < slabs; ++m)
    for (int k = 1; k <= m; ++k) {
      const Eigen::MatrixXd diff = bem.K.block(m * nb, k * nbv, nb, nbv) -
                                   bem.K.block((m + 1) * nb, (k + 1) * nbv, nb, nbv);
      CHECK(diff.cwiseAbs().maxCoeff() <= 1e-13 * kmax);
    }
}

TEST_CASE("replicated assembly agrees with the independent one", "[heatbem]") {
  const SpaceTimeMesh mesh = build_unit_square_mesh(2);
  BemConfig plain;
  plain.replicate_time_blocks = false;
  BemConfig fast;
  fast.replicate_time_blocks = true;
  const BemMatrices a = assemble_bem(mesh, plain);
  const BemMatrices b = assemble_bem(mesh, fast);
  CHECK((a.V - b.V).cwiseAbs().maxCoeff() <= 1e-12 * a.V.cwiseAbs().maxCoeff());
  CHECK((a.K - b.K).cwiseAbs().maxCoeff() <= 1e-12 * a.K.cwiseAbs().maxCoeff());
}

TEST_CASE("symmetric part of V is positive definite at levels 2 and 3", "[heatbem]") {
  for (int level : {2, 3}) {
    const SpaceTimeMesh mesh = build_unit_square_mesh(level);
    const Eigen::MatrixXd V = assemble_bem(mesh).V;
    const Eigen::MatrixXd sym = 0.5 * (V + V.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    INFO("level " << level << " min eig " << es.eigenvalues()(0));
    CHECK(es.eigenvalues()(0) > 0.0);
  }
}

TEST_CASE("V entries match the space-time quadrature oracle", "[heatbem]") {
  const SpaceTimeMesh mesh = build_unit_square_mesh(2);
  const BemMatrices bem = assemble_bem(mesh);
  const auto panels = lateral_panels(mesh);
  const int nb = mesh.space.num_boundary_edges();
  struct Probe {
    int row, col;
    double tol;
  };
  // (slab 1, edge 0) vs (slab 0, edge 6): separated in space and time;
  // (slab 0, edge 0) vs itself: identical; (0,0) vs (0,1): touching.
  const std::vector<Probe> probes = {{1 * nb + 0, 0 * nb + 6, 1e-8},
                                     {0 * nb + 2, 0 * nb + 9, 1e-8},
                                     {0 * nb + 0, 0 * nb + 0, 1e-6},
                                     {1 * nb + 4, 1 * nb + 5, 1e-6},
                                     {2 * nb + 3, 0 * nb + 3, 1e-8}};
  for (const auto& p : probes) {
    const double ref = oracle::v_entry(panels[p.row], panels[p.col], 1e-10, 1e-12);
    INFO("row " << p.row << " col " << p.col);
    CHECK_THAT(bem.V(p.row, p.col), Catch::Matchers::WithinRel(ref, p.tol));
  }
}

TEST_CASE("K entries match the space-time quadrature oracle", "[heatbem]") {
  const SpaceTimeMesh mesh = build_unit_square_mesh(2);
  const BemMatrices bem = assemble_bem(mesh);
  const auto panels = lateral_panels(mesh);
  const int nb = mesh.space.num_boundary_edges();
  const int nbv = mesh.space.num_boundary_vertices();
  struct Probe {
    int panel, kappa, bvertex;
    double tol;
  };
  const std::vector<Probe> probes = {
      {1 * nb + 0, 0, 5, 1e-8}, {0 * nb + 2, 1, 9, 1e-6}, {2 * nb + 7, 2, 0, 1e-8}};
  for (const auto& p : probes) {
    const int z = mesh.space.boundary_vertices[p.bvertex];
    const double ref = oracle::k_entry(mesh, panels[p.panel], p.kappa, z, 1e-10, 1e-12);
    const double got = bem.K(p.panel, p.kappa * nbv + p.bvertex);
    INFO("panel " << p.panel << " kappa " << p.kappa << " bv " << p.bvertex << " ref " << ref);
    if (std::abs(ref) > 1e-12)
      CHECK_THAT(got, Catch::Matchers::WithinRel(ref, p.tol));
    else
      CHECK_THAT(got, Catch::Matchers::WithinAbs(ref, 1e-10));
  }
}

TEST_CASE("double-layer kernel vanishes along a straight edge", "[heatbem]") {
  // (x - y) . n_y = 0 whenever x and y lie on the same straight edge.
  const SpaceTimeMesh mesh = build_unit_square_mesh(2);
  const auto panels = lateral_panels(mesh);
  const auto& p = panels[3];
  for (double a : {0.1, 0.5, 0.9}) {
    for (double b : {0.2, 0.7}) {
      const Eigen::Vector2d x = p.p0 + a * (p.p1 - p.p0);
      const Eigen::Vector2d y = p.p0 + b * (p.p1 - p.p0);
      CHECK(std::abs((x - y).dot(p.normal)) < 1e-15);
    }
  }
}

TEST_CASE("potentials vanish for zero density and before the support", "[heatbem]") {
  const SpaceTimeMesh mesh = build_unit_square_mesh(2);
  const int n_panels = static_cast<int>(lateral_panels(mesh).size());
  const int n_dir = (mesh.time.num_slabs() + 1) * mesh.space.num_boundary_vertices();
  CHECK(eval_single_potential(mesh, Eigen::VectorXd::Zero(n_panels), 0.7,
                              Eigen::Vector2d(0.4, 0.4)) == 0.0);
  CHECK(eval_double_potential(mesh, Eigen::VectorXd::Zero(n_dir), 0.7,
                              Eigen::Vector2d(0.4, 0.4)) == 0.0);
  // Causality: nothing radiates before the first slab.
  CHECK(eval_single_potential(mesh, Eigen::VectorXd::Ones(n_panels), 0.0,
                              Eigen::Vector2d(0.4, 0.4)) == 0.0);
  CHECK(eval_double_potential(mesh, Eigen::VectorXd::Ones(n_dir), -0.2,
                              Eigen::Vector2d(0.4, 0.4)) == 0.0);
}

TEST_CASE("double-layer potential of the unit density", "[heatbem]") {
  // K~(1)(t,x) = int_Omega G(t, x-y) dy - 1 for x inside Omega: the interior
  // solution u = 1 has zero normal derivative, and the initial-data potential
  // of u0 = 1 on the unit square factorizes into erf masses.
  const SpaceTimeMesh mesh = build_unit_square_mesh(3);
  const int n_dir = (mesh.time.num_slabs() + 1) * mesh.space.num_boundary_vertices();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n_dir);
  auto erf_mass = [](double t, double x) {
    return 0.5 * (std::erf(x / (2.0 * std::sqrt(t))) + std::erf((1.0 - x) / (2.0 * std::sqrt(t))));
  };
  for (double t : {0.5, 0.9}) {
    const Eigen::Vector2d x(0.5, 0.5);
    const double expected = erf_mass(t, x.x()) * erf_mass(t, x.y()) - 1.0;
    const double got = eval_double_potential(mesh, ones, t, x, 12);
    CHECK_THAT(got, Catch::Matchers::WithinAbs(expected, 5e-7));
    CHECK(got < -0.5);  // approaches -1 plus the transient tail
  }
  // Cross-check one point against the adaptive-quadrature oracle.
  const double ref = oracle::double_potential(mesh, ones, 0.5, Eigen::Vector2d(0.5, 0.5), 1e-10);
  const double got = eval_double_potential(mesh, ones, 0.5, Eigen::Vector2d(0.5, 0.5), 12);
  CHECK_THAT(got, Catch::Matchers::WithinAbs(ref, 5e-8));
}

TEST_CASE("representation formula reproduces a caloric function", "[heatbem]") {
  // w = G(t, x - x*) with x* outside: w solves the heat equation with w(0)=0
  // on Omega, so V~(dn w) - K~(w) = w inside Q. Interpolated traces at levels
  // 2 and 3; the error must shrink under refinement.
  const Eigen::Vector2d xs(-0.5, -0.5);
  double err_prev = std::numeric_limits<double>::infinity();
  for (int level : {2, 3}) {
    const SpaceTimeMesh mesh = build_unit_square_mesh(level);
    const Eigen::VectorXd wD = interpolate_dirichlet_trace(
        mesh, [&](double t, const Eigen::Vector2d& x) { return heat_kernel(t, x - xs); });
    const Eigen::VectorXd wN = interpolate_neumann_trace(
        mesh, [&](double t, const Eigen::Vector2d& x, const Eigen::Vector2d& n) {
          return heat_kernel_gradient(t, x - xs).dot(n);
        });
    double err = 0.0;
    for (const auto& pt : {std::pair{0.3, Eigen::Vector2d(0.3, 0.4)},
                           std::pair{0.7, Eigen::Vector2d(0.6, 0.2)}}) {
      const double w = heat_kernel(pt.first, pt.second - xs);
      const double rec = eval_single_potential(mesh, wN, pt.first, pt.second) -
                         eval_double_potential(mesh, wD, pt.first, pt.second);
      err = std::max(err, std::abs(rec - w) / std::abs(w));
    }
    CHECK(err < err_prev);
    err_prev = err;
  }
  CHECK(err_prev < 2e-2);
}

TEST_CASE("single potential matches its oracle for a smooth density", "[heatbem]") {
  const SpaceTimeMesh mesh = build_unit_square_mesh(2);
  const auto panels = lateral_panels(mesh);
  Eigen::VectorXd density(static_cast<int>(panels.size()));
  for (std::size_t p = 0; p < panels.size(); ++p)
    density[static_cast<Eigen::Index>(p)] =
        std::sin(3.0 * panels[p].t0) + panels[p].p0.x() - 0.3 * panels[p].p1.y();
  const double t = 0.8;
  const Eigen::Vector2d x(0.35, 0.55);
  const double got = eval_single_potential(mesh, density, t, x);
  const double ref = oracle::single_potential(mesh, density, t, x, 1e-11);
  CHECK_THAT(got, Catch::Matchers::WithinRel(ref, 1e-9));
}
