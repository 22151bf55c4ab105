#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stheat/coupling.hpp"
#include "stheat/fosls.hpp"
#include "stheat/heatbem.hpp"
#include "stheat/mesh.hpp"
#include "stheat/spaces.hpp"
#include "stheat/special_functions.hpp"

namespace stheat {

/// Manufactured transmission-problem case with derived data. For cases with a
/// closed-form interior solution, u/grad_u/sigma are evaluable; sigma = -A grad u.
struct ManufacturedCase {
  std::string name;
  bool has_exact = false;
  bool has_exterior = false;
  ProblemData data;
  std::function<double(double, const Eigen::Vector2d&)> u;
  std::function<Eigen::Vector2d(double, const Eigen::Vector2d&)> grad_u;
  std::function<Eigen::Vector2d(double, const Eigen::Vector2d&)> sigma;
  std::function<double(double, const Eigen::Vector2d&)> u_ext;
};

inline ManufacturedCase make_case(const std::string& name) {
  const Eigen::Vector2d x_ext(-0.5, -0.5);
  const Eigen::Vector2d x_int(0.5, 0.5);
  ManufacturedCase c;
  c.name = name;
  c.data.A = identity_diffusion();
  c.data.T = 1.0;
  auto zero2 = [](double, const Eigen::Vector2d&) { return 0.0; };

  if (name == "ex1") {
    // Interior u = G(t, x - x_ext), exterior solution identically zero.
    c.has_exact = true;
    c.has_exterior = true;
    c.u = [x_ext](double t, const Eigen::Vector2d& x) { return heat_kernel(t, x - x_ext); };
    c.grad_u = [x_ext](double t, const Eigen::Vector2d& x) {
      return heat_kernel_gradient(t, x - x_ext);
    };
    c.sigma = [x_ext](double t, const Eigen::Vector2d& x) {
      return Eigen::Vector2d(-heat_kernel_gradient(t, x - x_ext));
    };
    c.u_ext = zero2;
    c.data.f = zero2;
    c.data.u0 = [x_ext](const Eigen::Vector2d& x) { return heat_kernel(0.0, x - x_ext); };
    c.data.uD = c.u;
    c.data.phiN = [x_ext](double t, const Eigen::Vector2d& x, const Eigen::Vector2d& n) {
      return heat_kernel_gradient(t, x - x_ext).dot(n);
    };
    return c;
  }
  if (name == "ex2") {
    // Interior zero, exterior u_ext = G(t, x - x_int).
    c.has_exact = true;
    c.has_exterior = true;
    c.u = zero2;
    c.grad_u = [](double, const Eigen::Vector2d&) { return Eigen::Vector2d::Zero(); };
    c.sigma = c.grad_u;
    c.u_ext = [x_int](double t, const Eigen::Vector2d& x) { return heat_kernel(t, x - x_int); };
    c.data.f = zero2;
    c.data.u0 = [](const Eigen::Vector2d&) { return 0.0; };
    c.data.uD = [x_int](double t, const Eigen::Vector2d& x) {
      return -heat_kernel(t, x - x_int);
    };
    c.data.phiN = [x_int](double t, const Eigen::Vector2d& x, const Eigen::Vector2d& n) {
      return -heat_kernel_gradient(t, x - x_int).dot(n);
    };
    return c;
  }
  if (name == "ex3") {
    // Interior u = x1^2 + t, exterior u_ext = G(t, x - x_int); f = -1.
    c.has_exact = true;
    c.has_exterior = true;
    c.u = [](double t, const Eigen::Vector2d& x) { return x.x() * x.x() + t; };
    c.grad_u = [](double, const Eigen::Vector2d& x) { return Eigen::Vector2d(2.0 * x.x(), 0.0); };
    c.sigma = [](double, const Eigen::Vector2d& x) { return Eigen::Vector2d(-2.0 * x.x(), 0.0); };
    c.u_ext = [x_int](double t, const Eigen::Vector2d& x) { return heat_kernel(t, x - x_int); };
    c.data.f = [](double, const Eigen::Vector2d&) { return -1.0; };
    c.data.u0 = [](const Eigen::Vector2d& x) { return x.x() * x.x(); };
    c.data.uD = [x_int](double t, const Eigen::Vector2d& x) {
      return x.x() * x.x() + t - heat_kernel(t, x - x_int);
    };
    c.data.phiN = [x_int](double t, const Eigen::Vector2d& x, const Eigen::Vector2d& n) {
      return Eigen::Vector2d(2.0 * x.x(), 0.0).dot(n) -
             heat_kernel_gradient(t, x - x_int).dot(n);
    };
    return c;
  }
  if (name == "ex4") {
    // Incompatible data: f = 0, u_D = phi_N = 0, u0 = 1. No closed-form pair.
    c.has_exact = false;
    c.data.f = zero2;
    c.data.u0 = [](const Eigen::Vector2d&) { return 1.0; };
    c.data.uD = zero2;
    c.data.phiN = [](double, const Eigen::Vector2d&, const Eigen::Vector2d&) { return 0.0; };
    return c;
  }
  throw std::invalid_argument("make_case: unknown case '" + name + "'");
}

/// Squared errors of a discrete field against the closed-form solution.
struct ErrorRow {
  double div_sq = 0.0;    // || div(u - u_h) ||^2_{L2(Q)}
  double l2_sq = 0.0;     // || u - u_h ||^2_{L2(Q)}
  double h1_sq = 0.0;     // || grad_x (u - u_h) ||^2_{L2(Q)}
  double sigma_sq = 0.0;  // || sigma - sigma_h ||^2_{L2(Q)}
};

inline ErrorRow error_norms(const SolutionField& field, const ManufacturedCase& c,
                            int quad_space = 5, int quad_time = 5) {
  if (!c.has_exact)
    throw std::invalid_argument("error_norms: case '" + c.name +
                                "' has no exact solution; use fosls_residual_norm_sq");
  const SpaceTimeMesh& mesh = *field.mesh;
  const DofMap& dofs = field.dofs;
  const QuadRuleTri& qs = triangle_rule(quad_space);
  const QuadRule1D& qt = gauss_legendre(quad_time);
  ErrorRow row;
  for (int n = 0; n < mesh.time.num_slabs(); ++n) {
    const double t0 = mesh.time.slab_start(n);
    const double ht = mesh.time.slab_length(n);
    for (int k = 0; k < mesh.space.num_triangles(); ++k) {
      const auto& tri = mesh.space.triangles[k];
      const Eigen::Vector2d p0 = mesh.space.vertices[tri[0]];
      const Eigen::Vector2d p1 = mesh.space.vertices[tri[1]];
      const Eigen::Vector2d p2 = mesh.space.vertices[tri[2]];
      const double area = mesh.space.area(k);
      const auto grads = detail::hat_gradients(mesh.space, k);
      double cu0[3], cu1[3], cs[3];
      for (int i = 0; i < 3; ++i) {
        cu0[i] = field.coefficients[dofs.u_index(n, tri[i])];
        cu1[i] = field.coefficients[dofs.u_index(n + 1, tri[i])];
        cs[i] = field.coefficients[dofs.sigma_index(n, mesh.space.triangle_edges[k][i])];
      }
      double div_h = 0.0;
      for (int i = 0; i < 3; ++i) div_h += cs[i] * rt0_divergence(mesh.space, k, i);
      for (std::size_t iq = 0; iq < qt.size(); ++iq) {
        const double t = t0 + ht * qt.x[iq];
        const double wt = ht * qt.w[iq];
        const double th0 = 1.0 - qt.x[iq], th1 = qt.x[iq];
        for (std::size_t jq = 0; jq < qs.size(); ++jq) {
          const Eigen::Vector2d x = p0 + qs.x[jq][0] * (p1 - p0) + qs.x[jq][1] * (p2 - p0);
          const double w = wt * 2.0 * area * qs.w[jq];
          const std::array<double, 3> lambda = {1.0 - qs.x[jq][0] - qs.x[jq][1], qs.x[jq][0],
                                                qs.x[jq][1]};
          double uh = 0.0, dtu = 0.0;
          Eigen::Vector2d guh = Eigen::Vector2d::Zero();
          Eigen::Vector2d sgh = Eigen::Vector2d::Zero();
          for (int i = 0; i < 3; ++i) {
            uh += (th0 * cu0[i] + th1 * cu1[i]) * lambda[i];
            dtu += (cu1[i] - cu0[i]) / ht * lambda[i];
            guh += (th0 * cu0[i] + th1 * cu1[i]) * grads[i];
            sgh += cs[i] * rt0_basis(mesh.space, k, i, x);
          }
          // div(u,sigma) of the exact pair equals f.
          const double ediv = c.data.f(t, x) - (dtu + div_h);
          const double eu = c.u(t, x) - uh;
          const Eigen::Vector2d egu = c.grad_u(t, x) - guh;
          const Eigen::Vector2d esg = c.sigma(t, x) - sgh;
          row.div_sq += w * ediv * ediv;
          row.l2_sq += w * eu * eu;
          row.h1_sq += w * egu.squaredNorm();
          row.sigma_sq += w * esg.squaredNorm();
        }
      }
    }
  }
  return row;
}

/// Least-squares slope of log(values) vs log(nh) over the last `window` rows.
inline double fit_rate(const std::vector<double>& nh, const std::vector<double>& values,
                       int window = 0) {
  if (nh.size() != values.size() || nh.size() < 2)
    throw std::invalid_argument("fit_rate: need at least two rows");
  std::size_t begin = 0;
  if (window > 1 && static_cast<std::size_t>(window) < nh.size())
    begin = nh.size() - static_cast<std::size_t>(window);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t i = begin; i < nh.size(); ++i) {
    if (!(values[i] > 0.0)) throw std::invalid_argument("fit_rate: nonpositive value");
    const double lx = std::log(nh[i]);
    const double ly = std::log(values[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

/// Exterior field by the representation formula,
/// u_ext = K~(u_h|_Sigma - Pi_D u_D) + V~(sigma_h . n_x + Pi_N phi_N),
/// evaluated at (t,x) strictly outside closure(Omega).
inline double eval_exterior(const SolutionField& field, const ProblemData& data, double t,
                            const Eigen::Vector2d& x, int quad_points = 8) {
  const SpaceTimeMesh& mesh = *field.mesh;
  if (mesh.space.locate(x) >= 0)
    throw std::domain_error("eval_exterior: point inside Omega");
  const DofMap& dofs = field.dofs;
  // Dirichlet trace of u_h minus interpolated jump.
  Eigen::VectorXd dens_d = -interpolate_dirichlet_trace(mesh, data.uD);
  const auto dmap = dirichlet_trace_to_global(mesh, dofs);
  for (std::size_t i = 0; i < dmap.size(); ++i)
    dens_d[static_cast<Eigen::Index>(i)] += field.coefficients[dmap[i]];
  // Outward normal trace of sigma_h plus interpolated jump.
  const NeumannTrace ntr = neumann_trace_dofs(mesh, dofs);
  Eigen::VectorXd dens_n =
      neumann_trace_values(ntr, field.coefficients) + interpolate_neumann_trace(mesh, data.phiN);
  return eval_double_potential(mesh, dens_d, t, x, quad_points) +
         eval_single_potential(mesh, dens_n, t, x, quad_points);
}

/// Nodal/flux interpolant of the exact solution pair; the best-approximation
/// yardstick for quasi-optimality checks.
inline SolutionField interpolate_case(const SpaceTimeMesh& mesh, const DofMap& dofs,
                                      const ManufacturedCase& c) {
  if (!c.has_exact) throw std::invalid_argument("interpolate_case: no exact solution");
  SolutionField f(mesh, dofs);
  interpolate_u(mesh, dofs, c.u, f.coefficients);
  interpolate_sigma(mesh, dofs, c.sigma, f.coefficients);
  return f;
}

}  // namespace stheat
