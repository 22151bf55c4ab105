#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "stheat/mesh.hpp"
#include "stheat/quadrature.hpp"
#include "stheat/spaces.hpp"

namespace stheat {

/// Data of the parabolic transmission problem. The diffusion field A must be
/// symmetric positive definite wherever it is sampled; phiN receives the
/// outward unit normal as third argument.
struct ProblemData {
  std::function<Eigen::Matrix2d(double, const Eigen::Vector2d&)> A;
  std::function<double(double, const Eigen::Vector2d&)> f;
  std::function<double(const Eigen::Vector2d&)> u0;
  std::function<double(double, const Eigen::Vector2d&)> uD;
  std::function<double(double, const Eigen::Vector2d&, const Eigen::Vector2d&)> phiN;
  double T = 1.0;
};

inline std::function<Eigen::Matrix2d(double, const Eigen::Vector2d&)> identity_diffusion() {
  return [](double, const Eigen::Vector2d&) { return Eigen::Matrix2d::Identity(); };
}

/// alpha-independent FOSLS blocks: B encodes b_1, gram the U-inner product,
/// load the functional <f, div v> + <u0, v(0,.)>.
struct FoslsMatrices {
  Eigen::SparseMatrix<double> B;
  Eigen::SparseMatrix<double> gram;
  Eigen::VectorXd load;
};

namespace detail {

inline void check_spd(const Eigen::Matrix2d& A, double t, const Eigen::Vector2d& x) {
  const double scale = A.cwiseAbs().maxCoeff() + 1e-300;
  if (std::abs(A(0, 1) - A(1, 0)) > 1e-10 * scale || A(0, 0) <= 0.0 || A.determinant() <= 0.0) {
    throw std::invalid_argument("assemble_fosls: A not symmetric positive definite at t=" +
                                std::to_string(t) + ", x=(" + std::to_string(x.x()) + "," +
                                std::to_string(x.y()) + ")");
  }
}

}  // namespace detail

/// Assembles B, the U-norm Gram matrix and the load vector on U_h.
///
/// B realizes <div u, div v> + <A grad u + sigma, A grad v + tau> over Q plus
/// the initial trace term <u(0,.), v(0,.)> over Omega; the alpha weight is
/// applied later at system-combination time.
inline FoslsMatrices assemble_fosls(const SpaceTimeMesh& mesh, const DofMap& dofs,
                                    const ProblemData& data, int quad_space = 3,
                                    int quad_time = 3) {
  if (quad_space < 2 || quad_time < 2)
    std::cerr << "assemble_fosls: warning: quadrature order below exactness for the "
                 "polynomial terms (need >= 2)\n";
  const QuadRuleTri& qs = triangle_rule(quad_space);
  const QuadRule1D& qt = gauss_legendre(quad_time);

  std::vector<Eigen::Triplet<double>> tb, tg;
  const std::size_t reserve = static_cast<std::size_t>(mesh.prism_count()) * 81;
  tb.reserve(reserve);
  tg.reserve(reserve);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(dofs.size());

  const int slabs = mesh.time.num_slabs();
  const int ntri = mesh.space.num_triangles();

  for (int n = 0; n < slabs; ++n) {
    const double t0 = mesh.time.slab_start(n);
    const double ht = mesh.time.slab_length(n);
    for (int k = 0; k < ntri; ++k) {
      const auto& tri = mesh.space.triangles[k];
      const Eigen::Vector2d p0 = mesh.space.vertices[tri[0]];
      const Eigen::Vector2d p1 = mesh.space.vertices[tri[1]];
      const Eigen::Vector2d p2 = mesh.space.vertices[tri[2]];
      const double area = mesh.space.area(k);
      const auto grads = detail::hat_gradients(mesh.space, k);

      // Local numbering: u dofs 0..5 = (time node n,k=0..2),(n+1,k=0..2); sigma 6..8.
      int gdof[9];
      for (int i = 0; i < 3; ++i) {
        gdof[i] = dofs.u_index(n, tri[i]);
        gdof[3 + i] = dofs.u_index(n + 1, tri[i]);
        gdof[6 + i] = dofs.sigma_index(n, mesh.space.triangle_edges[k][i]);
      }

      Eigen::Matrix<double, 9, 9> lb = Eigen::Matrix<double, 9, 9>::Zero();
      Eigen::Matrix<double, 9, 9> lg = Eigen::Matrix<double, 9, 9>::Zero();
      Eigen::Matrix<double, 9, 1> lload = Eigen::Matrix<double, 9, 1>::Zero();

      for (std::size_t iq = 0; iq < qt.size(); ++iq) {
        const double t = t0 + ht * qt.x[iq];
        const double wt = ht * qt.w[iq];
        const double theta0 = 1.0 - qt.x[iq];
        const double theta1 = qt.x[iq];
        for (std::size_t jq = 0; jq < qs.size(); ++jq) {
          const Eigen::Vector2d x =
              p0 + qs.x[jq][0] * (p1 - p0) + qs.x[jq][1] * (p2 - p0);
          const double w = wt * 2.0 * area * qs.w[jq];
          const Eigen::Matrix2d A = data.A(t, x);
          detail::check_spd(A, t, x);

          const std::array<double, 3> lambda = {1.0 - qs.x[jq][0] - qs.x[jq][1],
                                                qs.x[jq][0], qs.x[jq][1]};
          // Per-basis divergence, value, gradient, sigma value and the flux
          // expression A grad u + sigma.
          double div[9], val[9];
          Eigen::Vector2d gradu[9], sig[9], flux[9];
          for (int i = 0; i < 3; ++i) {
            div[i] = -lambda[i] / ht;
            div[3 + i] = lambda[i] / ht;
            div[6 + i] = rt0_divergence(mesh.space, k, i);
            val[i] = theta0 * lambda[i];
            val[3 + i] = theta1 * lambda[i];
            val[6 + i] = 0.0;
            gradu[i] = theta0 * grads[i];
            gradu[3 + i] = theta1 * grads[i];
            gradu[6 + i] = Eigen::Vector2d::Zero();
            sig[i] = sig[3 + i] = Eigen::Vector2d::Zero();
            sig[6 + i] = rt0_basis(mesh.space, k, i, x);
          }
          for (int i = 0; i < 9; ++i) flux[i] = A * gradu[i] + sig[i];
          const double fx = data.f(t, x);
          for (int i = 0; i < 9; ++i) {
            for (int j = 0; j < 9; ++j) {
              lb(i, j) += w * (div[i] * div[j] + flux[i].dot(flux[j]));
              lg(i, j) += w * (div[i] * div[j] + val[i] * val[j] +
                               gradu[i].dot(gradu[j]) + sig[i].dot(sig[j]));
            }
            lload(i) += w * fx * div[i];
          }
        }
      }

      for (int i = 0; i < 9; ++i) {
        load[gdof[i]] += lload(i);
        for (int j = 0; j < 9; ++j) {
          if (lb(i, j) != 0.0) tb.emplace_back(gdof[i], gdof[j], lb(i, j));
          if (lg(i, j) != 0.0) tg.emplace_back(gdof[i], gdof[j], lg(i, j));
        }
      }
    }
  }

  // Initial trace term <u(0,.), v(0,.)>: exact P1 mass on the first time node.
  for (int k = 0; k < ntri; ++k) {
    const auto& tri = mesh.space.triangles[k];
    const double area = mesh.space.area(k);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        tb.emplace_back(dofs.u_index(0, tri[i]), dofs.u_index(0, tri[j]),
                        area * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
  }
  // <u0, v(0,.)> part of the load via spatial quadrature.
  {
    const QuadRuleTri& q0 = triangle_rule(quad_space);
    for (int k = 0; k < ntri; ++k) {
      const auto& tri = mesh.space.triangles[k];
      const Eigen::Vector2d p0 = mesh.space.vertices[tri[0]];
      const Eigen::Vector2d p1 = mesh.space.vertices[tri[1]];
      const Eigen::Vector2d p2 = mesh.space.vertices[tri[2]];
      const double area = mesh.space.area(k);
      for (std::size_t jq = 0; jq < q0.size(); ++jq) {
        const Eigen::Vector2d x = p0 + q0.x[jq][0] * (p1 - p0) + q0.x[jq][1] * (p2 - p0);
        const double w = 2.0 * area * q0.w[jq];
        const double u0 = data.u0(x);
        if (u0 == 0.0) continue;
        const std::array<double, 3> lambda = {1.0 - q0.x[jq][0] - q0.x[jq][1],
                                              q0.x[jq][0], q0.x[jq][1]};
        for (int i = 0; i < 3; ++i) load[dofs.u_index(0, tri[i])] += w * u0 * lambda[i];
      }
    }
  }

  FoslsMatrices out;
  out.B.resize(dofs.size(), dofs.size());
  out.B.setFromTriplets(tb.begin(), tb.end());
  out.gram.resize(dofs.size(), dofs.size());
  out.gram.setFromTriplets(tg.begin(), tg.end());
  out.load = std::move(load);
  return out;
}

/// Load functional <f, div v> + <u0, v(0,.)> alone; lets callers reuse the
/// data-independent matrices of one level across several data sets.
inline Eigen::VectorXd assemble_fosls_load(const SpaceTimeMesh& mesh, const DofMap& dofs,
                                           const ProblemData& data, int quad_space = 3,
                                           int quad_time = 3) {
  const QuadRuleTri& qs = triangle_rule(quad_space);
  const QuadRule1D& qt = gauss_legendre(quad_time);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(dofs.size());
  for (int n = 0; n < mesh.time.num_slabs(); ++n) {
    const double t0 = mesh.time.slab_start(n);
    const double ht = mesh.time.slab_length(n);
    for (int k = 0; k < mesh.space.num_triangles(); ++k) {
      const auto& tri = mesh.space.triangles[k];
      const Eigen::Vector2d p0 = mesh.space.vertices[tri[0]];
      const Eigen::Vector2d p1 = mesh.space.vertices[tri[1]];
      const Eigen::Vector2d p2 = mesh.space.vertices[tri[2]];
      const double area = mesh.space.area(k);
      for (std::size_t iq = 0; iq < qt.size(); ++iq) {
        const double t = t0 + ht * qt.x[iq];
        const double wt = ht * qt.w[iq];
        for (std::size_t jq = 0; jq < qs.size(); ++jq) {
          const Eigen::Vector2d x = p0 + qs.x[jq][0] * (p1 - p0) + qs.x[jq][1] * (p2 - p0);
          const double fx = data.f(t, x);
          if (fx == 0.0) continue;
          const double w = wt * 2.0 * area * qs.w[jq];
          const std::array<double, 3> lambda = {1.0 - qs.x[jq][0] - qs.x[jq][1], qs.x[jq][0],
                                                qs.x[jq][1]};
          for (int i = 0; i < 3; ++i) {
            load[dofs.u_index(n, tri[i])] += w * fx * (-lambda[i] / ht);
            load[dofs.u_index(n + 1, tri[i])] += w * fx * (lambda[i] / ht);
            load[dofs.sigma_index(n, mesh.space.triangle_edges[k][i])] +=
                w * fx * rt0_divergence(mesh.space, k, i);
          }
        }
      }
    }
  }
  for (int k = 0; k < mesh.space.num_triangles(); ++k) {
    const auto& tri = mesh.space.triangles[k];
    const Eigen::Vector2d p0 = mesh.space.vertices[tri[0]];
    const Eigen::Vector2d p1 = mesh.space.vertices[tri[1]];
    const Eigen::Vector2d p2 = mesh.space.vertices[tri[2]];
    const double area = mesh.space.area(k);
    for (std::size_t jq = 0; jq < qs.size(); ++jq) {
      const Eigen::Vector2d x = p0 + qs.x[jq][0] * (p1 - p0) + qs.x[jq][1] * (p2 - p0);
      const double u0 = data.u0(x);
      if (u0 == 0.0) continue;
      const double w = 2.0 * area * qs.w[jq];
      const std::array<double, 3> lambda = {1.0 - qs.x[jq][0] - qs.x[jq][1], qs.x[jq][0],
                                            qs.x[jq][1]};
      for (int i = 0; i < 3; ++i) load[dofs.u_index(0, tri[i])] += w * u0 * lambda[i];
    }
  }
  return load;
}

/// || f - div u_h ||^2 + || A grad u_h + sigma_h ||^2 over Q plus
/// || u0 - u_h(0,.) ||^2 over Omega: the computable FOSLS error lower bound.
inline double fosls_residual_norm_sq(const SolutionField& field, const ProblemData& data,
                                     int quad_space = 5, int quad_time = 5) {
  const SpaceTimeMesh& mesh = *field.mesh;
  const DofMap& dofs = field.dofs;
  const QuadRuleTri& qs = triangle_rule(quad_space);
  const QuadRule1D& qt = gauss_legendre(quad_time);
  double acc = 0.0;
  const int slabs = mesh.time.num_slabs();
  for (int n = 0; n < slabs; ++n) {
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
      double div_sigma = 0.0;
      for (int i = 0; i < 3; ++i) div_sigma += cs[i] * rt0_divergence(mesh.space, k, i);
      for (std::size_t iq = 0; iq < qt.size(); ++iq) {
        const double t = t0 + ht * qt.x[iq];
        const double wt = ht * qt.w[iq];
        const double theta0 = 1.0 - qt.x[iq];
        const double theta1 = qt.x[iq];
        for (std::size_t jq = 0; jq < qs.size(); ++jq) {
          const Eigen::Vector2d x = p0 + qs.x[jq][0] * (p1 - p0) + qs.x[jq][1] * (p2 - p0);
          const double w = wt * 2.0 * area * qs.w[jq];
          const std::array<double, 3> lambda = {1.0 - qs.x[jq][0] - qs.x[jq][1],
                                                qs.x[jq][0], qs.x[jq][1]};
          double dtu = 0.0;
          Eigen::Vector2d gu = Eigen::Vector2d::Zero();
          Eigen::Vector2d sg = Eigen::Vector2d::Zero();
          for (int i = 0; i < 3; ++i) {
            dtu += (cu1[i] - cu0[i]) / ht * lambda[i];
            gu += (theta0 * cu0[i] + theta1 * cu1[i]) * grads[i];
            sg += cs[i] * rt0_basis(mesh.space, k, i, x);
          }
          const double rdiv = data.f(t, x) - (dtu + div_sigma);
          const Eigen::Vector2d rflux = data.A(t, x) * gu + sg;
          acc += w * (rdiv * rdiv + rflux.squaredNorm());
        }
      }
    }
  }
  // Initial trace misfit.
  for (int k = 0; k < mesh.space.num_triangles(); ++k) {
    const auto& tri = mesh.space.triangles[k];
    const Eigen::Vector2d p0 = mesh.space.vertices[tri[0]];
    const Eigen::Vector2d p1 = mesh.space.vertices[tri[1]];
    const Eigen::Vector2d p2 = mesh.space.vertices[tri[2]];
    const double area = mesh.space.area(k);
    for (std::size_t jq = 0; jq < qs.size(); ++jq) {
      const Eigen::Vector2d x = p0 + qs.x[jq][0] * (p1 - p0) + qs.x[jq][1] * (p2 - p0);
      const double w = 2.0 * area * qs.w[jq];
      const std::array<double, 3> lambda = {1.0 - qs.x[jq][0] - qs.x[jq][1], qs.x[jq][0],
                                            qs.x[jq][1]};
      double uh0 = 0.0;
      for (int i = 0; i < 3; ++i) uh0 += field.coefficients[dofs.u_index(0, tri[i])] * lambda[i];
      const double r = data.u0(x) - uh0;
      acc += w * r * r;
    }
  }
  return acc;
}

}  // namespace stheat
