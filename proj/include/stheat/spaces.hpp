#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "stheat/mesh.hpp"
#include "stheat/quadrature.hpp"

namespace stheat {

/// Global numbering of U_h = [S^1(I) x S^1(Omega)] x [P^0(I) x RT^0(Omega)].
///
/// u-block first: (time node k, vertex v) -> k * #vertices + v.
/// sigma-block:   (time slab n, edge e)   -> #u + n * #edges + e.
/// The RT^0 degree of freedom is the flux through the edge in the direction of
/// the global (lower-to-higher vertex) edge normal.
struct DofMap {
  int time_nodes = 0;
  int vertices = 0;
  int time_slabs = 0;
  int edges = 0;

  int u_index(int k, int v) const { return k * vertices + v; }
  int sigma_index(int n, int e) const { return num_u() + n * edges + e; }
  int num_u() const { return time_nodes * vertices; }
  int num_sigma() const { return time_slabs * edges; }
  int size() const { return num_u() + num_sigma(); }
};

inline DofMap make_dof_map(const SpaceTimeMesh& mesh) {
  DofMap d;
  d.time_nodes = mesh.time.num_slabs() + 1;
  d.vertices = mesh.space.num_vertices();
  d.time_slabs = mesh.time.num_slabs();
  d.edges = mesh.space.num_edges();
  return d;
}

/// Coefficient vector of a discrete pair (u_h, sigma_h) on a mesh.
struct SolutionField {
  const SpaceTimeMesh* mesh = nullptr;
  DofMap dofs;
  Eigen::VectorXd coefficients;

  SolutionField() = default;
  SolutionField(const SpaceTimeMesh& m, const DofMap& d)
      : mesh(&m), dofs(d), coefficients(Eigen::VectorXd::Zero(d.size())) {}
};

namespace detail {

inline std::array<double, 3> barycentric(const SpatialMesh& space, int t, const Eigen::Vector2d& x) {
  const auto& tri = space.triangles[t];
  const Eigen::Vector2d& p0 = space.vertices[tri[0]];
  const Eigen::Vector2d& p1 = space.vertices[tri[1]];
  const Eigen::Vector2d& p2 = space.vertices[tri[2]];
  const double det = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
  const double l1 = ((x - p0).x() * (p2 - p0).y() - (x - p0).y() * (p2 - p0).x()) / det;
  const double l2 = ((p1 - p0).x() * (x - p0).y() - (p1 - p0).y() * (x - p0).x()) / det;
  return {1.0 - l1 - l2, l1, l2};
}

// Gradients of the P1 hat functions on triangle t (constant vectors).
inline std::array<Eigen::Vector2d, 3> hat_gradients(const SpatialMesh& space, int t) {
  const auto& tri = space.triangles[t];
  const Eigen::Vector2d& p0 = space.vertices[tri[0]];
  const Eigen::Vector2d& p1 = space.vertices[tri[1]];
  const Eigen::Vector2d& p2 = space.vertices[tri[2]];
  const double det = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
  auto rot = [](const Eigen::Vector2d& v) { return Eigen::Vector2d(-v.y(), v.x()); };
  return {rot(p2 - p1) / det, rot(p0 - p2) / det, rot(p1 - p0) / det};
}

}  // namespace detail

/// RT^0 basis function of local edge i (opposite local vertex i) on triangle t,
/// normalized to unit flux through the edge in the global normal direction.
inline Eigen::Vector2d rt0_basis(const SpatialMesh& space, int t, int i, const Eigen::Vector2d& x) {
  const double s = space.triangle_edge_sign[t][i];
  const double area = space.area(t);
  return s / (2.0 * area) * (x - space.vertices[space.triangles[t][i]]);
}

/// Divergence of the unit-flux RT^0 basis function (constant on the triangle).
inline double rt0_divergence(const SpatialMesh& space, int t, int i) {
  return space.triangle_edge_sign[t][i] / space.area(t);
}

/// Point value of u_h; (t,x) must lie in the closure of Q.
inline double eval_u(const SolutionField& field, double t, const Eigen::Vector2d& x) {
  const SpaceTimeMesh& mesh = *field.mesh;
  const int slab = mesh.time.locate(t);
  const int tri = mesh.space.locate(x);
  if (slab < 0 || tri < 0) throw std::domain_error("eval_u: point outside closure of Q");
  const double h = mesh.time.slab_length(slab);
  const double w1 = (t - mesh.time.slab_start(slab)) / h;
  const auto lambda = detail::barycentric(mesh.space, tri, x);
  double value = 0.0;
  for (int i = 0; i < 3; ++i) {
    const int v = mesh.space.triangles[tri][i];
    value += lambda[i] * ((1.0 - w1) * field.coefficients[field.dofs.u_index(slab, v)] +
                          w1 * field.coefficients[field.dofs.u_index(slab + 1, v)]);
  }
  return value;
}

/// Spatial gradient of u_h at (t,x).
inline Eigen::Vector2d eval_grad_u(const SolutionField& field, double t, const Eigen::Vector2d& x) {
  const SpaceTimeMesh& mesh = *field.mesh;
  const int slab = mesh.time.locate(t);
  const int tri = mesh.space.locate(x);
  if (slab < 0 || tri < 0) throw std::domain_error("eval_grad_u: point outside closure of Q");
  const double h = mesh.time.slab_length(slab);
  const double w1 = (t - mesh.time.slab_start(slab)) / h;
  const auto grads = detail::hat_gradients(mesh.space, tri);
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (int i = 0; i < 3; ++i) {
    const int v = mesh.space.triangles[tri][i];
    g += grads[i] * ((1.0 - w1) * field.coefficients[field.dofs.u_index(slab, v)] +
                     w1 * field.coefficients[field.dofs.u_index(slab + 1, v)]);
  }
  return g;
}

/// Point value of sigma_h at (t,x) in Q.
inline Eigen::Vector2d eval_sigma(const SolutionField& field, double t, const Eigen::Vector2d& x) {
  const SpaceTimeMesh& mesh = *field.mesh;
  const int slab = mesh.time.locate(t);
  const int tri = mesh.space.locate(x);
  if (slab < 0 || tri < 0) throw std::domain_error("eval_sigma: point outside Q");
  Eigen::Vector2d value = Eigen::Vector2d::Zero();
  for (int i = 0; i < 3; ++i) {
    const int e = mesh.space.triangle_edges[tri][i];
    value += field.coefficients[field.dofs.sigma_index(slab, e)] * rt0_basis(mesh.space, tri, i, x);
  }
  return value;
}

/// Trace space of u|_Sigma: S^1 in time x S^1 on boundary nodes.
struct DirichletTrace {
  int time_nodes = 0;
  std::vector<int> boundary_vertices;  // ascending vertex ids

  int size() const { return time_nodes * static_cast<int>(boundary_vertices.size()); }
  int index(int k, int bv) const { return k * static_cast<int>(boundary_vertices.size()) + bv; }
};

inline DirichletTrace dirichlet_trace_dofs(const SpaceTimeMesh& mesh) {
  DirichletTrace tr;
  tr.time_nodes = mesh.time.num_slabs() + 1;
  tr.boundary_vertices = mesh.space.boundary_vertices;
  return tr;
}

/// Map from trace DOFs to global u DOFs.
inline std::vector<int> dirichlet_trace_to_global(const SpaceTimeMesh& mesh, const DofMap& dofs) {
  const DirichletTrace tr = dirichlet_trace_dofs(mesh);
  std::vector<int> map(tr.size());
  for (int k = 0; k < tr.time_nodes; ++k)
    for (std::size_t b = 0; b < tr.boundary_vertices.size(); ++b)
      map[tr.index(k, static_cast<int>(b))] = dofs.u_index(k, tr.boundary_vertices[b]);
  return map;
}

/// Trace space of sigma . n_x: P^0 in time x P^0 on boundary edges (panels).
/// value on panel (n, be) = sign * coefficient(sigma dof)/edge length, with the
/// sign fixing the outward direction.
struct NeumannTrace {
  struct Entry {
    int global_dof = 0;
    double outward_sign = 1.0;
    double edge_length = 0.0;
  };
  int slabs = 0;
  std::vector<Entry> entries;  // panel-ordered: slab-major, boundary edge minor

  int size() const { return static_cast<int>(entries.size()); }
};

inline NeumannTrace neumann_trace_dofs(const SpaceTimeMesh& mesh, const DofMap& dofs) {
  NeumannTrace tr;
  tr.slabs = mesh.time.num_slabs();
  const int nb = mesh.space.num_boundary_edges();
  tr.entries.reserve(static_cast<std::size_t>(tr.slabs) * nb);
  for (int n = 0; n < tr.slabs; ++n) {
    for (int b = 0; b < nb; ++b) {
      const int e = mesh.space.boundary_edges[b];
      tr.entries.push_back({dofs.sigma_index(n, e), mesh.space.boundary_outward_sign[b],
                            mesh.space.edges[e].length});
    }
  }
  return tr;
}

/// Outward normal trace values of sigma_h on all panels.
inline Eigen::VectorXd neumann_trace_values(const NeumannTrace& tr, const Eigen::VectorXd& coeffs) {
  Eigen::VectorXd v(tr.size());
  for (int i = 0; i < tr.size(); ++i) {
    const auto& en = tr.entries[i];
    v[i] = en.outward_sign * coeffs[en.global_dof] / en.edge_length;
  }
  return v;
}

/// Nodal interpolation of g(t,x) into the u-block of a coefficient vector.
inline void interpolate_u(const SpaceTimeMesh& mesh, const DofMap& dofs,
                          const std::function<double(double, const Eigen::Vector2d&)>& g,
                          Eigen::VectorXd& coeffs) {
  for (int k = 0; k <= mesh.time.num_slabs(); ++k) {
    const double t = mesh.time.breakpoints[k];
    for (int v = 0; v < mesh.space.num_vertices(); ++v)
      coeffs[dofs.u_index(k, v)] = g(t, mesh.space.vertices[v]);
  }
}

/// Edge-flux interpolation of a vector field into the sigma-block; fluxes are
/// evaluated at the slab midpoint in time with Gauss quadrature along edges.
inline void interpolate_sigma(const SpaceTimeMesh& mesh, const DofMap& dofs,
                              const std::function<Eigen::Vector2d(double, const Eigen::Vector2d&)>& s,
                              Eigen::VectorXd& coeffs, int quad_points = 6) {
  const QuadRule1D& gl = gauss_legendre(quad_points);
  for (int n = 0; n < mesh.time.num_slabs(); ++n) {
    const double tm = 0.5 * (mesh.time.slab_start(n) + mesh.time.slab_end(n));
    for (int e = 0; e < mesh.space.num_edges(); ++e) {
      const auto& edge = mesh.space.edges[e];
      const Eigen::Vector2d pa = mesh.space.vertices[edge.a];
      const Eigen::Vector2d pb = mesh.space.vertices[edge.b];
      double flux = 0.0;
      for (std::size_t q = 0; q < gl.size(); ++q) {
        const Eigen::Vector2d x = pa + gl.x[q] * (pb - pa);
        flux += gl.w[q] * s(tm, x).dot(edge.normal);
      }
      coeffs[dofs.sigma_index(n, e)] = flux * edge.length;
    }
  }
}

/// Nodal interpolation of Dirichlet data onto the trace space.
inline Eigen::VectorXd interpolate_dirichlet_trace(
    const SpaceTimeMesh& mesh, const std::function<double(double, const Eigen::Vector2d&)>& g) {
  const DirichletTrace tr = dirichlet_trace_dofs(mesh);
  Eigen::VectorXd v(tr.size());
  for (int k = 0; k < tr.time_nodes; ++k) {
    const double t = mesh.time.breakpoints[k];
    for (std::size_t b = 0; b < tr.boundary_vertices.size(); ++b)
      v[tr.index(k, static_cast<int>(b))] = g(t, mesh.space.vertices[tr.boundary_vertices[b]]);
  }
  return v;
}

/// Panel-midpoint interpolation of Neumann data (outward normal convention).
inline Eigen::VectorXd interpolate_neumann_trace(
    const SpaceTimeMesh& mesh,
    const std::function<double(double, const Eigen::Vector2d&, const Eigen::Vector2d&)>& phi) {
  const auto panels = lateral_panels(mesh);
  Eigen::VectorXd v(static_cast<int>(panels.size()));
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double tm = 0.5 * (panels[p].t0 + panels[p].t1);
    const Eigen::Vector2d xm = 0.5 * (panels[p].p0 + panels[p].p1);
    v[static_cast<int>(p)] = phi(tm, xm, panels[p].normal);
  }
  return v;
}

}  // namespace stheat
