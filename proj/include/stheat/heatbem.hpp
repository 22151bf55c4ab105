#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stheat/mesh.hpp"
#include "stheat/quadrature.hpp"
#include "stheat/spaces.hpp"
#include "stheat/time_integrals.hpp"

namespace stheat {

/// Quadrature configuration for the boundary operators. Time integration is
/// analytic; these rules only act on the spatial edge variables.
struct BemConfig {
  int gauss_points = 8;          // tensor rule for well-separated edge pairs
  double grading = 0.15;         // geometric grading toward the singular point
  int grading_levels = 10;       // 4 levels leave ~3e-5 of the log singularity
  int graded_points = 8;         // Gauss points per graded segment
  int near_subdivisions = 3;     // per-edge composite refinement of close pairs
  double near_threshold = 1.0;   // "close" = dist < threshold * max edge length
  int potential_points = 8;      // edge rule for potential evaluation
  bool replicate_time_blocks = false;  // uniform grids: compute offsets once
};

/// Galerkin matrices of the boundary operators on the lateral trace spaces.
///
/// V:    panels x panels, entries int int G over panel pairs.
/// K:    panels x Dirichlet trace DOFs, double-layer pairing without the -1/2.
/// mass: panels x Dirichlet trace DOFs, the Sigma mass matrix.
/// Rows/columns follow the deterministic time-major panel order and the
/// (time node, boundary vertex) trace order.
struct BemMatrices {
  Eigen::MatrixXd V;
  Eigen::MatrixXd K;
  Eigen::MatrixXd mass;
};

namespace detail {

enum class PairKind { Identical, Touching, Near, Far };

struct BoundaryEdgeGeom {
  Eigen::Vector2d pa, pb;   // endpoints in (edge.a, edge.b) vertex order
  Eigen::Vector2d normal;   // outward
  double length = 0.0;
  int va = 0, vb = 0;       // global vertex ids
  int bva = 0, bvb = 0;     // boundary-vertex indices
};

inline double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                                     const Eigen::Vector2d& b) {
  const Eigen::Vector2d d = b - a;
  const double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

inline double edge_distance(const BoundaryEdgeGeom& e, const BoundaryEdgeGeom& g) {
  return std::min(std::min(point_segment_distance(e.pa, g.pa, g.pb),
                           point_segment_distance(e.pb, g.pa, g.pb)),
                  std::min(point_segment_distance(g.pa, e.pa, e.pb),
                           point_segment_distance(g.pb, e.pa, e.pb)));
}

struct PairRule {
  PairKind kind = PairKind::Far;
  // For touching pairs: parametrize each edge starting at the shared vertex.
  bool test_from_a = true;   // shared vertex is the test edge's 'a' endpoint
  bool trial_from_a = true;
};

inline PairRule classify_pair(int i, int j, const BoundaryEdgeGeom& e, const BoundaryEdgeGeom& g,
                              double near_threshold) {
  PairRule r;
  if (i == j) {
    r.kind = PairKind::Identical;
    return r;
  }
  const bool aa = e.va == g.va, ab = e.va == g.vb, ba = e.vb == g.va, bb = e.vb == g.vb;
  const int shared = int(aa) + int(ab) + int(ba) + int(bb);
  if (shared > 1)
    throw std::runtime_error("heatbem: untested panel configuration, edges " + std::to_string(i) +
                             " and " + std::to_string(j) + " share two vertices");
  if (shared == 1) {
    r.kind = PairKind::Touching;
    r.test_from_a = aa || ab;
    r.trial_from_a = aa || ba;
    return r;
  }
  r.kind = (edge_distance(e, g) < near_threshold * std::max(e.length, g.length)) ? PairKind::Near
                                                                                 : PairKind::Far;
  return r;
}

// Tensor product of two 1D rules mapped over a pair of parametrized edges.
struct PairQuadrature {
  std::vector<double> p, q, w;  // test param, trial param, combined weight
};

inline PairQuadrature tensor_pair(const QuadRule1D& rp, const QuadRule1D& rq) {
  PairQuadrature out;
  out.p.reserve(rp.size() * rq.size());
  out.q.reserve(rp.size() * rq.size());
  out.w.reserve(rp.size() * rq.size());
  for (std::size_t i = 0; i < rp.size(); ++i)
    for (std::size_t j = 0; j < rq.size(); ++j) {
      out.p.push_back(rp.x[i]);
      out.q.push_back(rq.x[j]);
      out.w.push_back(rp.w[i] * rq.w[j]);
    }
  return out;
}

inline PairQuadrature subdivided_pair(const QuadRule1D& gl, int subs) {
  QuadRule1D comp;
  for (int s = 0; s < subs; ++s)
    for (std::size_t i = 0; i < gl.size(); ++i) {
      comp.x.push_back((s + gl.x[i]) / subs);
      comp.w.push_back(gl.w[i] / subs);
    }
  return tensor_pair(comp, comp);
}

struct BemWorkspace {
  PairQuadrature far, near, touching;
  QuadRule1D graded_1d;  // for the identical-edge 1D reduction

  explicit BemWorkspace(const BemConfig& cfg) {
    const QuadRule1D& gl = gauss_legendre(cfg.gauss_points);
    far = tensor_pair(gl, gl);
    near = subdivided_pair(gl, cfg.near_subdivisions);
    const QuadRule1D graded = graded_rule(cfg.grading, cfg.grading_levels, cfg.graded_points);
    touching = tensor_pair(graded, graded);
    graded_1d = graded;
  }
};

}  // namespace detail

/// Assembles V, K and the Sigma mass matrix in one sweep over panel pairs.
inline BemMatrices assemble_bem(const SpaceTimeMesh& mesh, const BemConfig& cfg = {}) {
  const int slabs = mesh.time.num_slabs();
  const int nb = mesh.space.num_boundary_edges();
  const int nbv = mesh.space.num_boundary_vertices();
  const int n_panels = slabs * nb;
  const int n_dir = (slabs + 1) * nbv;

  std::vector<detail::BoundaryEdgeGeom> geom(nb);
  for (int b = 0; b < nb; ++b) {
    const auto& edge = mesh.space.edges[mesh.space.boundary_edges[b]];
    auto& g = geom[b];
    g.pa = mesh.space.vertices[edge.a];
    g.pb = mesh.space.vertices[edge.b];
    g.normal = mesh.space.boundary_outward_sign[b] * edge.normal;
    g.length = edge.length;
    g.va = edge.a;
    g.vb = edge.b;
    g.bva = mesh.space.vertex_boundary_index[edge.a];
    g.bvb = mesh.space.vertex_boundary_index[edge.b];
  }
  std::vector<detail::PairRule> rules(static_cast<std::size_t>(nb) * nb);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      rules[static_cast<std::size_t>(i) * nb + j] =
          detail::classify_pair(i, j, geom[i], geom[j], cfg.near_threshold);

  const detail::BemWorkspace ws(cfg);

  BemMatrices out;
  out.V = Eigen::MatrixXd::Zero(n_panels, n_panels);
  out.K = Eigen::MatrixXd::Zero(n_panels, n_dir);
  out.mass = Eigen::MatrixXd::Zero(n_panels, n_dir);

  bool uniform = true;
  for (int n = 1; n < slabs; ++n)
    if (std::abs(mesh.time.slab_length(n) - mesh.time.slab_length(0)) >
        1e-13 * mesh.time.slab_length(0))
      uniform = false;
  const bool replicate = cfg.replicate_time_blocks && uniform;

  // One spatial-pair block: integrates the three kernel moments over the edge
  // pair for test slab [ta0,ta1] x trial slab [tb0,tb1] and accumulates V and
  // the four K columns.
  auto integrate_pair = [&](int row, int i, int j, double ta0, double ta1, double tb0, double tb1,
                            int trial_slab, Eigen::MatrixXd& V, Eigen::MatrixXd& K) {
    const auto& e = geom[i];
    const auto& g = geom[j];
    const auto& rule = rules[static_cast<std::size_t>(i) * nb + j];
    const double jac = e.length * g.length;
    const int col_v = trial_slab * nb + j;
    const int col_k00 = trial_slab * nbv + g.bva;        // time node n, vertex a
    const int col_k01 = trial_slab * nbv + g.bvb;        // time node n, vertex b
    const int col_k10 = (trial_slab + 1) * nbv + g.bva;  // time node n+1
    const int col_k11 = (trial_slab + 1) * nbv + g.bvb;

    if (rule.kind == detail::PairKind::Identical) {
      // Same straight edge: (x-y).n_y vanishes identically, so only V gets a
      // contribution; the kernel depends on |p-q| alone and
      // int_0^1 int_0^1 f(|p-q|) = 2 int_0^1 (1-u) f(u) du.
      double acc = 0.0;
      for (std::size_t q = 0; q < ws.graded_1d.size(); ++q) {
        const double u = ws.graded_1d.x[q];
        const double r2 = (u * e.length) * (u * e.length);
        const PanelTimeIntegrals mom = panel_time_integrals(r2, ta0, ta1, tb0, tb1);
        acc += 2.0 * ws.graded_1d.w[q] * (1.0 - u) * mom.v_const;
      }
      V(row, col_v) += acc * jac;
      return;
    }

    const detail::PairQuadrature* pq = nullptr;
    Eigen::Vector2d e0 = e.pa, ed = e.pb - e.pa;
    Eigen::Vector2d g0 = g.pa, gd = g.pb - g.pa;
    bool flip_trial = false;
    switch (rule.kind) {
      case detail::PairKind::Touching:
        pq = &ws.touching;
        if (!rule.test_from_a) {
          e0 = e.pb;
          ed = e.pa - e.pb;
        }
        if (!rule.trial_from_a) {
          g0 = g.pb;
          gd = g.pa - g.pb;
          flip_trial = true;
        }
        break;
      case detail::PairKind::Near:
        pq = &ws.near;
        break;
      default:
        pq = &ws.far;
        break;
    }

    double acc_v = 0.0, acc_k00 = 0.0, acc_k01 = 0.0, acc_k10 = 0.0, acc_k11 = 0.0;
    for (std::size_t q = 0; q < pq->w.size(); ++q) {
      const Eigen::Vector2d x = e0 + pq->p[q] * ed;
      const Eigen::Vector2d y = g0 + pq->q[q] * gd;
      const Eigen::Vector2d diff = x - y;
      const PanelTimeIntegrals mom = panel_time_integrals(diff.squaredNorm(), ta0, ta1, tb0, tb1);
      const double w = pq->w[q];
      acc_v += w * mom.v_const;
      const double kf = diff.dot(g.normal);
      if (kf != 0.0) {
        const double wa = flip_trial ? pq->q[q] : 1.0 - pq->q[q];  // hat at vertex a
        const double k_lo = kf * (mom.k_const - mom.k_linear);
        const double k_hi = kf * mom.k_linear;
        acc_k00 += w * k_lo * wa;
        acc_k01 += w * k_lo * (1.0 - wa);
        acc_k10 += w * k_hi * wa;
        acc_k11 += w * k_hi * (1.0 - wa);
      }
    }
    V(row, col_v) += acc_v * jac;
    K(row, col_k00) += acc_k00 * jac;
    K(row, col_k01) += acc_k01 * jac;
    K(row, col_k10) += acc_k10 * jac;
    K(row, col_k11) += acc_k11 * jac;
  };

  if (replicate) {
    // Entries depend on the slab offset only; compute one block row per offset
    // and copy it along the diagonals.
    Eigen::MatrixXd Vb = Eigen::MatrixXd::Zero(static_cast<std::size_t>(slabs) * nb, nb);
    Eigen::MatrixXd Kb = Eigen::MatrixXd::Zero(static_cast<std::size_t>(slabs) * nb, 2 * nbv);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int k = 0; k < slabs; ++k) {
      Eigen::MatrixXd Vloc = Eigen::MatrixXd::Zero(nb, nb);
      Eigen::MatrixXd Kloc = Eigen::MatrixXd::Zero(nb, 2 * nbv);
      for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j)
          integrate_pair(i, i, j, mesh.time.slab_start(k), mesh.time.slab_end(k),
                         mesh.time.slab_start(0), mesh.time.slab_end(0), 0, Vloc, Kloc);
      Vb.middleRows(k * nb, nb) = Vloc;
      Kb.middleRows(k * nb, nb) = Kloc;
    }
    for (int m = 0; m < slabs; ++m)
      for (int n = 0; n <= m; ++n) {
        const int k = m - n;
        out.V.block(m * nb, n * nb, nb, nb) = Vb.middleRows(k * nb, nb);
        out.K.block(m * nb, n * nbv, nb, 2 * nbv) += Kb.middleRows(k * nb, nb);
      }
  } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int m = 0; m < slabs; ++m) {
      for (int i = 0; i < nb; ++i) {
        const int row = m * nb + i;
        for (int n = 0; n <= m; ++n)
          for (int j = 0; j < nb; ++j)
            integrate_pair(row, i, j, mesh.time.slab_start(m), mesh.time.slab_end(m),
                           mesh.time.slab_start(n), mesh.time.slab_end(n), n, out.V, out.K);
      }
    }
  }

  // Sigma mass matrix: product of exact 1D hat integrals.
  for (int m = 0; m < slabs; ++m) {
    const double ht = mesh.time.slab_length(m);
    for (int i = 0; i < nb; ++i) {
      const int row = m * nb + i;
      const double we = 0.5 * geom[i].length;
      const double wt = 0.5 * ht;
      out.mass(row, m * nbv + geom[i].bva) += wt * we;
      out.mass(row, m * nbv + geom[i].bvb) += wt * we;
      out.mass(row, (m + 1) * nbv + geom[i].bva) += wt * we;
      out.mass(row, (m + 1) * nbv + geom[i].bvb) += wt * we;
    }
  }
  return out;
}

inline Eigen::MatrixXd assemble_V(const SpaceTimeMesh& mesh, const BemConfig& cfg = {}) {
  return assemble_bem(mesh, cfg).V;
}

inline Eigen::MatrixXd assemble_K(const SpaceTimeMesh& mesh, const BemConfig& cfg = {}) {
  return assemble_bem(mesh, cfg).K;
}

inline Eigen::MatrixXd assemble_boundary_mass(const SpaceTimeMesh& mesh) {
  BemConfig cfg;
  const int slabs = mesh.time.num_slabs();
  const int nb = mesh.space.num_boundary_edges();
  const int nbv = mesh.space.num_boundary_vertices();
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(slabs * nb, (slabs + 1) * nbv);
  for (int m = 0; m < slabs; ++m) {
    const double wt = 0.5 * mesh.time.slab_length(m);
    for (int b = 0; b < nb; ++b) {
      const auto& edge = mesh.space.edges[mesh.space.boundary_edges[b]];
      const double we = 0.5 * edge.length;
      const int bva = mesh.space.vertex_boundary_index[edge.a];
      const int bvb = mesh.space.vertex_boundary_index[edge.b];
      mass(m * nb + b, m * nbv + bva) += wt * we;
      mass(m * nb + b, m * nbv + bvb) += wt * we;
      mass(m * nb + b, (m + 1) * nbv + bva) += wt * we;
      mass(m * nb + b, (m + 1) * nbv + bvb) += wt * we;
    }
  }
  return mass;
}

/// Single-layer potential (V~ phi)(t,x) for a panelwise-constant density and
/// (t,x) off Sigma; analytic in time, Gauss quadrature along edges.
inline double eval_single_potential(const SpaceTimeMesh& mesh, const Eigen::VectorXd& density,
                                    double t, const Eigen::Vector2d& x, int quad_points = 8) {
  const auto panels = lateral_panels(mesh);
  if (density.size() != static_cast<Eigen::Index>(panels.size()))
    throw std::invalid_argument("eval_single_potential: density size mismatch");
  const QuadRule1D& gl = gauss_legendre(quad_points);
  double acc = 0.0;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    if (density[static_cast<Eigen::Index>(p)] == 0.0 || t <= panels[p].t0) continue;
    const Eigen::Vector2d d = panels[p].p1 - panels[p].p0;
    double panel_sum = 0.0;
    for (std::size_t q = 0; q < gl.size(); ++q) {
      const Eigen::Vector2d y = panels[p].p0 + gl.x[q] * d;
      const double r2 = (x - y).squaredNorm();
      if (r2 == 0.0) throw std::domain_error("eval_single_potential: point on Sigma");
      panel_sum += gl.w[q] * single_layer_time_integral(r2, t, panels[p].t0, panels[p].t1);
    }
    acc += density[static_cast<Eigen::Index>(p)] * panel_sum * panels[p].length;
  }
  return acc;
}

/// Double-layer potential (K~ u)(t,x) for a Dirichlet-trace density (hats in
/// time and on boundary nodes) and (t,x) off Sigma.
inline double eval_double_potential(const SpaceTimeMesh& mesh, const Eigen::VectorXd& density,
                                    double t, const Eigen::Vector2d& x, int quad_points = 8) {
  const int slabs = mesh.time.num_slabs();
  const int nb = mesh.space.num_boundary_edges();
  const int nbv = mesh.space.num_boundary_vertices();
  if (density.size() != static_cast<Eigen::Index>((slabs + 1) * nbv))
    throw std::invalid_argument("eval_double_potential: density size mismatch");
  const QuadRule1D& gl = gauss_legendre(quad_points);
  double acc = 0.0;
  for (int n = 0; n < slabs; ++n) {
    const double tb0 = mesh.time.slab_start(n);
    if (t <= tb0) break;
    const double tb1 = mesh.time.slab_end(n);
    for (int b = 0; b < nb; ++b) {
      const auto& edge = mesh.space.edges[mesh.space.boundary_edges[b]];
      const Eigen::Vector2d pa = mesh.space.vertices[edge.a];
      const Eigen::Vector2d pb = mesh.space.vertices[edge.b];
      const Eigen::Vector2d normal = mesh.space.boundary_outward_sign[b] * edge.normal;
      const double ca0 = density[n * nbv + mesh.space.vertex_boundary_index[edge.a]];
      const double cb0 = density[n * nbv + mesh.space.vertex_boundary_index[edge.b]];
      const double ca1 = density[(n + 1) * nbv + mesh.space.vertex_boundary_index[edge.a]];
      const double cb1 = density[(n + 1) * nbv + mesh.space.vertex_boundary_index[edge.b]];
      if (ca0 == 0.0 && cb0 == 0.0 && ca1 == 0.0 && cb1 == 0.0) continue;
      double edge_sum = 0.0;
      for (std::size_t q = 0; q < gl.size(); ++q) {
        const Eigen::Vector2d y = pa + gl.x[q] * (pb - pa);
        const Eigen::Vector2d diff = x - y;
        const double r2 = diff.squaredNorm();
        if (r2 == 0.0) throw std::domain_error("eval_double_potential: point on Sigma");
        const DoubleLayerTimeIntegrals ti = double_layer_time_integrals(r2, t, tb0, tb1);
        const double u_lo = (1.0 - gl.x[q]) * ca0 + gl.x[q] * cb0;  // density at node n
        const double u_hi = (1.0 - gl.x[q]) * ca1 + gl.x[q] * cb1;  // at node n+1
        edge_sum += gl.w[q] * diff.dot(normal) *
                    ((ti.w_const - ti.w_linear) * u_lo + ti.w_linear * u_hi);
      }
      acc += edge_sum * edge.length;
    }
  }
  return acc;
}

}  // namespace stheat
