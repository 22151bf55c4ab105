#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace stheat {

/// Conforming triangulation of a polygon with global edge numbering.
///
/// Edge normals follow the lower-to-higher vertex index convention; boundary
/// edges additionally record whether that normal points out of the domain.
struct SpatialMesh {
  struct Edge {
    int a = 0, b = 0;        // vertex indices, a < b
    Eigen::Vector2d normal;  // unit normal, rotation of (P_b - P_a)
    double length = 0.0;
  };

  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;  // positively oriented
  std::vector<Edge> edges;

  std::vector<std::array<int, 3>> triangle_edges;        // edge opposite local vertex i
  std::vector<std::array<double, 3>> triangle_edge_sign; // +1 if global normal leaves K
  std::vector<int> boundary_edges;                       // edge indices on Gamma
  std::vector<double> boundary_outward_sign;             // +-1 per boundary edge
  std::vector<int> boundary_vertices;                    // ascending vertex indices
  std::vector<int> vertex_boundary_index;                // -1 for interior vertices

  int square_cells = 0;  // n for the structured unit-square mesh, else 0

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_boundary_edges() const { return static_cast<int>(boundary_edges.size()); }
  int num_boundary_vertices() const { return static_cast<int>(boundary_vertices.size()); }

  double area(int t) const {
    const auto& tri = triangles[t];
    const Eigen::Vector2d e1 = vertices[tri[1]] - vertices[tri[0]];
    const Eigen::Vector2d e2 = vertices[tri[2]] - vertices[tri[0]];
    return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
  }

  double max_edge_length() const {
    double h = 0.0;
    for (const auto& e : edges) h = std::max(h, e.length);
    return h;
  }

  /// Triangle containing x (closure, ties resolved deterministically), -1 outside.
  int locate(const Eigen::Vector2d& x) const {
    if (square_cells > 0) {
      const int n = square_cells;
      const double h = 1.0 / n;
      if (x.x() < -1e-12 || x.x() > 1.0 + 1e-12 || x.y() < -1e-12 || x.y() > 1.0 + 1e-12)
        return -1;
      const int i = std::clamp(static_cast<int>(std::floor(x.x() * n)), 0, n - 1);
      const int j = std::clamp(static_cast<int>(std::floor(x.y() * n)), 0, n - 1);
      const double xi = x.x() - i * h;
      const double eta = x.y() - j * h;
      const bool lower = xi + eta <= h + 1e-14;
      return 2 * (j * n + i) + (lower ? 0 : 1);
    }
    for (int t = 0; t < num_triangles(); ++t) {
      const auto& tri = triangles[t];
      const Eigen::Vector2d& p0 = vertices[tri[0]];
      const Eigen::Vector2d& p1 = vertices[tri[1]];
      const Eigen::Vector2d& p2 = vertices[tri[2]];
      const double det = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
      const double l1 = ((x - p0).x() * (p2 - p0).y() - (x - p0).y() * (p2 - p0).x()) / det;
      const double l2 = ((p1 - p0).x() * (x - p0).y() - (p1 - p0).y() * (x - p0).x()) / det;
      const double tol = -1e-12;
      if (l1 >= tol && l2 >= tol && 1.0 - l1 - l2 >= tol) return t;
    }
    return -1;
  }

  void dump(std::ostream& os) const {
    os << "vertices " << num_vertices() << "\n";
    for (int v = 0; v < num_vertices(); ++v)
      os << v << " " << vertices[v].x() << " " << vertices[v].y() << "\n";
    os << "triangles " << num_triangles() << "\n";
    for (int t = 0; t < num_triangles(); ++t)
      os << t << " " << triangles[t][0] << " " << triangles[t][1] << " " << triangles[t][2] << "\n";
    os << "edges " << num_edges() << "\n";
    for (int e = 0; e < num_edges(); ++e)
      os << e << " " << edges[e].a << " " << edges[e].b << "\n";
    os << "boundary_edges " << num_boundary_edges() << "\n";
    for (int b = 0; b < num_boundary_edges(); ++b)
      os << boundary_edges[b] << " sign " << boundary_outward_sign[b] << "\n";
  }
};

/// Builds edge data, orientation and boundary information from raw
/// vertex/triangle arrays; rejects non-conforming input.
inline SpatialMesh make_spatial_mesh(std::vector<Eigen::Vector2d> vertices,
                                     std::vector<std::array<int, 3>> triangles) {
  SpatialMesh m;
  m.vertices = std::move(vertices);
  m.triangles = std::move(triangles);
  if (m.triangles.empty()) throw std::invalid_argument("make_spatial_mesh: empty mesh");

  for (auto& tri : m.triangles) {
    for (int v : tri)
      if (v < 0 || v >= m.num_vertices()) throw std::invalid_argument("make_spatial_mesh: vertex index");
    const Eigen::Vector2d e1 = m.vertices[tri[1]] - m.vertices[tri[0]];
    const Eigen::Vector2d e2 = m.vertices[tri[2]] - m.vertices[tri[0]];
    const double a2 = e1.x() * e2.y() - e1.y() * e2.x();
    if (a2 == 0.0) throw std::invalid_argument("make_spatial_mesh: degenerate triangle");
    if (a2 < 0.0) std::swap(tri[1], tri[2]);
  }

  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tri : m.triangles) {
    for (int i = 0; i < 3; ++i) {
      int a = tri[(i + 1) % 3], b = tri[(i + 2) % 3];
      if (a > b) std::swap(a, b);
      ++edge_count[{a, b}];
    }
  }
  std::map<std::pair<int, int>, int> edge_index;
  for (const auto& [key, count] : edge_count) {
    if (count > 2) throw std::invalid_argument("make_spatial_mesh: non-conforming edge");
    const int idx = static_cast<int>(m.edges.size());
    edge_index[key] = idx;
    SpatialMesh::Edge e;
    e.a = key.first;
    e.b = key.second;
    const Eigen::Vector2d d = m.vertices[e.b] - m.vertices[e.a];
    e.length = d.norm();
    e.normal = Eigen::Vector2d(d.y(), -d.x()) / e.length;
    m.edges.push_back(e);
  }

  m.triangle_edges.resize(m.triangles.size());
  m.triangle_edge_sign.resize(m.triangles.size());
  std::vector<int> adjacency(m.edges.size(), 0);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    for (int i = 0; i < 3; ++i) {
      int a = tri[(i + 1) % 3], b = tri[(i + 2) % 3];
      if (a > b) std::swap(a, b);
      const int e = edge_index.at({a, b});
      m.triangle_edges[t][i] = e;
      ++adjacency[e];
      const Eigen::Vector2d mid = 0.5 * (m.vertices[a] + m.vertices[b]);
      const Eigen::Vector2d opp = m.vertices[tri[i]];
      m.triangle_edge_sign[t][i] = (m.edges[e].normal.dot(mid - opp) > 0.0) ? 1.0 : -1.0;
    }
  }

  m.vertex_boundary_index.assign(m.vertices.size(), -1);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    for (int i = 0; i < 3; ++i) {
      const int e = m.triangle_edges[t][i];
      if (adjacency[e] == 1 &&
          std::find(m.boundary_edges.begin(), m.boundary_edges.end(), e) == m.boundary_edges.end()) {
        m.boundary_edges.push_back(e);
        m.boundary_outward_sign.push_back(m.triangle_edge_sign[t][i]);
      }
    }
  }
  // Deterministic ordering by global edge index.
  {
    std::vector<std::size_t> perm(m.boundary_edges.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(),
              [&](std::size_t l, std::size_t r) { return m.boundary_edges[l] < m.boundary_edges[r]; });
    std::vector<int> be(perm.size());
    std::vector<double> sg(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      be[i] = m.boundary_edges[perm[i]];
      sg[i] = m.boundary_outward_sign[perm[i]];
    }
    m.boundary_edges = std::move(be);
    m.boundary_outward_sign = std::move(sg);
  }
  for (int e : m.boundary_edges) {
    m.vertex_boundary_index[m.edges[e].a] = 0;
    m.vertex_boundary_index[m.edges[e].b] = 0;
  }
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.vertex_boundary_index[v] == 0) {
      m.vertex_boundary_index[v] = static_cast<int>(m.boundary_vertices.size());
      m.boundary_vertices.push_back(v);
    }
  }
  return m;
}

/// Structured unit-square mesh: n x n cells, each cut along the
/// northwest-southeast diagonal; triangles ordered lower then upper per cell.
inline SpatialMesh make_unit_square_spatial_mesh(int n) {
  if (n < 1) throw std::invalid_argument("make_unit_square_spatial_mesh: n >= 1 required");
  const double h = 1.0 / n;
  std::vector<Eigen::Vector2d> vertices;
  vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) vertices.emplace_back(i * h, j * h);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      // Diagonal runs from (i, j+1) down to (i+1, j).
      triangles.push_back({vid(i, j), vid(i + 1, j), vid(i, j + 1)});
      triangles.push_back({vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  SpatialMesh m = make_spatial_mesh(std::move(vertices), std::move(triangles));
  m.square_cells = n;
  return m;
}

struct TimePartition {
  std::vector<double> breakpoints;  // strictly increasing, first = 0

  int num_slabs() const { return static_cast<int>(breakpoints.size()) - 1; }
  double final_time() const { return breakpoints.back(); }
  double slab_start(int n) const { return breakpoints[n]; }
  double slab_end(int n) const { return breakpoints[n + 1]; }
  double slab_length(int n) const { return breakpoints[n + 1] - breakpoints[n]; }

  int locate(double t) const {
    if (t < breakpoints.front() - 1e-14 || t > breakpoints.back() + 1e-14) return -1;
    const int m = num_slabs();
    for (int n = 0; n < m; ++n)
      if (t <= breakpoints[n + 1] || n == m - 1) return n;
    return m - 1;
  }
};

inline TimePartition make_uniform_time_partition(double T, int slabs) {
  if (!(T > 0.0) || slabs < 1) throw std::invalid_argument("make_uniform_time_partition: bad input");
  TimePartition p;
  p.breakpoints.resize(slabs + 1);
  for (int i = 0; i <= slabs; ++i) p.breakpoints[i] = T * static_cast<double>(i) / slabs;
  return p;
}

/// Prismatic tensor mesh of Q = I x Omega.
struct SpaceTimeMesh {
  TimePartition time;
  SpatialMesh space;

  std::int64_t node_count() const {
    return static_cast<std::int64_t>(time.num_slabs() + 1) * space.num_vertices();
  }
  std::int64_t prism_count() const {
    return static_cast<std::int64_t>(time.num_slabs()) * space.num_triangles();
  }
  std::int64_t lateral_panel_count() const {
    return static_cast<std::int64_t>(time.num_slabs()) * space.num_boundary_edges();
  }
};

inline SpaceTimeMesh make_space_time_mesh(SpatialMesh space, TimePartition time) {
  for (std::size_t i = 0; i + 1 < time.breakpoints.size(); ++i)
    if (!(time.breakpoints[i] < time.breakpoints[i + 1]))
      throw std::invalid_argument("make_space_time_mesh: breakpoints not increasing");
  return SpaceTimeMesh{std::move(time), std::move(space)};
}

/// Uniform mesh of Q = (0,1)^3 at refinement level l: 2^l - 1 intervals per
/// spatial direction and in time, squares bisected northwest-southeast.
inline SpaceTimeMesh build_unit_square_mesh(int level) {
  if (level < 1) throw std::invalid_argument("build_unit_square_mesh: level >= 1 required");
  const int n = (1 << level) - 1;
  return SpaceTimeMesh{make_uniform_time_partition(1.0, n), make_unit_square_spatial_mesh(n)};
}

/// Space-time boundary panel J x e with outward geometry attached.
struct Panel {
  int slab = 0;    // time slab index
  int bedge = 0;   // position in space.boundary_edges
  double t0 = 0.0, t1 = 0.0;
  Eigen::Vector2d p0, p1;   // edge endpoints (lower, higher vertex index)
  Eigen::Vector2d normal;   // outward unit normal
  double length = 0.0;
};

/// Panels of Sigma = I x Gamma in deterministic time-major order.
inline std::vector<Panel> lateral_panels(const SpaceTimeMesh& mesh) {
  std::vector<Panel> panels;
  const int slabs = mesh.time.num_slabs();
  const int nb = mesh.space.num_boundary_edges();
  panels.reserve(static_cast<std::size_t>(slabs) * nb);
  for (int m = 0; m < slabs; ++m) {
    for (int b = 0; b < nb; ++b) {
      const auto& e = mesh.space.edges[mesh.space.boundary_edges[b]];
      Panel p;
      p.slab = m;
      p.bedge = b;
      p.t0 = mesh.time.slab_start(m);
      p.t1 = mesh.time.slab_end(m);
      p.p0 = mesh.space.vertices[e.a];
      p.p1 = mesh.space.vertices[e.b];
      p.normal = mesh.space.boundary_outward_sign[b] * e.normal;
      p.length = e.length;
      panels.push_back(p);
    }
  }
  return panels;
}

}  // namespace stheat
