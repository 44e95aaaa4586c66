// SPDX-License-Identifier: Apache-2.0
#include "polyspec/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace polyspec {

namespace {

constexpr Scalar kRelEps = 1e-14;

std::string point_str(const Vec2& p) {
  std::ostringstream os;
  os << "(" << p.x() << ", " << p.y() << ")";
  return os.str();
}

Scalar coord_scale(const std::vector<Vec2>& pts) {
  Scalar s = 0.0;
  for (const auto& p : pts) s = std::max(s, p.cwiseAbs().maxCoeff());
  return std::max(s, Scalar(1e-300));
}

}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TooFewVertices: return "TooFewVertices";
    case ErrorCode::SelfIntersecting: return "SelfIntersecting";
    case ErrorCode::DuplicateVertex: return "DuplicateVertex";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::MeshingFailed: return "MeshingFailed";
    case ErrorCode::NotStructuralMesh: return "NotStructuralMesh";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::PathDegenerate: return "PathDegenerate";
    case ErrorCode::VertexCountMismatch: return "VertexCountMismatch";
    case ErrorCode::DegeneratesAlongPath: return "DegeneratesAlongPath";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::KappaOutOfRange: return "KappaOutOfRange";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::TooFewEigenvalues: return "TooFewEigenvalues";
    case ErrorCode::ResidualsTooLarge: return "ResidualsTooLarge";
    case ErrorCode::NoMinimumInBracket: return "NoMinimumInBracket";
    case ErrorCode::SamplingFailed: return "SamplingFailed";
    case ErrorCode::InvalidRational: return "InvalidRational";
    case ErrorCode::InvalidIndices: return "InvalidIndices";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

Scalar orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

int orient_sign(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Scalar det = orient2d(a, b, c);
  const Scalar scale = (b - a).cwiseAbs().maxCoeff() * (c - a).cwiseAbs().maxCoeff() +
                       (b - a).cwiseAbs().maxCoeff() * (c - b).cwiseAbs().maxCoeff();
  const Scalar eps = kRelEps * std::max(scale, Scalar(1e-300));
  if (det > eps) return 1;
  if (det < -eps) return -1;
  return 0;
}

namespace {

/// Whether q lies on the closed segment [a, b], assuming collinearity.
bool on_segment_collinear(const Vec2& a, const Vec2& b, const Vec2& q) {
  const Scalar eps =
      kRelEps * std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), Scalar(1e-300)});
  return std::min(a.x(), b.x()) - eps <= q.x() && q.x() <= std::max(a.x(), b.x()) + eps &&
         std::min(a.y(), b.y()) - eps <= q.y() && q.y() <= std::max(a.y(), b.y()) + eps;
}

}  // namespace

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const int d1 = orient_sign(c, d, a);
  const int d2 = orient_sign(c, d, b);
  const int d3 = orient_sign(a, b, c);
  const int d4 = orient_sign(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_segment_collinear(c, d, a)) return true;
  if (d2 == 0 && on_segment_collinear(c, d, b)) return true;
  if (d3 == 0 && on_segment_collinear(a, b, c)) return true;
  if (d4 == 0 && on_segment_collinear(a, b, d)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Polygon
// ---------------------------------------------------------------------------

Scalar signed_area(const std::vector<Vec2>& pts) {
  Scalar twice = 0.0;
  const int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % n];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

Scalar Polygon::area() const { return signed_area(vertices); }

Scalar Polygon::max_radius() const {
  Scalar r = 0.0;
  for (const auto& v : vertices) r = std::max(r, v.norm());
  return r;
}

Polygon validate_polygon(const std::vector<Vec2>& points) {
  const int n = static_cast<int>(points.size());
  require(n >= 3, ErrorCode::TooFewVertices,
          "polygon needs at least 3 vertices, got " + std::to_string(n));

  const Scalar scale = coord_scale(points);
  for (int i = 0; i < n; ++i) {
    const Vec2& p = points[i];
    require(p.allFinite(), ErrorCode::InvalidArgument,
            "vertex " + std::to_string(i) + " is not finite");
    const Vec2& q = points[(i + 1) % n];
    require((p - q).cwiseAbs().maxCoeff() > kRelEps * scale, ErrorCode::DuplicateVertex,
            "vertices " + std::to_string(i) + " and " + std::to_string((i + 1) % n) +
                " coincide at " + point_str(p));
  }

  std::vector<Vec2> pts = points;
  if (signed_area(pts) < 0.0) std::reverse(pts.begin(), pts.end());

  // Folded-back ("spike") adjacent edges: collinear with the second edge
  // heading back toward the first. A false vertex continues forward instead.
  for (int i = 0; i < n; ++i) {
    const Vec2& a = pts[(i + n - 1) % n];
    const Vec2& b = pts[i];
    const Vec2& c = pts[(i + 1) % n];
    if (orient_sign(a, b, c) == 0 && (a - b).dot(c - b) > 0.0)
      raise(ErrorCode::SelfIntersecting,
            "adjacent edges fold back at vertex " + std::to_string(i));
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]))
        raise(ErrorCode::SelfIntersecting,
              "edge " + std::to_string(i) + " intersects edge " + std::to_string(j));
    }
  }

  Polygon poly{std::move(pts)};
  require(poly.area() > kRelEps * scale * scale, ErrorCode::SelfIntersecting,
          "polygon has vanishing area");
  return poly;
}

Polygon translated(const Polygon& p, const Vec2& shift) {
  Polygon out = p;
  for (auto& v : out.vertices) v += shift;
  return out;
}

Polygon rotated(const Polygon& p, Scalar angle) {
  const Mat2 r{{std::cos(angle), -std::sin(angle)}, {std::sin(angle), std::cos(angle)}};
  Polygon out = p;
  for (auto& v : out.vertices) v = r * v;
  return out;
}

Vec2 centroid(const Polygon& p) {
  // Area centroid of the polygonal region.
  Vec2 c = Vec2::Zero();
  Scalar twice_area = 0.0;
  const int n = p.n();
  for (int i = 0; i < n; ++i) {
    const Vec2& a = p.vertices[i];
    const Vec2& b = p.vertices[(i + 1) % n];
    const Scalar w = a.x() * b.y() - b.x() * a.y();
    twice_area += w;
    c += w * (a + b);
  }
  return c / (3.0 * twice_area);
}

Scalar interior_angle(const Polygon& p, int i) {
  const Vec2& prev = p.vertex(i - 1);
  const Vec2& cur = p.vertex(i);
  const Vec2& next = p.vertex(i + 1);
  const Vec2 u = prev - cur;
  const Vec2 v = next - cur;
  Scalar ang = std::atan2(u.x() * v.y() - u.y() * v.x(), u.dot(v));
  // CCW polygon: the interior is swept from edge (cur,next) to (cur,prev).
  ang = std::atan2(v.x() * u.y() - v.y() * u.x(), v.dot(u));
  if (ang < 0.0) ang += 2.0 * M_PI;
  return ang;
}

// ---------------------------------------------------------------------------
// TriMesh basics
// ---------------------------------------------------------------------------

namespace {

uint64_t edge_key(int a, int b) {
  const uint32_t lo = static_cast<uint32_t>(std::min(a, b));
  const uint32_t hi = static_cast<uint32_t>(std::max(a, b));
  return (static_cast<uint64_t>(lo) << 32) | hi;
}

}  // namespace

Scalar TriMesh::triangle_area(int t) const {
  const auto& tr = triangles[t];
  return 0.5 * orient2d(points[tr[0]], points[tr[1]], points[tr[2]]);
}

Scalar TriMesh::max_edge_length() const {
  Scalar m = 0.0;
  for (const auto& tr : triangles)
    for (int e = 0; e < 3; ++e)
      m = std::max(m, (points[tr[e]] - points[tr[(e + 1) % 3]]).norm());
  return m;
}

Scalar TriMesh::min_angle() const {
  Scalar best = M_PI;
  for (const auto& tr : triangles) {
    for (int e = 0; e < 3; ++e) {
      const Vec2 u = points[tr[(e + 1) % 3]] - points[tr[e]];
      const Vec2 v = points[tr[(e + 2) % 3]] - points[tr[e]];
      const Scalar ang =
          std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
      best = std::min(best, ang);
    }
  }
  return best;
}

std::vector<std::pair<int, int>> boundary_edges(const TriMesh& m) {
  std::map<uint64_t, int> count;
  for (const auto& tr : m.triangles)
    for (int e = 0; e < 3; ++e) count[edge_key(tr[e], tr[(e + 1) % 3])]++;
  std::vector<std::pair<int, int>> out;
  for (const auto& [key, c] : count)
    if (c == 1) out.emplace_back(static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu));
  return out;
}

void check_mesh(const TriMesh& m) {
  const int nv = m.n_points();
  const int nf = m.n_triangles();
  require(nv >= 3 && nf >= 1, ErrorCode::DegenerateGeometry, "mesh too small");
  require(static_cast<int>(m.boundary.size()) == nv && static_cast<int>(m.attr.size()) == nv,
          ErrorCode::DegenerateGeometry, "mesh point annotations out of sync");

  const Scalar scale = coord_scale(m.points);
  Scalar area_sum = 0.0;
  for (int t = 0; t < nf; ++t) {
    const auto& tr = m.triangles[t];
    for (int v : tr)
      require(v >= 0 && v < nv, ErrorCode::DegenerateGeometry, "triangle index out of range");
    const Scalar a = m.triangle_area(t);
    require(a > kRelEps * scale * scale, ErrorCode::DegenerateGeometry,
            "triangle " + std::to_string(t) + " is not positively oriented");
    area_sum += a;
  }

  // Conformity bookkeeping: every undirected edge in at most two triangles,
  // every directed edge unique (consistent orientation).
  std::map<uint64_t, int> undirected;
  std::set<std::pair<int, int>> directed;
  for (const auto& tr : m.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = tr[e], b = tr[(e + 1) % 3];
      require(directed.insert({a, b}).second, ErrorCode::DegenerateGeometry,
              "directed edge repeated: non-conforming mesh");
      undirected[edge_key(a, b)]++;
    }
  }
  int ne = 0;
  int n_bdry_edges = 0;
  for (const auto& [key, c] : undirected) {
    require(c <= 2, ErrorCode::DegenerateGeometry, "edge shared by more than two triangles");
    ++ne;
    if (c == 1) ++n_bdry_edges;
  }
  require(nv - ne + nf == 1, ErrorCode::DegenerateGeometry,
          "Euler relation V - E + F = 1 violated");

  // Boundary flags match edge incidence.
  std::vector<bool> on_bdry(nv, false);
  for (const auto& [key, c] : undirected) {
    if (c == 1) {
      on_bdry[static_cast<int>(key >> 32)] = true;
      on_bdry[static_cast<int>(key & 0xffffffffu)] = true;
    }
  }
  for (int i = 0; i < nv; ++i)
    require(on_bdry[i] == m.boundary[i], ErrorCode::DegenerateGeometry,
            "boundary flag mismatch at point " + std::to_string(i));

  if (m.parent) {
    const Polygon& p = *m.parent;
    require(nv >= p.n(), ErrorCode::DegenerateGeometry, "fewer mesh points than polygon vertices");
    for (int i = 0; i < p.n(); ++i)
      require((m.points[i] - p.vertices[i]).norm() <= 1e-12 * scale,
              ErrorCode::DegenerateGeometry,
              "mesh point " + std::to_string(i) + " does not coincide with polygon vertex");
    const Scalar pa = p.area();
    require(std::abs(area_sum - pa) <= 1e-12 * std::max(pa, Scalar(1)) * 10,
            ErrorCode::DegenerateGeometry, "triangle areas do not sum to the polygon area");
    // Boundary attribution consistency.
    for (int i = 0; i < nv; ++i) {
      if (m.attr[i].interior()) {
        require(!m.boundary[i], ErrorCode::DegenerateGeometry,
                "boundary point lacks host-edge attribution");
        continue;
      }
      require(m.boundary[i], ErrorCode::DegenerateGeometry,
              "interior point carries host-edge attribution");
      const Vec2 host = (1.0 - m.attr[i].frac) * p.vertex(m.attr[i].edge) +
                        m.attr[i].frac * p.vertex(m.attr[i].edge + 1);
      require((m.points[i] - host).norm() <= 1e-10 * scale, ErrorCode::DegenerateGeometry,
              "boundary point " + std::to_string(i) + " off its host edge");
    }
  }

  // Hanging-node sweep (quadratic; only for small meshes).
  if (nv <= 3000) {
    for (const auto& [key, c] : undirected) {
      const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
      const Vec2& pa = m.points[a];
      const Vec2& pb = m.points[b];
      for (int q = 0; q < nv; ++q) {
        if (q == a || q == b) continue;
        if (orient_sign(pa, pb, m.points[q]) != 0) continue;
        const Vec2 d = pb - pa;
        const Scalar s = d.dot(m.points[q] - pa) / d.squaredNorm();
        require(s <= 1e-12 || s >= 1.0 - 1e-12, ErrorCode::DegenerateGeometry,
                "point " + std::to_string(q) + " hangs on an edge");
      }
    }
  }
}

bool is_structural(const TriMesh& m) {
  if (!m.parent) return false;
  if (m.n_points() != m.parent->n()) return false;
  if (m.n_triangles() != m.parent->n() - 2) return false;
  for (bool b : m.boundary)
    if (!b) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Ear clipping
// ---------------------------------------------------------------------------

namespace {

/// q inside or on the closed CCW triangle (a, b, c)?
bool point_in_closed_triangle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& q) {
  return orient_sign(a, b, q) >= 0 && orient_sign(b, c, q) >= 0 && orient_sign(c, a, q) >= 0;
}

}  // namespace

TriMesh triangulate_structural(const Polygon& p) {
  const int n = p.n();
  TriMesh m;
  m.points = p.vertices;
  m.boundary.assign(n, true);
  m.attr.resize(n);
  for (int i = 0; i < n; ++i) m.attr[i] = BoundaryAttr{i, 0.0};
  m.parent = p;
  m.level = 0;

  std::vector<int> ring(n);
  std::iota(ring.begin(), ring.end(), 0);

  int start = 0;
  while (static_cast<int>(ring.size()) > 3) {
    const int r = static_cast<int>(ring.size());
    bool clipped = false;
    for (int s = 0; s < r && !clipped; ++s) {
      const int idx = (start + s) % r;
      const int ia = ring[(idx + r - 1) % r];
      const int ib = ring[idx];
      const int ic = ring[(idx + 1) % r];
      const Vec2& a = m.points[ia];
      const Vec2& b = m.points[ib];
      const Vec2& c = m.points[ic];
      if (orient_sign(a, b, c) <= 0) continue;  // reflex or false vertex
      bool blocked = false;
      for (int q : ring) {
        if (q == ia || q == ib || q == ic) continue;
        if (point_in_closed_triangle(a, b, c, m.points[q])) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      m.triangles.push_back({ia, ib, ic});
      ring.erase(ring.begin() + idx);
      start = idx % static_cast<int>(ring.size());
      clipped = true;
    }
    require(clipped, ErrorCode::DegenerateGeometry,
            "no ear found at vertex " + std::to_string(ring[start]) +
                " (numerically degenerate collinearity)");
  }
  require(orient_sign(m.points[ring[0]], m.points[ring[1]], m.points[ring[2]]) > 0,
          ErrorCode::DegenerateGeometry, "final triangle degenerate");
  m.triangles.push_back({ring[0], ring[1], ring[2]});

  check_mesh(m);
  return m;
}

// ---------------------------------------------------------------------------
// Refinement
// ---------------------------------------------------------------------------

namespace {

/// Candidate (edge, frac) attributions of a boundary point; a polygon vertex
/// is both the start of its edge and the end of the previous one.
void attr_candidates(const BoundaryAttr& a, int n, std::array<std::pair<int, Scalar>, 2>& out,
                     int& count) {
  count = 0;
  if (a.interior()) return;
  out[count++] = {a.edge, a.frac};
  if (a.frac == 0.0) out[count++] = {(a.edge + n - 1) % n, 1.0};
}

BoundaryAttr midpoint_attr(const BoundaryAttr& a, const BoundaryAttr& b, int n) {
  std::array<std::pair<int, Scalar>, 2> ca{}, cb{};
  int na = 0, nb = 0;
  attr_candidates(a, n, ca, na);
  attr_candidates(b, n, cb, nb);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      if (ca[i].first == cb[j].first)
        return BoundaryAttr{ca[i].first, 0.5 * (ca[i].second + cb[j].second)};
  raise(ErrorCode::DegenerateGeometry, "boundary edge spans two polygon edges");
}

TriMesh refine_once(const TriMesh& m) {
  TriMesh out;
  out.points = m.points;
  out.boundary = m.boundary;
  out.attr = m.attr;
  out.parent = m.parent;
  out.level = m.level + 1;

  std::map<uint64_t, int> incidence;
  for (const auto& tr : m.triangles)
    for (int e = 0; e < 3; ++e) incidence[edge_key(tr[e], tr[(e + 1) % 3])]++;

  const int n_poly = m.parent ? m.parent->n() : 0;
  std::map<uint64_t, int> midpoint;
  auto mid_id = [&](int a, int b) {
    const uint64_t key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int id = out.n_points();
    out.points.push_back(0.5 * (m.points[a] + m.points[b]));
    const bool bdry = incidence.at(key) == 1;
    out.boundary.push_back(bdry);
    if (bdry && m.parent)
      out.attr.push_back(midpoint_attr(m.attr[a], m.attr[b], n_poly));
    else
      out.attr.push_back(BoundaryAttr{});
    midpoint.emplace(key, id);
    return id;
  };

  for (const auto& tr : m.triangles) {
    const int a = tr[0], b = tr[1], c = tr[2];
    const int ab = mid_id(a, b), bc = mid_id(b, c), ca = mid_id(c, a);
    out.triangles.push_back({a, ab, ca});
    out.triangles.push_back({b, bc, ab});
    out.triangles.push_back({c, ca, bc});
    out.triangles.push_back({ab, bc, ca});
  }
  return out;
}

}  // namespace

TriMesh refine(const TriMesh& m, int levels) {
  require(levels >= 0, ErrorCode::InvalidArgument, "refinement levels must be >= 0");
  TriMesh cur = m;
  for (int l = 0; l < levels; ++l) cur = refine_once(cur);
  if (levels > 0 && cur.n_points() <= 20000) check_mesh(cur);
  return cur;
}

TriMesh build_mesh(const Polygon& p, const MeshOptions& opts) {
  TriMesh base = opts.steiner_h > 0.0 ? triangulate_steiner(p, opts.steiner_h)
                                      : triangulate_structural(p);
  return refine(base, opts.refine_levels);
}

// ---------------------------------------------------------------------------
// Dual tree
// ---------------------------------------------------------------------------

std::vector<std::vector<int>> dual_adjacency(const TriMesh& m) {
  std::map<uint64_t, std::vector<int>> by_edge;
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    for (int e = 0; e < 3; ++e) by_edge[edge_key(tr[e], tr[(e + 1) % 3])].push_back(t);
  }
  std::vector<std::vector<int>> adj(m.n_triangles());
  for (const auto& [key, ts] : by_edge) {
    if (ts.size() == 2) {
      adj[ts[0]].push_back(ts[1]);
      adj[ts[1]].push_back(ts[0]);
    }
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

DualEnd dual_tree_end(const TriMesh& m) {
  require(is_structural(m), ErrorCode::NotStructuralMesh,
          "dual_tree_end requires a structural (diagonals-only) mesh");
  const int nf = m.n_triangles();
  if (nf == 1) return DualEnd{0, m.triangles[0][0], true};

  const auto adj = dual_adjacency(m);
  int n_edges = 0;
  for (const auto& a : adj) n_edges += static_cast<int>(a.size());
  n_edges /= 2;
  require(n_edges == nf - 1, ErrorCode::DegenerateGeometry, "dual graph is not a tree");

  int leaf = -1;
  for (int t = 0; t < nf; ++t) {
    if (adj[t].size() == 1) {
      leaf = t;
      break;
    }
  }
  require(leaf >= 0, ErrorCode::DegenerateGeometry, "dual tree has no leaf");

  // The one shared edge is the diagonal; the opposite vertex is flanked by
  // two boundary edges of the polygon.
  const auto& tr = m.triangles[leaf];
  const auto& other = m.triangles[adj[leaf][0]];
  int vertex = -1;
  for (int e = 0; e < 3; ++e) {
    const int v = tr[e];
    if (std::find(other.begin(), other.end(), v) == other.end()) {
      vertex = v;
      break;
    }
  }
  require(vertex >= 0, ErrorCode::DegenerateGeometry, "leaf triangle shares all vertices");

  // Both sides of the leaf adjacent to `vertex` must be boundary edges.
  std::set<uint64_t> bedges;
  for (const auto& [a, b] : boundary_edges(m)) bedges.insert(edge_key(a, b));
  for (int e = 0; e < 3; ++e) {
    const int a = tr[e], b = tr[(e + 1) % 3];
    if (a == vertex || b == vertex)
      require(bedges.count(edge_key(a, b)) == 1, ErrorCode::DegenerateGeometry,
              "leaf vertex side is not a polygon side");
  }
  return DualEnd{leaf, vertex, false};
}

// ---------------------------------------------------------------------------
// Deformation paths
// ---------------------------------------------------------------------------

Mat2 DeformationPath::jacobian(int tri, Scalar t) const {
  const auto& tr = source.triangles[tri];
  const Vec2& x0 = source.points[tr[0]];
  const Vec2& x1 = source.points[tr[1]];
  const Vec2& x2 = source.points[tr[2]];
  const Vec2 y0 = point_at(tr[0], t);
  const Vec2 y1 = point_at(tr[1], t);
  const Vec2 y2 = point_at(tr[2], t);
  Mat2 a;
  a.col(0) = x1 - x0;
  a.col(1) = x2 - x0;
  Mat2 b;
  b.col(0) = y1 - y0;
  b.col(1) = y2 - y0;
  return b * a.inverse();
}

PathCheck check_path_orientation(const DeformationPath& path) {
  const TriMesh& m = path.source;
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    Mat2 a;
    a.col(0) = m.points[tr[1]] - m.points[tr[0]];
    a.col(1) = m.points[tr[2]] - m.points[tr[0]];
    Mat2 b;
    b.col(0) = path.target[tr[1]] - path.target[tr[0]];
    b.col(1) = path.target[tr[2]] - path.target[tr[0]];
    const Mat2 d = b - a;

    // det((1-s) A + s B) = c0 + c1 s + c2 s^2
    const Scalar c0 = a.determinant();
    const Scalar c2 = d.determinant();
    const Scalar c1 = a(0, 0) * d(1, 1) + d(0, 0) * a(1, 1) - a(0, 1) * d(1, 0) - d(0, 1) * a(1, 0);
    const Scalar scale =
        std::max({std::abs(c0), std::abs(c0 + c1 + c2), std::abs(c1), std::abs(c2), Scalar(1e-300)});
    const Scalar eps = kRelEps * scale;

    auto q = [&](Scalar s) { return c0 + s * (c1 + s * c2); };

    Scalar qmin = std::min(q(0.0), q(1.0));
    Scalar smin = q(0.0) <= q(1.0) ? 0.0 : 1.0;
    if (std::abs(c2) > eps) {
      const Scalar sv = -c1 / (2.0 * c2);
      if (c2 > 0 && sv > 0.0 && sv < 1.0 && q(sv) < qmin) {
        qmin = q(sv);
        smin = sv;
      }
    }
    if (qmin <= eps) {
      // Report the sub-interval of [0,1] where the determinant is <= 0.
      Scalar lo = smin, hi = smin;
      if (std::abs(c2) > eps) {
        const Scalar disc = c1 * c1 - 4.0 * c2 * c0;
        if (disc >= 0.0) {
          const Scalar r = std::sqrt(disc);
          Scalar r0 = (-c1 - r) / (2.0 * c2);
          Scalar r1 = (-c1 + r) / (2.0 * c2);
          if (r0 > r1) std::swap(r0, r1);
          if (c2 > 0) {
            lo = std::clamp(r0, Scalar(0), Scalar(1));
            hi = std::clamp(r1, Scalar(0), Scalar(1));
          } else {
            lo = q(0.0) <= eps ? 0.0 : std::clamp(r1, Scalar(0), Scalar(1));
            hi = q(1.0) <= eps ? 1.0 : std::clamp(r0, Scalar(0), Scalar(1));
          }
        }
      } else if (std::abs(c1) > eps) {
        const Scalar root = std::clamp(-c0 / c1, Scalar(0), Scalar(1));
        if (c1 < 0) {
          lo = root;
          hi = 1.0;
        } else {
          lo = 0.0;
          hi = root;
        }
      }
      return PathCheck{false, t, lo, hi};
    }
  }
  return PathCheck{};
}

DeformationPath pl_family(const Polygon& p, const Polygon& q, const TriMesh& mesh_on_p) {
  require(p.n() == q.n(), ErrorCode::VertexCountMismatch,
          "polygons have " + std::to_string(p.n()) + " and " + std::to_string(q.n()) +
              " vertices");
  require(mesh_on_p.parent.has_value(), ErrorCode::InvalidArgument, "mesh has no parent polygon");
  const Scalar scale = coord_scale(p.vertices);
  for (int i = 0; i < p.n(); ++i)
    require((mesh_on_p.parent->vertices[i] - p.vertices[i]).norm() <= 1e-12 * scale,
            ErrorCode::InvalidArgument, "mesh does not triangulate P");

  std::vector<Vec2> target(mesh_on_p.n_points());
  for (int i = 0; i < mesh_on_p.n_points(); ++i) {
    const BoundaryAttr& a = mesh_on_p.attr[i];
    if (a.interior())
      target[i] = mesh_on_p.points[i];  // interior Steiner points stay fixed
    else
      target[i] = (1.0 - a.frac) * q.vertex(a.edge) + a.frac * q.vertex(a.edge + 1);
  }

  DeformationPath path{mesh_on_p, std::move(target)};
  const PathCheck pc = check_path_orientation(path);
  if (!pc.valid) {
    std::ostringstream os;
    os << "triangle " << pc.tri << " loses orientation for t in [" << pc.t_lo << ", " << pc.t_hi
       << "]; Q lies outside the valid neighborhood of P for this mesh";
    raise(ErrorCode::DegeneratesAlongPath, os.str());
  }
  return path;
}

TriMesh map_mesh(const DeformationPath& path, Scalar t) {
  require(t >= 0.0 && t <= 1.0, ErrorCode::ParameterOutOfRange,
          "t must lie in [0,1], got " + std::to_string(t));
  TriMesh out = path.source;
  for (int i = 0; i < out.n_points(); ++i) out.points[i] = path.point_at(i, t);
  if (path.source.parent) {
    const int n = path.source.parent->n();
    std::vector<Vec2> verts(out.points.begin(), out.points.begin() + n);
    out.parent = validate_polygon(verts);
  }
  for (int tr = 0; tr < out.n_triangles(); ++tr)
    require(out.triangle_area(tr) > 0.0, ErrorCode::PathDegenerate,
            "mapped triangle " + std::to_string(tr) + " is degenerate at t = " + std::to_string(t));
  return out;
}

DeformationPath refine_path(const DeformationPath& path, int levels) {
  require(levels >= 0, ErrorCode::InvalidArgument, "refinement levels must be >= 0");
  if (levels == 0) return path;
  TriMesh fine_source = refine(path.source, levels);
  TriMesh target_mesh = map_mesh(path, 1.0);
  TriMesh fine_target = refine(target_mesh, levels);
  return DeformationPath{std::move(fine_source), std::move(fine_target.points)};
}

std::pair<DeformationPath, Polygon> delete_vertex_path(const Polygon& p) {
  require(p.n() >= 4, ErrorCode::TooSmall,
          "vertex deletion needs n >= 4, got n = " + std::to_string(p.n()));
  const TriMesh structural = triangulate_structural(p);
  const DualEnd end = dual_tree_end(structural);

  const auto& tr = structural.triangles[end.tri];
  int a = -1, b = -1;
  for (int e = 0; e < 3; ++e) {
    if (tr[e] == end.vertex) {
      a = tr[(e + 1) % 3];
      b = tr[(e + 2) % 3];
      break;
    }
  }
  const Vec2 mid = 0.5 * (p.vertices[a] + p.vertices[b]);

  std::vector<Vec2> endpoint_vertices = p.vertices;
  endpoint_vertices[end.vertex] = mid;
  Polygon endpoint;
  try {
    endpoint = validate_polygon(endpoint_vertices);
  } catch (const Error& e) {
    raise(ErrorCode::PathDegenerate,
          std::string("endpoint polygon invalid (internal error): ") + e.what());
  }
  // validate_polygon must not have reversed the order (area stayed positive).
  require((endpoint.vertices[0] - endpoint_vertices[0]).norm() == 0.0, ErrorCode::PathDegenerate,
          "endpoint orientation flipped (internal error)");

  // Triangulate the endpoint region (where the moved vertex is a false
  // vertex); all its triangles have positive area with the vertex at m, and
  // areas are linear in t, so positivity at both ends gives positivity on
  // [0,1].
  TriMesh end_mesh = triangulate_structural(endpoint);
  TriMesh source_mesh = end_mesh;
  source_mesh.points[end.vertex] = p.vertices[end.vertex];
  source_mesh.parent = p;
  try {
    check_mesh(source_mesh);
  } catch (const Error& e) {
    raise(ErrorCode::PathDegenerate,
          std::string("endpoint triangulation invalid at t = 0 (internal error): ") + e.what());
  }

  DeformationPath path{std::move(source_mesh), std::move(end_mesh.points)};
  const PathCheck pc = check_path_orientation(path);
  require(pc.valid, ErrorCode::PathDegenerate,
          "orientation lost along the vertex-deletion path (internal error)");
  return {std::move(path), std::move(endpoint)};
}

Scalar bilipschitz_constant(const DeformationPath& path, int t_samples) {
  require(t_samples >= 2, ErrorCode::InvalidArgument, "need at least 2 samples");
  Scalar c = 1.0;
  for (int tri = 0; tri < path.source.n_triangles(); ++tri) {
    for (int s = 0; s < t_samples; ++s) {
      const Scalar t = static_cast<Scalar>(s) / (t_samples - 1);
      const Mat2 j = path.jacobian(tri, t);
      const Eigen::JacobiSVD<Mat2> svd(j);
      const Scalar smin = svd.singularValues()(1);
      const Scalar smax = svd.singularValues()(0);
      c = std::min({c, smin, 1.0 / smax});
    }
  }
  return c;
}

}  // namespace polyspec
