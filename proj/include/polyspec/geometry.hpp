// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "polyspec/error.hpp"

namespace polyspec {

using Scalar = double;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// ---------------------------------------------------------------------------
// Orientation predicates.
//
// Signs are decided by the exact floating-point determinant with a relative
// epsilon fallback (1e-14 of the coordinate scale) for near-degenerate input.
// ---------------------------------------------------------------------------

/// Twice the signed area of triangle (a, b, c); positive for CCW.
Scalar orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

/// Sign of orient2d with the relative-epsilon collinearity band: -1, 0, +1.
int orient_sign(const Vec2& a, const Vec2& b, const Vec2& c);

/// Whether closed segments [a,b] and [c,d] share at least one point
/// (proper crossing, endpoint touch, or collinear overlap).
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

// ---------------------------------------------------------------------------
// Polygon
// ---------------------------------------------------------------------------

/// Simple closed polygon, vertices in counterclockwise order.
///
/// Collinear triples of consecutive vertices are permitted ("false" vertices:
/// the boundary is locally straight but the vertex is still labeled).
struct Polygon {
  std::vector<Vec2> vertices;

  int n() const { return static_cast<int>(vertices.size()); }
  const Vec2& vertex(int i) const {
    const int m = n();
    return vertices[((i % m) + m) % m];
  }
  Scalar area() const;
  /// Largest |p| over the vertices: the radius of the smallest origin-centered
  /// disc containing the polygon.
  Scalar max_radius() const;
};

Scalar signed_area(const std::vector<Vec2>& pts);

/// Validates a vertex list as a simple closed polygon and normalizes it to
/// counterclockwise orientation. False vertices are accepted and preserved.
///
/// Throws TooFewVertices, DuplicateVertex, or SelfIntersecting (the message
/// names the offending edge pair).
Polygon validate_polygon(const std::vector<Vec2>& points);

Polygon translated(const Polygon& p, const Vec2& shift);
Polygon rotated(const Polygon& p, Scalar angle);  // about the origin
Vec2 centroid(const Polygon& p);

/// Interior angle at vertex i, in radians (reflex angles exceed pi).
Scalar interior_angle(const Polygon& p, int i);

// ---------------------------------------------------------------------------
// TriMesh
// ---------------------------------------------------------------------------

/// Host-edge parametrization of a boundary mesh point: point = (1-frac)*v[e] +
/// frac*v[e+1] on polygon edge e. Interior points have edge == -1. Polygon
/// vertex i carries (i, 0).
struct BoundaryAttr {
  int edge = -1;
  Scalar frac = 0.0;
  bool interior() const { return edge < 0; }
};

/// Conforming triangulation of a polygon. All triangles positively oriented.
/// When `parent` is set, the first parent->n() points are the polygon
/// vertices, in order.
struct TriMesh {
  std::vector<Vec2> points;
  std::vector<std::array<int, 3>> triangles;
  std::vector<bool> boundary;
  std::vector<BoundaryAttr> attr;
  std::optional<Polygon> parent;
  int level = 0;

  int n_points() const { return static_cast<int>(points.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  Scalar triangle_area(int t) const;
  Scalar max_edge_length() const;
  /// Smallest triangle angle in radians.
  Scalar min_angle() const;
};

/// Undirected mesh edges incident to exactly one triangle.
std::vector<std::pair<int, int>> boundary_edges(const TriMesh& m);

/// Checks the TriMesh invariants (orientation, conformity, Euler relation,
/// area sum against the parent polygon, boundary attribution); throws
/// DegenerateGeometry on violation. Quadratic-cost conformity checks are
/// skipped above a size threshold.
void check_mesh(const TriMesh& m);

/// Level-0 diagonals-only mesh: points are exactly the polygon vertices.
bool is_structural(const TriMesh& m);

/// Ear-clipping triangulation with vertices exactly the polygon vertices;
/// n - 2 triangles, dual graph a tree.
TriMesh triangulate_structural(const Polygon& p);

/// Quality mesh by constrained-Delaunay refinement: boundary points on the
/// polygon boundary (vertices included), max edge <= target_h, and minimum
/// angle >= min(20 deg, smallest interior angle of the polygon). Triangles
/// touching a polygon corner sharper than 40 deg are exempt from the angle
/// floor (no triangulation can beat the corner angle itself).
TriMesh triangulate_steiner(const Polygon& p, Scalar target_h);

/// Uniform midpoint refinement: each level replaces every triangle by 4.
/// Points of the input mesh are retained with their indices.
TriMesh refine(const TriMesh& m, int levels);

/// Convenience: structural mesh (steiner_h <= 0) or Steiner mesh, refined.
struct MeshOptions {
  Scalar steiner_h = 0.0;
  int refine_levels = 3;
};
TriMesh build_mesh(const Polygon& p, const MeshOptions& opts);

/// Triangle adjacency across shared edges (the dual graph).
std::vector<std::vector<int>> dual_adjacency(const TriMesh& m);

struct DualEnd {
  int tri = -1;
  int vertex = -1;
  /// n == 3: the dual tree has a single node; `vertex` is then an arbitrary
  /// corner rather than one flanked by two boundary edges of a leaf.
  bool single_triangle = false;
};

/// Leaf of the dual tree (smallest triangle index when several exist) and the
/// vertex of that triangle whose two adjacent sides are boundary edges.
DualEnd dual_tree_end(const TriMesh& m);

// ---------------------------------------------------------------------------
// DeformationPath
// ---------------------------------------------------------------------------

/// One-parameter family of piecewise-linear homeomorphisms
///   f_t(x) = (1 - t) x + t f(x),  t in [0, 1],
/// determined by a mesh on the source polygon and per-point target positions.
/// f_0 is the identity; on each triangle f_t is affine.
struct DeformationPath {
  TriMesh source;
  std::vector<Vec2> target;

  Vec2 point_at(int i, Scalar t) const {
    return (1.0 - t) * source.points[i] + t * target[i];
  }
  /// Jacobian of f_t restricted to triangle `tri` (constant there).
  Mat2 jacobian(int tri, Scalar t) const;
};

/// Orientation validity of a path, decided exactly: per triangle the mapped
/// orientation determinant is a quadratic polynomial in t whose minimum over
/// [0,1] is evaluated in closed form.
struct PathCheck {
  bool valid = true;
  int tri = -1;        // first offending triangle
  Scalar t_lo = 0.0;   // sub-interval of [0,1] where the determinant is <= 0
  Scalar t_hi = 0.0;
};
PathCheck check_path_orientation(const DeformationPath& path);

/// Linear PL family carrying mesh-on-P to Q: polygon vertices move to Q's
/// vertices, boundary Steiner points ride their host edge, interior Steiner
/// points stay fixed. Throws DegeneratesAlongPath (with the offending triangle
/// and t-interval) when some triangle flips for a t in [0,1] -- Q is then
/// outside the valid neighborhood of P for this mesh.
DeformationPath pl_family(const Polygon& p, const Polygon& q, const TriMesh& mesh_on_p);

/// Mesh at parameter t: points (1-t) x + t f(x), connectivity unchanged.
TriMesh map_mesh(const DeformationPath& path, Scalar t);

/// Midpoint-refines source and target together. Sub-triangles inherit their
/// parent's affine map, so validity of the path is preserved exactly.
DeformationPath refine_path(const DeformationPath& path, int levels);

/// The vertex-deletion deformation: picks a leaf triangle T of the dual tree
/// with corner v flanked by two boundary edges, and moves v linearly to the
/// midpoint m of the side of T opposite v. Returns the path together with the
/// endpoint polygon, in which m is a false vertex (the endpoint is an n-gon
/// that can be read as an (n-1)-gon).
///
/// The path mesh is built on the endpoint polygon's triangulation rather than
/// on the structural mesh of P: in the latter the leaf triangle itself
/// collapses at t = 1, so its orientation determinant could not stay positive
/// on all of [0,1].
std::pair<DeformationPath, Polygon> delete_vertex_path(const Polygon& p);

/// Bi-Lipschitz witness constant: largest C such that
///   C |x-y| <= |f_t(x) - f_t(y)| <= C^{-1} |x-y|
/// holds for all sampled t, computed from per-triangle singular values of the
/// Jacobian minimized over a dense t-grid.
Scalar bilipschitz_constant(const DeformationPath& path, int t_samples = 512);

}  // namespace polyspec
