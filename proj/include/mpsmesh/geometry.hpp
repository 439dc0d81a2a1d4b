#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mpsmesh/vec.hpp"

namespace mpsmesh {

template <int D>
struct Segment {
  Vec<D> a;
  Vec<D> b;
  double length() const { return distance(a, b); }
};

using Segment2 = Segment<2>;
using Segment3 = Segment<3>;

using Triangle = std::array<std::uint32_t, 3>;
using Tetrahedron = std::array<std::uint32_t, 4>;

// Orthonormal frame of a plane in 3D; local coordinates are (u, v) offsets
// from the origin.
struct PlaneFrame {
  Point3 origin;
  Point3 u;
  Point3 v;
  Point3 n;

  Point2 to_local(const Point3& p) const {
    const Point3 d = p - origin;
    return {dot(d, u), dot(d, v)};
  }
  Point3 to_world(const Point2& q) const { return origin + u * q[0] + v * q[1]; }
  double height(const Point3& p) const { return dot(p - origin, n); }
};

// Relative planarity tolerance; the absolute tolerance is this times the
// bounding-box diagonal of the input loop.
inline constexpr double kPlaneTolerance = 1e-9;

// Frame for a planar vertex loop. u follows the longest edge (first one on
// ties), n is the Newell normal of the loop so the local polygon winds
// counterclockwise. Throws CollinearInput / NonPlanarInput.
PlaneFrame build_local_frame(std::span<const Point3> boundary,
                             double tau_rel = kPlaneTolerance);

template <int D>
struct Sphere {
  Vec<D> center;
  double radius = 0.0;
};

// Circumcircle of a triangle (2D) and circumsphere of a tetrahedron (3D).
// Throws DegenerateSimplex when the simplex is flat.
Sphere<2> circumsphere(const Point2& a, const Point2& b, const Point2& c);
Sphere<3> circumsphere(const Point3& a, const Point3& b, const Point3& c,
                       const Point3& d);
// Circumcircle of a triangle embedded in 3D.
Sphere<3> circumcircle3d(const Point3& a, const Point3& b, const Point3& c);

// Angles in degrees. Aspect ratio is 2 r_in / r_circ for triangles and
// 3 r_in / r_circ for tetrahedra, so regular simplices score exactly 1.
struct TriQuality {
  double min_angle = 0.0;
  double max_angle = 0.0;
  double aspect = 0.0;
};

struct TetQuality {
  double min_dihedral = 0.0;
  double max_dihedral = 0.0;
  double aspect = 0.0;
};

TriQuality tri_quality(const Point2& a, const Point2& b, const Point2& c);
TriQuality tri_quality(const Point3& a, const Point3& b, const Point3& c);
TetQuality tet_quality(const Point3& a, const Point3& b, const Point3& c,
                       const Point3& d);

// The six dihedral angles (degrees), ordered by edge (01,02,03,12,13,23).
std::array<double, 6> dihedral_angles(const Point3& a, const Point3& b,
                                      const Point3& c, const Point3& d);

template <int D>
double point_segment_distance(const Vec<D>& p, const Vec<D>& a,
                              const Vec<D>& b) {
  const Vec<D> ab = b - a;
  const double len2 = norm2(ab);
  if (len2 == 0.0) return distance(p, a);
  double t = dot(p - a, ab) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return distance(p, a + ab * t);
}

template <int D>
double point_segment_distance(const Vec<D>& p, const Segment<D>& s) {
  return point_segment_distance(p, s.a, s.b);
}

// Boundary-inclusive point-in-polygon test (exact on the boundary).
bool point_in_polygon(const Point2& p, std::span<const Point2> polygon);

// Distance from p to the polygon's boundary edges.
double polygon_boundary_distance(const Point2& p,
                                 std::span<const Point2> polygon);

// Signed area, positive for counterclockwise loops.
double polygon_area(std::span<const Point2> polygon);

// Euclidean distance from a 3D point to a planar polygon given in the
// local coordinates of `frame` (interior included).
double point_polygon_distance(const Point3& p, const PlaneFrame& frame,
                              std::span<const Point2> polygon);

}  // namespace mpsmesh
