#include "mpsmesh/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mpsmesh/error.hpp"
#include "mpsmesh/predicates.hpp"

namespace mpsmesh {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

Point3 normalized(const Point3& p) { return p * (1.0 / norm(p)); }

double angle_between(const Point3& a, const Point3& b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

double angle_between(const Point2& a, const Point2& b) {
  return std::atan2(std::fabs(cross(a, b)), dot(a, b));
}

template <int D>
TriQuality tri_quality_impl(const Vec<D>& a, const Vec<D>& b, const Vec<D>& c,
                            double twice_area) {
  if (!(twice_area > 0.0))
    throw Error(ErrorKind::DegenerateSimplex, "triangle has zero area");
  const double la = distance(b, c);
  const double lb = distance(a, c);
  const double lc = distance(a, b);
  const double angles[3] = {angle_between(b - a, c - a),
                            angle_between(a - b, c - b),
                            angle_between(a - c, b - c)};
  TriQuality q;
  q.min_angle = *std::min_element(angles, angles + 3) * kRadToDeg;
  q.max_angle = *std::max_element(angles, angles + 3) * kRadToDeg;
  // r_in = 2A/P, R = abc/(4A)  =>  2 r_in / R = 16 A^2 / (P abc)
  const double area = 0.5 * twice_area;
  q.aspect = 16.0 * area * area / ((la + lb + lc) * la * lb * lc);
  return q;
}

}  // namespace

PlaneFrame build_local_frame(std::span<const Point3> boundary, double tau_rel) {
  const std::size_t n = boundary.size();
  if (n < 3)
    throw Error(ErrorKind::CollinearInput, "need at least 3 vertices");
  Box3 box = Box3::empty();
  for (const auto& p : boundary) {
    if (!is_finite(p))
      throw Error(ErrorKind::NonPlanarInput, "non-finite vertex");
    box.expand(p);
  }
  const double tau = tau_rel * box.diagonal();

  std::size_t longest = 0;
  double longest_len = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double len = distance(boundary[i], boundary[(i + 1) % n]);
    if (len > longest_len) {
      longest_len = len;
      longest = i;
    }
  }
  if (!(longest_len > tau))
    throw Error(ErrorKind::CollinearInput, "all vertices coincide");
  const Point3 u = normalized(boundary[(longest + 1) % n] - boundary[longest]);

  double max_off_line = 0.0;
  for (const auto& p : boundary) {
    const Point3 d = p - boundary[longest];
    max_off_line = std::max(max_off_line, norm(d - u * dot(d, u)));
  }
  if (!(max_off_line > tau))
    throw Error(ErrorKind::CollinearInput, "vertices are collinear");

  // Newell normal.
  Point3 nrm{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& p = boundary[i];
    const Point3& q = boundary[(i + 1) % n];
    nrm[0] += (p[1] - q[1]) * (p[2] + q[2]);
    nrm[1] += (p[2] - q[2]) * (p[0] + q[0]);
    nrm[2] += (p[0] - q[0]) * (p[1] + q[1]);
  }
  nrm -= u * dot(nrm, u);
  if (!(norm(nrm) > 0.0))
    throw Error(ErrorKind::CollinearInput, "loop encloses no area");

  PlaneFrame f;
  f.origin = boundary[0];
  f.u = u;
  f.n = normalized(nrm);
  f.v = normalized(cross(f.n, f.u));

  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::fabs(f.height(boundary[i]));
    if (r > tau)
      throw Error(ErrorKind::NonPlanarInput,
                  "vertex " + std::to_string(i) + " is off-plane by " +
                      std::to_string(r));
  }
  return f;
}

Sphere<2> circumsphere(const Point2& a, const Point2& b, const Point2& c) {
  if (predicates::orient2d(a, b, c) == 0)
    throw Error(ErrorKind::DegenerateSimplex, "collinear triangle");
  const Point2 ab = b - a;
  const Point2 ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double ab2 = norm2(ab);
  const double ac2 = norm2(ac);
  const Point2 off{(ac[1] * ab2 - ab[1] * ac2) / d,
                   (ab[0] * ac2 - ac[0] * ab2) / d};
  return {a + off, norm(off)};
}

Sphere<3> circumsphere(const Point3& a, const Point3& b, const Point3& c,
                       const Point3& d) {
  if (predicates::orient3d(a, b, c, d) == 0)
    throw Error(ErrorKind::DegenerateSimplex, "flat tetrahedron");
  const Point3 u = b - a;
  const Point3 v = c - a;
  const Point3 w = d - a;
  const double denom = 2.0 * dot(u, cross(v, w));
  const Point3 off = (cross(v, w) * norm2(u) + cross(w, u) * norm2(v) +
                      cross(u, v) * norm2(w)) *
                     (1.0 / denom);
  return {a + off, norm(off)};
}

Sphere<3> circumcircle3d(const Point3& a, const Point3& b, const Point3& c) {
  const Point3 u = b - a;
  const Point3 v = c - a;
  const Point3 uxv = cross(u, v);
  const double denom = 2.0 * norm2(uxv);
  if (!(denom > 0.0))
    throw Error(ErrorKind::DegenerateSimplex, "collinear triangle");
  const Point3 off =
      (cross(uxv, u) * norm2(v) + cross(v, uxv) * norm2(u)) * (1.0 / denom);
  return {a + off, norm(off)};
}

TriQuality tri_quality(const Point2& a, const Point2& b, const Point2& c) {
  if (predicates::orient2d(a, b, c) == 0)
    throw Error(ErrorKind::DegenerateSimplex, "collinear triangle");
  return tri_quality_impl<2>(a, b, c, std::fabs(cross(b - a, c - a)));
}

TriQuality tri_quality(const Point3& a, const Point3& b, const Point3& c) {
  return tri_quality_impl<3>(a, b, c, norm(cross(b - a, c - a)));
}

std::array<double, 6> dihedral_angles(const Point3& a, const Point3& b,
                                      const Point3& c, const Point3& d) {
  const Point3 p[4] = {a, b, c, d};
  // Outward normal of the face opposite vertex i.
  Point3 nrm[4];
  for (int i = 0; i < 4; ++i) {
    const Point3& x = p[(i + 1) % 4];
    const Point3& y = p[(i + 2) % 4];
    const Point3& z = p[(i + 3) % 4];
    Point3 nn = cross(y - x, z - x);
    if (dot(nn, p[i] - x) > 0.0) nn = -nn;
    nrm[i] = nn;
  }
  std::array<double, 6> out{};
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      // Faces containing edge ij are opposite the two remaining vertices.
      int f[2], m = 0;
      for (int q = 0; q < 4; ++q)
        if (q != i && q != j) f[m++] = q;
      out[k++] =
          180.0 - angle_between(nrm[f[0]], nrm[f[1]]) * kRadToDeg;
    }
  }
  return out;
}

TetQuality tet_quality(const Point3& a, const Point3& b, const Point3& c,
                       const Point3& d) {
  if (predicates::orient3d(a, b, c, d) == 0)
    throw Error(ErrorKind::DegenerateSimplex, "flat tetrahedron");
  const auto dih = dihedral_angles(a, b, c, d);
  TetQuality q;
  q.min_dihedral = *std::min_element(dih.begin(), dih.end());
  q.max_dihedral = *std::max_element(dih.begin(), dih.end());

  const double volume6 = std::fabs(dot(b - a, cross(c - a, d - a)));
  const double faces = norm(cross(c - b, d - b)) + norm(cross(c - a, d - a)) +
                       norm(cross(b - a, d - a)) + norm(cross(b - a, c - a));
  // r_in = 3V / S with S the total face area; here both are doubled / 6x.
  const double r_in = volume6 / faces;
  const double r_circ = circumsphere(a, b, c, d).radius;
  q.aspect = 3.0 * r_in / r_circ;
  return q;
}

bool point_in_polygon(const Point2& p, std::span<const Point2> polygon) {
  const std::size_t n = polygon.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = polygon[j];
    const Point2& b = polygon[i];
    if (predicates::orient2d(a, b, p) == 0 &&
        p[0] >= std::fmin(a[0], b[0]) && p[0] <= std::fmax(a[0], b[0]) &&
        p[1] >= std::fmin(a[1], b[1]) && p[1] <= std::fmax(a[1], b[1]))
      return true;
    if ((a[1] > p[1]) != (b[1] > p[1])) {
      // Crossing of the horizontal ray to +x; orientation decides the side.
      const int o = predicates::orient2d(a, b, p);
      if ((b[1] > a[1]) ? o > 0 : o < 0) inside = !inside;
    }
  }
  return inside;
}

double polygon_boundary_distance(const Point2& p,
                                 std::span<const Point2> polygon) {
  double best = INFINITY;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::fmin(best,
                     point_segment_distance(p, polygon[i], polygon[(i + 1) % n]));
  return best;
}

double polygon_area(std::span<const Point2> polygon) {
  double s = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i)
    s += cross(polygon[i], polygon[(i + 1) % n]);
  return 0.5 * s;
}

double point_polygon_distance(const Point3& p, const PlaneFrame& frame,
                              std::span<const Point2> polygon) {
  const double h = frame.height(p);
  const Point2 q = frame.to_local(p);
  if (point_in_polygon(q, polygon)) return std::fabs(h);
  const double d = polygon_boundary_distance(q, polygon);
  return std::sqrt(h * h + d * d);
}

}  // namespace mpsmesh
