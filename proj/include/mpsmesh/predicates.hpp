#pragma once

#include "mpsmesh/vec.hpp"

// Exact-sign geometric predicates. Each is evaluated with a floating-point
// filter first and falls back to exact expansion arithmetic when the filter
// cannot certify the sign, so the returned sign is always that of the exact
// determinant for the given double coordinates.
namespace mpsmesh::predicates {

// +1 if c lies to the left of the directed line a->b, -1 right, 0 collinear.
int orient2d(const Point2& a, const Point2& b, const Point2& c);

// +1 if d lies strictly inside the circle through a,b,c when a,b,c are
// counterclockwise; the sign flips for clockwise input. 0 when cocircular.
int incircle(const Point2& a, const Point2& b, const Point2& c,
             const Point2& d);

// Sign of det[b-a, c-a, d-a]: +1 when d is on the side of plane abc that
// (b-a)x(c-a) points to.
int orient3d(const Point3& a, const Point3& b, const Point3& c,
             const Point3& d);

// +1 if e lies strictly inside the sphere through a,b,c,d when
// orient3d(a,b,c,d) > 0; the sign flips for negative orientation.
int insphere(const Point3& a, const Point3& b, const Point3& c,
             const Point3& d, const Point3& e);

// Coplanar in-circle test for p lying in the plane of triangle abc.
// +1 strictly inside the circumcircle of abc, 0 on it, -1 outside.
// Orientation-independent.
int incircle3d_coplanar(const Point3& a, const Point3& b, const Point3& c,
                        const Point3& p);

// Counters for how often the exact stage ran (per thread).
struct Stats {
  unsigned long long filtered = 0;
  unsigned long long exact = 0;
};
Stats& thread_stats();

}  // namespace mpsmesh::predicates
