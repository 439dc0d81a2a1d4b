#pragma once

#include <limits>
#include <span>
#include <vector>

#include "mpsmesh/accel_grid.hpp"
#include "mpsmesh/geometry.hpp"

namespace mpsmesh {

// Parameters of the piecewise-linear inhibition-radius fields.
//   h        minimal node spacing is h/2
//   a        slope (Lipschitz constant), 0 < a < 1
//   f        flat band width: f*h in 2D, f*rho2(x_p) in 3D
//   r        2D cap at (a*r + 1/2) h
//   rho_max  3D cap
struct RadiusParams {
  double h = 0.01;
  double a = 0.1;
  double f = 1.0;
  double r = 40.0;
  double rho_max = 0.045;

  void validate() const;
  double rho_min() const { return 0.5 * h; }
  double rho_cap2d() const { return (a * r + 0.5) * h; }
};

inline constexpr double kNoIntersection = std::numeric_limits<double>::infinity();

// rho as a function of the distance D to the nearest intersection.
double rho2d(double dist, const RadiusParams& params);

// 3D radius contributed by one fracture node with 2D radius rho2 at
// distance dist; capped at rho_max.
double rho3d_from(double dist, double rho2, const RadiusParams& params);

inline double pair_radius(double rho_x, double rho_y) {
  return rho_x < rho_y ? rho_x : rho_y;
}

// Sizing field on one fracture, in the fracture's local coordinates.
class RadiusField2D {
 public:
  RadiusField2D(std::vector<Segment2> intersections, RadiusParams params);

  // Builds the mask of cells that may lie within (R+F)H of an intersection;
  // everywhere else rho is the cap and no distances are computed.
  void build_mask(const GridGeometry<2>& geom);

  // Exact minimum distance to the intersection segments (+inf if none).
  double distance_to_intersections(const Point2& p) const;

  double evaluate(const Point2& p) const;
  // Same value; uses the cell mask when `cell` is inside it.
  double evaluate(const Point2& p, CellIndex cell) const;

  const RadiusParams& params() const { return params_; }
  const std::vector<Segment2>& intersections() const { return segments_; }
  bool has_mask() const { return mask_.size() > 0; }
  bool near_intersection(CellIndex cell) const { return mask_.test(cell); }

 private:
  std::vector<Segment2> segments_;
  std::vector<Box2> segment_boxes_;
  RadiusParams params_;
  CellBits mask_;
};

// Sizing field of the matrix around a sampled fracture network: the lower
// envelope over fracture nodes q of rho3d_from(|x - q|, rho2(q)).
class RadiusField3D {
 public:
  RadiusField3D(std::span<const Point3> nodes, std::span<const double> rho2,
                RadiusParams params);

  bool empty() const { return nodes_.empty(); }

  // Throws EmptyField when no fracture nodes were given.
  double evaluate(const Point3& p) const;

  // Distance to and index of the nearest fracture node.
  std::pair<double, std::size_t> nearest(const Point3& p) const;

  const RadiusParams& params() const { return params_; }
  double min_rho2() const { return min_rho2_; }

 private:
  // Balanced k-d tree over the nodes; every tree node keeps the box and the
  // smallest rho2 of its subtree so queries can prune on the envelope bound.
  struct TreeNode {
    Box3 box;
    double min_rho2;
    std::uint32_t begin, end;  // range in order_
    std::int32_t left = -1, right = -1;
  };
  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void envelope_query(std::int32_t node, const Point3& p, double& best) const;
  void nearest_query(std::int32_t node, const Point3& p, double& best,
                     std::size_t& arg) const;

  std::vector<Point3> nodes_;
  std::vector<double> rho2_;
  RadiusParams params_;
  double min_rho2_ = 0.0;
  std::vector<std::uint32_t> order_;
  std::vector<TreeNode> tree_;
  // Nodes and radii in tree order, for contiguous leaf scans.
  std::vector<Point3> leaf_points_;
  std::vector<double> leaf_rho2_;
};

}  // namespace mpsmesh
