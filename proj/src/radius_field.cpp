#include "mpsmesh/radius_field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mpsmesh/error.hpp"

namespace mpsmesh {

void RadiusParams::validate() const {
  auto fail = [](const char* what) {
    throw Error(ErrorKind::InvalidParams, what);
  };
  if (!(h > 0.0) || !std::isfinite(h)) fail("h must be positive");
  if (!(a > 0.0 && a < 1.0)) fail("a must lie in (0, 1)");
  if (!(f >= 0.0) || !std::isfinite(f)) fail("f must be non-negative");
  if (!(r >= 0.0) || !std::isfinite(r)) fail("r must be non-negative");
  if (!(rho_max >= 0.5 * h) || !std::isfinite(rho_max))
    fail("rho_max must be at least h/2");
}

double rho2d(double dist, const RadiusParams& p) {
  const double flat = p.f * p.h;
  if (dist <= flat) return 0.5 * p.h;
  if (dist <= (p.r + p.f) * p.h) return p.a * (dist - flat) + 0.5 * p.h;
  return p.rho_cap2d();
}

double rho3d_from(double dist, double rho2, const RadiusParams& p) {
  const double flat = p.f * rho2;
  const double v = dist <= flat ? rho2 : p.a * (dist - flat) + rho2;
  const double cap = p.rho_max > rho2 ? p.rho_max : rho2;
  return v < cap ? v : cap;
}

// ---------------------------------------------------------------------------

RadiusField2D::RadiusField2D(std::vector<Segment2> intersections,
                             RadiusParams params)
    : segments_(std::move(intersections)), params_(params) {
  params_.validate();
  segment_boxes_.reserve(segments_.size());
  for (const auto& s : segments_) {
    Box2 b = Box2::empty();
    b.expand(s.a);
    b.expand(s.b);
    segment_boxes_.push_back(b);
  }
}

void RadiusField2D::build_mask(const GridGeometry<2>& geom) {
  mask_ = CellBits(geom.cell_count());
  const double reach = (params_.r + params_.f) * params_.h;
  const double half_diag = 0.5 * geom.cell_diameter();
  for (const auto& s : segments_) {
    Box2 b = Box2::empty();
    b.expand(s.a);
    b.expand(s.b);
    const double pad = reach + geom.cell_diameter();
    const auto lo = geom.coord_of(b.lo - Point2{pad, pad});
    const auto hi = geom.coord_of(b.hi + Point2{pad, pad});
    for (auto j = lo[1]; j <= hi[1]; ++j) {
      for (auto i = lo[0]; i <= hi[0]; ++i) {
        const CellCoord<2> c{i, j};
        if (point_segment_distance(geom.cell_center(c), s) <= reach + half_diag)
          mask_.set(geom.index_of(c));
      }
    }
  }
}

double RadiusField2D::distance_to_intersections(const Point2& p) const {
  double best = kNoIntersection;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    // Skip segments whose bounding box is already farther than the best.
    const Box2& b = segment_boxes_[i];
    const double dx = std::fmax(0.0, std::fmax(b.lo[0] - p[0], p[0] - b.hi[0]));
    const double dy = std::fmax(0.0, std::fmax(b.lo[1] - p[1], p[1] - b.hi[1]));
    if (dx * dx + dy * dy > best * best) continue;
    best = std::fmin(best, point_segment_distance(p, segments_[i]));
  }
  return best;
}

double RadiusField2D::evaluate(const Point2& p) const {
  return rho2d(distance_to_intersections(p), params_);
}

double RadiusField2D::evaluate(const Point2& p, CellIndex cell) const {
  if (has_mask() && cell < mask_.size() && !mask_.test(cell))
    return params_.rho_cap2d();
  return evaluate(p);
}

// ---------------------------------------------------------------------------

namespace {

// Lower bound of rho3d_from(dist, rho2) over all rho2 >= rho_min.
double envelope_lower_bound(double dist, double rho_min, const RadiusParams& p) {
  double lb = rho3d_from(dist, rho_min, p);
  if (p.a * p.f > 1.0 && p.f > 0.0)
    lb = std::fmin(lb, std::fmax(rho_min, std::fmin(dist / p.f, p.rho_max)));
  return lb;
}

}  // namespace

namespace {

constexpr std::uint32_t kLeafSize = 8;

double box_distance2(const Box3& b, const Point3& p) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = p[i] < b.lo[i] ? b.lo[i] - p[i] : (p[i] > b.hi[i] ? p[i] - b.hi[i] : 0.0);
    s += d * d;
  }
  return s;
}

}  // namespace

RadiusField3D::RadiusField3D(std::span<const Point3> nodes,
                             std::span<const double> rho2, RadiusParams params)
    : nodes_(nodes.begin(), nodes.end()),
      rho2_(rho2.begin(), rho2.end()),
      params_(params) {
  params_.validate();
  if (nodes_.size() != rho2_.size())
    throw Error(ErrorKind::InvalidParams, "node / radius count mismatch");
  if (nodes_.empty()) return;
  min_rho2_ = *std::min_element(rho2_.begin(), rho2_.end());
  order_.resize(nodes_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  tree_.reserve(2 * nodes_.size() / kLeafSize + 2);
  build(0, static_cast<std::uint32_t>(nodes_.size()));
  leaf_points_.reserve(order_.size());
  leaf_rho2_.reserve(order_.size());
  for (auto q : order_) {
    leaf_points_.push_back(nodes_[q]);
    leaf_rho2_.push_back(rho2_[q]);
  }
}

std::int32_t RadiusField3D::build(std::uint32_t begin, std::uint32_t end) {
  TreeNode n;
  n.box = Box3::empty();
  n.min_rho2 = INFINITY;
  for (auto i = begin; i < end; ++i) {
    n.box.expand(nodes_[order_[i]]);
    n.min_rho2 = std::fmin(n.min_rho2, rho2_[order_[i]]);
  }
  n.begin = begin;
  n.end = end;
  const auto id = static_cast<std::int32_t>(tree_.size());
  tree_.push_back(n);
  if (end - begin <= kLeafSize) return id;

  int axis = 0;
  for (int i = 1; i < 3; ++i)
    if (n.box.extent(i) > n.box.extent(axis)) axis = i;
  const std::uint32_t mid = begin + (end - begin) / 2;
  // Ties broken by index keep the tree independent of the sort algorithm.
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
                     const double da = nodes_[a][axis], db = nodes_[b][axis];
                     return da < db || (da == db && a < b);
                   });
  const auto l = build(begin, mid);
  const auto r = build(mid, end);
  tree_[id].left = l;
  tree_[id].right = r;
  return id;
}

void RadiusField3D::envelope_query(std::int32_t root, const Point3& p,
                                   double& best) const {
  // Depth-first, nearer-bound child first; each bound is computed once.
  struct Entry {
    std::int32_t id;
    double bound;
  };
  Entry stack[128];
  int top = 0;
  const auto bound = [&](const TreeNode& n) {
    return envelope_lower_bound(std::sqrt(box_distance2(n.box, p)), n.min_rho2, params_);
  };
  stack[top++] = {root, bound(tree_[root])};
  while (top > 0) {
    const Entry e = stack[--top];
    if (e.bound >= best) continue;
    const TreeNode& n = tree_[e.id];
    if (n.left < 0) {
      for (auto i = n.begin; i < n.end; ++i) {
        const double v = rho3d_from(distance(p, leaf_points_[i]), leaf_rho2_[i], params_);
        if (v < best) best = v;
      }
      continue;
    }
    const double bl = bound(tree_[n.left]);
    const double br = bound(tree_[n.right]);
    if (bl <= br) {
      stack[top++] = {n.right, br};
      stack[top++] = {n.left, bl};
    } else {
      stack[top++] = {n.left, bl};
      stack[top++] = {n.right, br};
    }
  }
}

void RadiusField3D::nearest_query(std::int32_t id, const Point3& p,
                                  double& best, std::size_t& arg) const {
  const TreeNode& n = tree_[id];
  if (box_distance2(n.box, p) > best * best) return;
  if (n.left < 0) {
    for (auto i = n.begin; i < n.end; ++i) {
      const auto q = order_[i];
      const double d = distance(p, nodes_[q]);
      if (d < best || (d == best && q < arg)) {
        best = d;
        arg = q;
      }
    }
    return;
  }
  const double dl = box_distance2(tree_[n.left].box, p);
  const double dr = box_distance2(tree_[n.right].box, p);
  const auto first = dl <= dr ? n.left : n.right;
  const auto second = dl <= dr ? n.right : n.left;
  nearest_query(first, p, best, arg);
  nearest_query(second, p, best, arg);
}

double RadiusField3D::evaluate(const Point3& p) const {
  if (nodes_.empty())
    throw Error(ErrorKind::EmptyField, "no fracture nodes in the 3D field");
  // Every node contributes at most max(rho_max, rho2), so the envelope
  // never exceeds this and subtrees above it are skipped.
  double best = std::fmax(params_.rho_max, min_rho2_);
  envelope_query(0, p, best);
  return best;
}

std::pair<double, std::size_t> RadiusField3D::nearest(const Point3& p) const {
  if (nodes_.empty())
    throw Error(ErrorKind::EmptyField, "no fracture nodes in the 3D field");
  double best = INFINITY;
  std::size_t arg = nodes_.size();
  nearest_query(0, p, best, arg);
  return {best, arg};
}

}  // namespace mpsmesh
