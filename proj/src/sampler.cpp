#include "mpsmesh/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "mpsmesh/error.hpp"

namespace mpsmesh {

std::string_view to_string(Tag tag) {
  switch (tag) {
    case Tag::polygon_vertex: return "polygon_vertex";
    case Tag::boundary: return "boundary";
    case Tag::intersection: return "intersection";
    case Tag::interior: return "interior";
    case Tag::matrix_boundary: return "matrix_boundary";
    case Tag::volume: return "volume";
  }
  return "unknown";
}

Tag tag_from_string(std::string_view s) {
  for (Tag t : {Tag::polygon_vertex, Tag::boundary, Tag::intersection,
                Tag::interior, Tag::matrix_boundary, Tag::volume})
    if (to_string(t) == s) return t;
  throw Error(ErrorKind::ParseError, "unknown tag '" + std::string(s) + "'");
}

SamplerStats& SamplerStats::operator+=(const SamplerStats& o) {
  candidates += o.candidates;
  fast_rejects += o.fast_rejects;
  distance_rejects += o.distance_rejects;
  outside += o.outside;
  standoff += o.standoff;
  accepts += o.accepts;
  distance_computations += o.distance_computations;
  if (added_per_round.size() < o.added_per_round.size())
    added_per_round.resize(o.added_per_round.size(), 0);
  for (std::size_t i = 0; i < o.added_per_round.size(); ++i)
    added_per_round[i] += o.added_per_round[i];
  return *this;
}

double boundary_gap_factor(double a) {
  // g < sqrt2/(1+a) * min(rho_x, rho_y) with rho_y >= rho_x - a g.
  return std::numbers::sqrt2 / (1.0 + a + std::numbers::sqrt2 * a);
}

namespace {

// Interior nodes of the straight piece p -> q (both fixed).
template <int D>
void sample_piece(const Vec<D>& p, const Vec<D>& q,
                  const std::function<double(const Vec<D>&)>& radius, double a,
                  Rng& rng, BoundaryStats* stats, std::vector<Vec<D>>& out) {
  const double len = distance(p, q);
  const Vec<D> dir = (q - p) * (1.0 / len);
  const double rp = radius(p), rq = radius(q);
  if (len < std::fmin(rp, rq))
    throw Error(ErrorKind::InfeasibleEdge,
                "piece of length " + std::to_string(len) +
                    " is shorter than the local inhibition radius " +
                    std::to_string(std::fmin(rp, rq)));
  const double c = boundary_gap_factor(a);
  const double cover = std::numbers::sqrt2 / (1.0 + a);
  auto at = [&](double s) { return s >= len ? q : p + dir * s; };

  // Jittered walk while plenty of room is left.
  std::vector<double> pos{0.0};
  for (;;) {
    const double s = pos.back();
    const double rs = radius(at(s));
    if (len - s <= 4.0 * c * rs) break;
    pos.push_back(s + rng.uniform(rs, c * rs));
  }

  // Split the remainder evenly: fewest gaps that satisfy both bounds, or
  // else the most gaps that still respect the inhibition radius.
  const double s0 = pos.back();
  const double rem = len - s0;
  const double r0 = radius(at(s0));
  // Lipschitz lower bound of rho over the remainder.
  const double rlo = std::fmin(r0, rq);
  const double rmin = std::fmax(rlo - 0.5 * a * rem, 0.1 * rlo);
  const auto n_hi = static_cast<long>(std::ceil(rem / rmin)) + 2;
  long best_hard = 0, chosen = 0;
  std::vector<double> radii;
  for (long n = 1; n <= n_hi; ++n) {
    const double g = rem / double(n);
    radii.clear();
    for (long i = 0; i <= n; ++i) radii.push_back(radius(at(s0 + g * double(i))));
    bool hard = true, soft = true;
    for (long i = 0; i < n; ++i) {
      const double r = std::fmin(radii[i], radii[i + 1]);
      hard &= g >= r;
      soft &= g <= cover * r;
    }
    if (!hard) {
      if (best_hard > 0) break;
      continue;
    }
    best_hard = n;
    if (soft) {
      chosen = n;
      break;
    }
  }
  if (best_hard == 0) {
    // Even one gap conflicts: drop walk nodes until it fits.
    while (pos.size() > 1) {
      pos.pop_back();
      const double s = pos.back();
      if (len - s >= std::fmin(radius(at(s)), rq)) break;
    }
    best_hard = 1;
  }
  if (chosen == 0) {
    chosen = best_hard;
    if (stats) ++stats->coverage_relaxed;
  }
  const double s_last = pos.back();
  const double g = (len - s_last) / double(chosen);
  for (long i = 1; i < chosen; ++i) pos.push_back(s_last + g * double(i));

  for (std::size_t i = 1; i < pos.size(); ++i) out.push_back(p + dir * pos[i]);
  if (stats) stats->gaps += pos.size();
}

}  // namespace

template <int D>
std::vector<Vec<D>> sample_polyline_1d(
    std::span<const Vec<D>> fixed,
    const std::function<double(const Vec<D>&)>& radius, double a, Rng& rng,
    BoundaryStats* stats) {
  std::vector<Vec<D>> out;
  for (std::size_t i = 0; i + 1 < fixed.size(); ++i)
    sample_piece<D>(fixed[i], fixed[i + 1], radius, a, rng, stats, out);
  return out;
}

template std::vector<Vec<2>> sample_polyline_1d<2>(
    std::span<const Vec<2>>, const std::function<double(const Vec<2>&)>&,
    double, Rng&, BoundaryStats*);
template std::vector<Vec<3>> sample_polyline_1d<3>(
    std::span<const Vec<3>>, const std::function<double(const Vec<3>&)>&,
    double, Rng&, BoundaryStats*);

Sample2 sample_boundary_1d(std::span<const Point2> polygon,
                           std::span<const Point2> breakpoints,
                           const RadiusField2D& field, Rng& rng,
                           BoundaryStats* stats) {
  Box2 box = Box2::empty();
  for (const auto& p : polygon) box.expand(p);
  const double tol = 1e-9 * box.diagonal();
  const double a = field.params().a;
  const std::function<double(const Point2&)> radius =
      [&](const Point2& p) { return field.evaluate(p); };

  Sample2 out;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& v = polygon[i];
    const Point2& w = polygon[(i + 1) % n];
    out.push(v, field.evaluate(v), Tag::polygon_vertex);

    std::vector<std::pair<double, Point2>> on_edge;
    const Point2 e = w - v;
    const double len2 = norm2(e);
    for (const auto& b : breakpoints) {
      if (point_segment_distance(b, v, w) > tol) continue;
      if (distance(b, v) <= tol || distance(b, w) <= tol) continue;
      on_edge.emplace_back(dot(b - v, e) / len2, b);
    }
    std::sort(on_edge.begin(), on_edge.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<Point2> fixed{v};
    for (const auto& [t, b] : on_edge) fixed.push_back(b);
    fixed.push_back(w);
    for (const auto& p : sample_polyline_1d<2>(fixed, radius, a, rng, stats))
      out.push(p, field.evaluate(p), Tag::boundary);
  }
  return out;
}

namespace {

// Liang-Barsky clip: does segment ab meet the closed box?
bool segment_meets_box(const Point2& a, const Point2& b, const Box2& box) {
  double t0 = 0.0, t1 = 1.0;
  const Point2 d = b - a;
  for (int i = 0; i < 2; ++i) {
    if (d[i] == 0.0) {
      if (a[i] < box.lo[i] || a[i] > box.hi[i]) return false;
      continue;
    }
    double ta = (box.lo[i] - a[i]) / d[i];
    double tb = (box.hi[i] - a[i]) / d[i];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::fmax(t0, ta);
    t1 = std::fmin(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

CellBits polygon_boundary_cells(const GridGeometry<2>& geom,
                                std::span<const Point2> polygon) {
  CellBits out(geom.cell_count());
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = polygon[i];
    const Point2& b = polygon[(i + 1) % n];
    const double len = distance(a, b);
    const auto steps = static_cast<std::int64_t>(std::ceil(2.0 * len / geom.cell_side));
    for (std::int64_t s = 0; s <= steps; ++s) {
      const Point2 p = a + (b - a) * (double(s) / double(std::max<std::int64_t>(steps, 1)));
      const auto h = geom.coord_of(p);
      for (std::int64_t dj = -1; dj <= 1; ++dj)
        for (std::int64_t di = -1; di <= 1; ++di) {
          const CellCoord<2> c{h[0] + di, h[1] + dj};
          if (c[0] < 0 || c[1] < 0 || c[0] >= geom.dims[0] || c[1] >= geom.dims[1])
            continue;
          if (segment_meets_box(a, b, geom.cell_box(c))) out.set(geom.index_of(c));
        }
    }
  }
  return out;
}

CellBits polygon_domain_cells(const GridGeometry<2>& geom,
                              std::span<const Point2> polygon) {
  CellBits out = polygon_boundary_cells(geom, polygon);
  const std::size_t n = polygon.size();
  // Cells whose centre is inside: scanline over the row centres.
  std::vector<double> xs;
  for (std::int64_t j = 0; j < geom.dims[1]; ++j) {
    const double y = geom.origin[1] + (double(j) + 0.5) * geom.cell_side;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = polygon[i];
      const Point2& b = polygon[(i + 1) % n];
      if ((a[1] > y) != (b[1] > y))
        xs.push_back(a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const double lo = (xs[k] - geom.origin[0]) / geom.cell_side - 0.5;
      const double hi = (xs[k + 1] - geom.origin[0]) / geom.cell_side - 0.5;
      const auto i0 = std::max<std::int64_t>(0, std::int64_t(std::ceil(lo)));
      const auto i1 = std::min<std::int64_t>(geom.dims[0] - 1, std::int64_t(std::floor(hi)));
      for (auto i = i0; i <= i1; ++i) out.set(geom.index_of(CellCoord<2>{i, j}));
    }
  }
  return out;
}

SamplingResult<2> sample_fracture_2d(const FracturePSLG& pslg,
                                     const RadiusField2D& field,
                                     std::span<const FixedNode2> fixed,
                                     const SamplerOptions& opts,
                                     std::uint64_t seed) {
  const RadiusParams& params = field.params();
  Box2 box = Box2::empty();
  for (const auto& p : pslg.polygon) box.expand(p);
  const auto geom = make_grid_geometry(box, params.h);

  RadiusField2D local = field;
  local.build_mask(geom);
  const std::vector<Point2>& poly = pslg.polygon;
  CellBits domain = polygon_domain_cells(geom, poly);
  // Domain cells the boundary does not touch lie entirely inside.
  CellBits inner = domain;
  inner.subtract(polygon_boundary_cells(geom, poly));

  PoissonSampler<2> sampler(
      geom, domain, params.a,
      [&poly, &inner, &geom, &box](const Point2& p) {
        if (!box.contains(p)) return false;
        return inner.test(geom.index_of(p)) || point_in_polygon(p, poly);
      },
      [&local](const Point2& p, CellIndex c) { return local.evaluate(p, c); },
      nullptr, opts, seed, Tag::interior);

  const double tol = 1e-9 * box.diagonal();
  std::vector<Point2> breakpoints;
  for (const auto& f : fixed)
    if (polygon_boundary_distance(f.p, poly) <= tol) breakpoints.push_back(f.p);

  Rng boundary_rng(hash_seed({seed, 0xB0u}));
  const Sample2 boundary = sample_boundary_1d(poly, breakpoints, local, boundary_rng);

  SamplingResult<2> res;
  for (const auto& f : fixed)
    if (!sampler.add_seed(f.p, f.rho, f.tag, f.key, true)) ++res.seeds_dropped;
  for (std::size_t i = 0; i < boundary.size(); ++i)
    if (!sampler.add_seed(boundary.points[i], boundary.rho[i], boundary.tags[i], -1, true))
      ++res.seeds_dropped;

  sampler.run();
  res.sample = sampler.sample();
  res.stats = sampler.stats();
  res.geom = geom;
  res.unmarked = sampler.unmarked_cells();
  return res;
}

MaximalityProbe probe_maximality(const SamplingResult<2>& result,
                                 const std::function<double(const Point2&)>& radius,
                                 const std::function<bool(const Point2&)>& contains) {
  MaximalityProbe out;
  const auto& pts = result.sample.points;
  if (pts.empty()) return out;
  for (auto cell : result.unmarked) {
    const Point2 x = result.geom.cell_center(result.geom.coord_of_index(cell));
    if (!contains(x)) continue;
    ++out.probes;
    double d2 = INFINITY;
    for (const auto& q : pts) d2 = std::fmin(d2, distance2(x, q));
    const double e = std::sqrt(d2) / radius(x) - 1.0;
    if (e > out.epsilon) {
      out.epsilon = e;
      out.worst = x;
    }
  }
  return out;
}

StandoffSurface make_standoff_surface(std::span<const Point3> polygon) {
  StandoffSurface s;
  s.frame = build_local_frame(polygon);
  s.bbox = Box3::empty();
  for (const auto& p : polygon) {
    s.polygon.push_back(s.frame.to_local(p));
    s.bbox.expand(p);
  }
  return s;
}

double standoff_distance(const Point3& p, const Box3& box,
                         std::span<const StandoffSurface> surfaces) {
  double best = INFINITY;
  for (int i = 0; i < 3; ++i)
    best = std::fmin(best, std::fmin(p[i] - box.lo[i], box.hi[i] - p[i]));
  for (const auto& s : surfaces) {
    double gap2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double d = std::fmax(0.0, std::fmax(s.bbox.lo[i] - p[i], p[i] - s.bbox.hi[i]));
      gap2 += d * d;
    }
    if (gap2 >= best * best) continue;
    best = std::fmin(best, point_polygon_distance(p, s.frame, s.polygon));
  }
  return best;
}

SamplingResult<3> sample_volume_3d(const Sample3& seeds, const Box3& box,
                                   const RadiusField3D& field,
                                   std::span<const StandoffSurface> surfaces,
                                   const SamplerOptions& opts,
                                   std::uint64_t seed,
                                   std::span<const Sphere<3>> refill) {
  const RadiusParams& params = field.params();
  for (int i = 0; i < 3; ++i)
    if (!(box.hi[i] > box.lo[i]))
      throw Error(ErrorKind::InvalidDomain, "domain box is empty");
  const double tol = 1e-9 * box.diagonal();
  for (const auto& s : surfaces)
    if (!box.contains(s.bbox.lo, tol) || !box.contains(s.bbox.hi, tol))
      throw Error(ErrorKind::InvalidDomain, "fracture extends outside the domain box");
  for (const auto& p : seeds.points)
    if (!box.contains(p, tol))
      throw Error(ErrorKind::InvalidDomain, "seed node outside the domain box");

  const auto geom = make_grid_geometry(box, params.h);
  CellBits domain(geom.cell_count());
  if (refill.empty()) {
    for (CellIndex c = 0; c < geom.cell_count(); ++c) domain.set(c);
  } else {
    for (const auto& ball : refill) {
      CellCoord<3> lo, hi, cc;
      for (int i = 0; i < 3; ++i) {
        lo[i] = geom.axis_coord(ball.center[i] - ball.radius, i);
        hi[i] = geom.axis_coord(ball.center[i] + ball.radius, i);
      }
      for (cc[2] = lo[2]; cc[2] <= hi[2]; ++cc[2])
        for (cc[1] = lo[1]; cc[1] <= hi[1]; ++cc[1])
          for (cc[0] = lo[0]; cc[0] <= hi[0]; ++cc[0])
            if (geom.distance_to_cell(ball.center, cc) <= ball.radius)
              domain.set(geom.index_of(cc));
    }
  }

  const bool uniform = field.empty();
  PoissonSampler<3> sampler(
      geom, std::move(domain), params.a,
      [&box](const Point3& p) { return box.contains(p); },
      [&](const Point3& p, CellIndex) {
        return uniform ? params.rho_max : field.evaluate(p);
      },
      [&](const Point3& p, double rho) {
        return standoff_distance(p, box, surfaces) >= 0.5 * rho;
      },
      opts, seed, Tag::volume);

  SamplingResult<3> res;
  for (std::size_t i = 0; i < seeds.size(); ++i)
    if (!sampler.add_seed(seeds.points[i], seeds.rho[i], seeds.tags[i], seeds.keys[i], true))
      ++res.seeds_dropped;
  if (!refill.empty()) sampler.skip_served();
  sampler.run();
  res.sample = sampler.sample();
  res.stats = sampler.stats();
  res.geom = geom;
  res.unmarked = sampler.unmarked_cells();
  return res;
}

}  // namespace mpsmesh
