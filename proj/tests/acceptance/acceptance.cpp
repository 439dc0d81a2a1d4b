// Acceptance run: one PASS/FAIL line per criterion, measured values inline.
// Exit status is 0 when every criterion could be evaluated; with --strict it
// is the number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mpsmesh/error.hpp"
#include "mpsmesh/pipeline.hpp"

using namespace mpsmesh;

namespace {

const std::filesystem::path kFixtures = MPSMESH_FIXTURE_DIR;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

DFN fixture(const char* name) { return load_dfn(kFixtures / name); }

RadiusParams paper_params(double h) {
  RadiusParams p;
  p.h = h;
  p.a = 0.1;
  p.f = 1.0;
  p.r = 40.0;
  return p;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Oracles.

// Pairs closer than min(rho), by exhaustive comparison.
template <int D>
std::size_t empty_disk_oracle(const Sample<D>& s) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double r = std::min(s.rho[i], s.rho[j]);
      double d2 = 0;
      for (int k = 0; k < D; ++k) {
        const double t = s.points[i][k] - s.points[j][k];
        d2 += t * t;
      }
      if (d2 < r * r) ++bad;
    }
  return bad;
}

// Circumcentre of a triangle / tetrahedron in long double.
using LD = long double;
template <int D>
struct Ball {
  std::array<LD, D> c{};
  LD r2 = 0;
};

Ball<2> circumcircle(const Point2& a, const Point2& b, const Point2& c) {
  const LD bx = LD(b[0]) - a[0], by = LD(b[1]) - a[1];
  const LD cx = LD(c[0]) - a[0], cy = LD(c[1]) - a[1];
  const LD d = 2 * (bx * cy - by * cx);
  const LD b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
  const LD ux = (cy * b2 - by * c2) / d, uy = (bx * c2 - cx * b2) / d;
  return {{a[0] + ux, a[1] + uy}, ux * ux + uy * uy};
}

Ball<3> circumsphere_ld(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  LD m[3][3], rhs[3];
  const Point3* q[3] = {&b, &c, &d};
  for (int i = 0; i < 3; ++i) {
    LD n2 = 0;
    for (int k = 0; k < 3; ++k) {
      m[i][k] = LD((*q[i])[k]) - a[k];
      n2 += m[i][k] * m[i][k];
    }
    rhs[i] = n2 / 2;
  }
  const LD det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                 m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                 m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  LD u[3];
  for (int k = 0; k < 3; ++k) {
    LD t[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t[i][j] = j == k ? rhs[i] : m[i][j];
    u[k] = (t[0][0] * (t[1][1] * t[2][2] - t[1][2] * t[2][1]) -
            t[0][1] * (t[1][0] * t[2][2] - t[1][2] * t[2][0]) +
            t[0][2] * (t[1][0] * t[2][1] - t[1][1] * t[2][0])) /
           det;
  }
  return {{a[0] + u[0], a[1] + u[1], a[2] + u[2]}, u[0] * u[0] + u[1] * u[1] + u[2] * u[2]};
}

// Points strictly inside a circumball (relative slack 1e-10 for
// cocircular ties), over all points via an exact x-sweep.
template <int D, class Cells, class BallFn>
std::size_t emptiness_oracle(const std::vector<Vec<D>>& pts, const Cells& cells, BallFn ball) {
  std::vector<std::uint32_t> by_x(pts.size());
  std::iota(by_x.begin(), by_x.end(), 0u);
  std::sort(by_x.begin(), by_x.end(), [&](auto a, auto b) { return pts[a][0] < pts[b][0]; });
  std::vector<double> xs;
  for (auto i : by_x) xs.push_back(pts[i][0]);
  std::size_t bad = 0;
  for (const auto& cell : cells) {
    const Ball<D> s = ball(cell);
    const double r = static_cast<double>(std::sqrt(s.r2)) * (1 + 1e-9) + 1e-300;
    const double cx = static_cast<double>(s.c[0]);
    auto it = std::lower_bound(xs.begin(), xs.end(), cx - r);
    for (auto k = static_cast<std::size_t>(it - xs.begin()); k < xs.size() && xs[k] <= cx + r; ++k) {
      const auto i = by_x[k];
      if (std::find(cell.begin(), cell.end(), i) != cell.end()) continue;
      LD d2 = 0;
      for (int a = 0; a < D; ++a) d2 += (LD(pts[i][a]) - s.c[a]) * (LD(pts[i][a]) - s.c[a]);
      if (d2 < s.r2 * (1 - 1e-10L)) ++bad;
    }
  }
  return bad;
}

// Every facet shared by at most two cells; facets used once all have the
// whole point set on one side (so the cells tile the convex hull).
template <int D, class Cells>
std::size_t hull_oracle(const std::vector<Vec<D>>& pts, const Cells& cells) {
  std::map<std::vector<std::uint32_t>, int> facets;
  for (const auto& cell : cells)
    for (int skip = 0; skip <= D; ++skip) {
      std::vector<std::uint32_t> f;
      for (int v = 0; v <= D; ++v)
        if (v != skip) f.push_back(cell[v]);
      std::sort(f.begin(), f.end());
      ++facets[f];
    }
  std::size_t bad = 0;
  Box<D> box = Box<D>::empty();
  for (const auto& p : pts) box.expand(p);
  const LD tol = 1e-12L * box.diagonal() * box.diagonal();
  for (const auto& [f, n] : facets) {
    if (n > 2) ++bad;
    if (n != 1) continue;
    int pos = 0, neg = 0;
    for (const auto& p : pts) {
      LD s;
      if constexpr (D == 2) {
        const auto& a = pts[f[0]];
        const auto& b = pts[f[1]];
        s = (LD(b[0]) - a[0]) * (LD(p[1]) - a[1]) - (LD(b[1]) - a[1]) * (LD(p[0]) - a[0]);
      } else {
        const auto& a = pts[f[0]];
        const auto& b = pts[f[1]];
        const auto& c = pts[f[2]];
        const LD u[3] = {LD(b[0]) - a[0], LD(b[1]) - a[1], LD(b[2]) - a[2]};
        const LD v[3] = {LD(c[0]) - a[0], LD(c[1]) - a[1], LD(c[2]) - a[2]};
        const LD w[3] = {LD(p[0]) - a[0], LD(p[1]) - a[1], LD(p[2]) - a[2]};
        s = w[0] * (u[1] * v[2] - u[2] * v[1]) - w[1] * (u[0] * v[2] - u[2] * v[0]) +
            w[2] * (u[0] * v[1] - u[1] * v[0]);
      }
      if (s > tol) ++pos;
      if (s < -tol) ++neg;
    }
    if (pos > 0 && neg > 0) ++bad;
  }
  return bad;
}

struct TriShape {
  double min_angle, max_angle, aspect;
};

TriShape tri_shape(const Point3& a, const Point3& b, const Point3& c) {
  const double la = distance(b, c), lb = distance(a, c), lc = distance(a, b);
  auto ang = [](double o, double p, double q) {
    return std::acos(std::clamp((p * p + q * q - o * o) / (2 * p * q), -1.0, 1.0)) * 180.0 /
           std::numbers::pi;
  };
  const double A = ang(la, lb, lc), B = ang(lb, la, lc), C = 180.0 - A - B;
  const double s = 0.5 * (la + lb + lc);
  const double area = std::sqrt(std::max(0.0, s * (s - la) * (s - lb) * (s - lc)));
  const double inr = area / s, circ = la * lb * lc / (4 * area);
  return {std::min({A, B, C}), std::max({A, B, C}), 2 * inr / circ};
}

struct TetShape {
  double min_dihedral, max_dihedral, aspect;
};

TetShape tet_shape(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  const Point3 v[4] = {a, b, c, d};
  double mn = 180, mx = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      int o[2], n = 0;
      for (int k = 0; k < 4; ++k)
        if (k != i && k != j) o[n++] = k;
      const Point3 e = (v[j] - v[i]) * (1.0 / distance(v[i], v[j]));
      Point3 p = v[o[0]] - v[i], q = v[o[1]] - v[i];
      p = p - e * dot(p, e);
      q = q - e * dot(q, e);
      const double t = std::acos(std::clamp(dot(p, q) / (norm(p) * norm(q)), -1.0, 1.0)) *
                       180.0 / std::numbers::pi;
      mn = std::min(mn, t);
      mx = std::max(mx, t);
    }
  const double vol = std::fabs(dot(b - a, cross(c - a, d - a))) / 6.0;
  auto tri_area = [](const Point3& x, const Point3& y, const Point3& z) {
    return 0.5 * norm(cross(y - x, z - x));
  };
  const double area = tri_area(a, b, c) + tri_area(a, b, d) + tri_area(a, c, d) + tri_area(b, c, d);
  const double inr = 3 * vol / area;
  const Ball<3> s = circumsphere_ld(a, b, c, d);
  return {mn, mx, 3 * inr / static_cast<double>(std::sqrt(s.r2))};
}

double segment_distance(const Point3& p, const Point3& a, const Point3& b) {
  const Point3 ab = b - a;
  const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
  return distance(p, a + ab * t);
}

double polygon_distance(const Point3& p, const std::vector<Point3>& poly) {
  Point3 n{0, 0, 0};
  for (std::size_t i = 1; i + 1 < poly.size(); ++i)
    n = n + cross(poly[i] - poly[0], poly[i + 1] - poly[0]);
  n = n * (1.0 / norm(n));
  const double h = dot(p - poly[0], n);
  const Point3 q = p - n * h;
  bool inside = true;
  for (std::size_t i = 0; i < poly.size(); ++i)
    if (dot(cross(poly[(i + 1) % poly.size()] - poly[i], q - poly[i]), n) < 0) inside = false;
  if (inside) return std::fabs(h);
  double best = INFINITY;
  for (std::size_t i = 0; i < poly.size(); ++i)
    best = std::min(best, segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  return best;
}

// Volume nodes closer than rho/2 to a fracture or a box face.
std::size_t standoff_oracle(const Sample3& s, const DFN& dfn, std::size_t* checked) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.tags[i] != Tag::volume) continue;
    ++*checked;
    const Point3& p = s.points[i];
    double d = INFINITY;
    for (int a = 0; a < 3; ++a)
      d = std::min({d, p[a] - dfn.domain.lo[a], dfn.domain.hi[a] - p[a]});
    for (const auto& poly : dfn.fractures) d = std::min(d, polygon_distance(p, poly));
    if (d < 0.5 * s.rho[i] * (1 - 1e-12)) ++bad;
  }
  return bad;
}

// ---------------------------------------------------------------------------
// Criteria.

struct Shared {
  std::vector<std::pair<DFN, Sample3>> volume_samples;  // for the standoff check
  std::vector<PipelineResult> sliver_runs;
};

Verdict c1_empty_disk(Shared& sh) {
  const auto t0 = Clock::now();
  std::size_t runs2 = 0, bad2 = 0, max2 = 0;
  const std::pair<const char*, double> cases2[] = {
      {"network25.json", 0.02}, {"three_intersections.json", 0.03}, {"near_parallel.json", 0.02}};
  for (std::uint64_t seed = 0; runs2 < 50; ++seed)
    for (const auto& [name, h] : cases2) {
      if (runs2 == 50) break;
      const DFN dfn = fixture(name);
      RadiusParams p = paper_params(h);
      const auto dec = decompose(dfn, p, seed);
      const std::size_t f = seed % dfn.fractures.size();
      const RadiusField2D field(dec.fractures[f].pslg.intersections, p);
      SamplerOptions o;
      o.k = 5 + 15 * static_cast<int>(seed % 3);
      o.resample_rounds = static_cast<int>(seed % 4);
      const auto r = sample_fracture_2d(dec.fractures[f].pslg, field, dec.fractures[f].fixed, o,
                                        hash_seed({seed, f}));
      max2 = std::max(max2, r.sample.size());
      bad2 += empty_disk_oracle(r.sample);
      ++runs2;
    }
  std::size_t runs3 = 0, bad3 = 0, max3 = 0;
  const struct {
    const char* name;
    double h, rho_max;
  } cases3[] = {{"two_fractures.json", 0.1, 0.3}, {"three_fractures.json", 0.05, 0.15}};
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    for (const auto& c : cases3) {
      RunConfig cfg;
      cfg.params = paper_params(c.h);
      cfg.params.rho_max = c.rho_max;
      cfg.mode = Mode::mesh3d;
      cfg.seed = seed;
      const DFN dfn = fixture(c.name);
      auto res = run_pipeline(dfn, cfg);
      max3 = std::max(max3, res.volume_sample.size());
      bad3 += empty_disk_oracle(res.volume_sample);
      sh.volume_samples.emplace_back(dfn, std::move(res.volume_sample));
      ++runs3;
    }
  const double secs = since(t0);
  return {bad2 == 0 && bad3 == 0 && max2 <= 5000 && max3 <= 10000 && secs < 120,
          fmt("2D runs %zu (max %zu nodes) violations %zu; 3D runs %zu (max %zu nodes) "
              "violations %zu; %.1f s (limit 120 s)",
              runs2, max2, bad2, runs3, max3, bad3, secs)};
}

Verdict c2_delaunay() {
  std::size_t meshes = 0, bad_empty = 0, bad_hull = 0, max_pts = 0;
  const DFN tri = fixture("three_intersections.json");
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::vector<Point2> p2(3000);
    for (auto& p : p2) p = {u(rng), u(rng)};
    // Poisson sample of a fracture, the triangulator's real input.
    const auto dec = decompose(tri, paper_params(0.03), seed);
    const RadiusField2D field(dec.fractures[0].pslg.intersections, paper_params(0.03));
    const auto s = sample_fracture_2d(dec.fractures[0].pslg, field, dec.fractures[0].fixed,
                                      SamplerOptions{}, seed);
    for (const auto& pts : {p2, s.sample.points}) {
      const auto t = delaunay2d(pts);
      bad_empty += emptiness_oracle<2>(pts, t, [&](const Triangle& c) {
        return circumcircle(pts[c[0]], pts[c[1]], pts[c[2]]);
      });
      bad_hull += hull_oracle<2>(pts, t);
      max_pts = std::max(max_pts, pts.size());
      ++meshes;
    }

    std::vector<Point3> p3(1500);
    for (auto& p : p3) p = {u(rng), u(rng), u(rng)};
    // Points on a few planes, as around fractures.
    std::vector<Point3> planar;
    for (int i = 0; i < 1500; ++i) {
      const double a = u(rng), b = u(rng);
      switch (i % 3) {
        case 0: planar.push_back({a, b, 0.5}); break;
        case 1: planar.push_back({0.5, a, b}); break;
        default: planar.push_back({a, 0.25 + 0.5 * b, 0.25 + 0.5 * b}); break;
      }
    }
    for (const auto& pts : {p3, planar}) {
      const auto t = delaunay3d(pts);
      bad_empty += emptiness_oracle<3>(pts, t, [&](const Tetrahedron& c) {
        return circumsphere_ld(pts[c[0]], pts[c[1]], pts[c[2]], pts[c[3]]);
      });
      bad_hull += hull_oracle<3>(pts, t);
      max_pts = std::max(max_pts, pts.size());
      ++meshes;
    }
  }
  return {bad_empty == 0 && bad_hull == 0 && max_pts <= 5000,
          fmt("%zu meshes over 20 seeds (max %zu points): non-empty circumballs %zu, hull "
              "defects %zu",
              meshes, max_pts, bad_empty, bad_hull)};
}

Verdict c3_conformity() {
  const DFN dfn = fixture("network25.json");
  RunConfig cfg;
  cfg.params = paper_params(0.01);
  cfg.mode = Mode::mesh2d;
  const auto res = run_pipeline(dfn, cfg);
  std::size_t total = 0, found = 0;
  for (std::size_t f = 0; f < res.fractures.size(); ++f) {
    const auto& fr = res.fractures[f];
    std::set<std::pair<std::int64_t, std::int64_t>> edges;
    for (const auto& t : fr.triangles)
      for (int e = 0; e < 3; ++e) {
        const auto a = fr.sample.keys[t[e]], b = fr.sample.keys[t[(e + 1) % 3]];
        if (a >= 0 && b >= 0) edges.insert({std::min(a, b), std::max(a, b)});
      }
    // Every consecutive pair of the shared line sampling must be an edge.
    for (auto k : res.decomposition.fractures[f].lines) {
      const auto& keys = res.decomposition.lines[k].keys;
      for (std::size_t n = 0; n + 1 < keys.size(); ++n) {
        ++total;
        found += edges.count({std::min(keys[n], keys[n + 1]), std::max(keys[n], keys[n + 1])});
      }
    }
  }
  return {total > 0 && found == total,
          fmt("%zu of %zu intersection sub-segments are mesh edges (%.3f%%) on %zu fractures",
              found, total, 100.0 * double(found) / double(total), res.fractures.size())};
}

Verdict c4_quality() {
  const DFN dfn = fixture("three_intersections.json");
  const double floor_angle = 26.74 - 3.0;
  bool pass = true;
  std::string detail;
  for (auto [k, rounds] : {std::pair{20, 1}, std::pair{80, 0}}) {
    double mn = 180, mx = 0, asp = 1;
    std::size_t n = 0, below25 = 0, over120 = 0, below_asp = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      RunConfig cfg;
      cfg.params = paper_params(0.01);
      cfg.sampler.k = k;
      cfg.sampler.resample_rounds = rounds;
      cfg.mode = Mode::mesh2d;
      cfg.seed = seed;
      const auto res = run_pipeline(dfn, cfg);
      const auto& fr = res.fractures[0];
      for (const auto& t : fr.triangles) {
        const auto s = tri_shape(res.dfn_sample.points[fr.global[t[0]]],
                                 res.dfn_sample.points[fr.global[t[1]]],
                                 res.dfn_sample.points[fr.global[t[2]]]);
        mn = std::min(mn, s.min_angle);
        mx = std::max(mx, s.max_angle);
        asp = std::min(asp, s.aspect);
        below25 += s.min_angle < 25.0;
        over120 += s.max_angle > 120.0;
        below_asp += s.aspect < 0.45;
        ++n;
      }
    }
    const double frac25 = double(below25) / double(n);
    const bool ok = frac25 <= 1e-3 && mn >= floor_angle && mx <= 120.0 && asp >= 0.45;
    pass &= ok;
    detail += fmt("%sk=%d/%d resample: %zu triangles, min angle %.2f (%.3f%% < 25), max angle "
                  "%.2f (%zu > 120), min aspect %.3f (%zu < 0.45)",
                  detail.empty() ? "" : "; ", k, rounds, n, mn, 100 * frac25, mx, over120, asp,
                  below_asp);
  }
  return {pass, detail};
}

// Measured maximality: the largest empty circle centred at a grid cell that
// no node marks as blocked (home cell, or a cell g with diam(g U home) <=
// rho / (1 + A)), relative to rho there. The exact largest empty circle
// (Delaunay circumcircles with centres in the fracture) is reported as well.
Verdict c5_maximality() {
  const DFN dfn = fixture("three_intersections.json");
  double probe = 0, exact = 0;
  std::size_t runs = 0, probes = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const RadiusParams p = paper_params(0.01);
    const auto dec = decompose(dfn, p, seed);
    for (std::size_t f = 0; f < dec.fractures.size(); ++f) {
      const auto& fs = dec.fractures[f];
      const RadiusField2D field(fs.pslg.intersections, p);
      SamplerOptions o;
      o.k = 20;
      o.resample_rounds = 1;
      const auto r = sample_fracture_2d(fs.pslg, field, fs.fixed, o, hash_seed({seed, f}));
      const auto& pts = r.sample.points;
      const auto& g = r.geom;
      const double s = g.cell_side;
      std::vector<char> marked(static_cast<std::size_t>(g.dims[0] * g.dims[1]), 0);
      auto cell_of = [&](const Point2& x, int axis) {
        return std::clamp<std::int64_t>(
            static_cast<std::int64_t>(std::floor((x[axis] - g.origin[axis]) / s)), 0,
            g.dims[axis] - 1);
      };
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::int64_t hx = cell_of(pts[i], 0), hy = cell_of(pts[i], 1);
        const double lim = r.sample.rho[i] / (1 + p.a);
        const auto reach = static_cast<std::int64_t>(lim / s) + 1;
        for (std::int64_t y = std::max<std::int64_t>(0, hy - reach);
             y <= std::min(g.dims[1] - 1, hy + reach); ++y)
          for (std::int64_t x = std::max<std::int64_t>(0, hx - reach);
               x <= std::min(g.dims[0] - 1, hx + reach); ++x) {
            const double wx = s * double(std::llabs(x - hx) + 1), wy = s * double(std::llabs(y - hy) + 1);
            if ((x == hx && y == hy) || wx * wx + wy * wy <= lim * lim)
              marked[static_cast<std::size_t>(y * g.dims[0] + x)] = 1;
          }
      }
      std::vector<Point2> sorted = pts;
      std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a[0] < b[0]; });
      auto nearest = [&](const Point2& c) {
        double best = INFINITY;
        auto it = std::lower_bound(sorted.begin(), sorted.end(), c[0],
                                   [](const Point2& q, double x) { return q[0] < x; });
        for (auto k = it; k != sorted.end() && (*k)[0] - c[0] < best; ++k) best = std::min(best, distance(*k, c));
        for (auto k = it; k != sorted.begin() && c[0] - (*(k - 1))[0] < best; --k)
          best = std::min(best, distance(*(k - 1), c));
        return best;
      };
      for (std::int64_t y = 0; y < g.dims[1]; ++y)
        for (std::int64_t x = 0; x < g.dims[0]; ++x) {
          if (marked[static_cast<std::size_t>(y * g.dims[0] + x)]) continue;
          const Point2 c{g.origin[0] + (double(x) + 0.5) * s, g.origin[1] + (double(y) + 0.5) * s};
          if (!point_in_polygon(c, fs.pslg.polygon)) continue;
          ++probes;
          probe = std::max(probe, nearest(c) / field.evaluate(c) - 1.0);
        }
      for (const auto& t : delaunay2d(pts)) {
        const Ball<2> b = circumcircle(pts[t[0]], pts[t[1]], pts[t[2]]);
        const Point2 c{static_cast<double>(b.c[0]), static_cast<double>(b.c[1])};
        if (!point_in_polygon(c, fs.pslg.polygon)) continue;
        exact = std::max(exact, static_cast<double>(std::sqrt(b.r2)) / field.evaluate(c) - 1.0);
      }
      ++runs;
    }
  }
  return {probe <= 0.15,
          fmt("epsilon %.4f over %zu unmarked-cell probes in %zu fracture samplings, k=20, 1 "
              "resample (limit 0.15); exact largest empty circle gives %.4f",
              probe, probes, runs, exact)};
}

Verdict c6_linearity() {
  const DFN dfn = fixture("three_intersections.json");
  SamplerOptions o;
  o.k = 20;
  o.resample_rounds = 1;
  std::vector<double> lx, ly;
  std::string pts;
  const auto t0 = Clock::now();
  for (double h : {0.04, 0.02, 0.01, 0.005, 0.0025, 0.00125, 0.0008}) {
    const auto b = bench_fracture_sampling(dfn, paper_params(h), o, kDefaultSeed, 3);
    lx.push_back(std::log(double(b.nodes)));
    ly.push_back(std::log(b.median_seconds));
    pts += fmt(" %zu:%.4fs", b.nodes, b.median_seconds);
  }
  const double s = slope(lx, ly);
  const double decades = (lx.back() - lx.front()) / std::log(10.0);
  const double secs = since(t0);
  return {s >= 0.85 && s <= 1.15 && decades >= 2.0 && secs < 300,
          fmt("slope %.3f over %.2f decades of nodes (range [0.85, 1.15]);%s", s, decades,
              pts.c_str())};
}

struct KSweep {
  std::vector<int> ks;
  std::vector<SamplingBench> fast, base;
};

KSweep k_sweep() {
  const DFN dfn = fixture("three_intersections.json");
  KSweep out;
  for (int k : {5, 10, 20, 40, 80, 160}) {
    SamplerOptions o;
    o.k = k;
    o.resample_rounds = 1;
    out.ks.push_back(k);
    out.fast.push_back(bench_fracture_sampling(dfn, paper_params(0.01), o, kDefaultSeed, 3));
    o.baseline = true;
    out.base.push_back(bench_fracture_sampling(dfn, paper_params(0.01), o, kDefaultSeed, 3));
  }
  return out;
}

Verdict c7_k_scaling(const KSweep& sw) {
  std::vector<double> lx, ly;
  std::string pts;
  for (std::size_t i = 0; i < sw.ks.size(); ++i) {
    lx.push_back(std::log(double(sw.ks[i])));
    ly.push_back(std::log(sw.fast[i].median_seconds));
    pts += fmt(" k%d:%.4fs", sw.ks[i], sw.fast[i].median_seconds);
  }
  const double s = slope(lx, ly);
  return {s >= 0.6 && s <= 1.0, fmt("slope %.3f (range [0.6, 1.0]);%s", s, pts.c_str())};
}

Verdict c8_speedup(const KSweep& sw) {
  const double s5 = sw.base.front().median_seconds / sw.fast.front().median_seconds;
  const double s160 = sw.base.back().median_seconds / sw.fast.back().median_seconds;
  return {s5 >= 1.3 && s160 >= 4.0,
          fmt("baseline/default time at k=5 %.2fx (need 1.3x), at k=160 %.2fx (need 4x)", s5,
              s160)};
}

Verdict c9_resampling() {
  const DFN dfn = fixture("three_intersections.json");
  double lo = 0, hi = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SamplerOptions a;
    a.k = 5;
    a.resample_rounds = 1;
    SamplerOptions b;
    b.k = 80;
    b.resample_rounds = 0;
    lo += double(bench_fracture_sampling(dfn, paper_params(0.01), a, seed, 1).nodes);
    hi += double(bench_fracture_sampling(dfn, paper_params(0.01), b, seed, 1).nodes);
  }
  const double rel = std::fabs(lo - hi) / hi;
  return {rel <= 0.10, fmt("k=5/1 resample %.0f nodes vs k=80/0 resamples %.0f nodes (3 seeds): "
                           "%.1f%% apart (limit 10%%)",
                           lo / 3, hi / 3, 100 * rel)};
}

Verdict c10_slivers(Shared& sh) {
  const DFN dfn = fixture("three_fractures.json");
  const auto t0 = Clock::now();
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig cfg;
    cfg.params = paper_params(0.03);
    cfg.mode = Mode::full;
    cfg.seed = seed;
    auto res = run_pipeline(dfn, cfg);
    // Independent recount of slivers in the final mesh.
    std::size_t slivers = 0, fracture_only = 0;
    const auto& m = res.volume_mesh;
    for (const auto& t : m.cells) {
      const auto s = tet_shape(m.points[t[0]], m.points[t[1]], m.points[t[2]], m.points[t[3]]);
      if (s.min_dihedral < 8.0 || s.max_dihedral > 170.0 || s.aspect < 0.2) {
        ++slivers;
        int vol = 0;
        for (auto v : t) vol += res.volume_sample.tags[v] == Tag::volume;
        fracture_only += vol == 0;
      }
    }
    std::size_t vol_nodes = 0;
    for (auto tag : res.volume_sample.tags) vol_nodes += tag == Tag::volume;
    std::string removals;
    for (const auto& it : res.sliver_log) removals += fmt("%s%zu", removals.empty() ? "" : "/", it.removed);
    const bool ok = slivers == 0 && res.sliver_log.size() <= 50;
    pass &= ok;
    detail += fmt("%sseed %llu: %zu volume nodes, %zu iterations, removals %s (max %.2f%% of "
                  "nodes), %zu slivers left (%zu without volume nodes)",
                  detail.empty() ? "" : "; ", static_cast<unsigned long long>(seed), vol_nodes,
                  res.sliver_log.size(), removals.c_str(),
                  res.sliver_log.empty()
                      ? 0.0
                      : 100.0 * double(res.sliver_log[0].removed) / double(res.volume_sample.size()),
                  slivers, fracture_only);
    sh.volume_samples.emplace_back(dfn, res.volume_sample);
  }
  const double secs = since(t0);
  pass &= secs < 900;
  return {pass, detail + fmt("; %.0f s (limit 900 s)", secs)};
}

Verdict c11_standoff(const Shared& sh) {
  std::size_t bad = 0, checked = 0;
  for (const auto& [dfn, s] : sh.volume_samples) bad += standoff_oracle(s, dfn, &checked);
  return {bad == 0 && checked > 0,
          fmt("%zu volume nodes in %zu meshes checked against every fracture and box face: %zu "
              "closer than rho/2",
              checked, sh.volume_samples.size(), bad)};
}

std::string serialize(const PipelineResult& r) {
  std::string out = points_csv(r.dfn_sample);
  std::vector<std::vector<std::uint32_t>> cells;
  for (const auto& t : r.surface) cells.push_back({t[0], t[1], t[2]});
  out += vtk_string(r.dfn_sample.points, cells);
  out += points_csv(r.volume_sample);
  cells.clear();
  for (const auto& t : r.volume_mesh.cells) cells.push_back({t[0], t[1], t[2], t[3]});
  out += vtk_string(r.volume_mesh.points, cells);
  for (const auto& f : r.fractures) {
    cells.clear();
    for (const auto& t : f.triangles) cells.push_back({f.global[t[0]], f.global[t[1]], f.global[t[2]]});
    out += vtk_string(r.dfn_sample.points, cells);
  }
  return out;
}

Verdict c12_determinism() {
  std::size_t identical = 0, total = 0, bytes = 0;
  const struct {
    const char* name;
    double h;
    Mode mode;
  } cases[] = {{"three_fractures.json", 0.05, Mode::full},
               {"network25.json", 0.02, Mode::mesh2d},
               {"network25.json", 0.05, Mode::mesh3d}};
  for (const auto& c : cases) {
    const DFN dfn = fixture(c.name);
    RunConfig a;
    a.params = paper_params(c.h);
    a.params.rho_max = 3 * c.h;
    a.mode = c.mode;
    a.seed = 7;
    RunConfig b = a;
    a.jobs = 1;
    b.jobs = 8;
    const std::string sa = serialize(run_pipeline(dfn, a));
    const std::string sb = serialize(run_pipeline(dfn, b));
    identical += sa == sb;
    bytes += sa.size();
    ++total;
  }
  return {identical == total, fmt("%zu of %zu runs byte-identical with 1 and 8 jobs (%zu bytes "
                                  "of points and meshes)",
                                  identical, total, bytes)};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  Shared sh;
  std::vector<std::pair<const char*, Verdict>> out;
  auto run = [&](const char* name, auto fn) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(),
                since(t0));
    std::fflush(stdout);
    out.emplace_back(name, v);
  };
  run("1 empty-disk", [&] { return c1_empty_disk(sh); });
  run("2 delaunay", [] { return c2_delaunay(); });
  run("3 conformity", [] { return c3_conformity(); });
  run("4 2d-quality", [] { return c4_quality(); });
  run("5 maximality", [] { return c5_maximality(); });
  run("6 linearity", [] { return c6_linearity(); });
  KSweep sw;
  bool sweep_ok = true;
  try {
    sw = k_sweep();
  } catch (const std::exception& e) {
    sweep_ok = false;
    std::printf("k sweep error: %s\n", e.what());
  }
  run("7 k-scaling", [&] { return sweep_ok ? c7_k_scaling(sw) : Verdict{false, "no sweep"}; });
  run("8 fast-reject", [&] { return sweep_ok ? c8_speedup(sw) : Verdict{false, "no sweep"}; });
  run("9 resampling", [] { return c9_resampling(); });
  run("10 slivers", [&] { return c10_slivers(sh); });
  run("11 standoff", [&] { return c11_standoff(sh); });
  run("12 determinism", [] { return c12_determinism(); });

  int failed = 0, errors = 0;
  for (const auto& [name, v] : out) {
    failed += !v.pass;
    errors += v.detail.rfind("error: ", 0) == 0;
  }
  std::printf("acceptance: %d of %zu criteria pass\n", int(out.size()) - failed, out.size());
  if (strict) return failed;
  return errors > 0 ? 1 : 0;
}
