#include "mpsmesh/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "mpsmesh/error.hpp"
#include "mpsmesh/rng.hpp"

namespace mpsmesh {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool in_polygon_closed(const Point2& p, std::span<const Point2> poly, double tol) {
  return point_in_polygon(p, poly) || polygon_boundary_distance(p, poly) <= tol;
}

double polygon_diagonal(std::span<const Point2> poly) {
  Box2 b = Box2::empty();
  for (const auto& p : poly) b.expand(p);
  return b.diagonal();
}

// Per-fracture node set after the merge: shared nodes at their prescribed
// local positions first, then the fracture's own surviving nodes.
struct LocalNodes {
  Sample2 sample;
  std::vector<std::uint32_t> merged;  // index into the merged sample
};

LocalNodes local_nodes(std::size_t f, const FractureSetup& setup,
                       const MergedSample& merged,
                       const std::vector<SamplingResult<2>>& sampled,
                       const std::unordered_map<std::int64_t, std::uint32_t>& key_index) {
  LocalNodes out;
  for (const auto& fx : setup.fixed) {
    const auto it = key_index.find(fx.key);
    if (it == key_index.end()) continue;
    out.sample.push(fx.p, merged.sample.rho[it->second], fx.tag, fx.key);
    out.merged.push_back(it->second);
  }
  const auto& own = sampled[f].sample;
  for (std::uint32_t m = 0; m < merged.sample.size(); ++m) {
    if (merged.fracture[m] != static_cast<std::int32_t>(f)) continue;
    const std::uint32_t s = merged.source[m];
    if (own.keys[s] >= 0) continue;
    out.sample.push(own.points[s], own.rho[s], own.tags[s], -1);
    out.merged.push_back(m);
  }
  return out;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::mesh2d: return "mesh2d";
    case Mode::mesh3d: return "mesh3d";
    case Mode::full: return "full";
  }
  return "full";
}

Mode mode_from_string(std::string_view s) {
  if (s == "mesh2d") return Mode::mesh2d;
  if (s == "mesh3d") return Mode::mesh3d;
  if (s == "full") return Mode::full;
  throw Error(ErrorKind::InvalidParams, "unknown mode '" + std::string(s) + "'");
}

void RunConfig::validate() const {
  params.validate();
  thresholds.validate();
  if (sampler.k < 1) throw Error(ErrorKind::InvalidParams, "k must be >= 1");
  if (sampler.resample_rounds < 0)
    throw Error(ErrorKind::InvalidParams, "resample rounds must be >= 0");
  if (jobs < 1) throw Error(ErrorKind::InvalidParams, "jobs must be >= 1");
  if (max_sliver_iters < 0)
    throw Error(ErrorKind::InvalidParams, "max sliver iterations must be >= 0");
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Sample3 sample_box_faces(const Box3& box, const RadiusField3D& field, const RunConfig& cfg) {
  const RadiusParams& params = cfg.params;
  const auto radius = [&](const Point3& p) {
    return field.empty() ? params.rho_max : field.evaluate(p);
  };

  Sample3 out;
  std::array<Point3, 8> corner;
  for (int c = 0; c < 8; ++c) {
    for (int i = 0; i < 3; ++i) corner[c][i] = (c >> i) & 1 ? box.hi[i] : box.lo[i];
    out.push(corner[c], radius(corner[c]), Tag::matrix_boundary, c);
  }

  // Edge e joins corners a and a | (1 << axis) with bit `axis` of a clear.
  struct BoxEdge {
    int a, b;
    std::vector<std::uint32_t> nodes;  // interior nodes, in order from a
  };
  std::vector<BoxEdge> edges;
  const std::function<double(const Point3&)> rfn = radius;
  for (int axis = 0; axis < 3; ++axis)
    for (int a = 0; a < 8; ++a) {
      if ((a >> axis) & 1) continue;
      BoxEdge e{a, a | (1 << axis), {}};
      Rng rng(hash_seed({cfg.seed, 0xB0E5u, static_cast<std::uint64_t>(edges.size())}));
      const std::array<Point3, 2> ends{corner[e.a], corner[e.b]};
      for (const auto& p : sample_polyline_1d<3>(ends, rfn, params.a, rng)) {
        e.nodes.push_back(static_cast<std::uint32_t>(out.size()));
        out.push(p, radius(p), Tag::matrix_boundary, static_cast<std::int64_t>(out.size()));
      }
      edges.push_back(std::move(e));
    }

  // Face = fixed axis and side; its local frame spans the other two axes.
  for (int axis = 0; axis < 3; ++axis)
    for (int side = 0; side < 2; ++side) {
      const int ua = (axis + 1) % 3, va = (axis + 2) % 3;
      PlaneFrame frame;
      frame.origin = box.lo;
      frame.origin[axis] = side ? box.hi[axis] : box.lo[axis];
      frame.u = {0, 0, 0};
      frame.v = {0, 0, 0};
      frame.n = {0, 0, 0};
      frame.u[ua] = 1.0;
      frame.v[va] = 1.0;
      frame.n[axis] = 1.0;
      const double lu = box.extent(ua), lv = box.extent(va);
      const std::vector<Point2> rect{{0, 0}, {lu, 0}, {lu, lv}, {0, lv}};
      const auto geom = make_grid_geometry(Box2{{0, 0}, {lu, lv}}, params.h);
      const std::uint64_t face = static_cast<std::uint64_t>(2 * axis + side);

      PoissonSampler<2> sampler(
          geom, polygon_domain_cells(geom, rect), params.a,
          [lu, lv](const Point2& p) {
            return p[0] >= 0.0 && p[0] <= lu && p[1] >= 0.0 && p[1] <= lv;
          },
          [&](const Point2& p, CellIndex) { return radius(frame.to_world(p)); },
          nullptr, cfg.sampler, hash_seed({cfg.seed, 0xFACEu, face}), Tag::matrix_boundary);

      const auto on_face = [&](int c) { return ((c >> axis) & 1) == side; };
      for (int c = 0; c < 8; ++c)
        if (on_face(c)) sampler.add_seed(frame.to_local(corner[c]), out.rho[c], Tag::matrix_boundary, c, true);
      for (const auto& e : edges)
        if (on_face(e.a) && on_face(e.b))
          for (auto id : e.nodes)
            sampler.add_seed(frame.to_local(out.points[id]), out.rho[id], Tag::matrix_boundary,
                             out.keys[id], true);
      sampler.run();
      const auto& s = sampler.sample();
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.keys[i] >= 0) continue;
        Point3 p = frame.to_world(s.points[i]);
        p[axis] = frame.origin[axis];
        out.push(p, s.rho[i], Tag::matrix_boundary, -1);
      }
    }
  // Keys only serve to share edge nodes between faces.
  std::fill(out.keys.begin(), out.keys.end(), -1);
  return out;
}

SamplingBench bench_fracture_sampling(const DFN& dfn, const RadiusParams& params,
                                      const SamplerOptions& opts, std::uint64_t seed,
                                      int repeats) {
  if (repeats < 1) throw Error(ErrorKind::InvalidParams, "repeats must be >= 1");
  const Decomposition dec = decompose(dfn, params, seed);
  std::vector<RadiusField2D> fields;
  for (const auto& setup : dec.fractures) fields.emplace_back(setup.pslg.intersections, params);
  SamplingBench out;
  for (int run = 0; run <= repeats; ++run) {
    std::size_t nodes = 0;
    std::uint64_t dist = 0;
    const auto t0 = Clock::now();
    for (std::size_t f = 0; f < dec.fractures.size(); ++f) {
      const auto& setup = dec.fractures[f];
      const auto r = sample_fracture_2d(setup.pslg, fields[f], setup.fixed, opts,
                                        hash_seed({seed, 0xF4ACu, f}));
      nodes += r.sample.size();
      dist += r.stats.distance_computations;
    }
    const double s = seconds_since(t0);
    if (run == 0) continue;
    out.seconds.push_back(s);
    out.nodes = nodes;
    out.distance_computations = dist;
  }
  auto sorted = out.seconds;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  out.median_seconds = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return out;
}

PipelineResult run_pipeline(const DFN& dfn, const RunConfig& cfg) {
  cfg.validate();
  const auto t_total = Clock::now();
  PipelineResult res;

  auto t0 = Clock::now();
  res.decomposition = decompose(dfn, cfg.params, cfg.seed);
  const Decomposition& dec = res.decomposition;
  res.seconds["decompose"] = seconds_since(t0);

  const std::size_t nf = dfn.fractures.size();
  res.fractures.resize(nf);
  std::vector<SamplingResult<2>> sampled(nf);
  std::vector<Sample3> world(nf);

  t0 = Clock::now();
  parallel_for(nf, cfg.jobs, [&](std::size_t f) {
    const auto tf = Clock::now();
    const auto& setup = dec.fractures[f];
    const RadiusField2D field(setup.pslg.intersections, cfg.params);
    sampled[f] = sample_fracture_2d(setup.pslg, field, setup.fixed, cfg.sampler,
                                    hash_seed({cfg.seed, 0xF4ACu, f}));
    auto& fr = res.fractures[f];
    fr.stats = sampled[f].stats;
    fr.sampled_nodes = sampled[f].sample.size();
    fr.seeds_dropped = sampled[f].seeds_dropped;
    const auto& poly = setup.pslg.polygon;
    fr.probe = probe_maximality(
        sampled[f], [&](const Point2& p) { return field.evaluate(p); },
        [&](const Point2& p) { return point_in_polygon(p, poly); });
    world[f] = to_world(sampled[f].sample, setup, dec);
    fr.seconds = seconds_since(tf);
  });
  res.seconds["sample2d"] = seconds_since(t0);

  t0 = Clock::now();
  const MergedSample merged = merge_samples(world);
  res.merge_duplicates = merged.duplicates;
  res.merge_conflicts_removed = merged.conflicts_removed;
  res.merge_conflicts_unresolved = merged.conflicts_unresolved;
  std::unordered_map<std::int64_t, std::uint32_t> key_index;
  for (std::uint32_t m = 0; m < merged.sample.size(); ++m)
    if (merged.sample.keys[m] >= 0) key_index.emplace(merged.sample.keys[m], m);
  res.seconds["merge"] = seconds_since(t0);

  // Conforming meshes per fracture; removals are recorded against the
  // merged sample so the union stays consistent.
  t0 = Clock::now();
  std::vector<LocalNodes> nodes(nf);
  std::vector<ConformingResult> conf(nf);
  parallel_for(nf, cfg.jobs, [&](std::size_t f) {
    const auto tf = Clock::now();
    const auto& setup = dec.fractures[f];
    auto& fr = res.fractures[f];
    nodes[f] = local_nodes(f, setup, merged, sampled, key_index);
    const Sample2& ls = nodes[f].sample;
    const auto segs = fracture_subsegments(ls, dec, f, &fr.lost_line_nodes);
    conf[f] = make_conforming(ls.points, segs, ls.tags);
    fr.conforming_removed = conf[f].removed.size();
    fr.protected_hits = conf[f].protected_hits.size();
    fr.missing_subsegments = conf[f].missing.size();
    const auto& mesh = conf[f].mesh;
    fr.triangles = clip_to_polygon(mesh.points, mesh.cells, setup.pslg.polygon);
    fr.subsegments = mesh.constrained_edges;

    const double tol = 1e-9 * polygon_diagonal(setup.pslg.polygon);
    for (const auto& t : fr.triangles) {
      const auto c = circumsphere(mesh.points[t[0]], mesh.points[t[1]], mesh.points[t[2]]);
      if (!in_polygon_closed(c.center, setup.pslg.polygon, tol)) ++fr.circumcenters_outside;
    }
    for (auto k : conf[f].kept)
      fr.sample.push(ls.points[k], ls.rho[k], ls.tags[k], ls.keys[k]);
    fr.sample.rng_seed = sampled[f].sample.rng_seed;
    fr.seconds += seconds_since(tf);
  });

  std::vector<char> removed(merged.sample.size(), 0);
  for (std::size_t f = 0; f < nf; ++f)
    for (auto r : conf[f].removed) removed[nodes[f].merged[r]] = 1;
  std::vector<std::uint32_t> final_id(merged.sample.size(), UINT32_MAX);
  for (std::uint32_t m = 0; m < merged.sample.size(); ++m) {
    if (removed[m]) continue;
    final_id[m] = static_cast<std::uint32_t>(res.dfn_sample.size());
    res.dfn_sample.push(merged.sample.points[m], merged.sample.rho[m], merged.sample.tags[m],
                        merged.sample.keys[m]);
  }
  res.dfn_sample.rng_seed = cfg.seed;
  for (std::size_t f = 0; f < nf; ++f) {
    auto& fr = res.fractures[f];
    for (auto k : conf[f].kept) fr.global.push_back(final_id[nodes[f].merged[k]]);
    for (const auto& t : fr.triangles)
      res.surface.push_back({fr.global[t[0]], fr.global[t[1]], fr.global[t[2]]});
  }
  res.seconds["conform"] = seconds_since(t0);

  if (cfg.mode != Mode::mesh2d) {
    t0 = Clock::now();
    const RadiusField3D field(res.dfn_sample.points, res.dfn_sample.rho, cfg.params);
    const Sample3 faces = sample_box_faces(dfn.domain, field, cfg);

    // Face nodes too close to a fracture node give way.
    Sample3 seeds = res.dfn_sample;
    std::vector<std::uint32_t> by_x(res.dfn_sample.size());
    for (std::uint32_t i = 0; i < by_x.size(); ++i) by_x[i] = i;
    const auto& dp = res.dfn_sample.points;
    std::sort(by_x.begin(), by_x.end(), [&](auto a, auto b) { return dp[a][0] < dp[b][0]; });
    for (std::size_t i = 0; i < faces.size(); ++i) {
      const Point3& p = faces.points[i];
      const double r = faces.rho[i];
      auto it = std::lower_bound(by_x.begin(), by_x.end(), p[0] - r,
                                 [&](std::uint32_t a, double x) { return dp[a][0] < x; });
      bool hit = false;
      for (; it != by_x.end() && dp[*it][0] <= p[0] + r && !hit; ++it) {
        const double rr = pair_radius(r, res.dfn_sample.rho[*it]);
        hit = distance2(p, dp[*it]) < rr * rr;
      }
      if (hit) {
        ++res.face_conflicts_removed;
        continue;
      }
      seeds.push(p, r, faces.tags[i], -1);
    }
    res.face_nodes = seeds.size() - res.dfn_sample.size();
    res.seconds["faces"] = seconds_since(t0);

    std::vector<StandoffSurface> surfaces;
    for (const auto& poly : dfn.fractures) surfaces.push_back(make_standoff_surface(poly));

    t0 = Clock::now();
    auto vol = sample_volume_3d(seeds, dfn.domain, field, surfaces, cfg.sampler,
                                hash_seed({cfg.seed, 0x3Du}));
    res.volume_stats = vol.stats;
    res.seconds["volume"] = seconds_since(t0);

    t0 = Clock::now();
    if (cfg.mode == Mode::full) {
      auto loop = sliver_removal_loop(std::move(vol.sample), dfn.domain, field, surfaces,
                                      cfg.thresholds, cfg.sampler, cfg.seed,
                                      cfg.max_sliver_iters);
      res.volume_sample = std::move(loop.sample);
      res.volume_mesh = std::move(loop.mesh);
      res.sliver_log = std::move(loop.log);
      res.sliver_converged = loop.converged;
      res.slivers_remaining =
          detect_slivers(res.volume_mesh.points, res.volume_mesh.cells, cfg.thresholds).size();
      res.seconds["tetrahedralize"] = seconds_since(t0);
    } else {
      res.volume_sample = std::move(vol.sample);
      res.volume_mesh.points = res.volume_sample.points;
      res.volume_mesh.cells =
          delaunay3d(res.volume_sample.points, insertion_order(res.volume_sample.tags));
      res.slivers_remaining =
          detect_slivers(res.volume_mesh.points, res.volume_mesh.cells, cfg.thresholds).size();
      res.sliver_converged = res.slivers_remaining == 0;
      res.seconds["tetrahedralize"] = seconds_since(t0);
    }
  }

  t0 = Clock::now();
  res.quality2d = quality_report(std::span<const Point3>(res.dfn_sample.points), res.surface);
  if (!res.volume_mesh.cells.empty())
    res.quality3d = quality_report(std::span<const Point3>(res.volume_mesh.points),
                                   std::span<const Tetrahedron>(res.volume_mesh.cells));
  res.seconds["quality"] = seconds_since(t0);
  res.seconds["total"] = seconds_since(t_total);
  return res;
}

}  // namespace mpsmesh
