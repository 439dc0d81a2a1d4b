#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "mpsmesh/accel_grid.hpp"
#include "mpsmesh/geometry.hpp"
#include "mpsmesh/radius_field.hpp"
#include "mpsmesh/rng.hpp"
#include "mpsmesh/sample.hpp"

namespace mpsmesh {

enum class AnnulusLaw { area, radius };

struct SamplerOptions {
  int k = 30;
  int resample_rounds = 3;
  bool baseline = false;  // no occupied-cell fast reject
  AnnulusLaw annulus_law = AnnulusLaw::area;
  std::uint64_t max_candidates_per_node = 1'000'000;
};

struct SamplerStats {
  std::uint64_t candidates = 0;
  std::uint64_t fast_rejects = 0;
  std::uint64_t distance_rejects = 0;
  std::uint64_t outside = 0;
  std::uint64_t standoff = 0;
  std::uint64_t accepts = 0;
  std::uint64_t distance_computations = 0;
  // Nodes added by the main pass (entry 0) and by each resampling round.
  std::vector<std::uint64_t> added_per_round;

  SamplerStats& operator+=(const SamplerStats& o);
};

enum class Outcome { accepted, blocked_cell, conflict, outside_domain, standoff };

// Radial bounds of the candidate annulus / shell around a node of radius rho.
inline double annulus_inner(double rho, double a) { return rho / (1.0 + a); }
inline double annulus_outer(double rho, double a) { return 2.0 * rho / (1.0 - a); }

// Distance from the centre for a uniform u in [0,1).
template <int D>
double draw_radius(double r_in, double r_out, double u, AnnulusLaw law) {
  if (law == AnnulusLaw::radius) return r_in + u * (r_out - r_in);
  if constexpr (D == 2)
    return std::sqrt(r_in * r_in + u * (r_out * r_out - r_in * r_in));
  else
    return std::cbrt(r_in * r_in * r_in +
                     u * (r_out * r_out * r_out - r_in * r_in * r_in));
}

template <int D>
Vec<D> random_direction(Rng& rng) {
  if constexpr (D == 2) {
    const double t = 2.0 * std::numbers::pi * rng.uniform();
    return {std::cos(t), std::sin(t)};
  } else {
    const double z = 2.0 * rng.uniform() - 1.0;
    const double t = 2.0 * std::numbers::pi * rng.uniform();
    const double s = std::sqrt(std::fmax(0.0, 1.0 - z * z));
    return {s * std::cos(t), s * std::sin(t), z};
  }
}

// k candidates on the annulus (2D) or shell (3D) [rho/(1+a), 2 rho/(1-a)].
template <int D>
void generate_candidates(const Vec<D>& x, double rho, double a, int k, Rng& rng,
                         AnnulusLaw law, std::vector<Vec<D>>& out) {
  const double ri = annulus_inner(rho, a);
  const double ro = annulus_outer(rho, a);
  out.clear();
  for (int j = 0; j < k; ++j) {
    const double r = draw_radius<D>(ri, ro, rng.uniform(), law);
    out.push_back(x + random_direction<D>(rng) * r);
  }
}

inline std::vector<Point2> generate_annulus_candidates(
    const Point2& x, double rho, double a, int k, Rng& rng,
    AnnulusLaw law = AnnulusLaw::area) {
  std::vector<Point2> out;
  generate_candidates<2>(x, rho, a, k, rng, law, out);
  return out;
}

inline std::vector<Point3> generate_shell_candidates(
    const Point3& x, double rho, double a, int k, Rng& rng,
    AnnulusLaw law = AnnulusLaw::area) {
  std::vector<Point3> out;
  generate_candidates<3>(x, rho, a, k, rng, law, out);
  return out;
}

// Dart-throwing core shared by the fracture and volume samplers: the main
// pass serves every accepted node once as a centre, drawing batches of k
// candidates until a whole batch is rejected; resampling throws one dart
// per unmarked domain cell and then resumes the main pass.
template <int D>
class PoissonSampler {
 public:
  using Point = Vec<D>;
  using ContainsFn = std::function<bool(const Point&)>;
  using RadiusFn = std::function<double(const Point&, CellIndex)>;
  // Returns true when the candidate keeps the required clearance.
  using StandoffFn = std::function<bool(const Point&, double)>;

  PoissonSampler(GridGeometry<D> geom, CellBits domain, double lipschitz,
                 ContainsFn contains, RadiusFn radius, StandoffFn standoff,
                 SamplerOptions opts, std::uint64_t seed, Tag accept_tag)
      : grid_(geom),
        domain_(std::move(domain)),
        lipschitz_(lipschitz),
        contains_(std::move(contains)),
        radius_(std::move(radius)),
        standoff_(std::move(standoff)),
        opts_(opts),
        rng_(seed),
        accept_tag_(accept_tag) {
    if (opts_.k < 1) throw Error(ErrorKind::InvalidParams, "k must be >= 1");
    if (opts_.resample_rounds < 0)
      throw Error(ErrorKind::InvalidParams, "resample rounds must be >= 0");
    sample_.rng_seed = seed;
  }

  // Inserts a prescribed node. With `check`, a node that conflicts with an
  // existing one is dropped and false is returned.
  bool add_seed(const Point& p, double rho, Tag tag, std::int64_t key,
                bool check) {
    const CellIndex cell = grid_.geometry().index_of(p);
    if (check && conflicts(p, rho)) return false;
    if (grid_.has_node(cell)) {
      if (check) return false;
      throw Error(ErrorKind::InvalidParams, "two seed nodes share a grid cell");
    }
    insert(p, rho, tag, key, cell);
    return true;
  }

  // `rho_floor` is a lower bound of the radius at p (0 if unknown); a
  // conflict at that radius is already decisive, so the radius field is
  // only evaluated for candidates that survive it.
  Outcome try_accept(const Point& p, double rho_floor = 0.0) {
    ++stats_.candidates;
    if (!contains_(p)) {
      ++stats_.outside;
      return Outcome::outside_domain;
    }
    const CellIndex cell = grid_.geometry().index_of(p);
    if (!opts_.baseline && grid_.is_blocked(cell)) {
      ++stats_.fast_rejects;
      return Outcome::blocked_cell;
    }
    if (rho_floor > 0.0 && (grid_.has_node(cell) || conflicts(p, rho_floor))) {
      ++stats_.distance_rejects;
      return Outcome::conflict;
    }
    const double rho = radius_(p, cell);
    if (standoff_ && !standoff_(p, rho)) {
      ++stats_.standoff;
      return Outcome::standoff;
    }
    if (grid_.has_node(cell) || conflicts(p, rho)) {
      ++stats_.distance_rejects;
      return Outcome::conflict;
    }
    insert(p, rho, accept_tag_, -1, cell);
    ++stats_.accepts;
    return Outcome::accepted;
  }

  // Main pass from the current cursor; returns the number of nodes added.
  std::size_t run_main_pass() {
    const std::size_t before = sample_.size();
    std::vector<Point> batch;
    for (; cursor_ < sample_.size(); ++cursor_) {
      const Point x = sample_.points[cursor_];
      const double rho = sample_.rho[cursor_];
      // The field is lipschitz_-Lipschitz, so field(x) - lipschitz_ |p - x|
      // bounds it from below at every candidate p.
      const double field_x = radius_(x, grid_.geometry().index_of(x));
      std::uint64_t drawn = 0;
      bool any = true;
      while (any && drawn < opts_.max_candidates_per_node) {
        any = false;
        generate_candidates<D>(x, rho, lipschitz_, opts_.k, rng_,
                               opts_.annulus_law, batch);
        drawn += batch.size();
        for (const Point& p : batch) {
          const double floor = (field_x - lipschitz_ * distance(p, x)) * (1.0 - 1e-12);
          if (try_accept(p, floor) == Outcome::accepted) any = true;
        }
      }
    }
    return sample_.size() - before;
  }

  // One uniform candidate in each unmarked domain cell.
  std::size_t resample_empty_cells() {
    const std::size_t before = sample_.size();
    const auto& g = grid_.geometry();
    for (CellIndex c : unmarked_cells()) {
      if (grid_.is_blocked(c) || grid_.has_node(c)) continue;
      const auto box = g.cell_box(g.coord_of_index(c));
      Point p;
      for (int i = 0; i < D; ++i) p[i] = rng_.uniform(box.lo[i], box.hi[i]);
      try_accept(p);
    }
    return sample_.size() - before;
  }

  // Treats every node inserted so far as already served.
  void skip_served() { cursor_ = sample_.size(); }

  void run() {
    stats_.added_per_round.push_back(run_main_pass());
    for (int r = 0; r < opts_.resample_rounds; ++r) {
      std::size_t added = resample_empty_cells();
      added += run_main_pass();
      stats_.added_per_round.push_back(added);
    }
  }

  std::vector<CellIndex> unmarked_cells() const {
    return grid_.unmarked_cells(domain_);
  }

  const Sample<D>& sample() const { return sample_; }
  Sample<D>& sample() { return sample_; }
  const SamplerStats& stats() const { return stats_; }
  const AccelGrid<D>& grid() const { return grid_; }
  const CellBits& domain() const { return domain_; }

 private:
  bool conflicts(const Point& p, double rho) {
    bool hit = false;
    grid_.for_each_node_plus(p, rho, [&](std::uint32_t id) {
      ++stats_.distance_computations;
      const double r = pair_radius(rho, sample_.rho[id]);
      hit = distance2(p, sample_.points[id]) < r * r;
      return hit;
    });
    return hit;
  }

  void insert(const Point& p, double rho, Tag tag, std::int64_t key,
              CellIndex cell) {
    const auto id = static_cast<std::uint32_t>(sample_.size());
    sample_.push(p, rho, tag, key);
    grid_.insert_node(cell, id);
    if (opts_.baseline)
      grid_.mark_home(p);
    else
      grid_.mark_occupied(p, rho, lipschitz_);
  }

  AccelGrid<D> grid_;
  CellBits domain_;
  double lipschitz_;
  ContainsFn contains_;
  RadiusFn radius_;
  StandoffFn standoff_;
  SamplerOptions opts_;
  Rng rng_;
  Tag accept_tag_;
  Sample<D> sample_;
  SamplerStats stats_;
  std::size_t cursor_ = 0;
};

template <int D>
struct SamplingResult {
  Sample<D> sample;
  SamplerStats stats;
  GridGeometry<D> geom;
  // Domain cells still outside G_occ after the last round.
  std::vector<CellIndex> unmarked;
  std::size_t seeds_dropped = 0;
};

// ---------------------------------------------------------------------------
// 1D and 2D (fracture) sampling.

// Largest gap between consecutive boundary nodes that keeps every Delaunay
// circumcentre inside the closed polygon, relative to the left node's radius.
double boundary_gap_factor(double a);

struct BoundaryStats {
  std::size_t gaps = 0;
  std::size_t coverage_relaxed = 0;  // gaps above the coverage bound
};

// Samples the polygon boundary: every vertex (tag polygon_vertex) plus
// jittered boundary nodes whose consecutive gaps g satisfy
// rho(x) <= g <= boundary_gap_factor(a) * rho(x). `breakpoints` are points on
// the boundary that are sampled elsewhere (intersection endpoints); they
// split edges but are not emitted. Throws InfeasibleEdge when a piece is
// shorter than the local inhibition radius.
Sample2 sample_boundary_1d(std::span<const Point2> polygon,
                           std::span<const Point2> breakpoints,
                           const RadiusField2D& field, Rng& rng,
                           BoundaryStats* stats = nullptr);

// Nodes along a polyline between fixed points (both ends fixed, interior
// fixed points allowed) with the same gap rule, evaluated with `radius`.
// Returns the interior nodes only, in order along the polyline.
template <int D>
std::vector<Vec<D>> sample_polyline_1d(
    std::span<const Vec<D>> fixed, const std::function<double(const Vec<D>&)>& radius,
    double a, Rng& rng, BoundaryStats* stats = nullptr);

struct FracturePSLG {
  std::vector<Point2> polygon;           // counterclockwise, local coords
  std::vector<Segment2> intersections;   // local coords
};

struct FixedNode2 {
  Point2 p;
  double rho = 0.0;
  Tag tag = Tag::intersection;
  std::int64_t key = -1;
};

// Cells of `geom` whose closed box meets the polygon boundary.
CellBits polygon_boundary_cells(const GridGeometry<2>& geom,
                                std::span<const Point2> polygon);

// Cells of `geom` whose closed box meets the polygon.
CellBits polygon_domain_cells(const GridGeometry<2>& geom,
                              std::span<const Point2> polygon);

// Samples one fracture: boundary, dart rounds, then resampling. `fixed`
// holds nodes prescribed by the network (shared intersection samplings);
// fixed nodes on the boundary act as breakpoints for the boundary sampling.
SamplingResult<2> sample_fracture_2d(const FracturePSLG& pslg,
                                     const RadiusField2D& field,
                                     std::span<const FixedNode2> fixed,
                                     const SamplerOptions& opts,
                                     std::uint64_t seed);

// Measured maximality: the largest empty circle centred at an unmarked
// domain cell centre, relative to the local radius there.
// epsilon = max(0, max_x d(x) / rho(x) - 1) over probes inside the domain.
struct MaximalityProbe {
  double epsilon = 0.0;
  std::size_t probes = 0;
  Point2 worst;
};

MaximalityProbe probe_maximality(const SamplingResult<2>& result,
                                 const std::function<double(const Point2&)>& radius,
                                 const std::function<bool(const Point2&)>& contains);

// ---------------------------------------------------------------------------
// 3D sampling.

// A planar polygon the volume nodes must keep clear of.
struct StandoffSurface {
  PlaneFrame frame;
  std::vector<Point2> polygon;
  Box3 bbox;
};

StandoffSurface make_standoff_surface(std::span<const Point3> polygon);

// Distance from p to the nearest of the box faces and surfaces.
double standoff_distance(const Point3& p, const Box3& box,
                         std::span<const StandoffSurface> surfaces);

// Volume sampling seeded by `seeds` (fracture and box-face nodes). Volume
// nodes keep a distance of at least rho/2 from every box face and surface.
// With `refill` balls the seeds are taken as already served: resampling
// darts go only to unmarked cells meeting a ball, and only the nodes they
// add act as centres. Throws InvalidDomain if a seed lies outside the box.
SamplingResult<3> sample_volume_3d(const Sample3& seeds, const Box3& box,
                                   const RadiusField3D& field,
                                   std::span<const StandoffSurface> surfaces,
                                   const SamplerOptions& opts,
                                   std::uint64_t seed,
                                   std::span<const Sphere<3>> refill = {});

}  // namespace mpsmesh
