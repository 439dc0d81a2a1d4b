#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mpsmesh/geometry.hpp"
#include "mpsmesh/radius_field.hpp"
#include "mpsmesh/sample.hpp"
#include "mpsmesh/sampler.hpp"

namespace mpsmesh {

using Edge = std::array<std::uint32_t, 2>;

// Delaunay triangulation of the convex hull. Triangles are counterclockwise
// with the smallest id first; the list is sorted. `order` is the insertion
// order (default: by index). Cocircular ties are resolved towards the
// diagonal with the lower vertex-id sum.
// Throws AllCollinear / DuplicatePoints (within 1e-12).
std::vector<Triangle> delaunay2d(std::span<const Point2> points,
                                 std::span<const std::uint32_t> order = {});

// Delaunay tetrahedralization of the convex hull; tetrahedra positively
// oriented (orient3d > 0), sorted. Throws AllCoplanar / DuplicatePoints.
std::vector<Tetrahedron> delaunay3d(std::span<const Point3> points,
                                    std::span<const std::uint32_t> order = {});

// Insertion order by (tag priority, id): polygon vertices, boundary,
// intersection, interior, matrix boundary, volume.
std::vector<std::uint32_t> insertion_order(std::span<const Tag> tags);

struct Mesh2 {
  std::vector<Point2> points;
  std::vector<Triangle> cells;
  std::vector<Edge> constrained_edges;
};

struct Mesh3 {
  std::vector<Point3> points;
  std::vector<Tetrahedron> cells;
};

struct ConformingResult {
  Mesh2 mesh;
  // Input index of every mesh point, and the input indices removed.
  std::vector<std::uint32_t> kept;
  std::vector<std::uint32_t> removed;
  // Protected nodes found inside a diametral circle (left in place).
  std::vector<std::uint32_t> protected_hits;
  // Sub-segments (mesh ids) that are not edges of the triangulation.
  std::vector<Edge> missing;
};

// Deletes every node strictly inside the diametral circle of a sub-segment
// (except segment endpoints and nodes flagged in `keep`), triangulates the
// rest and audits that each sub-segment is a mesh edge. Throws
// SegmentEndpointMissing if a sub-segment refers to a missing point.
ConformingResult make_conforming(std::span<const Point2> points,
                                 std::span<const Edge> subsegments,
                                 std::span<const Tag> tags = {});

// Keeps triangles whose centroid lies in the polygon, except flat ones
// with all corners on a single polygon edge.
std::vector<Triangle> clip_to_polygon(std::span<const Point2> points,
                                      std::span<const Triangle> triangles,
                                      std::span<const Point2> polygon);

// Undirected edge set of a triangulation.
std::vector<Edge> mesh_edges(std::span<const Triangle> triangles);
std::vector<Edge> mesh_edges(std::span<const Tetrahedron> tets);

struct SliverThresholds {
  double min_dihedral = 8.0;
  double max_dihedral = 170.0;
  double min_aspect = 0.2;
  void validate() const;
};

// Cells with min dihedral < min, max dihedral > max, or aspect < min_aspect.
std::vector<std::uint32_t> detect_slivers(std::span<const Point3> points,
                                          std::span<const Tetrahedron> tets,
                                          const SliverThresholds& thresholds);

struct SliverIteration {
  std::size_t slivers = 0;
  std::size_t removed = 0;
  std::size_t unremovable = 0;  // slivers with no volume node
  std::size_t nodes = 0;
  std::size_t cells = 0;
};

struct SliverLoopResult {
  Sample3 sample;
  Mesh3 mesh;
  std::vector<SliverIteration> log;
  bool converged = false;
};

// Sliver resampling: while the tetrahedralization has slivers, remove
// two volume nodes of each (the ones closest to their opposite face) and
// rerun the volume sampler from the survivors. Fracture and box-face nodes
// are never removed. Stops after max_iters rounds (converged = false).
SliverLoopResult sliver_removal_loop(Sample3 sample, const Box3& box,
                                     const RadiusField3D& field,
                                     std::span<const StandoffSurface> surfaces,
                                     const SliverThresholds& thresholds,
                                     const SamplerOptions& opts,
                                     std::uint64_t seed, int max_iters = 50);

// Histograms and extremes per metric.
struct MetricSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::size_t n = 0;
};

struct Histogram {
  double bin_width = 1.0;
  std::map<long, std::size_t> bins;  // bin index -> count
};

struct QualityReport {
  std::map<std::string, MetricSummary> summary;
  std::map<std::string, Histogram> histograms;
  std::map<std::string, std::vector<double>> values;  // per cell
};

struct QualityBins {
  double angle = 1.0;
  double aspect = 0.01;
};

// Metrics: min_angle, max_angle, aspect.
QualityReport quality_report(std::span<const Point3> points,
                             std::span<const Triangle> triangles,
                             QualityBins bins = {});
QualityReport quality_report(std::span<const Point2> points,
                             std::span<const Triangle> triangles,
                             QualityBins bins = {});
// Metrics: min_dihedral, max_dihedral, aspect.
QualityReport quality_report(std::span<const Point3> points,
                             std::span<const Tetrahedron> tets,
                             QualityBins bins = {});

// CSV rows metric,bin_lo,bin_hi,count.
std::string quality_csv(const QualityReport& report);
// {metric: {min, max, mean, n}}.
std::string quality_json(const QualityReport& report);

}  // namespace mpsmesh
