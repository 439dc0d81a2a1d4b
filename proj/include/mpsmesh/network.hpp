#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mpsmesh/delaunay.hpp"
#include "mpsmesh/geometry.hpp"
#include "mpsmesh/radius_field.hpp"
#include "mpsmesh/sample.hpp"
#include "mpsmesh/sampler.hpp"

namespace mpsmesh {

struct IntersectionSpec {
  std::uint32_t i = 0;  // i < j
  std::uint32_t j = 0;
  Point3 p1;
  Point3 p2;
};

struct DFN {
  std::vector<std::vector<Point3>> fractures;
  std::vector<IntersectionSpec> intersections;
  Box3 domain;
};

// JSON: {"fractures": [[[x,y,z], ...], ...],
//        "intersections": [{"i":0,"j":1,"p1":[..],"p2":[..]}, ...],
//        "domain": {"min":[..], "max":[..]}}
// Text (whitespace separated, '#' comments):
//   domain xmin ymin zmin xmax ymax zmax
//   fracture n x1 y1 z1 ... xn yn zn
//   intersection i j x1 y1 z1 x2 y2 z2
// Throws ParseError (syntax) or ValidationError (geometry).
DFN parse_dfn(const std::string& text);
DFN load_dfn(const std::filesystem::path& path);

// Checks: >= 3 vertices per fracture, planarity, vertices inside the domain,
// 0 <= i < j < #fractures, endpoints on both planes and inside both
// polygons (boundary allowed), non-degenerate segments.
void validate_dfn(const DFN& dfn, double tau_rel = kPlaneTolerance);

// One shared 1D sampling of an intersection line (world coordinates,
// ordered from p1 to p2, endpoints included).
struct SharedLine {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::vector<Point3> nodes;
  std::vector<std::int64_t> keys;  // network-wide node ids
  std::vector<bool> fixed;         // endpoints and junctions
};

struct FractureSetup {
  PlaneFrame frame;
  FracturePSLG pslg;                  // local coordinates
  std::vector<std::uint32_t> lines;   // incident intersection indices
  std::vector<FixedNode2> fixed;      // shared nodes, local coordinates
};

struct Decomposition {
  std::vector<FractureSetup> fractures;
  std::vector<SharedLine> lines;
  // World position and radius of every shared node, indexed by key.
  std::vector<Point3> key_points;
  std::vector<double> key_rho;
  std::size_t junctions = 0;
  std::size_t line_conflicts_removed = 0;
};

// Splits the network into per-fracture PSLGs. Every intersection is sampled
// once at rho = h/2 (seeded by hash(seed, i, j)) and the same nodes are
// handed to both fractures. Junctions between intersections on a common
// fracture become fixed nodes of every line through them.
Decomposition decompose(const DFN& dfn, const RadiusParams& params,
                        std::uint64_t seed);

// Per-fracture local sample back in world coordinates; shared nodes use
// their canonical world position so both fractures agree bit for bit.
Sample3 to_world(const Sample2& local, const FractureSetup& setup,
                 const Decomposition& dec);

struct MergedSample {
  Sample3 sample;
  std::vector<std::int32_t> fracture;  // owning fracture (lowest index)
  std::vector<std::uint32_t> source;   // index within the owner's sample
  std::size_t duplicates = 0;          // shared nodes merged by key
  std::size_t conflicts_removed = 0;
  std::size_t conflicts_unresolved = 0;  // intersection-intersection pairs
};

// World-space union in fracture order. Shared nodes are deduplicated by
// key; remaining pairs closer than min(rho) across fractures lose the node
// of the higher-index fracture, except that intersection nodes are never
// deleted.
MergedSample merge_samples(std::span<const Sample3> per_fracture);

// Sub-segments of every intersection incident to fracture `f`, as index
// pairs into that fracture's sample (looked up by key). Pairs whose nodes
// are missing from the sample are skipped and counted.
std::vector<Edge> fracture_subsegments(const Sample2& local,
                                       const Decomposition& dec, std::size_t f,
                                       std::size_t* missing = nullptr);

// Legacy VTK unstructured grid; CELL_DATA max_edge_length.
struct VtkMesh {
  std::vector<Point3> points;
  std::vector<std::vector<std::uint32_t>> cells;
  std::vector<int> types;
  std::vector<double> max_edge_length;
};

void export_vtk(const std::filesystem::path& path, std::span<const Point3> points,
                std::span<const Triangle> triangles);
void export_vtk(const std::filesystem::path& path, std::span<const Point3> points,
                std::span<const Tetrahedron> tets);
std::string vtk_string(std::span<const Point3> points,
                       const std::vector<std::vector<std::uint32_t>>& cells);
VtkMesh parse_vtk(const std::string& text);
VtkMesh load_vtk(const std::filesystem::path& path);

// CSV x,y,z,rho,tag.
void export_points_csv(const std::filesystem::path& path, const Sample3& sample);
std::string points_csv(const Sample3& sample);
Sample3 parse_points_csv(const std::string& text);  // throws ParseError

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& data);

}  // namespace mpsmesh
