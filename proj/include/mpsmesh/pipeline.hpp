#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mpsmesh/delaunay.hpp"
#include "mpsmesh/network.hpp"
#include "mpsmesh/radius_field.hpp"
#include "mpsmesh/sampler.hpp"

namespace mpsmesh {

// mesh2d: fracture meshes only; mesh3d: plus the volume sample and its
// tetrahedralization; full: plus the sliver-removal loop.
enum class Mode { mesh2d, mesh3d, full };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view s);  // throws InvalidParams

inline constexpr std::uint64_t kDefaultSeed = 0x44464E30;  // "DFN0"

struct RunConfig {
  RadiusParams params;
  SamplerOptions sampler;
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
  Mode mode = Mode::full;
  SliverThresholds thresholds;
  int max_sliver_iters = 50;

  void validate() const;
};

struct FractureResult {
  Sample2 sample;                      // final nodes, local coordinates
  std::vector<std::uint32_t> global;   // index of each node in dfn_sample
  std::vector<Triangle> triangles;     // into sample
  std::vector<Edge> subsegments;       // into sample
  SamplerStats stats;
  std::size_t sampled_nodes = 0;       // before merge and conforming
  std::size_t seeds_dropped = 0;
  std::size_t conforming_removed = 0;
  std::size_t protected_hits = 0;
  std::size_t missing_subsegments = 0;
  std::size_t lost_line_nodes = 0;
  std::size_t circumcenters_outside = 0;
  MaximalityProbe probe;
  double seconds = 0.0;
};

struct PipelineResult {
  std::vector<FractureResult> fractures;
  Decomposition decomposition;

  // Union of fracture nodes (world) and the merged surface mesh.
  Sample3 dfn_sample;
  std::vector<Triangle> surface;
  std::size_t merge_duplicates = 0;
  std::size_t merge_conflicts_removed = 0;
  std::size_t merge_conflicts_unresolved = 0;

  // Box-face nodes (tag matrix_boundary) after conflict removal.
  std::size_t face_nodes = 0;
  std::size_t face_conflicts_removed = 0;

  // Volume sample: DFN nodes, face nodes, then volume nodes.
  Sample3 volume_sample;
  Mesh3 volume_mesh;
  SamplerStats volume_stats;
  std::vector<SliverIteration> sliver_log;
  bool sliver_converged = true;
  std::size_t slivers_remaining = 0;

  QualityReport quality2d;
  QualityReport quality3d;
  std::map<std::string, double> seconds;
};

// Runs decomposition, per-fracture sampling (fan-out over cfg.jobs threads),
// merge, conforming 2D meshing, and depending on the mode the volume
// sampling, tetrahedralization and sliver loop. The result does not depend
// on cfg.jobs.
PipelineResult run_pipeline(const DFN& dfn, const RunConfig& cfg);

// Samples the six faces of the box for the volume mesh: the 12 edges are
// shared 1D samplings, faces use the 2D dart thrower with the 3D radius
// field. Faces nodes are tagged matrix_boundary.
Sample3 sample_box_faces(const Box3& box, const RadiusField3D& field,
                         const RunConfig& cfg);

// Timing of the fracture sampling stage alone (all fractures, one thread):
// one warm-up run, then `repeats` timed runs.
struct SamplingBench {
  std::size_t nodes = 0;
  std::uint64_t distance_computations = 0;
  double median_seconds = 0.0;
  std::vector<double> seconds;
};

SamplingBench bench_fracture_sampling(const DFN& dfn, const RadiusParams& params,
                                      const SamplerOptions& opts, std::uint64_t seed,
                                      int repeats = 3);

// Index-parallel loop with results independent of the thread count.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace mpsmesh
