// mpsmesh: Poisson-disk meshing of fracture networks.
//
//   mpsmesh mesh     --input net.json --out dir [--mode full] [...]
//   mpsmesh bench    --input net.json --out dir --hs 0.04,0.02 --ks 5,10,20
//   mpsmesh quality  --mesh dir/volume_mesh.vtk [--out dir]
//   mpsmesh validate --input net.json [--nodes nodes.csv]
//
// Exit codes: 0 success, 1 validation, 2 I/O or parse, 3 sliver loop did
// not converge.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mpsmesh/error.hpp"
#include "mpsmesh/network.hpp"
#include "mpsmesh/pipeline.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mpsmesh;

namespace {

constexpr const char* kVersion = "0.1.0";

// Values given on the command line; anything unset falls back to the config
// file and then to the built-in default.
struct Flags {
  std::string config;
  std::optional<std::string> input, out, mode, annulus_law;
  std::optional<double> h, a, f, r, rho_max, min_dihedral, max_dihedral, min_aspect;
  std::optional<int> k, rounds, jobs, max_sliver_iters, repeats;
  std::optional<std::string> seed;
  std::optional<std::string> hs, ks;
  bool baseline = false;
};

std::map<std::string, std::string> read_config(const std::string& path) {
  std::map<std::string, std::string> kv;
  if (path.empty()) return kv;
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    // A manifest from an earlier run: replay its config block.
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
    if (!doc.contains("config") || !doc["config"].is_object())
      throw Error(ErrorKind::ParseError, path + ": no config block");
    for (const auto& [key, v] : doc["config"].items())
      kv[key] = v.is_string() ? v.get<std::string>() : v.dump();
    return kv;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::ParseError,
                  path + ":" + std::to_string(lineno) + ": expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t n = 0;
    const double d = std::stod(v, &n);
    if (n == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::InvalidParams, "config " + key + ": not a number: " + v);
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t n = 0;
    const long i = std::stol(v, &n);
    if (n == v.size()) return static_cast<int>(i);
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::InvalidParams, "config " + key + ": not an integer: " + v);
}

std::uint64_t to_seed(const std::string& v) {
  try {
    std::size_t n = 0;
    const auto s = std::stoull(v, &n, 0);
    if (n == v.size()) return s;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::InvalidParams, "seed: not an unsigned integer: " + v);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(ErrorKind::InvalidParams, "config " + key + ": not a boolean: " + v);
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if constexpr (std::is_same_v<T, int>)
      out.push_back(to_int(key, item));
    else
      out.push_back(to_double(key, item));
  }
  if (out.empty()) throw Error(ErrorKind::InvalidParams, key + ": empty list");
  return out;
}

struct Settings {
  RunConfig run;
  std::string input, out;
  std::string seed_source = "default";
  std::vector<double> hs;
  std::vector<int> ks{5, 10, 20, 40, 80, 160};
  int repeats = 3;
};

Settings resolve(const Flags& fl) {
  const auto kv = read_config(fl.config);
  static const std::set<std::string> known{
      "input", "out", "h", "a", "f", "r", "rho_max", "k", "rounds", "seed", "jobs", "mode",
      "min_dihedral", "max_dihedral", "min_aspect", "max_sliver_iters", "baseline",
      "annulus_law", "hs", "ks", "repeats"};
  for (const auto& [key, v] : kv)
    if (!known.count(key)) throw Error(ErrorKind::InvalidParams, "unknown config key '" + key + "'");
  const auto get = [&](const char* key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  Settings s;
  auto& run = s.run;
  const auto num = [&](const char* key, const std::optional<double>& flag, double& dst) {
    if (flag) dst = *flag;
    else if (auto v = get(key)) dst = to_double(key, *v);
  };
  const auto integer = [&](const char* key, const std::optional<int>& flag, int& dst) {
    if (flag) dst = *flag;
    else if (auto v = get(key)) dst = to_int(key, *v);
  };
  num("h", fl.h, run.params.h);
  num("a", fl.a, run.params.a);
  num("f", fl.f, run.params.f);
  num("r", fl.r, run.params.r);
  num("rho_max", fl.rho_max, run.params.rho_max);
  num("min_dihedral", fl.min_dihedral, run.thresholds.min_dihedral);
  num("max_dihedral", fl.max_dihedral, run.thresholds.max_dihedral);
  num("min_aspect", fl.min_aspect, run.thresholds.min_aspect);
  integer("k", fl.k, run.sampler.k);
  integer("rounds", fl.rounds, run.sampler.resample_rounds);
  integer("jobs", fl.jobs, run.jobs);
  integer("max_sliver_iters", fl.max_sliver_iters, run.max_sliver_iters);
  integer("repeats", fl.repeats, s.repeats);
  if (fl.baseline) run.sampler.baseline = true;
  else if (auto v = get("baseline")) run.sampler.baseline = to_bool("baseline", *v);

  if (auto m = fl.mode ? fl.mode : get("mode")) run.mode = mode_from_string(*m);
  if (auto l = fl.annulus_law ? fl.annulus_law : get("annulus_law")) {
    if (*l == "area") run.sampler.annulus_law = AnnulusLaw::area;
    else if (*l == "radius") run.sampler.annulus_law = AnnulusLaw::radius;
    else throw Error(ErrorKind::InvalidParams, "annulus_law must be area or radius");
  }

  if (fl.seed) {
    run.seed = to_seed(*fl.seed);
    s.seed_source = "flag";
  } else if (auto v = get("seed")) {
    run.seed = to_seed(*v);
    s.seed_source = "config";
  } else if (const char* env = std::getenv("MPSMESH_SEED"); env && *env) {
    run.seed = to_seed(env);
    s.seed_source = "env";
  }

  if (auto v = fl.input ? fl.input : get("input")) s.input = *v;
  if (auto v = fl.out ? fl.out : get("out")) s.out = *v;
  if (auto v = fl.hs ? fl.hs : get("hs")) s.hs = parse_list<double>("hs", *v);
  if (auto v = fl.ks ? fl.ks : get("ks")) s.ks = parse_list<int>("ks", *v);
  if (s.repeats < 1) throw Error(ErrorKind::InvalidParams, "repeats must be >= 1");
  run.validate();
  return s;
}

std::string seed_hex(std::uint64_t seed) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(seed));
  return buf;
}

// Flat config echo; feeding it back through --config reproduces the run.
json config_echo(const Settings& s) {
  const auto& r = s.run;
  json c;
  c["input"] = s.input;
  c["out"] = s.out;
  c["mode"] = std::string(to_string(r.mode));
  c["seed"] = seed_hex(r.seed);
  c["h"] = r.params.h;
  c["a"] = r.params.a;
  c["f"] = r.params.f;
  c["r"] = r.params.r;
  c["rho_max"] = r.params.rho_max;
  c["k"] = r.sampler.k;
  c["rounds"] = r.sampler.resample_rounds;
  c["baseline"] = r.sampler.baseline;
  c["annulus_law"] = r.sampler.annulus_law == AnnulusLaw::area ? "area" : "radius";
  c["jobs"] = r.jobs;
  c["min_dihedral"] = r.thresholds.min_dihedral;
  c["max_dihedral"] = r.thresholds.max_dihedral;
  c["min_aspect"] = r.thresholds.min_aspect;
  c["max_sliver_iters"] = r.max_sliver_iters;
  return c;
}

json stats_json(const SamplerStats& st) {
  return {{"candidates", st.candidates},
          {"fast_rejects", st.fast_rejects},
          {"distance_rejects", st.distance_rejects},
          {"outside", st.outside},
          {"standoff", st.standoff},
          {"accepts", st.accepts},
          {"distance_computations", st.distance_computations},
          {"added_per_round", st.added_per_round}};
}

json summary_json(const QualityReport& q) {
  return json::parse(quality_json(q));
}

void write_quality(const fs::path& dir, const std::string& stem, const QualityReport& q) {
  write_file(dir / (stem + ".csv"), quality_csv(q));
  write_file(dir / (stem + ".json"), quality_json(q) + "\n");
}

void require_input(const Settings& s) {
  if (s.input.empty()) throw Error(ErrorKind::InvalidParams, "--input is required");
}

void make_out_dir(const std::string& out) {
  if (out.empty()) throw Error(ErrorKind::InvalidParams, "--out is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + out + ": " + ec.message());
}

int cmd_mesh(const Flags& fl) {
  const Settings s = resolve(fl);
  require_input(s);
  make_out_dir(s.out);
  const DFN dfn = load_dfn(s.input);
  const PipelineResult res = run_pipeline(dfn, s.run);
  const fs::path out = s.out;

  json artifacts = json::array();
  const auto emit = [&](const std::string& name) { artifacts.push_back(name); };

  json fractures = json::array();
  for (std::size_t f = 0; f < res.fractures.size(); ++f) {
    const auto& fr = res.fractures[f];
    std::vector<Point3> pts;
    for (auto g : fr.global) pts.push_back(res.dfn_sample.points[g]);
    char name[64];
    std::snprintf(name, sizeof name, "fracture_%03zu.vtk", f);
    export_vtk(out / name, pts, fr.triangles);
    emit(name);
    fractures.push_back({{"nodes", fr.sample.size()},
                         {"sampled_nodes", fr.sampled_nodes},
                         {"triangles", fr.triangles.size()},
                         {"subsegments", fr.subsegments.size()},
                         {"missing_subsegments", fr.missing_subsegments},
                         {"lost_line_nodes", fr.lost_line_nodes},
                         {"seeds_dropped", fr.seeds_dropped},
                         {"conforming_removed", fr.conforming_removed},
                         {"protected_hits", fr.protected_hits},
                         {"circumcenters_outside", fr.circumcenters_outside},
                         {"epsilon", fr.probe.epsilon},
                         {"probes", fr.probe.probes},
                         {"rng_seed", seed_hex(hash_seed({s.run.seed, 0xF4ACu, f}))},
                         {"sampler", stats_json(fr.stats)}});
  }
  export_vtk(out / "dfn_surface.vtk", res.dfn_sample.points, res.surface);
  emit("dfn_surface.vtk");
  export_points_csv(out / "dfn_nodes.csv", res.dfn_sample);
  emit("dfn_nodes.csv");
  write_quality(out, "quality2d", res.quality2d);
  emit("quality2d.csv");
  emit("quality2d.json");

  json m;
  m["mpsmesh_version"] = kVersion;
  m["command"] = "mesh";
  m["config"] = config_echo(s);
  m["seed"] = {{"value", seed_hex(s.run.seed)}, {"source", s.seed_source}};
  m["network"] = {{"fractures", dfn.fractures.size()},
                  {"intersections", dfn.intersections.size()},
                  {"junctions", res.decomposition.junctions},
                  {"line_conflicts_removed", res.decomposition.line_conflicts_removed}};
  m["fractures"] = fractures;
  m["dfn"] = {{"nodes", res.dfn_sample.size()},
              {"triangles", res.surface.size()},
              {"merge_duplicates", res.merge_duplicates},
              {"merge_conflicts_removed", res.merge_conflicts_removed},
              {"merge_conflicts_unresolved", res.merge_conflicts_unresolved},
              {"quality", summary_json(res.quality2d)}};

  int code = 0;
  if (s.run.mode != Mode::mesh2d) {
    export_vtk(out / "volume_mesh.vtk", res.volume_mesh.points,
               std::span<const Tetrahedron>(res.volume_mesh.cells));
    emit("volume_mesh.vtk");
    export_points_csv(out / "volume_nodes.csv", res.volume_sample);
    emit("volume_nodes.csv");
    write_quality(out, "quality3d", res.quality3d);
    emit("quality3d.csv");
    emit("quality3d.json");
    json log = json::array();
    for (std::size_t i = 0; i < res.sliver_log.size(); ++i) {
      const auto& it = res.sliver_log[i];
      log.push_back({{"iteration", i},
                     {"slivers", it.slivers},
                     {"removed", it.removed},
                     {"unremovable", it.unremovable},
                     {"nodes", it.nodes},
                     {"cells", it.cells}});
    }
    m["volume"] = {{"nodes", res.volume_sample.size()},
                   {"tetrahedra", res.volume_mesh.cells.size()},
                   {"face_nodes", res.face_nodes},
                   {"face_conflicts_removed", res.face_conflicts_removed},
                   {"rng_seed", seed_hex(hash_seed({s.run.seed, 0x3Du}))},
                   {"sampler", stats_json(res.volume_stats)},
                   {"slivers_remaining", res.slivers_remaining},
                   {"sliver_loop_converged", res.sliver_converged},
                   {"iterations", log},
                   {"quality", summary_json(res.quality3d)}};
    if (s.run.mode == Mode::full && !res.sliver_converged) {
      std::cerr << "mpsmesh: " << to_string(ErrorKind::MaxItersExceeded) << ": "
                << res.slivers_remaining << " slivers left after " << res.sliver_log.size()
                << " iterations\n";
      code = 3;
    }
  }
  m["artifacts"] = artifacts;
  json timings;
  for (const auto& [stage, sec] : res.seconds) timings[stage] = sec;
  m["timings"] = timings;
  write_file(out / "manifest.json", m.dump(2) + "\n");

  std::cout << "fractures " << dfn.fractures.size() << ", dfn nodes " << res.dfn_sample.size()
            << ", triangles " << res.surface.size();
  if (s.run.mode != Mode::mesh2d)
    std::cout << ", volume nodes " << res.volume_sample.size() << ", tetrahedra "
              << res.volume_mesh.cells.size();
  std::cout << "\n";
  return code;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", v[i]);
    if (i) s += ';';
    s += buf;
  }
  return s;
}

int cmd_bench(const Flags& fl) {
  Settings s = resolve(fl);
  require_input(s);
  make_out_dir(s.out);
  const DFN dfn = load_dfn(s.input);
  if (s.hs.empty()) {
    const double h = s.run.params.h;
    s.hs = {8 * h, 4 * h, 2 * h, h};
  }
  const fs::path out = s.out;
  const auto bench = [&](double h, int k, int rounds, bool baseline) {
    RadiusParams p = s.run.params;
    p.h = h;
    SamplerOptions o = s.run.sampler;
    o.k = k;
    o.resample_rounds = rounds;
    o.baseline = baseline;
    return bench_fracture_sampling(dfn, p, o, s.run.seed, s.repeats);
  };

  std::string nodes_csv =
      "h,k,rounds,nodes,seconds,baseline_nodes,baseline_seconds,raw_seconds,raw_baseline_seconds\n";
  char buf[256];
  for (double h : s.hs) {
    const auto a = bench(h, s.run.sampler.k, s.run.sampler.resample_rounds, false);
    const auto b = bench(h, s.run.sampler.k, s.run.sampler.resample_rounds, true);
    std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%zu,%.6f,%zu,%.6f,", h, s.run.sampler.k,
                  s.run.sampler.resample_rounds, a.nodes, a.median_seconds, b.nodes,
                  b.median_seconds);
    nodes_csv += buf + join(a.seconds) + "," + join(b.seconds) + "\n";
    std::cerr << "h=" << h << " nodes=" << a.nodes << " t=" << a.median_seconds << "s\n";
  }
  write_file(out / "nodes_vs_time.csv", nodes_csv);

  const double h = s.run.params.h;
  std::string k_time =
      "h,k,rounds,nodes,seconds,baseline_nodes,baseline_seconds,speedup,raw_seconds,raw_baseline_seconds\n";
  for (int k : s.ks) {
    const auto a = bench(h, k, s.run.sampler.resample_rounds, false);
    const auto b = bench(h, k, s.run.sampler.resample_rounds, true);
    std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%zu,%.6f,%zu,%.6f,%.4f,", h, k,
                  s.run.sampler.resample_rounds, a.nodes, a.median_seconds, b.nodes,
                  b.median_seconds, b.median_seconds / a.median_seconds);
    k_time += buf + join(a.seconds) + "," + join(b.seconds) + "\n";
    std::cerr << "k=" << k << " t=" << a.median_seconds << "s baseline=" << b.median_seconds
              << "s\n";
  }
  write_file(out / "k_vs_time.csv", k_time);

  // Node counts after each resampling round; a run with r rounds is a
  // prefix of the run with more rounds.
  constexpr int kMaxRounds = 3;
  std::string k_nodes = "h,k,round,nodes,baseline_nodes\n";
  for (int k : s.ks) {
    RunConfig cfg = s.run;
    cfg.sampler.k = k;
    cfg.sampler.resample_rounds = kMaxRounds;
    std::vector<std::uint64_t> total(kMaxRounds + 1, 0), total_b(kMaxRounds + 1, 0);
    for (int variant = 0; variant < 2; ++variant) {
      cfg.sampler.baseline = variant == 1;
      const Decomposition dec = decompose(dfn, cfg.params, cfg.seed);
      for (std::size_t f = 0; f < dec.fractures.size(); ++f) {
        const auto& setup = dec.fractures[f];
        const RadiusField2D field(setup.pslg.intersections, cfg.params);
        const auto r = sample_fracture_2d(setup.pslg, field, setup.fixed, cfg.sampler,
                                          hash_seed({cfg.seed, 0xF4ACu, f}));
        std::uint64_t seeds = r.sample.size();
        for (auto a : r.stats.added_per_round) seeds -= a;
        std::uint64_t acc = seeds;
        for (int round = 0; round <= kMaxRounds; ++round) {
          acc += r.stats.added_per_round[round];
          (variant ? total_b : total)[round] += acc;
        }
      }
    }
    for (int round = 0; round <= kMaxRounds; ++round) {
      std::snprintf(buf, sizeof buf, "%.17g,%d,%d,%llu,%llu\n", h, k, round,
                    static_cast<unsigned long long>(total[round]),
                    static_cast<unsigned long long>(total_b[round]));
      k_nodes += buf;
    }
  }
  write_file(out / "k_vs_nodes.csv", k_nodes);

  json m;
  m["mpsmesh_version"] = kVersion;
  m["command"] = "bench";
  json cfg = config_echo(s);
  cfg["hs"] = [&] {
    std::string v;
    for (double x : s.hs) v += (v.empty() ? "" : ",") + json(x).dump();
    return v;
  }();
  cfg["ks"] = [&] {
    std::string v;
    for (int x : s.ks) v += (v.empty() ? "" : ",") + std::to_string(x);
    return v;
  }();
  cfg["repeats"] = s.repeats;
  m["config"] = cfg;
  m["seed"] = {{"value", seed_hex(s.run.seed)}, {"source", s.seed_source}};
  m["artifacts"] = {"nodes_vs_time.csv", "k_vs_time.csv", "k_vs_nodes.csv"};
  write_file(out / "manifest.json", m.dump(2) + "\n");
  return 0;
}

int cmd_quality(const std::string& mesh_path, const std::string& out) {
  const VtkMesh mesh = load_vtk(mesh_path);
  std::vector<Triangle> tris;
  std::vector<Tetrahedron> tets;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& cell = mesh.cells[c];
    if (mesh.types[c] == 5 && cell.size() == 3) tris.push_back({cell[0], cell[1], cell[2]});
    else if (mesh.types[c] == 10 && cell.size() == 4)
      tets.push_back({cell[0], cell[1], cell[2], cell[3]});
    else
      throw Error(ErrorKind::ParseError, "unsupported cell type " + std::to_string(mesh.types[c]));
  }
  if (!tris.empty() && !tets.empty())
    throw Error(ErrorKind::ParseError, "mixed triangle and tetrahedron cells");
  const QualityReport q =
      tets.empty() ? quality_report(std::span<const Point3>(mesh.points), tris)
                   : quality_report(std::span<const Point3>(mesh.points),
                                    std::span<const Tetrahedron>(tets));
  if (out.empty()) {
    std::cout << quality_json(q) << "\n";
    return 0;
  }
  make_out_dir(out);
  const std::string stem = fs::path(mesh_path).stem().string() + "_quality";
  write_quality(out, stem, q);
  return 0;
}

int cmd_validate(const Flags& fl, const std::string& nodes_path) {
  std::optional<DFN> dfn;
  if (fl.input) {
    dfn = load_dfn(*fl.input);
    std::cout << *fl.input << ": " << dfn->fractures.size() << " fractures, "
              << dfn->intersections.size() << " intersections, ok\n";
  }
  if (nodes_path.empty()) return 0;

  const Sample3 s = parse_points_csv(read_file(nodes_path));
  double max_rho = 0.0;
  for (double r : s.rho) max_rho = std::fmax(max_rho, r);
  // Sort-and-sweep along x keeps the empty-disk check near linear.
  std::vector<std::uint32_t> order(s.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return s.points[a][0] < s.points[b][0]; });
  std::size_t violations = 0;
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const auto i = order[a], j = order[b];
      if (s.points[j][0] - s.points[i][0] >= max_rho) break;
      const double r = pair_radius(s.rho[i], s.rho[j]);
      if (distance2(s.points[i], s.points[j]) < r * r) ++violations;
    }
  std::cout << nodes_path << ": " << s.size() << " nodes, " << violations
            << " empty-disk violations\n";

  std::size_t standoff = 0;
  if (dfn) {
    std::vector<StandoffSurface> surfaces;
    for (const auto& poly : dfn->fractures) surfaces.push_back(make_standoff_surface(poly));
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s.tags[i] == Tag::volume &&
          standoff_distance(s.points[i], dfn->domain, surfaces) < 0.5 * s.rho[i])
        ++standoff;
    std::cout << nodes_path << ": " << standoff << " standoff violations\n";
  }
  return violations == 0 && standoff == 0 ? 0 : 1;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::IoError: return 2;
    case ErrorKind::MaxItersExceeded: return 3;
    default: return 1;
  }
}

void add_run_flags(CLI::App* cmd, Flags& fl) {
  cmd->add_option("--config", fl.config, "flat key = value file (or an earlier manifest.json)");
  cmd->add_option("--input", fl.input, "DFN file (JSON or text)");
  cmd->add_option("--out", fl.out, "output directory");
  cmd->add_option("--h", fl.h, "minimal spacing parameter H");
  cmd->add_option("--a", fl.a, "radius slope A, 0 < A < 1");
  cmd->add_option("--f", fl.f, "flat band width factor F");
  cmd->add_option("--r", fl.r, "2D radius cap factor R");
  cmd->add_option("--rho-max", fl.rho_max, "3D radius cap");
  cmd->add_option("--k", fl.k, "candidates drawn per batch");
  cmd->add_option("--rounds", fl.rounds, "resampling rounds");
  cmd->add_option("--seed", fl.seed, "global seed (decimal or 0x hex)");
  cmd->add_option("--jobs", fl.jobs, "worker threads for the per-fracture stages");
  cmd->add_option("--mode", fl.mode, "mesh2d, mesh3d or full");
  cmd->add_option("--annulus-law", fl.annulus_law, "candidate distribution: area or radius");
  cmd->add_option("--min-dihedral", fl.min_dihedral, "sliver threshold, degrees");
  cmd->add_option("--max-dihedral", fl.max_dihedral, "sliver threshold, degrees");
  cmd->add_option("--min-aspect", fl.min_aspect, "sliver threshold on aspect ratio");
  cmd->add_option("--max-sliver-iters", fl.max_sliver_iters, "sliver loop iteration limit");
  cmd->add_flag("--baseline", fl.baseline, "disable the occupied-cell fast reject");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson-disk meshing of discrete fracture networks"};
  app.set_help_flag("--help", "print this help and exit");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Flags mesh_flags, bench_flags, validate_flags;
  std::string quality_mesh, quality_out, validate_nodes;

  auto* mesh = app.add_subcommand("mesh", "sample and mesh a fracture network");
  add_run_flags(mesh, mesh_flags);

  auto* bench = app.add_subcommand("bench", "time the fracture sampler over H and k sweeps");
  add_run_flags(bench, bench_flags);
  bench->add_option("--hs", bench_flags.hs, "comma-separated H values");
  bench->add_option("--ks", bench_flags.ks, "comma-separated k values");
  bench->add_option("--repeats", bench_flags.repeats, "timed repetitions (median reported)");

  auto* quality = app.add_subcommand("quality", "recompute quality metrics of a VTK mesh");
  quality->add_option("--mesh", quality_mesh, "legacy VTK file")->required();
  quality->add_option("--out", quality_out, "output directory (default: JSON to stdout)");

  auto* validate = app.add_subcommand("validate", "check a DFN file and/or a node set");
  validate->add_option("--input", validate_flags.input, "DFN file");
  validate->add_option("--nodes", validate_nodes, "node CSV (x,y,z,rho,tag)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*mesh) return cmd_mesh(mesh_flags);
    if (*bench) return cmd_bench(bench_flags);
    if (*quality) return cmd_quality(quality_mesh, quality_out);
    if (*validate) return cmd_validate(validate_flags, validate_nodes);
  } catch (const Error& e) {
    std::cerr << "mpsmesh: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "mpsmesh: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
